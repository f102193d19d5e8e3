"""Classify the gamma family K1(t) = exp(-t) (t > 0), gamma exp(t) (t < 0) over a range of gamma.

Prints one row per gamma: moments, case, index and solvability dimensions.
"""
import argparse

import numpy as np

from wienerhopf.kernel import gamma_family
from wienerhopf.pipeline import AnalysisConfig, run


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--start", type=float, default=-4.0)
    p.add_argument("--stop", type=float, default=0.9)
    p.add_argument("--num", type=int, default=12)
    p.add_argument("--grid", type=int, default=1024)
    args = p.parse_args()

    cfg = AnalysisConfig(grid=args.grid, check_refinement=False)
    gammas = np.unique(np.concatenate([np.linspace(args.start, args.stop, args.num), [-3.0, -1.0, 0.0]]))
    print(f"{'gamma':>8} {'nu0':>8} {'nu1':>8}  {'case':<13} {'kappa':>5} {'ker':>4} {'coker':>5}  exit")
    for g in gammas:
        doc = run("classify", cfg, gamma_family(float(g)))
        body = doc.body
        m = body.get("moments", {}).get("tildeK1", {})
        rep = body.get("report", {})
        print(f"{g:8.3f} {m.get('nu0', float('nan')):8.3f} {m.get('nu1', float('nan')):8.3f}  "
              f"{body['case']:<13} {str(rep.get('kappa', '-')):>5} {str(rep.get('dim_ker', '-')):>4} "
              f"{str(rep.get('dim_coker', '-')):>5}  {doc.exit_code.name}")


if __name__ == "__main__":
    main()
