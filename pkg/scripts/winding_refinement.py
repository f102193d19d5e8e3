"""Winding index of the regular factor C under grid refinement.

For each gamma the raw phase count should settle on an integer and stay
there as the lambda grid is doubled.
"""
import argparse

from wienerhopf.classify import CaseLabel
from wienerhopf.kernel import Subject, gamma_family, moments_of
from wienerhopf.symbol import LambdaGrid, eval_b, eval_c1, eval_regular_factor, winding_index

CASES = {0.0: CaseLabel.CASE_I, -0.5: CaseLabel.CASE_I, -3.0: CaseLabel.CASE_II, -1.0: CaseLabel.CASE_III}


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--sizes", type=int, nargs="+", default=[64, 256, 1024, 4096, 16384])
    args = p.parse_args()

    print(f"{'gamma':>6} {'case':<8} {'n':>6} {'index':>5} {'raw turns':>14} {'max step':>10}")
    for gamma, case in CASES.items():
        k1 = gamma_family(gamma)
        ms = moments_of(k1, Subject.TILDE_K1)
        for n in args.sizes:
            grid = LambdaGrid(n)
            reg = eval_regular_factor(case, eval_b(k1, ms, grid), ms)
            target = reg if case is CaseLabel.CASE_III else eval_c1(case, reg)
            w = winding_index(target)
            print(f"{gamma:6.2f} {case.value:<8} {n:6d} {w.index:5d} {w.raw_phase_turns:14.10f} "
                  f"{w.max_phase_step:10.2e}")


if __name__ == "__main__":
    main()
