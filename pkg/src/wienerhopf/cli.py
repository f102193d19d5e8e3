"""Command-line entry point: ``wienerhopf {analyze,classify,solve,verify} --spec FILE``.

Kernel spec (YAML or JSON)::

    level: K | K1 | K0            # required
    pos_terms: [{c, k, a}, ...]   # c s^k exp(-a s) for t = s > 0
    neg_terms: [{c, k, a}, ...]   # same for t = -s < 0
    tabulated: {t: [...], v: [...]}   # instead of terms

``k`` is a nonnegative integer and ``a > 0``.  ``c`` and ``v`` accept a real
number, a ``"re+imi"`` string or an ``[re, im]`` pair.  Tabulated ``t`` is
strictly increasing with at least four samples on each side of zero.  Terms
and samples cannot be mixed.  No terms at all gives the zero kernel with a
warning.

The report is ``report.json`` (schema version 1) plus CSV side files.  It goes
to ``--out DIR`` or, without it, to stdout.  Exit codes are listed in
:class:`wienerhopf.pipeline.ExitCode`.  docs/schema.md has the full field list.
"""
from __future__ import annotations

import argparse
import dataclasses
import sys
import warnings
from pathlib import Path

from .errors import SchemaError, WienerHopfError
from .io import load_kernel_spec
from .pipeline import COMMANDS, AnalysisConfig, ExitCode, run
from .spaces import GridFunction


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="wienerhopf",
        description="Classify and solve first-kind Wiener-Hopf equations with degenerate symbols.",
    )
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--spec", required=True, help="kernel spec (YAML or JSON)")
    p.add_argument("--config", help="analysis config (YAML or JSON)")
    p.add_argument("--rhs", help="right-hand side as a two-column CSV (t, value)")
    p.add_argument("--manufactured", action="store_true",
                   help="solve with the right-hand side of the known solution exp(-t)")
    p.add_argument("--out", help="directory for report.json and CSV side files")
    p.add_argument("--grid", type=int, help="symbol grid size (power of two)")
    p.add_argument("--tol-zero", type=float, help="band for treating a moment as zero")
    p.add_argument("--plot-csv", action="store_true", help="also write symbol samples as CSV")
    return p


def make_config(args) -> AnalysisConfig:
    cfg = AnalysisConfig.load(args.config) if args.config else AnalysisConfig()
    overrides = {}
    if args.grid is not None:
        overrides["grid"] = args.grid
    if args.tol_zero is not None:
        overrides["tol_zero"] = args.tol_zero
    if args.plot_csv:
        overrides["plot_csv"] = True
    if args.out is not None:
        overrides["out_dir"] = args.out
    return dataclasses.replace(cfg, **overrides)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = make_config(args)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            spec = load_kernel_spec(args.spec)
        for w in caught:
            print(f"warning: {w.message}", file=sys.stderr)
        rhs = GridFunction.from_csv(Path(args.rhs).read_text()) if args.rhs else None
        doc = run(args.command, cfg, spec, rhs=rhs, manufactured=args.manufactured)
    except (SchemaError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return int(ExitCode.USAGE)
    except WienerHopfError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return int(ExitCode.FAILURE)
    if cfg.out_dir:
        doc.write(cfg.out_dir)
    else:
        sys.stdout.write(doc.to_json())
    if "error" in doc.body:
        print(f"{doc.exit_code.name.lower()}: {doc.body['error']}", file=sys.stderr)
    return int(doc.exit_code)


if __name__ == "__main__":
    sys.exit(main())
