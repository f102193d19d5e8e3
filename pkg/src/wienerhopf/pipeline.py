"""End-to-end analysis: kernel spec in, versioned report document out."""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields
from enum import Enum
from pathlib import Path
from typing import Optional

import numpy as np
import yaml

from . import __version__
from .classify import (
    REPORT_SCHEMA_VERSION,
    CaseLabel,
    classify,
    solvability_report,
)
from .errors import (
    AllModesDropped,
    IndexMismatch,
    SchemaError,
    UnderResolved,
    UnresolvedOscillation,
    VanishingSymbol,
)
from .io import spec_to_mapping
from .kernel import (
    ExpPolyHalf,
    KernelSpec,
    Level,
    Subject,
    Term,
    K1_from_K,
    build_K1_from_K0,
    build_K_from_K1,
    moment,
    moments_of,
    tilde_of,
    verify_conditions,
)
from .solver import TSVD, Tikhonov, discretize, manufacture_rhs, solve_regularized
from .spaces import GridFunction
from .symbol import (
    LambdaGrid,
    check_arg_halfplane,
    check_nonvanishing,
    deficit_at,
    eval_a,
    eval_b,
    eval_c1,
    eval_d,
    eval_regular_factor,
    regular_factor_C,
    cayley_factor,
    rho_plus_values,
    winding_index,
)

COMMANDS = ("analyze", "classify", "solve", "verify")


class ExitCode(int, Enum):
    OK = 0
    FAILURE = 1
    USAGE = 2
    UNCLASSIFIED = 3
    VANISHING_SYMBOL = 4
    INDEX_MISMATCH = 5
    UNDER_RESOLVED = 6


@dataclass(frozen=True)
class AnalysisConfig:
    grid: int = 2048
    map_parameter: float = 1.0
    symbol_method: str = "auto"
    symbol_tol: float = 1e-8
    tol_nonvanishing: float = 1e-9
    tol_zero: float = 1e-9
    sign_slack: float = 1e-10
    tol_positive: float = 1e-10
    t_check: float = 40.0
    n_check: int = 512
    check_refinement: bool = True
    solver_T: float = 40.0
    solver_n: int = 1024
    quadrature: str = "midpoint"
    regularization: str = "tsvd"
    reg_param: float = 1e-8
    tsvd_rank: Optional[int] = None
    null_ratio: float = 1e-8
    oracle_tol: float = 1e-6
    out_dir: Optional[str] = None
    plot_csv: bool = False

    def __post_init__(self):
        g = self.grid
        if int(g) != g or g < 16 or g & (g - 1):
            raise SchemaError("grid size must be a power of two >= 16", field="grid")
        for name in ("map_parameter", "symbol_tol", "tol_nonvanishing", "tol_zero", "sign_slack",
                     "tol_positive", "t_check", "solver_T", "reg_param", "null_ratio", "oracle_tol"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise SchemaError("must be a positive number", field=name)
        if self.solver_n < 16 or self.n_check < 16:
            raise SchemaError("sample counts must be at least 16", field="solver_n")
        if self.symbol_method not in ("auto", "closed", "quad"):
            raise SchemaError("one of auto, closed, quad", field="symbol_method")
        if self.quadrature not in ("midpoint", "trapezoid", "simpson"):
            raise SchemaError("one of midpoint, trapezoid, simpson", field="quadrature")
        if self.regularization not in ("tsvd", "tikhonov"):
            raise SchemaError("one of tsvd, tikhonov", field="regularization")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_mapping(cls, data: dict) -> "AnalysisConfig":
        if not isinstance(data, dict):
            raise SchemaError("config must be a mapping")
        known = {f.name for f in fields(cls)}
        extra = set(data) - known
        if extra:
            raise SchemaError(f"unknown config keys {sorted(extra)}", field=sorted(extra)[0])
        return cls(**data)

    @classmethod
    def load(cls, path) -> "AnalysisConfig":
        return cls.from_mapping(yaml.safe_load(Path(path).read_text()) or {})

    def regularizer(self):
        if self.regularization == "tikhonov":
            return Tikhonov(self.reg_param)
        return TSVD(self.reg_param, self.tsvd_rank)


@dataclass
class ReportDocument:
    body: dict
    exit_code: ExitCode = ExitCode.OK
    side_files: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(self.body, sort_keys=True, indent=2, ensure_ascii=False) + "\n"

    def write(self, out_dir) -> list[Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        written = [out / "report.json"]
        written[0].write_text(self.to_json())
        for name, text in sorted(self.side_files.items()):
            p = out / name
            p.write_text(text)
            written.append(p)
        return written


# ---------------------------------------------------------------------------
# serialization helpers


def _num(z):
    """JSON-safe number: floats stay floats, complex becomes ``{re, im}``."""
    if z is None:
        return None
    if isinstance(z, (tuple, list)):
        return [_num(x) for x in z]
    z = complex(z)
    if z.imag == 0:
        return _float(z.real)
    return {"re": _float(z.real), "im": _float(z.imag)}


def _float(x):
    x = float(x)
    if math.isfinite(x):
        return x
    return "inf" if x > 0 else "-inf" if x < 0 else "nan"


def _verdict(v) -> dict:
    return {
        "condition": v.condition.value,
        "holds": bool(v.holds),
        "margin": _float(v.margin),
        "witness": None if v.witness is None else _float(v.witness),
        "value": _num(v.value),
    }


def _moments(ms) -> dict:
    return {
        "subject": ms.subject.value,
        "nu0": _num(ms.nu0),
        "nu1": _num(ms.nu1),
        "nu2": _num(ms.nu2),
        "abs_finite": list(ms.abs_finite),
        "errors": [_float(e) for e in ms.errors],
    }


def _winding(w) -> dict:
    return {"index": w.index, "raw_phase_turns": w.raw_phase_turns, "max_phase_step": w.max_phase_step}


# ---------------------------------------------------------------------------
# stages


def kernel_levels(spec: KernelSpec) -> tuple[KernelSpec, KernelSpec, Optional[KernelSpec]]:
    """``(K, K1, K0)`` derived from a spec at any level; K0 only when given."""
    if spec.level is Level.K0:
        k1 = build_K1_from_K0(spec)
        return build_K_from_K1(k1), k1, spec
    if spec.level is Level.K1:
        return build_K_from_K1(spec), spec, None
    return spec, K1_from_K(spec), None



class _Stop(Exception):
    def __init__(self, code: ExitCode, message: str):
        super().__init__(message)
        self.code = code


@dataclass
class _State:
    spec: KernelSpec
    K: KernelSpec
    K1: KernelSpec
    K0: Optional[KernelSpec]
    cfg: AnalysisConfig
    grid: LambdaGrid
    k1_moments: object = None
    k0_moments: object = None
    verdicts: list = field(default_factory=list)
    b: object = None
    d: object = None
    case: CaseLabel = CaseLabel.UNCLASSIFIED
    regular: object = None
    C: object = None
    nonvanishing: object = None
    winding: object = None
    printed: object = None


def _symbols_on(st: _State, grid: LambdaGrid):
    cfg = st.cfg
    b = eval_b(st.K1, st.k1_moments, grid, cfg.symbol_method, cfg.symbol_tol)
    d = None
    if st.K0 is not None:
        d = eval_d(st.K0, st.k0_moments, grid, cfg.symbol_method, cfg.symbol_tol)
    return b, d


def _regular_on(st: _State, b, d):
    if st.case is CaseLabel.ALPHA_BETA:
        return eval_regular_factor(st.case, d, st.k0_moments, st.cfg.tol_zero)
    return eval_regular_factor(st.case, b, st.k1_moments, st.cfg.tol_zero)


def _identity_error(st: _State) -> float:
    """``max |a - rho_plus C| / max |a|`` with ``a = (i/lam) b``, an independent route to C."""
    a = eval_a(st.b, st.k1_moments).values
    target = rho_plus_values(st.case, st.grid.interior) * st.C.values
    ref = float(np.max(np.abs(a))) or 1.0
    return float(np.max(np.abs(a - target))) / ref


def _method_name(spec: KernelSpec, method: str) -> str:
    if method == "auto":
        return "closed" if spec.is_closed_form else "quad"
    return method


def _analyze(st: _State, body: dict):
    cfg = st.cfg
    st.k1_moments = moments_of(st.K1, Subject.TILDE_K1)
    moments = {"tildeK1": _moments(st.k1_moments)}
    if st.K0 is not None:
        st.k0_moments = moments_of(st.K0, Subject.K0)
        moments["K0"] = _moments(st.k0_moments)
    moments["computed_with"] = {"method": "closed" if st.spec.is_closed_form else "spline"}
    body["moments"] = moments

    st.verdicts = verify_conditions(st.spec, t_check=cfg.t_check, sign_slack=cfg.sign_slack,
                                    tol_positive=cfg.tol_positive, tol_zero=cfg.tol_zero,
                                    n_check=cfg.n_check)
    body["conditions"] = {
        "verdicts": [_verdict(v) for v in st.verdicts],
        "computed_with": {"t_check": cfg.t_check, "n_check": cfg.n_check, "sign_slack": cfg.sign_slack,
                          "tol_positive": cfg.tol_positive, "tol_zero": cfg.tol_zero},
    }

    try:
        st.b, st.d = _symbols_on(st, st.grid)
    except UnresolvedOscillation as exc:
        raise _Stop(ExitCode.FAILURE, f"symbol evaluation: {exc}")
    symbols = {
        "b": {"zero": _num(st.b.value_at_zero), "infinity": _num(st.b.value_at_infinity),
              "half_plane": _verdict(check_arg_halfplane(st.b))},
        "computed_with": {"grid": cfg.grid, "map_parameter": cfg.map_parameter,
                          "method": _method_name(st.K1, cfg.symbol_method), "tol": cfg.symbol_tol},
    }
    if st.d is not None:
        symbols["d"] = {"zero": _num(st.d.value_at_zero), "infinity": _num(st.d.value_at_infinity),
                        "half_plane": _verdict(check_arg_halfplane(st.d))}
    body["symbols"] = symbols

    k0_data = None if st.K0 is None else ([v for v in st.verdicts], st.k0_moments)
    st.case = classify(st.verdicts, st.k1_moments, k0_data, cfg.tol_zero, cfg.tol_positive)
    body["case"] = st.case.value
    if st.case is CaseLabel.UNCLASSIFIED:
        raise _Stop(ExitCode.UNCLASSIFIED, "kernel satisfies none of the four cases")

    st.regular = _regular_on(st, st.b, st.d)
    st.C = regular_factor_C(st.case, st.regular)
    st.nonvanishing = check_nonvanishing(st.C, cfg.tol_nonvanishing)
    fact = {
        "regular_factor": st.regular.label.value,
        "regular_endpoints": {"zero": _num(st.regular.value_at_zero),
                              "infinity": _num(st.regular.value_at_infinity)},
        "half_plane": _verdict(check_arg_halfplane(st.regular)),
        "nonvanishing": _verdict(st.nonvanishing),
        "rho_plus_identity_error": _identity_error(st),
        "computed_with": {"grid": cfg.grid, "tol_nonvanishing": cfg.tol_nonvanishing,
                          "check_refinement": cfg.check_refinement},
    }
    body["factorization"] = fact
    try:
        if st.case is CaseLabel.ALPHA_BETA:
            base = st.regular
            fact["e_index"] = winding_index(base, cfg.tol_nonvanishing).index
        else:
            base = eval_c1(st.case, st.regular)
            fact["c1_index"] = winding_index(base, cfg.tol_nonvanishing).index
        st.winding = winding_index(st.C, cfg.tol_nonvanishing)
        fact["C_winding"] = _winding(st.winding)
        if st.case in (CaseLabel.CASE_III, CaseLabel.ALPHA_BETA):
            st.printed = winding_index(cayley_factor(st.grid, 1) * base, cfg.tol_nonvanishing)
            fact["printed_bracket_index"] = st.printed.index
        if cfg.check_refinement:
            fine = st.grid.refined()
            fine_C = regular_factor_C(st.case, _regular_on(st, *_symbols_on(st, fine)))
            fine_index = winding_index(fine_C, cfg.tol_nonvanishing).index
            fact["C_index_refined"] = fine_index
            if fine_index != st.winding.index:
                raise UnderResolved(f"index changes from {st.winding.index} to {fine_index} "
                                    "when the grid is doubled")
    except VanishingSymbol as exc:
        raise _Stop(ExitCode.VANISHING_SYMBOL, str(exc))
    except UnderResolved as exc:
        raise _Stop(ExitCode.UNDER_RESOLVED, str(exc))


def _report(st: _State, body: dict):
    try:
        rep = solvability_report(st.case, st.winding, st.nonvanishing, st.printed)
    except VanishingSymbol as exc:
        raise _Stop(ExitCode.VANISHING_SYMBOL, str(exc))
    except IndexMismatch as exc:
        raise _Stop(ExitCode.INDEX_MISMATCH, str(exc))
    body["report"] = rep.to_dict()


MANUFACTURED_SOLUTION = "exp(-t)"


def _resample(rhs: GridFunction, t: np.ndarray) -> np.ndarray:
    src = rhs.t
    if len(src) == len(t) and np.allclose(src, t, rtol=0, atol=1e-12 * max(1.0, t[-1])):
        return rhs.samples
    if t[0] < src[0] - 1e-12 or t[-1] > src[-1] + 1e-12:
        raise SchemaError("right-hand side does not cover the solver grid", field="rhs")
    v = rhs.samples.astype(complex)
    out = np.interp(t, src, v.real) + 1j * np.interp(t, src, v.imag)
    return out.real if np.isrealobj(rhs.samples) else out


def _solve(st: _State, body: dict, side: dict, rhs: Optional[GridFunction], manufactured: bool):
    cfg = st.cfg
    A = discretize(st.K, cfg.solver_T, cfg.solver_n, cfg.quadrature)
    sect = {"computed_with": {"T": cfg.solver_T, "n": cfg.solver_n, "quadrature": cfg.quadrature,
                              "null_ratio": cfg.null_ratio}}
    phi_star = None
    if manufactured:
        phi_closed = ExpPolyHalf([Term(1.0, 0, 1.0)])
        phi_star = A.grid_function(phi_closed(A.t))
        m = manufacture_rhs(A, phi_star, st.K, phi_closed)
        f = m.closed_form if m.closed_form is not None else m.discrete
        sect["manufactured"] = {
            "phi_star": MANUFACTURED_SOLUTION,
            "rhs": "closed_form" if m.closed_form is not None else "discrete",
            "consistency": None if m.closed_form is None else m.consistency,
        }
    else:
        f = A.grid_function(_resample(rhs, A.t))
    try:
        res = solve_regularized(A, f, cfg.regularizer(), cfg.null_ratio)
    except AllModesDropped as exc:
        raise _Stop(ExitCode.FAILURE, str(exc))
    sect.update(res.diagnostics())
    if phi_star is not None:
        sect["manufactured"]["recovery_error"] = (res.solution - phi_star).norm() / phi_star.norm()
    body["solve"] = sect
    side["solution.csv"] = res.to_csv()


def _oracles(st: _State, body: dict) -> bool:
    """Independent-route comparisons; returns whether all of them pass."""
    cfg = st.cfg
    out = {"computed_with": {"oracle_tol": cfg.oracle_tol, "grid": cfg.grid}}
    ok = True
    if st.spec.is_closed_form:
        tk1 = tilde_of(st.K1)
        lam = st.grid.interior
        closed = deficit_at(tk1, lam, "closed")
        quad = deficit_at(tk1, lam, "quad", cfg.symbol_tol * 1e-2)
        denom = np.maximum(np.abs(closed), 1e-300)
        err = float(np.max(np.abs(quad - closed) / denom))
        out["b_closed_vs_quad"] = {"max_rel_error": err, "passes": err <= cfg.oracle_tol}
        ok &= err <= cfg.oracle_tol

        moms = []
        for m in range(3):
            exact = complex(moment(tk1, m).value)
            num = _quad_moment(tk1, m)
            e = abs(num - exact) / max(1.0, abs(exact))
            moms.append(e)
        out["moments_closed_vs_quad"] = {"max_error": max(moms), "passes": max(moms) <= cfg.oracle_tol}
        ok &= max(moms) <= cfg.oracle_tol

        nu0 = complex(st.k1_moments.nu0)
        at_zero = float(abs(deficit_at(tk1, np.array([0.0]), "closed")[0]))
        far = deficit_at(tk1, np.array([-1e10, 1e10]), "closed")
        at_inf = float(np.max(np.abs(far - nu0)))
        tol0 = 1e-8 * max(abs(nu0), 1e-300)
        out["degeneration"] = {"b_at_zero": at_zero, "b_at_infinity_error": at_inf,
                               "passes": at_zero <= tol0 and at_inf <= 1e-8}
        ok &= at_zero <= tol0 and at_inf <= 1e-8
    else:
        # exact-spline panels against adaptive QUADPACK on every 64th node
        tk1 = tilde_of(st.K1)
        lam = st.grid.interior[::64]
        filon = deficit_at(tk1, lam, "quad")
        try:
            qp = deficit_at(tk1, lam, "quadpack", 1e-6)
        except UnresolvedOscillation as exc:
            out["b_spline_vs_quadpack"] = {"error": str(exc), "passes": False}
            ok = False
        else:
            ref = max(abs(complex(st.k1_moments.nu0)), 1e-300)
            err = float(np.max(np.abs(filon - qp))) / ref
            out["b_spline_vs_quadpack"] = {"max_error_over_nu0": err, "nodes": int(lam.size),
                                           "passes": err <= cfg.oracle_tol}
            ok &= err <= cfg.oracle_tol
    if st.C is not None:
        e = _identity_error(st)
        out["rho_plus_identity"] = {"max_rel_error": e, "passes": e <= cfg.oracle_tol}
        ok &= e <= cfg.oracle_tol
    out["passes"] = bool(ok)
    body["oracles"] = out
    return bool(ok)


def _quad_moment(g: KernelSpec, m: int) -> complex:
    from scipy.integrate import quad

    total = 0j
    for half, sign in ((g.pos, 1.0), (g.neg, (-1.0) ** m)):
        for part in (np.real, np.imag):
            val, _ = quad(lambda s: part(half(s)) * s**m, 0, np.inf, epsabs=1e-13, epsrel=1e-12, limit=200)
            total += sign * val * (1 if part is np.real else 1j)
    return total


def _symbol_csvs(st: _State, side: dict):
    for name, s in (("b", st.b), ("d", st.d), ("regular", st.regular), ("C", st.C)):
        if s is not None:
            side[f"symbol_{name}.csv"] = s.to_csv()


def run(command: str, config: AnalysisConfig, spec: KernelSpec, rhs: Optional[GridFunction] = None,
        manufactured: bool = False) -> ReportDocument:
    """Run one command and collect the report.

    Outcomes that are answers rather than crashes (unclassified kernel,
    vanishing symbol, index mismatch, unresolved winding) are recorded
    in the report and in ``exit_code``; the stages after them are skipped.
    """
    if command not in COMMANDS:
        raise SchemaError(f"unknown command {command!r}; expected one of {COMMANDS}", field="command")
    if command == "solve" and rhs is None and not manufactured:
        raise SchemaError("solve needs a right-hand side or the manufactured-solution flag", field="rhs")
    K, K1, K0 = kernel_levels(spec)
    st = _State(spec, K, K1, K0, config, LambdaGrid(config.grid, config.map_parameter))
    body = {
        "schema_version": REPORT_SCHEMA_VERSION,
        "tool_version": __version__,
        "command": command,
        "config": config.to_dict(),
        "kernel": spec_to_mapping(spec),
    }
    side: dict = {}
    code = ExitCode.OK
    try:
        _analyze(st, body)
        if command != "analyze":
            _report(st, body)
    except _Stop as stop:
        code = stop.code
        body["error"] = str(stop)
    if command == "solve":
        try:
            _solve(st, body, side, rhs, manufactured)
        except _Stop as stop:
            code = stop.code if code is ExitCode.OK else code
            body["solve_error"] = str(stop)
    if command == "verify" and st.b is not None:
        if not _oracles(st, body) and code is ExitCode.OK:
            code = ExitCode.FAILURE
    if config.plot_csv and st.b is not None:
        _symbol_csvs(st, side)
    body["exit_code"] = int(code)
    return ReportDocument(body, code, side)
