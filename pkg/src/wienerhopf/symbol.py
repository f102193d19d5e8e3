"""Symbols on the compactified frequency line and their winding indices.

Frequencies are parametrised as ``lam = L * tan(theta)`` with ``theta`` on a
uniform grid of ``n`` nodes around the circle ``[-pi/2, pi/2)``: the node
``theta = -pi/2`` is the common point at infinity, ``theta = 0`` is
``lam = 0`` and the remaining ``n - 2`` nodes are the finite nonzero
interior.  Doubling ``n`` nests the grids.

Values at ``lam = 0`` and ``lam = +-inf`` are never extrapolated; they are
set from the analytic limits (moments of the kernel).
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Optional

import numpy as np

from .classify import CaseLabel
from .errors import CaseMismatch, UnderResolved, VanishingSymbol
from .kernel import (
    ConditionId,
    ConditionVerdict,
    ExpPolyHalf,
    KernelSpec,
    Level,
    MomentSet,
    Subject,
    tilde_of,
)


class SymbolLabel(str, Enum):
    A = "a"
    B = "b"
    C_I = "c_I"
    CTILDE_II = "ctilde_II"
    C_III = "c_III"
    D = "d"
    E = "e"
    C1 = "c1"
    CUSTOM = "custom"


@dataclass(frozen=True)
class LambdaGrid:
    n: int = 2048
    map_parameter: float = 1.0
    includes_zero_limit: bool = True
    includes_infinity: bool = True

    def __post_init__(self):
        if self.n < 4 or self.n % 2:
            raise ValueError("grid size must be an even number >= 4")
        if not self.map_parameter > 0:
            raise ValueError("map parameter must be positive")

    @cached_property
    def theta(self) -> np.ndarray:
        k = np.arange(-(self.n // 2 - 1), self.n // 2)
        k = k[k != 0]
        return k * (math.pi / self.n)

    @cached_property
    def interior(self) -> np.ndarray:
        return self.map_parameter * np.tan(self.theta)

    def refined(self) -> "LambdaGrid":
        return LambdaGrid(2 * self.n, self.map_parameter, self.includes_zero_limit, self.includes_infinity)


@dataclass(frozen=True, eq=False)
class SymbolSamples:
    grid: LambdaGrid
    values: np.ndarray
    value_at_zero: complex
    value_at_infinity: complex
    label: SymbolLabel = SymbolLabel.CUSTOM

    def closed_path(self) -> np.ndarray:
        """Values traversed from ``-inf`` through ``0`` to ``+inf``, closed at infinity."""
        lam = self.grid.interior
        parts = [[self.value_at_infinity], self.values[lam < 0]]
        if self.grid.includes_zero_limit:
            parts.append([self.value_at_zero])
        parts += [self.values[lam > 0], [self.value_at_infinity]]
        return np.concatenate([np.asarray(p, dtype=complex) for p in parts])

    def path_lambdas(self) -> np.ndarray:
        lam = self.grid.interior
        parts = [[-np.inf], lam[lam < 0]]
        if self.grid.includes_zero_limit:
            parts.append([0.0])
        parts += [lam[lam > 0], [np.inf]]
        return np.concatenate(parts)

    def __mul__(self, other):
        if isinstance(other, SymbolSamples):
            if other.grid != self.grid:
                raise ValueError("samples live on different grids")
            return SymbolSamples(self.grid, self.values * other.values,
                                 self.value_at_zero * other.value_at_zero,
                                 self.value_at_infinity * other.value_at_infinity)
        return SymbolSamples(self.grid, self.values * other, self.value_at_zero * other,
                             self.value_at_infinity * other, self.label)

    __rmul__ = __mul__

    def relabel(self, label) -> "SymbolSamples":
        return SymbolSamples(self.grid, self.values, self.value_at_zero, self.value_at_infinity,
                             SymbolLabel(label))

    def to_csv(self) -> str:
        """Rows ``lambda, re, im, arg`` along the closed path, ``arg`` unwrapped."""
        path = self.closed_path()
        arg = np.unwrap(np.angle(path))
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["lambda", "re", "im", "arg"])
        for lam, z, phi in zip(self.path_lambdas(), path, arg):
            w.writerow([repr(float(lam)), repr(float(z.real)), repr(float(z.imag)), repr(float(phi))])
        return buf.getvalue()


@dataclass(frozen=True)
class WindingResult:
    index: int
    raw_phase_turns: float
    max_phase_step: float


# ---------------------------------------------------------------------------
# evaluation


def _resolve_method(spec: KernelSpec, method: str) -> str:
    if method == "auto":
        return "closed" if spec.is_closed_form else "quad"
    if method == "closed" and not spec.is_closed_form:
        raise ValueError("closed-form evaluation needs a closed-form kernel")
    if method == "quadpack":
        return "quad" if spec.is_closed_form else "quadpack"
    if method not in ("closed", "quad"):
        raise ValueError(f"unknown evaluation method {method!r}")
    return method


def _half_transforms(spec, lam, method, tol):
    """(1 - cos) and sin transforms of both half-lines on ``|lam|``."""
    aw = np.abs(lam)
    uniq, inv = np.unique(aw, return_inverse=True)
    Cp, Sp, ep = spec.pos.transforms(uniq, method=method, tol=tol)
    Cn, Sn, en = spec.neg.transforms(uniq, method=method, tol=tol)
    sgn = np.sign(lam)
    return (np.asarray(Cp)[inv], sgn * np.asarray(Sp)[inv],
            np.asarray(Cn)[inv], sgn * np.asarray(Sn)[inv])


def _even_odd_transforms(g, lam, tol):
    """Quadrature path for closed forms on the even and odd parts directly.

    Only ``C`` of ``g(s) + g(-s)`` and ``S`` of ``g(s) - g(-s)`` enter the
    deficit, so this halves the number of oscillatory integrals.
    """
    even = ExpPolyHalf(g.pos.terms + g.neg.terms)
    odd = ExpPolyHalf(g.pos.terms + g.neg.scaled(-1).terms)
    aw = np.abs(lam)
    uniq, inv = np.unique(aw, return_inverse=True)
    C, _, _ = even.transforms(uniq, method="quad", tol=tol, parts=("C",))
    _, S, _ = odd.transforms(uniq, method="quad", tol=tol, parts=("S",))
    return np.asarray(C)[inv], np.sign(lam) * np.asarray(S)[inv]


def deficit_at(g: KernelSpec, lam, method: str = "auto", tol: float = 1e-8) -> np.ndarray:
    """``nu0(g) - int exp(i lam t) g(t) dt`` in the split cosine/sine form.

    The real part is ``int_0^inf (1 - cos lam s)[g(s) + g(-s)] ds`` and the
    imaginary part ``-int_0^inf sin(lam s)[g(s) - g(-s)] ds`` (for real g),
    which stays accurate as ``lam -> 0`` where the symbol vanishes.
    """
    lam = np.asarray(lam, dtype=float)
    method = _resolve_method(g, method)
    if method == "quad" and g.is_closed_form:
        C, S = _even_odd_transforms(g, lam, tol)
        return C - 1j * S
    Cp, Sp, Cn, Sn = _half_transforms(g, lam, method, tol)
    return (Cp + Cn) - 1j * (Sp - Sn)


def fourier_at(spec: KernelSpec, lam, method: str = "auto", tol: float = 1e-8) -> np.ndarray:
    """``int exp(i lam t) spec(t) dt`` at finite ``lam``."""
    lam = np.asarray(lam, dtype=float)
    method = _resolve_method(spec, method)
    Cp, Sp, Cn, Sn = _half_transforms(spec, lam, method, tol)
    nu_p, nu_n = spec.pos.moment(0).value, spec.neg.moment(0).value
    return (nu_p - Cp + 1j * Sp) + (nu_n - Cn - 1j * Sn)


def fourier_transform(spec: KernelSpec, grid: LambdaGrid, method: str = "auto",
                      tol: float = 1e-8) -> SymbolSamples:
    vals = fourier_at(spec, grid.interior, method, tol)
    nu0 = spec.pos.moment(0).value + spec.neg.moment(0).value
    return SymbolSamples(grid, vals, complex(nu0), 0j)


def eval_b(K1: KernelSpec, moments: MomentSet, grid: LambdaGrid, method: str = "auto",
           tol: float = 1e-8) -> SymbolSamples:
    """``b = nu0(tilde K1) - FT(tilde K1)``; vanishes at 0, equals ``nu0`` at infinity."""
    if K1.level is not Level.K1:
        raise ValueError("b is defined from a level-K1 kernel")
    if moments.subject is not Subject.TILDE_K1:
        raise ValueError("b needs the moments of tilde K1")
    vals = deficit_at(tilde_of(K1), grid.interior, method, tol)
    return SymbolSamples(grid, vals, 0j, complex(moments.nu0), SymbolLabel.B)


def eval_d(K0: KernelSpec, moments: MomentSet, grid: LambdaGrid, method: str = "auto",
           tol: float = 1e-8) -> SymbolSamples:
    """``d = nu0(K0) - FT(K0)``."""
    if K0.level is not Level.K0:
        raise ValueError("d is defined from a level-K0 kernel")
    if moments.subject is not Subject.K0:
        raise ValueError("d needs the moments of K0")
    vals = deficit_at(K0, grid.interior, method, tol)
    return SymbolSamples(grid, vals, 0j, complex(moments.nu0), SymbolLabel.D)


def eval_a(b: SymbolSamples, moments: MomentSet) -> SymbolSamples:
    """``a = (i/lam) b``; its limit at 0 is ``nu1(tilde K1)`` and it vanishes at infinity."""
    if b.label is not SymbolLabel.B:
        raise ValueError("eval_a expects samples of b")
    lam = b.grid.interior
    return SymbolSamples(b.grid, 1j * b.values / lam, complex(moments.nu1), 0j, SymbolLabel.A)


def _check_case(case: CaseLabel, moments: MomentSet, tol_zero: float):
    nu0, nu1 = moments.nu0, moments.nu1
    band = tol_zero * max(1.0, abs(nu0))
    ok = {
        CaseLabel.CASE_I: nu1 is not None and np.real(nu1) > band,
        CaseLabel.CASE_II: nu1 is not None and np.real(nu1) < -band,
        CaseLabel.CASE_III: nu1 is not None and abs(nu1) <= band and moments.nu2 is not None,
        CaseLabel.ALPHA_BETA: moments.subject is Subject.K0,
    }.get(case, False)
    if not ok:
        raise CaseMismatch(f"moments (nu0={nu0}, nu1={nu1}, nu2={moments.nu2}) contradict {case.value}")


def eval_regular_factor(case: CaseLabel, b_or_d: SymbolSamples, moments: MomentSet,
                        tol_zero: float = 1e-9) -> SymbolSamples:
    """Remove the zero at ``lam = 0`` (and its partner at infinity) case by case.

    ===========  =========================  ===============
    case         interior values            value at 0
    ===========  =========================  ===============
    I            (1 + i/lam) b               nu1
    II           (1 - i/lam) b               -nu1
    III          (1 + 1/lam**2) b            nu2 / 2
    AlphaBeta    (1 + 1/lam**2) d            nu2(K0) / 2
    ===========  =========================  ===============
    """
    case = CaseLabel(case)
    _check_case(case, moments, tol_zero)
    want = SymbolLabel.D if case is CaseLabel.ALPHA_BETA else SymbolLabel.B
    if b_or_d.label is not want:
        raise ValueError(f"{case.value} expects samples of {want.value}")
    lam = b_or_d.grid.interior
    v = b_or_d.values
    if case is CaseLabel.CASE_I:
        vals, v0, label = (1 + 1j / lam) * v, moments.nu1, SymbolLabel.C_I
    elif case is CaseLabel.CASE_II:
        vals, v0, label = (1 - 1j / lam) * v, -moments.nu1, SymbolLabel.CTILDE_II
    elif case is CaseLabel.CASE_III:
        vals, v0, label = (1 + 1 / lam**2) * v, 0.5 * moments.nu2, SymbolLabel.C_III
    else:
        vals, v0, label = (1 + 1 / lam**2) * v, 0.5 * moments.nu2, SymbolLabel.E
    return SymbolSamples(b_or_d.grid, vals, complex(v0), complex(moments.nu0), label)


def cayley_factor(grid: LambdaGrid, power: int = 1) -> SymbolSamples:
    """Samples of ``((lam - i)/(lam + i))**power``; index ``+power``."""
    lam = grid.interior
    return SymbolSamples(grid, ((lam - 1j) / (lam + 1j)) ** power, complex((-1) ** power), 1 + 0j)


def eval_c1(case: CaseLabel, regular: SymbolSamples) -> SymbolSamples:
    """``c1 = i c`` with c the case-I/II/III function in ``a = rho_plus c1``."""
    case = CaseLabel(case)
    if case is CaseLabel.CASE_I or case is CaseLabel.CASE_III:
        return (1j * regular).relabel(SymbolLabel.C1)
    if case is CaseLabel.CASE_II:
        return (1j * (cayley_factor(regular.grid, -1) * regular)).relabel(SymbolLabel.C1)
    raise ValueError(f"no c1 factor in {case.value}")


def regular_factor_C(case: CaseLabel, regular: SymbolSamples) -> SymbolSamples:
    """The Wiener-algebra factor C with ``a = rho_plus * C`` identically.

    I and II: ``C = c1``; III: ``C = ((lam+i)/(lam-i)) c1``;
    AlphaBeta: ``C = ((lam+i)/(lam-i)) e``.
    """
    case = CaseLabel(case)
    if case in (CaseLabel.CASE_I, CaseLabel.CASE_II):
        return eval_c1(case, regular).relabel(SymbolLabel.CUSTOM)
    if case is CaseLabel.CASE_III:
        return cayley_factor(regular.grid, -1) * eval_c1(case, regular)
    if case is CaseLabel.ALPHA_BETA:
        return cayley_factor(regular.grid, -1) * regular
    raise ValueError(f"no factorization for {case.value}")


RHO_PLUS = {
    CaseLabel.CASE_I: "1/(λ+i)",
    CaseLabel.CASE_II: "1/(λ+i)",
    CaseLabel.CASE_III: "λ/(λ+i)²",
    CaseLabel.ALPHA_BETA: "1/(λ+i)²",
}


def rho_plus_values(case: CaseLabel, lam) -> np.ndarray:
    lam = np.asarray(lam, dtype=float)
    case = CaseLabel(case)
    if case is CaseLabel.CASE_III:
        return lam / (lam + 1j) ** 2
    if case is CaseLabel.ALPHA_BETA:
        return 1 / (lam + 1j) ** 2
    return 1 / (lam + 1j)


# ---------------------------------------------------------------------------
# checks


def _scale(s: SymbolSamples) -> float:
    ref = abs(s.value_at_infinity)
    if ref == 0:
        ref = float(np.max(np.abs(s.values))) if s.values.size else 0.0
    return ref


def check_arg_halfplane(s: SymbolSamples, tol: float = 0.0) -> ConditionVerdict:
    """Does ``Re s(lam) > tol`` hold at every interior node?"""
    re = np.real(s.values)
    j = int(np.argmin(re))
    margin = float(re[j])
    return ConditionVerdict(ConditionId.HALF_PLANE, margin > tol, margin,
                            witness=float(s.grid.interior[j]))


def check_nonvanishing(s: SymbolSamples, tol: float = 1e-9) -> ConditionVerdict:
    """Minimum modulus over the closed line, endpoints included; ``tol`` is relative."""
    mags = np.abs(s.values)
    j = int(np.argmin(mags))
    candidates = [(float(mags[j]), float(s.grid.interior[j])),
                  (abs(s.value_at_zero), 0.0),
                  (abs(s.value_at_infinity), math.inf)]
    margin, where = min(candidates)
    return ConditionVerdict(ConditionId.NONVANISHING, margin > tol * _scale(s), margin, witness=where)


def winding_index(s: SymbolSamples, tol: float = 1e-9) -> WindingResult:
    """Winding number about 0 of the closed curve ``lam: -inf -> +inf``.

    Orientation is counterclockwise-positive, so ``(lam - i)/(lam + i)``
    has index +1.  The argument is accumulated from the phases of
    successive ratios, which never crosses a branch cut.
    """
    verdict = check_nonvanishing(s, tol)
    if not verdict.holds:
        raise VanishingSymbol(f"|{s.label.value}| = {verdict.margin:.3g} at lambda = {verdict.witness}")
    path = s.closed_path()
    steps = np.angle(path[1:] / path[:-1])
    raw = float(steps.sum() / (2 * math.pi))
    index = int(round(raw))
    max_step = float(np.max(np.abs(steps)))
    if max_step >= math.pi / 2 or abs(raw - index) >= 0.1:
        raise UnderResolved(
            f"largest argument step {max_step:.3g} rad, phase turns {raw:.4f}; refine the grid"
        )
    return WindingResult(index, raw, max_step)
