"""Kernels at the three integration levels K, K1 and K0.

A kernel on the real line is stored as two half-line functions of
``s = |t| >= 0``: ``pos`` describes ``t > 0`` and ``neg`` describes
``t < 0``.  The levels are linked half-line by half-line through tail
integration, ``K(s) = int_s^inf K1(u) du`` and ``K1(s) = int_s^inf K0(u) du``.

Closed forms are finite sums of terms ``c * s**k * exp(-a*s)``; tail
integrals, derivatives, moments and Fourier transforms of such sums are
again explicit.  Tabulated kernels are interpolated by cubic splines and
continued past the last sample by an exponential tail fitted to the last
tenth of the samples.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import NamedTuple, Optional, Sequence

import numpy as np
from scipy.integrate import IntegrationWarning, quad
from scipy.interpolate import CubicSpline

from .errors import MomentDiverges, NonIntegrableKernel, UnresolvedOscillation

# below this frequency the (1 - cos) transform is integrated directly, above
# it with the cosine weight of QUADPACK
_DIRECT_FREQ = 1.0
_QUAD_LIMIT = 500


class Level(str, Enum):
    K = "K"
    K1 = "K1"
    K0 = "K0"


class Subject(str, Enum):
    TILDE_K1 = "tildeK1"
    K0 = "K0"


@dataclass(frozen=True)
class Term:
    """One closed-form piece ``c * s**k * exp(-a*s)`` with ``s = |t|``."""

    c: complex
    k: int
    a: float

    def __post_init__(self):
        c = complex(self.c)
        object.__setattr__(self, "c", c.real if c.imag == 0 else c)
        if int(self.k) != self.k or self.k < 0:
            raise ValueError(f"power must be a nonnegative integer, got {self.k!r}")
        object.__setattr__(self, "k", int(self.k))
        a = float(self.a)
        if not a > 0 or not math.isfinite(a):
            raise NonIntegrableKernel(f"decay rate must be positive, got {self.a!r}")
        object.__setattr__(self, "a", a)


class Moment(NamedTuple):
    value: complex
    error: float


def _realify(z):
    z = complex(z)
    return z.real if z.imag == 0 else z


def _merge(terms: Sequence[Term]) -> tuple[Term, ...]:
    acc: dict[tuple[int, float], complex] = {}
    for t in terms:
        acc[(t.k, t.a)] = acc.get((t.k, t.a), 0) + t.c
    return tuple(Term(c, k, a) for (k, a), c in sorted(acc.items()) if c != 0)


# ---------------------------------------------------------------------------
# half-line functions


class ExpPolyHalf:
    """Finite sum of exponential-polynomial terms on ``s >= 0``."""

    def __init__(self, terms: Sequence[Term] = ()):
        self.terms = _merge(terms)

    def __repr__(self):
        return f"ExpPolyHalf({list(self.terms)!r})"

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        out = np.zeros(s.shape, dtype=complex if not self.is_real else float)
        for t in self.terms:
            out = out + t.c * s**t.k * np.exp(-t.a * s)
        return out

    @property
    def is_real(self) -> bool:
        return all(isinstance(t.c, float) for t in self.terms)

    @property
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def scale(self) -> float:
        """Upper bound for the integral of the absolute value."""
        return sum(abs(t.c) * math.factorial(t.k) / t.a ** (t.k + 1) for t in self.terms)

    @property
    def cutoff(self) -> float:
        # every term is below ~1e-18 of its scale past this point
        if not self.terms:
            return 1.0
        return max((45.0 + 3.0 * t.k) / t.a for t in self.terms)

    def scaled(self, c) -> "ExpPolyHalf":
        return ExpPolyHalf([Term(t.c * c, t.k, t.a) for t in self.terms])

    def tail_integral(self) -> "ExpPolyHalf":
        out = []
        for t in self.terms:
            for j in range(t.k + 1):
                coef = t.c * math.factorial(t.k) / (math.factorial(j) * t.a ** (t.k - j + 1))
                out.append(Term(coef, j, t.a))
        return ExpPolyHalf(out)

    def derivative(self) -> "ExpPolyHalf":
        out = []
        for t in self.terms:
            out.append(Term(-t.a * t.c, t.k, t.a))
            if t.k > 0:
                out.append(Term(t.k * t.c, t.k - 1, t.a))
        return ExpPolyHalf(out)

    def moment(self, m: int) -> Moment:
        val = sum(t.c * math.factorial(t.k + m) / t.a ** (t.k + m + 1) for t in self.terms)
        return Moment(_realify(val), 0.0)

    def scalar(self):
        """Fast pointwise evaluator for scalar ``s`` (used inside quadrature)."""
        terms = [(t.c, t.k, t.a) for t in self.terms]
        return lambda s: sum(c * s**k * math.exp(-a * s) for c, k, a in terms)

    def transforms(self, lam, method="closed", tol=1e-8, parts=("C", "S")):
        """Return ``(int (1-cos(lam s)) f ds, int sin(lam s) f ds, error)``."""
        lam = np.asarray(lam, dtype=float)
        if method == "quad":
            return _quad_transforms(self, self.cutoff, lam, self.scale, tol, parts)
        C = np.zeros(lam.shape, dtype=complex)
        S = np.zeros(lam.shape, dtype=complex)
        for t in self.terms:
            kf = math.factorial(t.k)
            zm = (t.a - 1j * lam) ** -(t.k + 1)
            zp = (t.a + 1j * lam) ** -(t.k + 1)
            C += t.c * kf * (t.a ** -(t.k + 1) - 0.5 * (zm + zp))
            S += t.c * kf * (zm - zp) / 2j
        if self.is_real:
            C, S = C.real, S.real
        return C, S, 0.0


class SampledHalf:
    """Cubic-spline interpolant of samples on ``s >= 0`` with an exponential tail."""

    def __init__(self, s, v):
        s = np.asarray(s, dtype=float)
        v = np.asarray(v)
        if len(s) < 4:
            raise ValueError("a tabulated half-line needs at least 4 samples")
        self.s = s
        self.v = v.astype(float) if np.isrealobj(v) else v.astype(complex)
        self.spline = CubicSpline(s, self.v)
        self.tail_amp = self.v[-1]
        self.tail_rate, self.tail_problem = self._fit_tail()

    def __repr__(self):
        return f"SampledHalf(n={len(self.s)}, s_end={self.s[-1]:g}, tail_rate={self.tail_rate})"

    def _fit_tail(self):
        n = max(3, int(math.ceil(len(self.s) / 10)))
        s, mag = self.s[-n:], np.abs(self.v[-n:])
        peak = np.max(np.abs(self.v))
        if peak == 0 or np.all(mag <= 1e-14 * peak):
            self.tail_amp = 0.0 * self.v[-1]
            return 1.0, None
        if np.any(mag == 0):
            return None, "tail samples mix zeros and nonzeros"
        if np.isrealobj(self.v) and not (np.all(self.v[-n:] > 0) or np.all(self.v[-n:] < 0)):
            return None, "tail samples change sign"
        slope = np.polyfit(s, np.log(mag), 1)[0]
        if not slope < 0:
            return None, f"tail does not decay (fitted rate {-slope:.3g})"
        return float(-slope), None

    @cached_property
    def panels(self):
        """``(x_left, h, coef)`` covering ``[0, s_end]``; ``coef[p]`` multiplies ``(s - x_left)**p``.

        When the first sample is past 0, the first cubic is continued
        down to 0, matching the pointwise evaluation.
        """
        x0, h = self.s[:-1], np.diff(self.s)
        coef = [self.spline.c[3 - p] for p in range(4)]
        if self.s[0] > 0:
            first = [c[0] for c in coef]
            d = -self.s[0]
            # the same cubic re-expanded about 0
            lead = [sum(first[p] * math.comb(p, q) * d ** (p - q) for p in range(q, 4)) for q in range(4)]
            x0 = np.concatenate([[0.0], x0])
            h = np.concatenate([[self.s[0]], h])
            coef = [np.concatenate([[lead[q]], coef[q]]) for q in range(4)]
        return x0, h, coef

    def require_tail(self, exc=NonIntegrableKernel):
        if self.tail_rate is None:
            raise exc(self.tail_problem)

    @property
    def is_real(self) -> bool:
        return np.isrealobj(self.v)

    @property
    def is_zero(self) -> bool:
        return not np.any(self.v)

    @property
    def s_end(self) -> float:
        return float(self.s[-1])

    @property
    def cutoff(self) -> float:
        return self.s_end

    @property
    def scale(self) -> float:
        body = float(np.trapezoid(np.abs(self.v), self.s))
        if self.tail_rate is None:
            return body
        return body + abs(self.tail_amp) / self.tail_rate

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        out = self.spline(np.minimum(s, self.s_end))
        if self.tail_rate is not None:
            far = s > self.s_end
            out = np.where(far, self.tail_amp * np.exp(-self.tail_rate * (s - self.s_end)), out)
        return out

    def scaled(self, c) -> "SampledHalf":
        return SampledHalf(self.s, self.v * c)

    def tail_integral(self) -> "SampledHalf":
        self.require_tail()
        anti = self.spline.antiderivative()
        vals = anti(self.s_end) - anti(self.s) + self.tail_amp / self.tail_rate
        return SampledHalf(self.s, vals)

    def derivative(self) -> "SampledHalf":
        return SampledHalf(self.s, self.spline.derivative()(self.s))

    def _body_moment(self, m: int) -> complex:
        """Exact integral of ``s**m`` times the spline over ``[0, s_end]``."""
        x0, h, coef = self.panels
        body = 0.0
        for p in range(4):
            # int_0^h (x0+u)^m u^p du via the binomial expansion of (x0+u)^m
            acc = 0.0
            for i in range(m + 1):
                acc = acc + math.comb(m, i) * x0 ** (m - i) * h ** (i + p + 1) / (i + p + 1)
            body = body + np.sum(coef[p] * acc)
        return body

    def moment(self, m: int) -> Moment:
        """Moment of the interpolant; the error is the change when every other sample is dropped."""
        self.require_tail(MomentDiverges)
        body = self._body_moment(m)
        L, a = self.s_end, self.tail_rate
        tail = self.tail_amp * sum(
            math.factorial(m) / math.factorial(j) * L**j / a ** (m - j + 1) for j in range(m + 1)
        )
        err = 0.0
        if len(self.s) >= 8:
            keep = np.unique(np.r_[np.arange(0, len(self.s), 2), len(self.s) - 1])
            coarse = SampledHalf.__new__(SampledHalf)
            coarse.s, coarse.v = self.s[keep], self.v[keep]
            coarse.spline = CubicSpline(coarse.s, coarse.v)
            err = float(abs(body - coarse._body_moment(m)))
        return Moment(_realify(body + tail), err)

    def scalar(self):
        return lambda s: self(s)[()]

    def transforms(self, lam, method="quad", tol=1e-8, parts=("C", "S")):
        """(1 - cos) and sin transforms of the interpolant.

        ``method="quad"`` integrates each cubic panel against
        ``exp(i lam s)`` exactly (Filon-type); ``"quadpack"`` uses adaptive
        QUADPACK with cosine/sine weights instead and is much slower.
        """
        self.require_tail()
        lam = np.asarray(lam, dtype=float)
        if method == "quadpack":
            C, S, err = _quad_transforms(self, self.s_end, lam, self.scale, tol, parts)
            tC, tS = self._tail_transforms(lam)
            return C + tC, S + tS, err
        if method != "quad":
            raise ValueError(f"tabulated halves support quad or quadpack, not {method!r}")
        G1 = self._minus_one_transform(lam)
        G2 = np.conj(G1) if self.is_real else self._minus_one_transform(-lam)
        C = -(G1 + G2) / 2
        S = (G1 - G2) / 2j
        if self.is_real:
            C, S = C.real, S.real
        err = 64 * np.finfo(float).eps * self.scale
        return C, S, err

    def _minus_one_transform(self, lam):
        """``int_0^inf f(s) (exp(i lam s) - 1) ds`` for the spline plus tail."""
        x0, h, coef = self.panels
        out = np.empty(lam.shape, dtype=complex)
        for j, w in np.ndenumerate(lam):
            M, N = _panel_exp_moments(w, h)
            th = w * x0
            em1 = -2 * np.sin(th / 2) ** 2 + 1j * np.sin(th)
            total = 0j
            for p in range(4):
                total += np.sum(coef[p] * (em1 * M[p] + N[p]))
            out[j] = total
        A, a, L = self.tail_amp, self.tail_rate, self.s_end
        th = lam * L
        em1 = -2 * np.sin(th / 2) ** 2 + 1j * np.sin(th)
        return out + A * (a * em1 + 1j * lam) / (a * (a - 1j * lam))

    def _tail_transforms(self, lam):
        A, a, L = self.tail_amp, self.tail_rate, self.s_end
        ep = np.exp(1j * lam * L) / (a - 1j * lam)
        em = np.exp(-1j * lam * L) / (a + 1j * lam)
        tC = A / a - 0.5 * A * (ep + em)
        tS = A * (ep - em) / 2j
        if self.is_real:
            tC, tS = tC.real, tS.real
        return tC, tS


def _panel_exp_moments(w: float, h: np.ndarray):
    """``M_p = int_0^h u^p e^{i w u} du`` and ``N_p = int_0^h u^p (e^{i w u} - 1) du``, p = 0..3."""
    z = 1j * w * h
    small = np.abs(z) < 0.5
    M = np.empty((4, len(h)), dtype=complex)
    N = np.empty((4, len(h)), dtype=complex)
    if np.any(small):
        zs, hs = z[small], h[small]
        for p in range(4):
            acc = np.zeros(zs.shape, dtype=complex)
            term = np.ones(zs.shape, dtype=complex)
            for n in range(1, 24):
                term = term * zs / n
                acc += term / (n + p + 1)
            N[p, small] = hs ** (p + 1) * acc
            M[p, small] = N[p, small] + hs ** (p + 1) / (p + 1)
    big = ~small
    if np.any(big):
        beta, hb = 1j * w, h[big]
        e = np.exp(beta * hb)
        prev = (e - 1) / beta
        M[0, big] = prev
        for p in range(1, 4):
            prev = (hb**p * e - p * prev) / beta
            M[p, big] = prev
        for p in range(4):
            N[p, big] = M[p, big] - hb ** (p + 1) / (p + 1)
    return M, N


def _quad_real_transforms(f, upper, lam, epsabs, parts):
    C = np.zeros(lam.shape)
    S = np.zeros(lam.shape)
    err = 0.0
    if "C" in parts:
        nu0, e0 = quad(f, 0.0, upper, epsabs=epsabs, epsrel=1e-13, limit=_QUAD_LIMIT)
        err = e0
    for j, w in np.ndenumerate(lam):
        if w == 0:
            continue
        aw = abs(w)
        if "S" in parts:
            s, es = quad(f, 0.0, upper, weight="sin", wvar=aw,
                         epsabs=epsabs, epsrel=1e-12, limit=_QUAD_LIMIT)
            S[j] = np.sign(w) * s
            err = max(err, es)
        if "C" not in parts:
            continue
        if aw <= _DIRECT_FREQ:
            c, ec = quad(lambda s: 2.0 * np.sin(0.5 * aw * s) ** 2 * f(s), 0.0, upper,
                         epsabs=epsabs, epsrel=1e-12, limit=_QUAD_LIMIT)
        else:
            c, ec = quad(f, 0.0, upper, weight="cos", wvar=aw,
                         epsabs=epsabs, epsrel=1e-12, limit=_QUAD_LIMIT)
            c, ec = nu0 - c, ec + e0
        C[j] = c
        err = max(err, ec)
    return C, S, err


def _quad_transforms(half, upper, lam, scale, tol, parts=("C", "S")):
    """Adaptive quadrature of the (1 - cos) and sin transforms over [0, upper].

    QUADPACK's own warnings are silenced; its error estimates are checked
    against ``tol`` instead.
    """
    if half.is_zero:
        z = np.zeros(lam.shape)
        return z, z, 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        return _quad_transforms_checked(half, upper, lam, scale, tol, parts)


def _quad_transforms_checked(half, upper, lam, scale, tol, parts):
    epsabs = 1e-14 * max(scale, 1e-300)
    f = half.scalar()
    if half.is_real:
        C, S, err = _quad_real_transforms(f, upper, lam, epsabs, parts)
    else:
        Cr, Sr, er = _quad_real_transforms(lambda s: complex(f(s)).real, upper, lam, epsabs, parts)
        Ci, Si, ei = _quad_real_transforms(lambda s: complex(f(s)).imag, upper, lam, epsabs, parts)
        C, S, err = Cr + 1j * Ci, Sr + 1j * Si, max(er, ei)
    if err > tol * max(scale, 1e-300):
        raise UnresolvedOscillation(
            f"quadrature error estimate {err:.3g} exceeds {tol:g} x kernel scale {scale:.3g}"
        )
    return C, S, err


# ---------------------------------------------------------------------------
# kernel specs


def _half_from_terms(terms):
    return ExpPolyHalf(terms)


@dataclass(frozen=True, eq=False)
class KernelSpec:
    """A kernel at one of the levels K, K1, K0.

    Either ``pos_terms``/``neg_terms`` (closed form, each a sequence of
    :class:`Term` or ``(c, k, a)`` triples) or ``tabulated = (t, v)`` with a
    strictly increasing ``t`` covering both signs.
    """

    level: Level
    pos_terms: tuple = ()
    neg_terms: tuple = ()
    tabulated: Optional[tuple] = None
    halves: Optional[tuple] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "level", Level(self.level))
        pos = tuple(t if isinstance(t, Term) else Term(*t) for t in self.pos_terms)
        neg = tuple(t if isinstance(t, Term) else Term(*t) for t in self.neg_terms)
        object.__setattr__(self, "pos_terms", pos)
        object.__setattr__(self, "neg_terms", neg)
        if self.tabulated is not None:
            if pos or neg:
                raise ValueError("closed-form terms and tabulated samples are mutually exclusive")
            t, v = (np.asarray(x) for x in self.tabulated)
            t = t.astype(float)
            if t.ndim != 1 or t.shape != v.shape:
                raise ValueError("tabulated t and v must be 1-d arrays of equal length")
            if not np.all(np.isfinite(t)) or not np.all(np.isfinite(v)):
                raise ValueError("tabulated samples must be finite")
            if np.any(np.diff(t) <= 0):
                raise ValueError("tabulated t must be strictly increasing")
            if not (t[0] < 0 < t[-1]):
                raise ValueError("tabulated t must span both signs")
            object.__setattr__(self, "tabulated", (t, v))

    @classmethod
    def from_halves(cls, level, pos, neg) -> "KernelSpec":
        if isinstance(pos, ExpPolyHalf) and isinstance(neg, ExpPolyHalf):
            return cls(level, pos.terms, neg.terms)
        t = np.concatenate([-neg.s[::-1], pos.s])
        v = np.concatenate([neg.v[::-1], pos.v])
        keep = np.concatenate([neg.s[::-1] > 0, pos.s > 0])
        return cls(level, tabulated=(t[keep], v[keep]), halves=(pos, neg))

    @property
    def is_closed_form(self) -> bool:
        return self.tabulated is None

    @cached_property
    def _halves(self):
        if self.halves is not None:
            return self.halves
        if self.is_closed_form:
            return ExpPolyHalf(self.pos_terms), ExpPolyHalf(self.neg_terms)
        t, v = self.tabulated
        p, n = t >= 0, t <= 0
        return SampledHalf(t[p], v[p]), SampledHalf(-t[n][::-1], v[n][::-1])

    @property
    def pos(self):
        return self._halves[0]

    @property
    def neg(self):
        return self._halves[1]

    @property
    def is_real(self) -> bool:
        return self.pos.is_real and self.neg.is_real

    def __call__(self, t):
        """Pointwise values; at ``t = 0`` the mean of the one-sided limits."""
        t = np.asarray(t, dtype=float)
        s = np.abs(t)
        return np.where(t > 0, self.pos(s), np.where(t < 0, self.neg(s), 0.5 * (self.pos(s) + self.neg(s))))

    def scaled(self, c) -> "KernelSpec":
        return KernelSpec.from_halves(self.level, self.pos.scaled(c), self.neg.scaled(c))


def gamma_family(gamma: float, level: Level = Level.K1) -> KernelSpec:
    """``exp(-t)`` for t > 0 and ``gamma * exp(t)`` for t < 0."""
    return KernelSpec(level, [Term(1.0, 0, 1.0)], [Term(gamma, 0, 1.0)] if gamma else [])


def two_sided_exp(c: float = 0.5, a: float = 1.0, level: Level = Level.K0) -> KernelSpec:
    """``c * exp(-a|t|)``."""
    return KernelSpec(level, [Term(c, 0, a)], [Term(c, 0, a)])


# ---------------------------------------------------------------------------
# level changes


def _require_level(spec, level):
    if spec.level != level:
        raise ValueError(f"expected a kernel at level {level.value}, got {spec.level.value}")


def build_K_from_K1(spec: KernelSpec) -> KernelSpec:
    """Tail-integrate K1 on each half-line to get K."""
    _require_level(spec, Level.K1)
    return KernelSpec.from_halves(Level.K, spec.pos.tail_integral(), spec.neg.tail_integral())


def build_K1_from_K0(spec: KernelSpec) -> KernelSpec:
    _require_level(spec, Level.K0)
    return KernelSpec.from_halves(Level.K1, spec.pos.tail_integral(), spec.neg.tail_integral())


def K1_from_K(spec: KernelSpec) -> KernelSpec:
    """Recover K1 from K by differentiation, the inverse of :func:`build_K_from_K1`."""
    _require_level(spec, Level.K)
    return KernelSpec.from_halves(
        Level.K1, spec.pos.derivative().scaled(-1), spec.neg.derivative().scaled(-1)
    )


def tilde_of(spec: KernelSpec) -> KernelSpec:
    """Flip the sign of the ``t < 0`` part."""
    _require_level(spec, Level.K1)
    return KernelSpec.from_halves(Level.K1, spec.pos, spec.neg.scaled(-1))


# ---------------------------------------------------------------------------
# moments


def moment(spec: KernelSpec, m: int) -> Moment:
    """``int t**m spec(t) dt`` with an error estimate (zero for closed forms)."""
    if int(m) != m or m < 0:
        raise ValueError("moment order must be a nonnegative integer")
    p, n = spec.pos.moment(m), spec.neg.moment(m)
    return Moment(_realify(p.value + (-1) ** m * n.value), p.error + n.error)


@dataclass(frozen=True)
class MomentSet:
    subject: Subject
    nu0: Optional[complex]
    nu1: Optional[complex]
    nu2: Optional[complex]
    abs_finite: tuple = (True, True, True)
    errors: tuple = (0.0, 0.0, 0.0)

    def scaled(self, c) -> "MomentSet":
        return MomentSet(
            self.subject,
            *(None if v is None else _realify(v * c) for v in (self.nu0, self.nu1, self.nu2)),
            abs_finite=self.abs_finite,
            errors=tuple(abs(c) * e for e in self.errors),
        )


def moments_of(spec: KernelSpec, subject: Subject | str) -> MomentSet:
    """The first three moments of the tilde of K1, or of K0."""
    subject = Subject(subject)
    if subject is Subject.TILDE_K1:
        g = tilde_of(spec)
    else:
        _require_level(spec, Level.K0)
        g = spec
    vals, errs, finite = [], [], []
    for m in range(3):
        try:
            mo = moment(g, m)
        except MomentDiverges:
            vals.append(None)
            errs.append(math.inf)
            finite.append(False)
        else:
            vals.append(mo.value)
            errs.append(mo.error)
            finite.append(True)
    return MomentSet(subject, *vals, abs_finite=tuple(finite), errors=tuple(errs))


def kernel_scale(spec: KernelSpec) -> float:
    """Bound for the integral of ``|spec|``; used to make tolerances relative."""
    return spec.pos.scale + spec.neg.scale


# ---------------------------------------------------------------------------
# admissibility conditions


class ConditionId(str, Enum):
    SIGN = "sign_difference"        # K1(t) - K1(-t) >= 0 for t >= 0
    POSITIVITY = "positive_mass"    # int_0^inf [K1(t) - K1(-t)] dt > 0
    ALPHA_SIGN = "k0_even_sign"     # K0(t) + K0(-t) >= 0 for t >= 0
    BETA_MOMENTS = "k0_moments"     # nu1(K0) = 0, nu0(K0) > 0, nu2(K0) > 0
    HALF_PLANE = "half_plane"       # Re s(lambda) > 0 off lambda = 0
    NONVANISHING = "nonvanishing"   # |s(lambda)| > 0 on the closed line


@dataclass(frozen=True)
class ConditionVerdict:
    condition: ConditionId
    holds: bool
    margin: float
    witness: Optional[float] = None
    value: Optional[complex] = None


def check_grid(t_check: float = 40.0, n: int = 512) -> np.ndarray:
    return np.geomspace(1e-6, t_check, n)


def _pointwise_verdict(cond, vals, s, slack):
    vals = np.asarray(vals)
    worst = np.real(vals) - np.abs(np.imag(vals))
    j = int(np.argmin(worst))
    sup = float(np.max(np.abs(vals))) if vals.size else 0.0
    margin = float(worst[j])
    return ConditionVerdict(cond, margin >= -slack * sup, margin, witness=float(s[j]))


def verify_conditions(
    spec: KernelSpec,
    *,
    t_check: float = 40.0,
    sign_slack: float = 1e-10,
    tol_positive: float = 1e-10,
    tol_zero: float = 1e-9,
    n_check: int = 512,
) -> list[ConditionVerdict]:
    """Check the sign and positivity conditions on K1, plus the K0 conditions.

    ``sign_slack`` is relative to the largest sampled magnitude,
    ``tol_positive`` to :func:`kernel_scale`.  Violations are verdicts,
    never exceptions.
    """
    if spec.level is Level.K0:
        k1 = build_K1_from_K0(spec)
    elif spec.level is Level.K:
        k1 = K1_from_K(spec)
    else:
        k1 = spec
    s = check_grid(t_check, n_check)

    out = [_pointwise_verdict(ConditionId.SIGN, k1.pos(s) - k1.neg(s), s, sign_slack)]

    scale = kernel_scale(k1)
    try:
        mass = _realify(k1.pos.moment(0).value - k1.neg.moment(0).value)
    except MomentDiverges:
        out.append(ConditionVerdict(ConditionId.POSITIVITY, False, -math.inf))
    else:
        margin = float(np.real(mass) - abs(np.imag(mass)))
        out.append(ConditionVerdict(ConditionId.POSITIVITY, margin > tol_positive * scale, margin, value=mass))

    if spec.level is Level.K0:
        out.append(_pointwise_verdict(ConditionId.ALPHA_SIGN, spec.pos(s) + spec.neg(s), s, sign_slack))
        ms = moments_of(spec, Subject.K0)
        if not all(ms.abs_finite):
            out.append(ConditionVerdict(ConditionId.BETA_MOMENTS, False, -math.inf))
        else:
            floor = tol_positive * kernel_scale(spec)
            band = tol_zero * max(1.0, abs(ms.nu0))
            nu0, nu2 = (float(np.real(v) - abs(np.imag(v))) for v in (ms.nu0, ms.nu2))
            holds = abs(ms.nu1) <= band and nu0 > floor and nu2 > floor
            margin = min(nu0, nu2, -abs(ms.nu1))
            out.append(ConditionVerdict(ConditionId.BETA_MOMENTS, holds, margin,
                                        value=(ms.nu0, ms.nu1, ms.nu2)))
    return out
