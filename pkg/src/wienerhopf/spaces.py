"""Grid functions on [0, T] and the operators that generate the solution spaces.

``B_alpha`` and ``B_inf`` integrate against ``exp(t - s)`` over ``[t, inf)``;
``G_alpha`` integrates against ``exp(-i alpha (t - s))`` over ``[0, t]``.
Both integrals are evaluated exactly for the cubic-spline interpolant of
the samples, panel by panel, with a first-order linear recursion carrying
the running integral.  The upper limit ``inf`` is truncated at ``T``.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.signal import lfilter

from .errors import NotInSpace

RULES = ("trapezoid", "simpson", "midpoint")
INF = math.inf


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Samples of a function on ``[0, T]``.

    ``trapezoid`` and ``simpson`` grids have nodes ``j*T/(n-1)``; the
    ``midpoint`` grid has cell centres ``(j + 1/2)*T/n``.
    """

    T: float
    n: int
    samples: np.ndarray
    quadrature: str = "trapezoid"

    def __post_init__(self):
        samples = np.asarray(self.samples)
        samples = samples.astype(complex if np.iscomplexobj(samples) else float)
        object.__setattr__(self, "samples", samples)
        if self.quadrature not in RULES:
            raise ValueError(f"quadrature must be one of {RULES}")
        if self.n < 16 or samples.shape != (self.n,):
            raise ValueError("need n >= 16 samples matching n")
        if not self.T > 0:
            raise ValueError("T must be positive")
        if not np.all(np.isfinite(samples)):
            raise ValueError("samples must be finite")

    @classmethod
    def from_function(cls, f, T: float, n: int, quadrature: str = "trapezoid") -> "GridFunction":
        return cls(T, n, np.asarray(f(nodes(T, n, quadrature))), quadrature)

    @property
    def t(self) -> np.ndarray:
        return nodes(self.T, self.n, self.quadrature)

    @property
    def h(self) -> float:
        return self.T / (self.n if self.quadrature == "midpoint" else self.n - 1)

    @property
    def weights(self) -> np.ndarray:
        return quadrature_weights(self.T, self.n, self.quadrature)

    def norm(self) -> float:
        """Discrete L2 norm over ``[0, T]``."""
        return float(np.sqrt(np.sum(self.weights * np.abs(self.samples) ** 2)))

    def with_samples(self, samples) -> "GridFunction":
        return GridFunction(self.T, self.n, samples, self.quadrature)

    def __add__(self, other):
        return self.with_samples(self.samples + _samples(other))

    def __sub__(self, other):
        return self.with_samples(self.samples - _samples(other))

    def __mul__(self, c):
        return self.with_samples(self.samples * c)

    __rmul__ = __mul__

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "value"])
        for t, z in zip(self.t, self.samples.astype(complex)):
            w.writerow([repr(float(t)), format_complex(z)])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, quadrature: Optional[str] = None) -> "GridFunction":
        rows = [r for r in csv.reader(io.StringIO(text)) if r and not r[0].startswith("#")]
        if rows and rows[0][0].strip() == "t":
            rows = rows[1:]
        t = np.array([float(r[0]) for r in rows])
        v = np.array([parse_complex(r[1]) for r in rows])
        if np.all(v.imag == 0):
            v = v.real
        if len(t) < 2:
            raise ValueError("a grid function needs at least two rows")
        h = t[1] - t[0]
        if not np.allclose(np.diff(t), h, rtol=1e-9, atol=1e-12 * abs(t[-1])):
            raise ValueError("grid function rows must be uniformly spaced")
        if quadrature is None:
            quadrature = "midpoint" if abs(t[0] - h / 2) < 1e-9 * h else "trapezoid"
        T = t[-1] + h / 2 if quadrature == "midpoint" else t[-1]
        return cls(float(T), len(t), v, quadrature)


def _samples(x):
    return x.samples if isinstance(x, GridFunction) else x


def format_complex(z: complex) -> str:
    """``re+imi`` text, e.g. ``0.5-2i``."""
    z = complex(z)
    return f"{z.real!r}{'+' if z.imag >= 0 or math.isnan(z.imag) else '-'}{abs(z.imag)!r}i"


def parse_complex(text: str) -> complex:
    text = text.strip().replace(" ", "")
    if text.endswith("i"):
        text = text[:-1] + "j"
    return complex(text)


def nodes(T: float, n: int, rule: str) -> np.ndarray:
    if rule == "midpoint":
        return (np.arange(n) + 0.5) * (T / n)
    return np.linspace(0.0, T, n)


def quadrature_weights(T: float, n: int, rule: str) -> np.ndarray:
    if rule == "midpoint":
        return np.full(n, T / n)
    h = T / (n - 1)
    w = np.full(n, h)
    if rule == "trapezoid":
        w[0] = w[-1] = h / 2
        return w
    # composite Simpson; an odd number of panels ends with a 3/8 block
    w[:] = 0.0
    m = n - 1 if (n - 1) % 2 == 0 else n - 4
    w[: m + 1: 2] += 2 * h / 3
    w[1: m: 2] += 4 * h / 3
    w[0] -= h / 3
    w[m] -= h / 3
    if m != n - 1:
        w[m: m + 4] += np.array([3, 9, 9, 3]) * h / 8
    return w


def derivative(g: GridFunction) -> np.ndarray:
    """Fourth-order finite differences, one-sided five-point stencils at the ends."""
    f, h = g.samples, g.h
    d = np.empty_like(f)
    d[2:-2] = (f[:-4] - 8 * f[1:-3] + 8 * f[3:-1] - f[4:]) / (12 * h)
    d[0] = (-25 * f[0] + 48 * f[1] - 36 * f[2] + 16 * f[3] - 3 * f[4]) / (12 * h)
    d[1] = (-3 * f[0] - 10 * f[1] + 18 * f[2] - 6 * f[3] + f[4]) / (12 * h)
    d[-1] = (25 * f[-1] - 48 * f[-2] + 36 * f[-3] - 16 * f[-4] + 3 * f[-5]) / (12 * h)
    d[-2] = (3 * f[-1] + 10 * f[-2] - 18 * f[-3] + 6 * f[-4] - f[-5]) / (12 * h)
    return d


# ---------------------------------------------------------------------------
# the generating operators

_GL_X, _GL_W = np.polynomial.legendre.leggauss(16)


def _exp_moments(beta: complex, h: float) -> np.ndarray:
    """``M_p = int_0^h exp(beta u) u**p du`` for p = 0..3."""
    if abs(beta * h) < 0.5:
        u = 0.5 * h * (_GL_X + 1)
        w = 0.5 * h * _GL_W * np.exp(beta * u)
        return np.array([np.sum(w * u**p) for p in range(4)])
    e = np.exp(beta * h)
    M = [(e - 1) / beta]
    for p in range(1, 4):
        M.append((h**p * e - p * M[-1]) / beta)
    return np.array(M)


def _node_grid(phi: GridFunction):
    if phi.quadrature == "midpoint":
        raise ValueError("the generating operators need a node grid including t = 0 and t = T")
    return phi.t, phi.h


def _panel_integrals(phi: GridFunction, beta: complex) -> np.ndarray:
    """``int_0^h exp(beta u) phi(t_j + u) du`` on every panel, exact for the spline."""
    t, h = _node_grid(phi)
    sp = CubicSpline(t, phi.samples)
    M = _exp_moments(beta, h)
    # sp.c[3 - p] multiplies (x - t_j)**p
    return sum(sp.c[3 - p] * M[p] for p in range(4))


def _backward_tail(phi: GridFunction) -> np.ndarray:
    """``exp(t) int_t^T exp(-s) phi(s) ds`` on the grid."""
    _, h = _node_grid(phi)
    P = _panel_integrals(phi, -1.0)
    # J_j = P_j + exp(-h) J_{j+1}, J_{n-1} = 0
    J = lfilter([1.0], [1.0, -math.exp(-h)], P[::-1])[::-1]
    return np.concatenate([J, [0.0]])


def _forward_memory(phi: GridFunction, alpha: float) -> np.ndarray:
    """``int_0^t exp(-i alpha (t - s)) phi(s) ds`` on the grid."""
    _, h = _node_grid(phi)
    r = np.exp(-1j * alpha * h)
    Q = r * _panel_integrals(phi, 1j * alpha)
    # I_{j+1} = r I_j + Q_j, I_0 = 0
    I = lfilter([1.0], [1.0, -r], Q)
    return np.concatenate([[0.0], I])


def _tidy(x):
    return x.real if np.all(x.imag == 0) else x


def apply_B(phi: GridFunction, alpha: float) -> GridFunction:
    """``B_alpha phi = phi - (1 + i alpha) e^t int_t^inf e^{-s} phi``; ``B_inf phi = i e^t int_t^inf e^{-s} phi``."""
    J = _backward_tail(phi)
    if alpha == INF:
        return phi.with_samples(1j * J)
    return phi.with_samples(_tidy(phi.samples - (1 + 1j * alpha) * J))


def apply_G(phi: GridFunction, alpha: float) -> GridFunction:
    """``G_alpha phi = phi + (1 - i alpha) int_0^t e^{-i alpha (t-s)} phi``; ``G_inf f = i (f + f')``."""
    if alpha == INF:
        _node_grid(phi)
        return phi.with_samples(1j * (phi.samples + derivative(phi)))
    I = _forward_memory(phi, alpha)
    return phi.with_samples(_tidy(phi.samples + (1 - 1j * alpha) * I))


@dataclass(frozen=True)
class MultiplicityData:
    """Zero multiplicities split between the two factors.

    ``m_prime`` exponents feed G (and rho_plus), ``m_dblprime`` feed B
    (and rho_minus), one entry per ``alphas[j]`` plus the ``inf`` pair.
    """

    alphas: tuple = ()
    m_prime: tuple = ()
    m_dblprime: tuple = ()
    m_inf_prime: int = 0
    m_inf_dblprime: int = 0

    def __post_init__(self):
        if not (len(self.alphas) == len(self.m_prime) == len(self.m_dblprime)):
            raise ValueError("one (m', m'') pair per alpha")
        for m in (*self.m_prime, *self.m_dblprime, self.m_inf_prime, self.m_inf_dblprime):
            if int(m) != m or m < 0:
                raise ValueError("multiplicities are nonnegative integers")

    @property
    def m(self) -> tuple:
        return tuple(a + b for a, b in zip(self.m_prime, self.m_dblprime))

    @property
    def m_inf(self) -> int:
        return self.m_inf_prime + self.m_inf_dblprime


def compose(phi: GridFunction, mult: MultiplicityData, which: str) -> GridFunction:
    """Apply ``B = B_inf^{m''_inf} prod B_{alpha_j}^{m''_j}`` or the G analogue.

    The finite-alpha factors act first, then the factor at infinity.
    """
    if which == "B":
        op, powers, p_inf = apply_B, mult.m_dblprime, mult.m_inf_dblprime
    elif which == "G":
        op, powers, p_inf = apply_G, mult.m_prime, mult.m_inf_prime
    else:
        raise ValueError("which must be 'B' or 'G'")
    out = phi
    for alpha, p in zip(mult.alphas, powers):
        for _ in range(p):
            out = op(out, alpha)
    for _ in range(p_inf):
        out = op(out, INF)
    return out


@dataclass(frozen=True)
class MembershipVerdict:
    space: str
    belongs: bool
    recovered_preimage: Optional[GridFunction] = field(default=None, repr=False)
    preimage_norm: float = math.nan


def _restricted_norm(g: GridFunction, stop: int) -> float:
    w = quadrature_weights(g.h * (stop - 1), stop, g.quadrature)
    return float(np.sqrt(np.sum(w * np.abs(g.samples[:stop]) ** 2)))


def invert_B_inf(f: GridFunction, rel_change: float = 0.1) -> MembershipVerdict:
    """Recover ``phi = i (f' - f)`` with ``B_inf phi = f`` and test membership.

    ``f`` belongs to the space generated by ``1/(lam - i)`` when the
    preimage norm is stable under halving the grid: the relative change
    must stay below ``rel_change``.
    """
    _node_grid(f)
    pre = f.with_samples(_tidy(1j * (derivative(f) - f.samples)))
    norm = pre.norm()
    space = "Ē₊(1/(λ−i))"
    if not math.isfinite(norm):
        return MembershipVerdict(space, False, None, norm)
    m = (f.n - 1) // 2 + 1
    if m >= 16:
        coarse = GridFunction(2 * f.h * (m - 1), m, f.samples[: 2 * m - 1: 2], f.quadrature)
        c_pre = 1j * (derivative(coarse) - coarse.samples)
        fine_n = _restricted_norm(pre, 2 * m - 1)
        coarse_n = _restricted_norm(coarse.with_samples(c_pre), m)
        if abs(fine_n - coarse_n) > rel_change * max(fine_n, coarse_n) and max(fine_n, coarse_n) > 0:
            return MembershipVerdict(space, False, pre, norm)
    return MembershipVerdict(space, True, pre, norm)


def ebar_norm(f: GridFunction) -> float:
    """``||B_inf^{-1} f||`` in discrete L2."""
    v = invert_B_inf(f)
    if not v.belongs:
        raise NotInSpace(f"f is not in {v.space} at this resolution")
    return v.preimage_norm
