"""Nyström discretization of the first-kind convolution equation on [0, T].

The equation ``int_0^inf K(t - tau) phi(tau) dtau = f(t)`` is truncated to
``[0, T]`` and collocated at the quadrature nodes.  The default rule is the
cell-centred midpoint rule: the kernel jumps across the diagonal, and the
node-based trapezoid rule puts a zero-weight row at ``t = 0`` for Volterra
kernels, which leaves the system nearly singular.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np
from scipy.special import comb, gammainc

from .errors import AllModesDropped
from .kernel import ExpPolyHalf, KernelSpec, Level
from .spaces import GridFunction, nodes, quadrature_weights


@dataclass(frozen=True, eq=False)
class DiscretizedOperator:
    T: float
    n: int
    matrix: np.ndarray
    weights: np.ndarray
    quadrature: str = "midpoint"

    @property
    def t(self) -> np.ndarray:
        return nodes(self.T, self.n, self.quadrature)

    def grid_function(self, samples) -> GridFunction:
        return GridFunction(self.T, self.n, samples, self.quadrature)

    def apply(self, phi: GridFunction) -> GridFunction:
        _check_grid(self, phi)
        return self.grid_function(self.matrix @ phi.samples)

    @property
    def singular_values(self) -> np.ndarray:
        return self._svd[1]

    @property
    def _svd(self):
        cached = self.__dict__.get("_svd_cache")
        if cached is None:
            cached = np.linalg.svd(self.matrix)
            object.__setattr__(self, "_svd_cache", cached)
        return cached


def _check_grid(A: DiscretizedOperator, g: GridFunction):
    if g.n != A.n or not math.isclose(g.T, A.T) or g.quadrature != A.quadrature:
        raise ValueError("grid function and operator live on different grids")


def discretize(K: KernelSpec, T: float = 40.0, n: int = 1024, rule: str = "midpoint") -> DiscretizedOperator:
    """``A[i, j] = w_j K(t_i - t_j)``; on the diagonal K is the mean of its one-sided limits."""
    if K.level is not Level.K:
        raise ValueError(f"discretize needs the kernel at level K, got {K.level.value}")
    t = nodes(T, n, rule)
    w = quadrature_weights(T, n, rule)
    A = K(t[:, None] - t[None, :]) * w[None, :]
    if not np.all(np.isfinite(A)):
        raise ValueError("kernel produced non-finite matrix entries")
    return DiscretizedOperator(T, n, A, w, rule)


# ---------------------------------------------------------------------------
# manufactured right-hand sides


def _lower_moment(k: int, beta: float, t: np.ndarray) -> np.ndarray:
    """``int_0^t s**k exp(-beta s) ds`` for every entry of ``t``."""
    t = np.asarray(t, dtype=float)
    x = beta * t
    out = np.empty_like(t)
    small = np.abs(x) < 1.0
    if np.any(small):
        ts = t[small]
        acc = np.zeros_like(ts)
        term = np.ones_like(ts)
        for j in range(40):
            acc += term * ts ** (k + 1) / (k + j + 1)
            term = term * (-beta * ts) / (j + 1)
        out[small] = acc
    big = ~small
    if beta > 0:
        out[big] = math.factorial(k) / beta ** (k + 1) * gammainc(k + 1, x[big])
    elif np.any(big):
        xb = x[big]
        partial = sum(xb**j / math.factorial(j) for j in range(k + 1))
        out[big] = math.factorial(k) / beta ** (k + 1) * (1.0 - np.exp(-xb) * partial)
    return out


def convolve_closed_form(K: KernelSpec, phi: ExpPolyHalf, t) -> np.ndarray:
    """``int_0^inf K(t - tau) phi(tau) dtau`` for exp-polynomial K and phi, ``t >= 0``."""
    if not (K.is_closed_form and isinstance(phi, ExpPolyHalf)):
        raise ValueError("closed-form convolution needs exp-polynomial kernel and solution")
    t = np.asarray(t, dtype=float)
    out = np.zeros(t.shape, dtype=complex)
    for f in phi.terms:
        p, b = f.k, f.a
        decay = f.c * np.exp(-b * t)
        for g in K.pos.terms:
            # int_0^t s^k e^{-as} (t - s)^p e^{-b(t - s)} ds
            for i in range(p + 1):
                out += (decay * g.c * comb(p, i, exact=True) * (-1) ** i * t ** (p - i)
                        * _lower_moment(g.k + i, g.a - b, t))
        for g in K.neg.terms:
            # int_0^inf u^k e^{-au} (u + t)^p e^{-b(u + t)} du
            for i in range(p + 1):
                mom = math.factorial(g.k + i) / (g.a + b) ** (g.k + i + 1)
                out += decay * g.c * comb(p, i, exact=True) * t ** (p - i) * mom
    return out.real if np.all(out.imag == 0) else out


@dataclass(frozen=True, eq=False)
class ManufacturedRHS:
    discrete: GridFunction
    closed_form: Optional[GridFunction] = None

    @property
    def consistency(self) -> float:
        """``||A phi* - f_closed|| / ||f_closed||``, NaN without a closed form."""
        if self.closed_form is None:
            return math.nan
        den = self.closed_form.norm()
        num = (self.discrete - self.closed_form).norm()
        return num / den if den > 0 else num


def manufacture_rhs(A: DiscretizedOperator, phi_star: GridFunction,
                    K: Optional[KernelSpec] = None, phi_closed: Optional[ExpPolyHalf] = None) -> ManufacturedRHS:
    """``f = A phi*``, plus the exact convolution when K and phi* are exp-polynomial."""
    _check_grid(A, phi_star)
    closed = None
    if K is not None and phi_closed is not None and K.is_closed_form:
        closed = A.grid_function(convolve_closed_form(K, phi_closed, A.t))
    return ManufacturedRHS(A.apply(phi_star), closed)


# ---------------------------------------------------------------------------
# regularized solves


@dataclass(frozen=True)
class TSVD:
    """Keep singular directions above ``threshold * sigma_max``, or exactly ``rank`` of them."""

    threshold: float = 1e-8
    rank: Optional[int] = None

    def filter(self, s: np.ndarray) -> np.ndarray:
        if self.rank is not None:
            keep = np.arange(len(s)) < self.rank
        else:
            keep = s > self.threshold * (s[0] if len(s) else 0.0)
        return np.where(keep, 1.0 / np.where(keep, s, 1.0), 0.0)

    def describe(self) -> dict:
        return {"method": "tsvd", "threshold": self.threshold, "rank": self.rank}


@dataclass(frozen=True)
class Tikhonov:
    """Damped least squares with damping ``parameter * sigma_max``."""

    parameter: float = 1e-8

    def filter(self, s: np.ndarray) -> np.ndarray:
        lam = self.parameter * (s[0] if len(s) else 0.0)
        den = s**2 + lam**2
        return np.where(den > 0, s / np.where(den > 0, den, 1.0), 0.0)

    def describe(self) -> dict:
        return {"method": "tikhonov", "parameter": self.parameter}


Regularization = Union[TSVD, Tikhonov]


@dataclass(frozen=True)
class NullDimEstimate:
    count: int
    confidence: str
    gap_ratio: float
    basis: tuple = field(default=(), repr=False)


@dataclass(frozen=True, eq=False)
class SolveResult:
    solution: GridFunction
    residual_norm: float
    singular_values: np.ndarray
    regularization: Regularization
    estimated_null_dim: NullDimEstimate
    kept_modes: int = 0

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "re", "im"])
        for t, z in zip(self.solution.t, self.solution.samples.astype(complex)):
            w.writerow([repr(float(t)), repr(float(z.real)), repr(float(z.imag))])
        return buf.getvalue()

    def diagnostics(self) -> dict:
        return {
            "regularization": self.regularization.describe(),
            "residual_norm": self.residual_norm,
            "kept_modes": self.kept_modes,
            "singular_values": [float(s) for s in self.singular_values],
            "estimated_null_dim": {
                "count": self.estimated_null_dim.count,
                "confidence": self.estimated_null_dim.confidence,
                "gap_ratio": self.estimated_null_dim.gap_ratio,
            },
        }


def solve_regularized(A: DiscretizedOperator, f: GridFunction, method: Regularization = TSVD(),
                      null_ratio: float = 1e-8) -> SolveResult:
    _check_grid(A, f)
    U, s, Vh = A._svd
    filt = method.filter(s)
    kept = int(np.count_nonzero(filt))
    if kept == 0 and np.any(f.samples != 0):
        raise AllModesDropped(f"{method.describe()} removed all {len(s)} singular directions")
    x = Vh.conj().T @ (filt * (U.conj().T @ f.samples))
    if np.isrealobj(A.matrix) and np.isrealobj(f.samples):
        x = x.real
    solution = A.grid_function(x)
    residual = A.grid_function(A.matrix @ x - f.samples).norm()
    return SolveResult(solution, residual, s, method, estimate_null_dim(A, null_ratio), kept)


def estimate_null_dim(A: DiscretizedOperator, threshold_ratio: float = 1e-8) -> NullDimEstimate:
    """Count singular values below ``threshold_ratio * sigma_max``.

    The count is trusted (``confidence = "high"``) only when the counted
    values sit at least a factor 10 below the smallest kept one.  Compact
    operators have no such gap, so a low confidence is the normal outcome.
    """
    _, s, Vh = A._svd
    n = len(s)
    if n == 0 or s[0] == 0:
        basis = tuple(A.grid_function(v.conj()) for v in Vh)
        return NullDimEstimate(n, "high", math.inf, basis)
    small = s < threshold_ratio * s[0]
    count = int(np.count_nonzero(small))
    basis = tuple(A.grid_function(v.conj()) for v in Vh[n - count:])
    if count == 0:
        return NullDimEstimate(0, "low", float(s[-2] / s[-1]) if n > 1 and s[-1] > 0 else math.inf, basis)
    below = s[n - count]
    ratio = math.inf if below == 0 else float(s[n - count - 1] / below) if count < n else math.inf
    return NullDimEstimate(count, "high" if ratio >= 10 else "low", ratio, basis)
