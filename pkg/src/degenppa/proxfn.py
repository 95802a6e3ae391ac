"""Prox-representable functions with exact closed-form proximal maps.

Every kind evaluates prox_{tau f}(z) = argmin_u f(u) + (1/2 tau) ||u - z||^2
exactly (the affine indicator through a small dense solve). Kinds also expose
their subdifferential (distance and sampling) so operators built from them can
certify inclusions, and a positive scaling c*f so block embeddings can absorb
step sizes into the function.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DimensionMismatch,
    InfeasibleConstraint,
    InnerNotConverged,
    InverseUnavailable,
    RankDeficient,
)

__all__ = [
    "ProxFunction",
    "AbsValue",
    "OneNorm",
    "Quadratic",
    "AffineShiftSquare",
    "IndicatorAffine",
    "Linear",
    "Zero",
    "AbsQuadratic",
    "ScaledArg",
    "InfimalPostcomposition",
    "soft_threshold",
    "eval_prox",
    "moreau_complement",
    "prox_infimal_postcomposition",
]


def soft_threshold(b: float, thr: float) -> float:
    """Scalar shrinkage: b-thr for b>thr, b+thr for b<-thr, else exactly 0."""
    if b > thr:
        return b - thr
    if b < -thr:
        return b + thr
    return 0.0


def _vec(z, dim: int) -> np.ndarray:
    v = np.atleast_1d(np.asarray(z, dtype=float))
    if v.shape != (dim,):
        raise DimensionMismatch(f"expected vector of dim {dim}, got shape {v.shape}")
    return v


class ProxFunction:
    """Interface shared by all kinds; subclasses are frozen dataclasses."""

    dim: int

    def value(self, x) -> float:
        raise NotImplementedError

    def prox(self, tau: float, z) -> np.ndarray:
        raise NotImplementedError

    def subdiff_dist(self, x, u) -> float:
        """Euclidean distance from u to the subdifferential at x."""
        raise NotImplementedError

    def subdiff_sample(self, x, rng) -> np.ndarray:
        """A member of the subdifferential; uniform on intervals at kinks."""
        raise NotImplementedError

    def scale(self, c: float) -> "ProxFunction":
        """The function c*f for c > 0 (tau * dg = d(tau g))."""
        raise NotImplementedError

    # Smooth-quadratic structure: f = 1/2 x^T P x + q^T x + const, or None.
    def quad_parts(self):
        return None

    @property
    def quad_lipschitz(self) -> float:
        parts = self.quad_parts()
        if parts is None:
            return 0.0
        P, _ = parts
        return float(np.linalg.norm(P, 2)) if P.size else 0.0

    def separable_coords(self):
        """Per-coordinate scalar descriptors, or None if not separable."""
        return None


@dataclass(frozen=True)
class AbsValue(ProxFunction):
    """w * |t| on R."""

    weight: float = 1.0
    dim: int = 1

    def value(self, x) -> float:
        return self.weight * abs(float(_vec(x, 1)[0]))

    def prox(self, tau: float, z) -> np.ndarray:
        t = float(_vec(z, 1)[0])
        return np.array([soft_threshold(t, tau * self.weight)])

    def subdiff_dist(self, x, u) -> float:
        t = float(_vec(x, 1)[0])
        s = float(_vec(u, 1)[0])
        w = self.weight
        if t > 0.0:
            return abs(s - w)
        if t < 0.0:
            return abs(s + w)
        return max(abs(s) - w, 0.0)

    def subdiff_sample(self, x, rng) -> np.ndarray:
        t = float(_vec(x, 1)[0])
        w = self.weight
        if t > 0.0:
            return np.array([w])
        if t < 0.0:
            return np.array([-w])
        return np.array([rng.uniform(-w, w)])

    def scale(self, c: float) -> "AbsValue":
        return AbsValue(c * self.weight)

    def separable_coords(self):
        return [("abs", self.weight)]


@dataclass(frozen=True)
class OneNorm(ProxFunction):
    """w * ||x||_1 on R^dim; componentwise soft threshold."""

    weight: float
    dim: int

    def value(self, x) -> float:
        return self.weight * float(np.sum(np.abs(_vec(x, self.dim))))

    def prox(self, tau: float, z) -> np.ndarray:
        v = _vec(z, self.dim)
        thr = tau * self.weight
        return np.array([soft_threshold(t, thr) for t in v])

    def subdiff_dist(self, x, u) -> float:
        v = _vec(x, self.dim)
        s = _vec(u, self.dim)
        w = self.weight
        d2 = 0.0
        for t, si in zip(v, s):
            if t > 0.0:
                d = abs(si - w)
            elif t < 0.0:
                d = abs(si + w)
            else:
                d = max(abs(si) - w, 0.0)
            d2 += d * d
        return math.sqrt(d2)

    def subdiff_sample(self, x, rng) -> np.ndarray:
        v = _vec(x, self.dim)
        w = self.weight
        out = np.empty(self.dim)
        for i, t in enumerate(v):
            out[i] = w if t > 0.0 else (-w if t < 0.0 else rng.uniform(-w, w))
        return out

    def scale(self, c: float) -> "OneNorm":
        return OneNorm(c * self.weight, self.dim)

    def separable_coords(self):
        return [("abs", self.weight)] * self.dim


@dataclass(frozen=True)
class Quadratic(ProxFunction):
    """1/2 x^T P x + q^T x with PSD P."""

    P: np.ndarray
    q: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "P", np.asarray(self.P, dtype=float))
        object.__setattr__(self, "q", np.asarray(self.q, dtype=float))
        if self.P.shape != (self.q.shape[0], self.q.shape[0]):
            raise DimensionMismatch("Quadratic needs P square and q matching")

    @property
    def dim(self) -> int:
        return self.q.shape[0]

    def value(self, x) -> float:
        v = _vec(x, self.dim)
        return float(0.5 * v @ self.P @ v + self.q @ v)

    def prox(self, tau: float, z) -> np.ndarray:
        v = _vec(z, self.dim)
        return np.linalg.solve(np.eye(self.dim) + tau * self.P, v - tau * self.q)

    def subdiff_dist(self, x, u) -> float:
        v = _vec(x, self.dim)
        return float(np.linalg.norm(_vec(u, self.dim) - (self.P @ v + self.q)))

    def subdiff_sample(self, x, rng) -> np.ndarray:
        return self.P @ _vec(x, self.dim) + self.q

    def scale(self, c: float) -> "Quadratic":
        return Quadratic(c * self.P, c * self.q)

    def quad_parts(self):
        return self.P, self.q

    def separable_coords(self):
        off = self.P - np.diag(np.diag(self.P))
        if np.any(off != 0.0):
            return None
        return [("affine", float(self.P[i, i]), float(self.q[i])) for i in range(self.dim)]


@dataclass(frozen=True)
class AffineShiftSquare(ProxFunction):
    """(scale/2) ||x - shift||^2."""

    sq_scale: float
    shift: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "shift", np.atleast_1d(np.asarray(self.shift, dtype=float)))
        if self.sq_scale <= 0.0:
            raise ValueError("scale must be positive")

    @property
    def dim(self) -> int:
        return self.shift.shape[0]

    def value(self, x) -> float:
        v = _vec(x, self.dim)
        return float(0.5 * self.sq_scale * np.sum((v - self.shift) ** 2))

    def prox(self, tau: float, z) -> np.ndarray:
        v = _vec(z, self.dim)
        return (v + tau * self.sq_scale * self.shift) / (1.0 + tau * self.sq_scale)

    def subdiff_dist(self, x, u) -> float:
        v = _vec(x, self.dim)
        return float(np.linalg.norm(_vec(u, self.dim) - self.sq_scale * (v - self.shift)))

    def subdiff_sample(self, x, rng) -> np.ndarray:
        return self.sq_scale * (_vec(x, self.dim) - self.shift)

    def scale(self, c: float) -> "AffineShiftSquare":
        return AffineShiftSquare(c * self.sq_scale, self.shift)

    def quad_parts(self):
        n = self.dim
        return self.sq_scale * np.eye(n), -self.sq_scale * self.shift

    def separable_coords(self):
        return [("affine", self.sq_scale, -self.sq_scale * m) for m in self.shift]


@dataclass(frozen=True)
class IndicatorAffine(ProxFunction):
    """Indicator of {x : B x = b}; prox is the exact affine projection."""

    B: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "B", np.atleast_2d(np.asarray(self.B, dtype=float)))
        object.__setattr__(self, "b", np.atleast_1d(np.asarray(self.b, dtype=float)))
        if self.B.shape[0] != self.b.shape[0]:
            raise DimensionMismatch("IndicatorAffine needs B rows == len(b)")

    @property
    def dim(self) -> int:
        return self.B.shape[1]

    def _feasible(self, v, tol=1e-9) -> bool:
        return float(np.linalg.norm(self.B @ v - self.b)) <= tol * (1.0 + float(np.linalg.norm(self.b)))

    def value(self, x) -> float:
        v = _vec(x, self.dim)
        return 0.0 if self._feasible(v) else math.inf

    def prox(self, tau: float, z) -> np.ndarray:
        v = _vec(z, self.dim)
        # Projection z - B^T (B B^T)^+ (B z - b); lstsq handles rank defects,
        # but an inconsistent system means the set itself is empty.
        corr, *_ = np.linalg.lstsq(self.B, self.B @ v - self.b, rcond=None)
        p = v - corr
        if not self._feasible(p):
            raise InfeasibleConstraint("affine set B x = b is empty")
        return p

    def subdiff_dist(self, x, u) -> float:
        v = _vec(x, self.dim)
        if not self._feasible(v):
            return math.inf
        # Normal cone at a feasible point is the row space of B.
        s = _vec(u, self.dim)
        coef, *_ = np.linalg.lstsq(self.B.T, s, rcond=None)
        return float(np.linalg.norm(s - self.B.T @ coef))

    def subdiff_sample(self, x, rng) -> np.ndarray:
        v = _vec(x, self.dim)
        if not self._feasible(v):
            raise ValueError("subdifferential empty at infeasible point")
        return self.B.T @ rng.standard_normal(self.B.shape[0])

    def scale(self, c: float) -> "IndicatorAffine":
        return self  # c * indicator == indicator for c > 0


@dataclass(frozen=True)
class Linear(ProxFunction):
    """<slope, x>; the ALM coupling uses slope = -b."""

    slope: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "slope", np.atleast_1d(np.asarray(self.slope, dtype=float)))

    @property
    def dim(self) -> int:
        return self.slope.shape[0]

    def value(self, x) -> float:
        return float(self.slope @ _vec(x, self.dim))

    def prox(self, tau: float, z) -> np.ndarray:
        return _vec(z, self.dim) - tau * self.slope

    def subdiff_dist(self, x, u) -> float:
        return float(np.linalg.norm(_vec(u, self.dim) - self.slope))

    def subdiff_sample(self, x, rng) -> np.ndarray:
        return self.slope.copy()

    def scale(self, c: float) -> "Linear":
        return Linear(c * self.slope)

    def quad_parts(self):
        return np.zeros((self.dim, self.dim)), self.slope

    def separable_coords(self):
        return [("linear", float(s)) for s in self.slope]


@dataclass(frozen=True)
class Zero(ProxFunction):
    """The zero function; prox is the identity."""

    dim: int = 1

    def value(self, x) -> float:
        _vec(x, self.dim)
        return 0.0

    def prox(self, tau: float, z) -> np.ndarray:
        return _vec(z, self.dim).copy()

    def subdiff_dist(self, x, u) -> float:
        return float(np.linalg.norm(_vec(u, self.dim)))

    def subdiff_sample(self, x, rng) -> np.ndarray:
        return np.zeros(self.dim)

    def scale(self, c: float) -> "Zero":
        return self

    def quad_parts(self):
        return np.zeros((self.dim, self.dim)), np.zeros(self.dim)

    def separable_coords(self):
        return [("zero",)] * self.dim


@dataclass(frozen=True)
class AbsQuadratic(ProxFunction):
    """w|t| + (s/2)(t - m)^2 on R; prox is a shifted soft threshold.

    Composite needed to express l1 problems with their quadratic data term as
    a single operator (the problem operator whose zeros are the solution set).
    """

    weight: float
    sq_scale: float
    shift: float
    dim: int = 1

    def value(self, x) -> float:
        t = float(_vec(x, 1)[0])
        return self.weight * abs(t) + 0.5 * self.sq_scale * (t - self.shift) ** 2

    def prox(self, tau: float, z) -> np.ndarray:
        t = float(_vec(z, 1)[0])
        a = self.sq_scale + 1.0 / tau
        v = (self.sq_scale * self.shift + t / tau) / a
        return np.array([soft_threshold(v, self.weight / a)])

    def subdiff_dist(self, x, u) -> float:
        t = float(_vec(x, 1)[0])
        s = float(_vec(u, 1)[0])
        g = self.sq_scale * (t - self.shift)
        if t > 0.0:
            return abs(s - g - self.weight)
        if t < 0.0:
            return abs(s - g + self.weight)
        return max(abs(s - g) - self.weight, 0.0)

    def subdiff_sample(self, x, rng) -> np.ndarray:
        t = float(_vec(x, 1)[0])
        g = self.sq_scale * (t - self.shift)
        if t > 0.0:
            return np.array([g + self.weight])
        if t < 0.0:
            return np.array([g - self.weight])
        return np.array([g + rng.uniform(-self.weight, self.weight)])

    def scale(self, c: float) -> "AbsQuadratic":
        return AbsQuadratic(c * self.weight, c * self.sq_scale, self.shift)

    def separable_coords(self):
        return [("absquad", self.weight, self.sq_scale, self.shift)]


@dataclass(frozen=True)
class ScaledArg(ProxFunction):
    """h(x) = fn(c x) for scalar c != 0; prox by exact substitution."""

    fn: ProxFunction
    c: float

    def __post_init__(self):
        if self.c == 0.0:
            raise ValueError("argument scaling must be nonzero")

    @property
    def dim(self) -> int:
        return self.fn.dim

    def value(self, x) -> float:
        return self.fn.value(self.c * _vec(x, self.dim))

    def prox(self, tau: float, z) -> np.ndarray:
        # min fn(t) + 1/(2 tau c^2) ||t - c z||^2 with t = c x.
        v = _vec(z, self.dim)
        t = self.fn.prox(tau * self.c * self.c, self.c * v)
        return t / self.c

    def subdiff_dist(self, x, u) -> float:
        v = _vec(x, self.dim)
        s = _vec(u, self.dim)
        return abs(self.c) * self.fn.subdiff_dist(self.c * v, s / self.c)

    def subdiff_sample(self, x, rng) -> np.ndarray:
        return self.c * self.fn.subdiff_sample(self.c * _vec(x, self.dim), rng)

    def scale(self, k: float) -> "ScaledArg":
        return ScaledArg(self.fn.scale(k), self.c)

    def quad_parts(self):
        parts = self.fn.quad_parts()
        if parts is None:
            return None
        P, q = parts
        return self.c * self.c * P, self.c * q


@dataclass(frozen=True)
class InfimalPostcomposition(ProxFunction):
    """G(q) = inf{ fn(t) : B t = q }; prox through the constrained subproblem."""

    fn: ProxFunction
    B: np.ndarray
    inner_budget: int = 10000
    inner_tol: float = 1e-10

    def __post_init__(self):
        object.__setattr__(self, "B", np.atleast_2d(np.asarray(self.B, dtype=float)))
        if self.B.shape[1] != self.fn.dim:
            raise DimensionMismatch("B columns must match fn dim")

    @property
    def dim(self) -> int:
        return self.B.shape[0]

    def value(self, x) -> float:
        parts = self.fn.quad_parts()
        if parts is None:
            raise InverseUnavailable("value of the postcomposition needs a quadratic inner fn")
        # min 1/2 t^T P t + q^T t  s.t.  B t = x, by KKT with lstsq.
        P, q = parts
        n, m = self.fn.dim, self.dim
        K = np.block([[P, self.B.T], [self.B, np.zeros((m, m))]])
        rhs = np.concatenate([-q, _vec(x, m)])
        sol, *_ = np.linalg.lstsq(K, rhs, rcond=None)
        t = sol[:n]
        if np.linalg.norm(self.B @ t - _vec(x, m)) > 1e-8 * (1.0 + np.linalg.norm(x)):
            return math.inf
        return self.fn.value(t)

    def prox(self, tau: float, z) -> np.ndarray:
        # prox_{tau G}(z) solves min fn(t) + (1/(2 tau)) ||B t - z||^2.
        q, _ = prox_infimal_postcomposition(
            self.fn, self.B, 1.0 / tau, _vec(z, self.dim) / tau,
            inner_budget=self.inner_budget, inner_tol=self.inner_tol,
        )
        return q

    def subdiff_dist(self, x, u) -> float:
        raise InverseUnavailable("no subdifferential oracle for postcompositions")

    def subdiff_sample(self, x, rng) -> np.ndarray:
        raise InverseUnavailable("no subdifferential oracle for postcompositions")

    def scale(self, c: float) -> "InfimalPostcomposition":
        return InfimalPostcomposition(self.fn.scale(c), self.B, self.inner_budget, self.inner_tol)


def eval_prox(f: ProxFunction, tau: float, z) -> np.ndarray:
    """prox_{tau f}(z), the exact minimizer of f(u) + (1/2 tau)||u - z||^2."""
    if tau <= 0.0:
        raise ValueError(f"tau must be positive, got {tau}")
    return f.prox(tau, z)


def moreau_complement(g: ProxFunction, tau: float, a) -> np.ndarray:
    """a - prox_{tau g}(a), the residual half of the decomposition of a."""
    a = np.atleast_1d(np.asarray(a, dtype=float))
    return a - eval_prox(g, tau, a)


def prox_infimal_postcomposition(g: ProxFunction, B, tau: float, z,
                                 inner_budget: int = 10000,
                                 inner_tol: float = 1e-10):
    """Solve min_t g(t) + (tau/2) ||B t - z/tau||^2; returns (q, t) with q = B t.

    Exact routes: square B with B B^T = beta I (change of variables onto g's
    prox), or smooth-quadratic g (normal equations). Otherwise a proximal
    gradient loop with fixed step 1/(tau ||B||^2 + L_g) runs within
    inner_budget to inner_tol.
    """
    if tau <= 0.0:
        raise ValueError(f"tau must be positive, got {tau}")
    B = np.atleast_2d(np.asarray(B, dtype=float))
    m, n = B.shape
    if g.dim != n:
        raise DimensionMismatch("B columns must match g dim")
    w = _vec(z, m) / tau

    # Route 1: orthogonal-like square B, exact substitution t = x/c analogue.
    if m == n:
        BBt = B @ B.T
        beta = float(np.trace(BBt)) / m if m else 0.0
        if beta > 0.0 and np.max(np.abs(BBt - beta * np.eye(m))) <= 1e-12 * beta:
            t = eval_prox(g, 1.0 / (tau * beta), B.T @ w / beta)
            return B @ t, t

    # Route 2: smooth quadratic g, stationarity is a linear system.
    parts = g.quad_parts()
    if parts is not None:
        P, qv = parts
        H = P + tau * B.T @ B
        rhs = tau * B.T @ w - qv
        t, *_ = np.linalg.lstsq(H, rhs, rcond=None)
        resid = float(np.linalg.norm(H @ t - rhs))
        if resid > max(inner_tol, 1e-9) * (1.0 + float(np.linalg.norm(rhs))):
            raise InnerNotConverged(resid, "subproblem has no stationary point")
        return B @ t, t

    # Route 3: proximal gradient on the full-row-rank case.
    sv = np.linalg.svd(B, compute_uv=False)
    if sv.size == 0 or sv[-1] <= 1e-10 * sv[0] or m > n:
        raise RankDeficient("B is neither full row rank nor scaled-orthogonal")
    Bnorm2 = float(sv[0]) ** 2
    step = 1.0 / (tau * Bnorm2 + g.quad_lipschitz)
    t = np.zeros(n)
    resid = math.inf
    for _ in range(inner_budget):
        grad = tau * B.T @ (B @ t - w)
        t_next = g.prox(step, t - step * grad)
        resid = float(np.linalg.norm(t_next - t)) / step
        t = t_next
        if resid <= inner_tol * (1.0 + float(np.linalg.norm(w))):
            return B @ t, t
    raise InnerNotConverged(resid)
