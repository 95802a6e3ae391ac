"""Set-valued monotone operators: subdifferentials, affine maps, block
couplings, and the five hand-tabulated planar graphs.

Planar graphs come in two families. The abs family is d|x1| x {0}. The exp
family is the subdifferential table of max(e^y - x, 0) with the full rectangle
[-1,0] x [0,e^y] on the switching curve x = e^y; the rectangle strictly
contains the convex subdifferential there, so the family is kept as tabulated
and is deliberately not monotone across the curve.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, UnsupportedShape, ValidationError
from .proxfn import ProxFunction, Linear
from .realsets import (
    BoxSet,
    EmptySet,
    Interval,
    LogCurve,
    PointSet,
    RangeDescription,
    SetDescription,
    SublogRegion,
    UnionSet,
    FULL_LINE,
    interval_point,
)

__all__ = [
    "SetValuedOp",
    "SubdiffOp",
    "AffineOp",
    "BlockOp",
    "Graph2DOp",
    "GRAPH2D_NAMES",
    "graph_eval",
    "inverse_graph_eval",
    "build_drs_embedding",
    "build_alm_embedding",
]

GRAPH2D_NAMES = ("EG1", "EG2", "EG3", "L1X", "L1Y")
_ABS_FAMILY = ("EG1", "L1X", "L1Y")
_EXP_FAMILY = ("EG2", "EG3")


def _vec(z, dim: int) -> np.ndarray:
    v = np.atleast_1d(np.asarray(z, dtype=float))
    if v.shape != (dim,):
        raise DimensionMismatch(f"expected vector of dim {dim}, got shape {v.shape}")
    return v


class SetValuedOp:
    """x -> A(x) subset R^dim; queries are distances and samples."""

    dim: int

    def value_dist(self, x, u) -> float:
        """Euclidean distance from u to A(x); inf when A(x) is empty."""
        raise NotImplementedError

    def sample_value(self, x, rng) -> np.ndarray:
        """One member of A(x); raises ValueError when A(x) is empty."""
        raise NotImplementedError


@dataclass(frozen=True)
class SubdiffOp(SetValuedOp):
    """A = df for a prox-representable f."""

    fn: ProxFunction

    @property
    def dim(self) -> int:
        return self.fn.dim

    def value_dist(self, x, u) -> float:
        return self.fn.subdiff_dist(x, u)

    def sample_value(self, x, rng) -> np.ndarray:
        return self.fn.subdiff_sample(x, rng)


@dataclass(frozen=True)
class AffineOp(SetValuedOp):
    """A(x) = {M x + c}; M need not be symmetric (skew couplings allowed)."""

    M: np.ndarray
    c: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "M", np.atleast_2d(np.asarray(self.M, dtype=float)))
        object.__setattr__(self, "c", np.atleast_1d(np.asarray(self.c, dtype=float)))
        if self.M.shape != (self.c.shape[0], self.c.shape[0]):
            raise DimensionMismatch("AffineOp needs square M matching c")

    @property
    def dim(self) -> int:
        return self.c.shape[0]

    def value_dist(self, x, u) -> float:
        v = _vec(x, self.dim)
        return float(np.linalg.norm(_vec(u, self.dim) - (self.M @ v + self.c)))

    def sample_value(self, x, rng) -> np.ndarray:
        return self.M @ _vec(x, self.dim) + self.c


@dataclass(frozen=True)
class BlockOp(SetValuedOp):
    """Block operator: A(x)_i = D_i(x_i) + sum_{j != i} c_ij x_j.

    Diagonal entries are SetValuedOps or None (the zero map {0}); off-diagonal
    couplings are scalars acting as c * I, so coupled blocks must share a
    dimension. `structure` tags embeddings that closed-form solvers recognize.
    """

    block_dims: tuple
    diag: tuple
    offdiag: dict
    structure: tuple | None = None

    def __post_init__(self):
        if len(self.diag) != len(self.block_dims):
            raise DimensionMismatch("one diagonal entry per block")
        for entry, d in zip(self.diag, self.block_dims):
            if entry is not None and entry.dim != d:
                raise DimensionMismatch("diagonal entry dim mismatch")
        for (i, j), cij in self.offdiag.items():
            if i == j:
                raise ValidationError("off-diagonal key on the diagonal")
            if cij != 0.0 and self.block_dims[i] != self.block_dims[j]:
                raise DimensionMismatch("scalar coupling needs equal block dims")

    @property
    def dim(self) -> int:
        return sum(self.block_dims)

    def split(self, x) -> list:
        v = _vec(x, self.dim)
        out, k = [], 0
        for d in self.block_dims:
            out.append(v[k:k + d])
            k += d
        return out

    def _coupling(self, i: int, parts) -> np.ndarray:
        s = np.zeros(self.block_dims[i])
        for (a, j), cij in self.offdiag.items():
            if a == i and cij != 0.0:
                s += cij * parts[j]
        return s

    def value_dist(self, x, u) -> float:
        xs = self.split(x)
        us = self.split(u)
        d2 = 0.0
        for i, entry in enumerate(self.diag):
            r = us[i] - self._coupling(i, xs)
            di = float(np.linalg.norm(r)) if entry is None else entry.value_dist(xs[i], r)
            if math.isinf(di):
                return math.inf
            d2 += di * di
        return math.sqrt(d2)

    def sample_value(self, x, rng) -> np.ndarray:
        xs = self.split(x)
        parts = []
        for i, entry in enumerate(self.diag):
            base = np.zeros(self.block_dims[i]) if entry is None else entry.sample_value(xs[i], rng)
            parts.append(base + self._coupling(i, xs))
        return np.concatenate(parts)


@dataclass(frozen=True)
class Graph2DOp(SetValuedOp):
    """One of the five tabulated planar operators."""

    name: str
    dim: int = 2

    def __post_init__(self):
        if self.name not in GRAPH2D_NAMES:
            raise ValidationError(f"unknown planar operator {self.name!r}")

    @property
    def family(self) -> str:
        return "abs" if self.name in _ABS_FAMILY else "exp"

    def value_set(self, x) -> SetDescription:
        v = _vec(x, 2)
        if self.family == "abs":
            t = v[0]
            if t > 0.0:
                iv = interval_point(1.0)
            elif t < 0.0:
                iv = interval_point(-1.0)
            else:
                iv = Interval(-1.0, 1.0)
            return BoxSet((iv, interval_point(0.0)))
        # exp family around the switching curve x1 = e^(x2)
        x1, x2 = v
        ex2 = math.exp(x2) if x2 < 700.0 else math.inf  # dodge float overflow
        on_curve = x1 > 0.0 and (x2 == math.log(x1) or x1 == ex2)
        if on_curve:
            return BoxSet((Interval(-1.0, 0.0), Interval(0.0, ex2)))
        if x1 > 0.0 and x2 < math.log(x1):
            return PointSet(0.0, 0.0)
        return PointSet(-1.0, ex2)

    def value_dist(self, x, u) -> float:
        return self.value_set(x).distance(_vec(u, 2))

    def sample_value(self, x, rng) -> np.ndarray:
        s = self.value_set(x)
        out = []
        for iv in s.intervals:
            if iv.is_point:
                out.append(iv.lo)  # exact table entry, no rng round trip
                continue
            lo = iv.lo if math.isfinite(iv.lo) else -1.0
            hi = iv.hi if math.isfinite(iv.hi) else max(lo + 1.0, 1.0)
            out.append(float(rng.uniform(lo, hi)))
        return np.array(out)

    def inverse_set(self, u) -> SetDescription:
        """All x with u in A(x), read off the tables."""
        s, v = _vec(u, 2)
        if self.family == "abs":
            if v != 0.0 or abs(s) > 1.0:
                return EmptySet()
            if s == 1.0:
                return BoxSet((Interval(0.0, math.inf), FULL_LINE))
            if s == -1.0:
                return BoxSet((Interval(-math.inf, 0.0), FULL_LINE))
            return BoxSet((interval_point(0.0), FULL_LINE))
        # exp family: first coordinate of A is -1 (region I), 0 (region II),
        # or anything in [-1,0] on the curve.
        if v < 0.0 or s < -1.0 or s > 0.0:
            return EmptySet()
        if v > 0.0:
            curve = LogCurve(Interval(v, math.inf))
            if s == -1.0:
                # region I adds the horizontal ray left of the curve point
                ray = BoxSet((Interval(-math.inf, v, hi_closed=False), interval_point(math.log(v))))
                return UnionSet((curve, ray))
            return curve
        # v == 0: the curve rectangle always contains height 0
        if s == 0.0:
            return SublogRegion()
        return LogCurve(Interval(0.0, math.inf, lo_closed=False))

    def range_description(self) -> RangeDescription:
        if self.family == "abs":
            return RangeDescription((Interval(-1.0, 1.0), interval_point(0.0)))
        return RangeDescription((Interval(-1.0, 0.0), Interval(0.0, math.inf)))


def graph_eval(op: SetValuedOp, x) -> SetDescription:
    """The set A(x) as a geometric description."""
    if isinstance(op, Graph2DOp):
        return op.value_set(x)
    if isinstance(op, AffineOp):
        return PointSet(*(op.M @ _vec(x, op.dim) + op.c))
    if isinstance(op, SubdiffOp):
        coords = op.fn.separable_coords()
        if coords is None:
            raise UnsupportedShape("no geometric description for this subdifferential")
        v = _vec(x, op.dim)
        ivs = []
        for t, spec in zip(v, coords):
            kind = spec[0]
            if kind == "abs":
                w = spec[1]
                ivs.append(interval_point(w if t > 0.0 else -w) if t != 0.0 else Interval(-w, w))
            elif kind == "affine":
                ivs.append(interval_point(spec[1] * t + spec[2]))
            elif kind == "linear":
                ivs.append(interval_point(spec[1]))
            elif kind == "zero":
                ivs.append(interval_point(0.0))
            elif kind == "absquad":
                w, sq, m = spec[1:]
                g = sq * (t - m)
                ivs.append(interval_point(g + (w if t > 0.0 else -w)) if t != 0.0
                           else Interval(g - w, g + w))
            else:
                raise UnsupportedShape(f"no description for coordinate kind {kind!r}")
        return BoxSet(tuple(ivs))
    raise UnsupportedShape(f"graph_eval does not cover {type(op).__name__}")


def inverse_graph_eval(op: SetValuedOp, u) -> SetDescription:
    """The preimage A^{-1}(u); available for the planar tables."""
    if isinstance(op, Graph2DOp):
        return op.inverse_set(u)
    raise UnsupportedShape(f"inverse_graph_eval does not cover {type(op).__name__}")


def build_drs_embedding(f: ProxFunction, g: ProxFunction, tau: float):
    """Block operator and metric whose iteration is Douglas-Rachford.

    Unknowns are (u, w, z) in R^{3n}; rows read
        0 in tau dg(u) + w - z,  0 in -u + tau df(w) + z,  u - w = 0 shift,
    with the metric selecting only the z block.
    """
    from .metric import build_metric  # local import keeps module deps one-way

    if tau <= 0.0:
        raise ValueError(f"tau must be positive, got {tau}")
    if f.dim != g.dim:
        raise DimensionMismatch("f and g must share a dimension")
    n = f.dim
    op = BlockOp(
        block_dims=(n, n, n),
        diag=(SubdiffOp(g.scale(tau)), SubdiffOp(f.scale(tau)), None),
        offdiag={(0, 1): 1.0, (0, 2): -1.0,
                 (1, 0): -1.0, (1, 2): 1.0,
                 (2, 0): 1.0, (2, 1): -1.0},
        structure=("drs", f, g, tau),
    )
    Q = np.zeros((3 * n, 3 * n))
    Q[2 * n:, 2 * n:] = np.eye(n)
    return op, build_metric(Q)


def build_alm_embedding(F: ProxFunction, b, tau: float):
    """Block operator and metric whose iteration is the multiplier method
    for min F(q) subject to q = b.

    Unknowns are (q, p); rows read  0 in dF(q) - p,  q - b + 0 = 0 row with
    the linear tilt <-b, .>, and the metric weighs only the p block by 1/tau.
    """
    from .metric import build_metric

    if tau <= 0.0:
        raise ValueError(f"tau must be positive, got {tau}")
    b = np.atleast_1d(np.asarray(b, dtype=float))
    n = F.dim
    if b.shape != (n,):
        raise DimensionMismatch("b must match the dimension of F")
    op = BlockOp(
        block_dims=(n, n),
        diag=(SubdiffOp(F), SubdiffOp(Linear(-b))),
        offdiag={(0, 1): -1.0, (1, 0): 1.0},
        structure=("alm", F, b, tau),
    )
    Q = np.zeros((2 * n, 2 * n))
    Q[n:, n:] = np.eye(n) / tau
    return op, build_metric(Q)
