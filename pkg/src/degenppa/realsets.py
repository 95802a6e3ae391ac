"""Closed-form subsets of R and R^2.

The operator tables of the builtin 2D examples return exact set descriptions
(interval products, log-graph curves, a sublevel region, finite unions) rather
than sampled point clouds, so membership and distance queries can be asserted
exactly in tests. Intervals also carry the Minkowski arithmetic needed by the
strong-relative-interior check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import UnsupportedShape

__all__ = [
    "Interval",
    "EMPTY_INTERVAL",
    "FULL_LINE",
    "interval_point",
    "RangeDescription",
    "EmptySet",
    "BoxSet",
    "PointSet",
    "LogCurve",
    "SublogRegion",
    "UnionSet",
    "UnknownSet",
]

_INF = math.inf


@dataclass(frozen=True)
class Interval:
    """A real interval with open/closed endpoints; lo > hi encodes empty."""

    lo: float
    hi: float
    lo_closed: bool = True
    hi_closed: bool = True

    @property
    def is_empty(self) -> bool:
        if self.lo > self.hi:
            return True
        if self.lo == self.hi:
            return not (self.lo_closed and self.hi_closed)
        return False

    @property
    def is_point(self) -> bool:
        return self.lo == self.hi and self.lo_closed and self.hi_closed

    def contains(self, x: float, tol: float = 0.0) -> bool:
        """Membership with slack tol on closed endpoints; open stay strict."""
        if self.is_empty:
            return False
        lo_ok = x >= self.lo - tol if self.lo_closed else x > self.lo
        hi_ok = x <= self.hi + tol if self.hi_closed else x < self.hi
        return lo_ok and hi_ok

    def distance(self, x: float) -> float:
        """Euclidean distance from x to the closure of the interval."""
        if self.is_empty:
            return _INF
        if x < self.lo:
            return self.lo - x
        if x > self.hi:
            return x - self.hi
        return 0.0

    def clamp(self, x: float) -> float:
        if self.is_empty:
            raise ValueError("cannot clamp to an empty interval")
        return min(max(x, self.lo), self.hi)

    def negate(self) -> "Interval":
        return Interval(-self.hi, -self.lo, self.hi_closed, self.lo_closed)

    def minkowski_add(self, other: "Interval") -> "Interval":
        if self.is_empty or other.is_empty:
            return EMPTY_INTERVAL
        # inf + (-inf) never occurs: lo sums stay lo-like, hi sums hi-like.
        return Interval(
            self.lo + other.lo,
            self.hi + other.hi,
            self.lo_closed and other.lo_closed,
            self.hi_closed and other.hi_closed,
        )

    def minkowski_sub(self, other: "Interval") -> "Interval":
        return self.minkowski_add(other.negate())

    def sri_contains_zero(self) -> bool:
        """0 in the interior relative to the interval's affine span.

        A single point spans only itself, so its relative interior is the
        point; a nondegenerate interval's relative interior is its open hull.
        """
        if self.is_empty:
            return False
        if self.lo == self.hi:
            return self.lo == 0.0
        return self.lo < 0.0 < self.hi


EMPTY_INTERVAL = Interval(_INF, -_INF)
FULL_LINE = Interval(-_INF, _INF, False, False)


def interval_point(a: float) -> Interval:
    return Interval(a, a, True, True)


@dataclass(frozen=True)
class RangeDescription:
    """Interval product describing a set range in R^d, used by sri checks.

    excluded holds interval-product slabs removed from the product, kept for
    bookkeeping only (range of the exp example's shifted operator); the sri
    computation rejects descriptions that rely on exclusions.
    """

    intervals: tuple
    excluded: tuple = field(default=())

    @property
    def dim(self) -> int:
        return len(self.intervals)

    def minkowski_sub(self, other: "RangeDescription") -> "RangeDescription":
        if self.excluded or other.excluded:
            raise UnsupportedShape("Minkowski arithmetic needs plain interval products")
        if self.dim != other.dim:
            raise UnsupportedShape("dimension mismatch between range descriptions")
        parts = tuple(
            a.minkowski_sub(b) for a, b in zip(self.intervals, other.intervals)
        )
        return RangeDescription(parts)

    def sri_contains_zero(self) -> bool:
        if self.excluded:
            raise UnsupportedShape("sri test needs plain interval products")
        return all(iv.sri_contains_zero() for iv in self.intervals)


# ---------------------------------------------------------------------------
# 2D set descriptions returned by graph/inverse-graph evaluation.


class SetDescription:
    """Base for exact 2D sets; subclasses implement contains/distance."""

    def contains(self, p, tol: float = 0.0) -> bool:
        raise NotImplementedError

    def distance(self, p) -> float:
        raise NotImplementedError

    @property
    def is_empty(self) -> bool:
        return False


@dataclass(frozen=True)
class EmptySet(SetDescription):
    def contains(self, p, tol: float = 0.0) -> bool:
        return False

    def distance(self, p) -> float:
        return _INF

    @property
    def is_empty(self) -> bool:
        return True


@dataclass(frozen=True)
class BoxSet(SetDescription):
    """Product of intervals; singletons and rays are degenerate boxes."""

    intervals: tuple

    def contains(self, p, tol: float = 0.0) -> bool:
        return all(iv.contains(float(x), tol) for iv, x in zip(self.intervals, p))

    def distance(self, p) -> float:
        return math.hypot(*(iv.distance(float(x)) for iv, x in zip(self.intervals, p)))

    def project(self, p):
        return np.array([iv.clamp(float(x)) for iv, x in zip(self.intervals, p)])

    @property
    def is_empty(self) -> bool:
        return any(iv.is_empty for iv in self.intervals)


def PointSet(*coords) -> BoxSet:
    """Singleton as a degenerate box."""
    return BoxSet(tuple(interval_point(float(c)) for c in coords))


@dataclass(frozen=True)
class LogCurve(SetDescription):
    """{(t, ln t) : t in trange, t > 0}."""

    trange: Interval = field(default=Interval(0.0, _INF, False, False))

    def contains(self, p, tol: float = 0.0) -> bool:
        t, y = float(p[0]), float(p[1])
        if t <= 0.0 or not self.trange.contains(t, tol):
            return False
        return abs(y - math.log(t)) <= tol

    def distance(self, p) -> float:
        # Parametric minimization over a log-spaced sample, then local refine;
        # adequate for test assertions (the curve is smooth and 1D).
        t0, y0 = float(p[0]), float(p[1])
        lo = max(self.trange.lo, 1e-12)
        hi = self.trange.hi if math.isfinite(self.trange.hi) else max(abs(t0), 1.0) * 10 + 10
        if lo > hi:
            return _INF
        ts = np.geomspace(lo, hi, 4001)
        d2 = (ts - t0) ** 2 + (np.log(ts) - y0) ** 2
        return float(np.sqrt(d2.min()))


@dataclass(frozen=True)
class SublogRegion(SetDescription):
    """{(x, y) : x > 0, y <= ln x}, the closed region under the log graph."""

    def contains(self, p, tol: float = 0.0) -> bool:
        x, y = float(p[0]), float(p[1])
        return x > 0.0 and y <= math.log(x) + tol

    def distance(self, p) -> float:
        # The region is {x >= e^y}, so exterior points project onto the curve.
        x, y = float(p[0]), float(p[1])
        if x > 0.0 and y <= math.log(x):
            return 0.0
        return LogCurve().distance(p)


@dataclass(frozen=True)
class UnionSet(SetDescription):
    parts: tuple

    def contains(self, p, tol: float = 0.0) -> bool:
        return any(part.contains(p, tol) for part in self.parts)

    def distance(self, p) -> float:
        return min(part.distance(p) for part in self.parts)

    @property
    def is_empty(self) -> bool:
        return all(part.is_empty for part in self.parts)


@dataclass(frozen=True)
class UnknownSet(SetDescription):
    """Kernel-set placeholder for operators without analytic descriptions."""

    def contains(self, p, tol: float = 0.0) -> bool:
        raise UnsupportedShape("kernel set has no analytic description")

    def distance(self, p) -> float:
        raise UnsupportedShape("kernel set has no analytic description")
