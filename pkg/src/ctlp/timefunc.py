"""Piecewise-polynomial scalar functions of time on ``[0, T]``.

Every time-varying coefficient of a problem instance is a :class:`PiecewiseFn`:
one polynomial (ascending coefficients) per breakpoint interval.  Evaluation at
an interior breakpoint uses the piece starting there; evaluation at ``T`` uses
the last piece.  Integrals are exact (closed-form antiderivatives).
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from numpy.polynomial import polynomial as P

from .errors import DomainError, InputError

MAX_DATA_DEGREE = 3


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Breakpoints:
    """Strictly increasing partition ``0 = t0 < t1 < ... < tK = T``."""

    points: np.ndarray

    def __init__(self, points: Iterable[float]):
        pts = _frozen(list(points))
        if pts.ndim != 1 or pts.size < 2:
            raise InputError("breakpoints need at least two points")
        if not np.all(np.isfinite(pts)):
            raise InputError("breakpoints must be finite")
        if pts[0] != 0.0:
            raise InputError("first breakpoint must be 0")
        if np.any(np.diff(pts) <= 0):
            raise InputError("breakpoints must be strictly increasing")
        object.__setattr__(self, "points", pts)

    @property
    def T(self) -> float:
        return float(self.points[-1])

    @property
    def n_intervals(self) -> int:
        return self.points.size - 1

    def interval(self, k: int) -> tuple[float, float]:
        return float(self.points[k]), float(self.points[k + 1])

    def locate(self, t: float) -> int:
        """Index of the interval owning ``t`` (right-continuous)."""
        if not (0.0 <= t <= self.T):
            raise DomainError(f"t={t!r} outside [0, {self.T!r}]")
        k = bisect.bisect_right(self.points.tolist(), t) - 1
        return min(k, self.n_intervals - 1)

    def merge(self, other: "Breakpoints") -> "Breakpoints":
        if other.T != self.T:
            raise InputError(f"horizons differ: {self.T} vs {other.T}")
        return Breakpoints(np.union1d(self.points, other.points))

    def __eq__(self, other) -> bool:
        return isinstance(other, Breakpoints) and np.array_equal(self.points, other.points)

    def __hash__(self) -> int:
        return hash(self.points.tobytes())

    def __repr__(self) -> str:
        return f"Breakpoints({self.points.tolist()})"


class PiecewiseFn:
    """Scalar piecewise polynomial on a :class:`Breakpoints` partition.

    Pieces are coefficient vectors in ascending degree, expressed in the global
    time variable ``t`` (not shifted to the piece start).
    """

    __slots__ = ("breakpoints", "pieces")

    def __init__(self, breakpoints: Breakpoints | Sequence[float], pieces: Sequence[Sequence[float]]):
        if not isinstance(breakpoints, Breakpoints):
            breakpoints = Breakpoints(breakpoints)
        pieces = tuple(_frozen(np.atleast_1d(p)) for p in pieces)
        if len(pieces) != breakpoints.n_intervals:
            raise InputError(
                f"{len(pieces)} pieces for {breakpoints.n_intervals} intervals"
            )
        for p in pieces:
            if p.ndim != 1 or p.size == 0:
                raise InputError("each piece needs a non-empty coefficient vector")
            if not np.all(np.isfinite(p)):
                raise InputError("non-finite coefficient")
        object.__setattr__(self, "breakpoints", breakpoints)
        object.__setattr__(self, "pieces", pieces)

    def __setattr__(self, name, value):
        raise AttributeError("PiecewiseFn is immutable")

    @classmethod
    def constant(cls, value: float, breakpoints: Breakpoints | Sequence[float]) -> "PiecewiseFn":
        if not isinstance(breakpoints, Breakpoints):
            breakpoints = Breakpoints(breakpoints)
        return cls(breakpoints, [[value]] * breakpoints.n_intervals)

    @property
    def T(self) -> float:
        return self.breakpoints.T

    @property
    def degree(self) -> int:
        return max(_trimmed(p).size - 1 for p in self.pieces)

    def piece_value(self, k: int, t: float) -> float:
        """Value of piece ``k``'s polynomial at ``t`` (no ownership check)."""
        return float(P.polyval(t, self.pieces[k]))

    def __call__(self, t: float) -> float:
        return self.piece_value(self.breakpoints.locate(t), t)

    def refine(self, breakpoints: Breakpoints) -> "PiecewiseFn":
        """Re-express on a finer partition containing this one's breakpoints."""
        if breakpoints == self.breakpoints:
            return self
        if breakpoints.T != self.T or not np.all(np.isin(self.breakpoints.points, breakpoints.points)):
            raise InputError("target partition does not refine this function's partition")
        pieces = []
        for k in range(breakpoints.n_intervals):
            lo, _ = breakpoints.interval(k)
            pieces.append(self.pieces[self.breakpoints.locate(lo)])
        return PiecewiseFn(breakpoints, pieces)

    def _aligned(self, other: "PiecewiseFn") -> tuple["PiecewiseFn", "PiecewiseFn"]:
        if other.breakpoints == self.breakpoints:
            return self, other
        bp = self.breakpoints.merge(other.breakpoints)
        return self.refine(bp), other.refine(bp)

    def __add__(self, other):
        if isinstance(other, (int, float)):
            other = PiecewiseFn.constant(float(other), self.breakpoints)
        f, g = self._aligned(other)
        return PiecewiseFn(f.breakpoints, [P.polyadd(p, q) for p, q in zip(f.pieces, g.pieces)])

    __radd__ = __add__

    def __neg__(self):
        return PiecewiseFn(self.breakpoints, [-p for p in self.pieces])

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return PiecewiseFn(self.breakpoints, [float(other) * p for p in self.pieces])
        f, g = self._aligned(other)
        return PiecewiseFn(f.breakpoints, [P.polymul(p, q) for p, q in zip(f.pieces, g.pieces)])

    __rmul__ = __mul__

    def __repr__(self) -> str:
        pcs = ", ".join(str(p.tolist()) for p in self.pieces)
        return f"PiecewiseFn({self.breakpoints.points.tolist()}, [{pcs}])"


def _trimmed(p: np.ndarray) -> np.ndarray:
    nz = np.flatnonzero(p)
    return p[: nz[-1] + 1] if nz.size else p[:1]


def evaluate(f: PiecewiseFn, t: float) -> float:
    return f(t)


def integrate(f: PiecewiseFn, a: float = 0.0, b: float | None = None) -> float:
    """Exact integral of ``f`` over ``[a, b]`` (defaults to the whole horizon)."""
    if b is None:
        b = f.T
    if a > b:
        raise DomainError(f"integration bounds reversed: a={a!r} > b={b!r}")
    if a < 0.0 or b > f.T:
        raise DomainError(f"[{a}, {b}] not inside [0, {f.T}]")
    total = 0.0
    pts = f.breakpoints.points
    for k, coeffs in enumerate(f.pieces):
        lo, hi = max(a, pts[k]), min(b, pts[k + 1])
        if hi <= lo:
            continue
        anti = P.polyint(coeffs)
        total += float(P.polyval(hi, anti) - P.polyval(lo, anti))
    return total


class TimeGrid:
    """Sampling nodes on ``[0, T]``, each tagged with its owning interval.

    Interior breakpoints appear twice: once as the right end of the interval
    before them (owner ``k-1``, a left limit) and once as the left end of the
    interval after them (owner ``k``).  Piecewise data is therefore never
    evaluated across a piece boundary.  ``times`` gives the distinct node
    times.
    """

    __slots__ = ("breakpoints", "nodes", "owners")

    def __init__(self, breakpoints: Breakpoints, nodes: Sequence[float], owners: Sequence[int]):
        nodes = _frozen(nodes)
        owners = np.array(owners, dtype=int)
        owners.setflags(write=False)
        if nodes.shape != owners.shape:
            raise InputError("nodes and owners differ in length")
        order_ok = np.all((np.diff(nodes) > 0) | ((np.diff(nodes) == 0) & (np.diff(owners) == 1)))
        if not order_ok:
            raise InputError("grid nodes must be sorted, with duplicates only at breakpoints")
        pts = breakpoints.points
        for t, k in zip(nodes, owners):
            if not (0 <= k < breakpoints.n_intervals and pts[k] <= t <= pts[k + 1]):
                raise InputError(f"node t={t} not inside its owner interval {k}")
        object.__setattr__(self, "breakpoints", breakpoints)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "owners", owners)

    def __setattr__(self, name, value):
        raise AttributeError("TimeGrid is immutable")

    @classmethod
    def from_times(cls, breakpoints: Breakpoints, times: Iterable[float]) -> "TimeGrid":
        """Grid on the given times plus every breakpoint, with limit duplicates."""
        times = np.union1d(np.asarray(list(times), dtype=float), breakpoints.points)
        if times[0] < 0 or times[-1] > breakpoints.T:
            raise DomainError("grid times outside [0, T]")
        nodes, owners = [], []
        pts = breakpoints.points
        for k in range(breakpoints.n_intervals):
            lo, hi = pts[k], pts[k + 1]
            sel = times[(times >= lo) & (times <= hi)]
            nodes.extend(sel.tolist())
            owners.extend([k] * sel.size)
        return cls(breakpoints, nodes, owners)

    @property
    def times(self) -> np.ndarray:
        return np.unique(self.nodes)

    def __len__(self) -> int:
        return self.nodes.size

    def __iter__(self):
        return zip(self.nodes.tolist(), self.owners.tolist())

    def at_right_end(self, j: int) -> bool:
        """True if node ``j`` is the right endpoint of its owner interval."""
        return bool(self.nodes[j] == self.breakpoints.points[self.owners[j] + 1])

    def segments(self):
        """Yield ``(j, j+1)`` index pairs of consecutive nodes in the same interval."""
        for j in range(len(self) - 1):
            if self.owners[j] == self.owners[j + 1] and self.nodes[j + 1] > self.nodes[j]:
                yield j, j + 1

    def __repr__(self) -> str:
        return f"TimeGrid({len(self)} nodes on [0, {self.breakpoints.T}])"


def refine_grid(bp: Breakpoints, nodes_per_interval: int) -> TimeGrid:
    """Split every breakpoint interval into ``nodes_per_interval`` equal steps."""
    if nodes_per_interval < 1:
        raise InputError("nodes_per_interval must be >= 1")
    nodes, owners = [], []
    for k in range(bp.n_intervals):
        lo, hi = bp.interval(k)
        step = (hi - lo) / nodes_per_interval
        local = [lo + j * step for j in range(nodes_per_interval)] + [hi]
        nodes.extend(local)
        owners.extend([k] * len(local))
    return TimeGrid(bp, nodes, owners)
