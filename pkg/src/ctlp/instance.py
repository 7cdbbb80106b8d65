"""Problem instances, trajectories and their file formats.

An instance holds the data of

    minimise  ∫₀ᵀ c(t)ᵀ z(t) dt   subject to  A(t) z(t) <= b(t)  for a.e. t,

with every entry a :class:`~ctlp.timefunc.PiecewiseFn` on one shared
breakpoint set.  "Almost everywhere" statements are checked on grid nodes
only; nothing here claims more than grid resolution.
"""

from __future__ import annotations

import csv
import enum
import functools
import io
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import jsonschema
import numpy as np

from .errors import DomainError, InputError, LoadError
from .linalg import spectral_norm
from .simplex import FiniteLP, Status, solve_lp
from .timefunc import MAX_DATA_DEGREE, Breakpoints, PiecewiseFn, TimeGrid, refine_grid

AUDIT_NODES = 64

_NUM = {"type": ["string", "number"]}
_PIECES = {"type": "array", "items": {"type": "array", "minItems": 1, "items": _NUM}}
_ENTRY = {
    "oneOf": [
        _PIECES,
        {
            "type": "object",
            "required": ["breakpoints", "pieces"],
            "properties": {"breakpoints": {"type": "array", "items": _NUM}, "pieces": _PIECES},
            "additionalProperties": False,
        },
    ]
}
INSTANCE_SCHEMA = {
    "type": "object",
    "required": ["T", "m", "n", "breakpoints", "A", "b", "c"],
    "properties": {
        "schema": {"const": 1},
        "sense": {"enum": ["primal", "dual"]},
        "T": _NUM,
        "m": {"type": "integer", "minimum": 0},
        "n": {"type": "integer", "minimum": 1},
        "breakpoints": {"type": "array", "minItems": 2, "items": _NUM},
        "A": {"type": "array", "items": {"type": "array", "items": _ENTRY}},
        "b": {"type": "array", "items": _ENTRY},
        "c": {"type": "array", "items": _ENTRY},
    },
}


class CTLPInstance:
    """Time-varying LP data ``(A(t), b(t), c(t))`` on ``[0, T]``."""

    def __init__(self, A: Sequence[Sequence[PiecewiseFn]], b: Sequence[PiecewiseFn], c: Sequence[PiecewiseFn]):
        A = [list(row) for row in A]
        b, c = list(b), list(c)
        m, n = len(b), len(c)
        if n == 0:
            raise InputError("instance needs at least one variable")
        if len(A) != m or any(len(row) != n for row in A):
            raise InputError(f"A must be {m}x{n}")
        fns = [f for row in A for f in row] + b + c
        bp = fns[0].breakpoints
        for f in fns[1:]:
            bp = bp.merge(f.breakpoints) if f.breakpoints != bp else bp
        self.breakpoints = bp
        self.A = tuple(tuple(f.refine(bp) for f in row) for row in A)
        self.b = tuple(f.refine(bp) for f in b)
        self.c = tuple(f.refine(bp) for f in c)
        self.m, self.n = m, n

    @property
    def T(self) -> float:
        return self.breakpoints.T

    def at(self, t: float, piece: int | None = None) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Pointwise ``(A, b, c)``; ``piece`` selects a piece explicitly (for left limits)."""
        if piece is None:
            piece = self.breakpoints.locate(t)
        elif not (0.0 <= t <= self.T):
            raise DomainError(f"t={t!r} outside [0, {self.T!r}]")
        A = np.array([[f.piece_value(piece, t) for f in row] for row in self.A]).reshape(self.m, self.n)
        b = np.array([f.piece_value(piece, t) for f in self.b])
        c = np.array([f.piece_value(piece, t) for f in self.c])
        return A, b, c

    def lp_at(self, t: float, piece: int | None = None) -> FiniteLP:
        return FiniteLP(*self.at(t, piece))

    @functools.cached_property
    def data_bound(self) -> float:
        """Largest of ``||A||_2``, ``||b||_2``, ``||c||_2`` over the audit grid."""
        grid = refine_grid(self.breakpoints, AUDIT_NODES)
        K = 0.0
        for t, k in grid:
            A, b, c = self.at(t, k)
            K = max(K, spectral_norm(A) if A.size else 0.0, float(np.linalg.norm(b)), float(np.linalg.norm(c)))
        return K

    def restrict(self, T_end: float) -> "CTLPInstance":
        """Same data on the shorter horizon ``[0, T_end]``."""
        pts = self.breakpoints.points
        if not (0.0 < T_end <= self.T):
            raise DomainError(f"T_end={T_end} outside (0, {self.T}]")
        new_pts = np.append(pts[pts < T_end], T_end)
        bp = Breakpoints(new_pts)

        def cut(f: PiecewiseFn) -> PiecewiseFn:
            return PiecewiseFn(bp, f.pieces[: bp.n_intervals])

        return CTLPInstance([[cut(f) for f in row] for row in self.A], [cut(f) for f in self.b], [cut(f) for f in self.c])

    def __repr__(self) -> str:
        return f"CTLPInstance(m={self.m}, n={self.n}, T={self.T}, breakpoints={self.breakpoints.points.tolist()})"


@dataclass(frozen=True)
class CDPInstance:
    """Dual of a primal instance: maximise ``∫ bᵀw`` s.t. ``Aᵀw = c``, ``w <= 0``.

    Shares the primal's coefficient functions; no data is copied.
    """

    primal: CTLPInstance
    sense: str = field(default="dual", init=False)

    @property
    def T(self) -> float:
        return self.primal.T

    @property
    def breakpoints(self) -> Breakpoints:
        return self.primal.breakpoints

    @property
    def n_vars(self) -> int:
        return self.primal.m

    @property
    def n_eq(self) -> int:
        return self.primal.n

    def at(self, t: float, piece: int | None = None) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Pointwise ``(Aᵀ, c, b)``: equality matrix, its right-hand side, objective."""
        A, b, c = self.primal.at(t, piece)
        return A.T, c, b


# --- serialisation -----------------------------------------------------------


def _num(x) -> float:
    try:
        v = float(x)
    except (TypeError, ValueError):
        raise InputError(f"not a decimal number: {x!r}") from None
    if not np.isfinite(v):
        raise InputError(f"non-finite value {x!r}")
    return v


def _fmt(x: float) -> str:
    return repr(float(x))


def _path(parts) -> str:
    out = "$"
    for p in parts:
        out += f"[{p}]" if isinstance(p, int) else f".{p}"
    return out


def instance_from_dict(doc: dict) -> CTLPInstance:
    """Validate a parsed instance document and build the instance."""
    try:
        jsonschema.validate(doc, INSTANCE_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise LoadError(exc.message, _path(exc.absolute_path)) from None
    if doc.get("sense", "primal") == "dual":
        raise LoadError("document describes a dual instance; load the primal instead", "$.sense")
    try:
        T = _num(doc["T"])
        bp_pts = [_num(x) for x in doc["breakpoints"]]
    except InputError as exc:
        raise LoadError(str(exc), "$.breakpoints") from None
    try:
        bp = Breakpoints(bp_pts)
    except InputError as exc:
        raise LoadError(str(exc), "$.breakpoints") from None
    if bp.T != T:
        raise LoadError(f"last breakpoint {bp.T} differs from T={T}", "$.breakpoints")
    m, n = doc["m"], doc["n"]

    def entry(obj, where: str) -> PiecewiseFn:
        try:
            if isinstance(obj, dict):
                own = Breakpoints([_num(x) for x in obj["breakpoints"]])
                if own.T != T:
                    raise InputError(f"entry horizon {own.T} differs from T={T}")
                pieces = obj["pieces"]
            else:
                own, pieces = bp, obj
            f = PiecewiseFn(own, [[_num(x) for x in p] for p in pieces])
        except InputError as exc:
            raise LoadError(str(exc), where) from None
        if f.degree > MAX_DATA_DEGREE:
            raise LoadError(f"degree {f.degree} exceeds {MAX_DATA_DEGREE}", where)
        return f

    if len(doc["A"]) != m:
        raise LoadError(f"expected {m} rows, got {len(doc['A'])}", "$.A")
    for i, row in enumerate(doc["A"]):
        if len(row) != n:
            raise LoadError(f"expected {n} columns, got {len(row)}", f"$.A[{i}]")
    if len(doc["b"]) != m:
        raise LoadError(f"expected {m} entries, got {len(doc['b'])}", "$.b")
    if len(doc["c"]) != n:
        raise LoadError(f"expected {n} entries, got {len(doc['c'])}", "$.c")
    A = [[entry(doc["A"][i][j], f"$.A[{i}][{j}]") for j in range(n)] for i in range(m)]
    b = [entry(doc["b"][i], f"$.b[{i}]") for i in range(m)]
    c = [entry(doc["c"][j], f"$.c[{j}]") for j in range(n)]
    if m == 0:
        return CTLPInstance([], [], c)
    return CTLPInstance(A, b, c)


def load_instance(document: str | bytes | dict) -> CTLPInstance:
    """Parse a JSON instance document (text or already-decoded mapping)."""
    if isinstance(document, (str, bytes)):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise LoadError(f"invalid JSON: {exc.msg} (line {exc.lineno})") from None
    if not isinstance(document, dict):
        raise LoadError("instance document must be a JSON object")
    return instance_from_dict(document)


def read_instance(path: str | Path) -> CTLPInstance:
    return load_instance(Path(path).read_text())


def instance_to_dict(inst: CTLPInstance | CDPInstance) -> dict:
    sense = "primal"
    if isinstance(inst, CDPInstance):
        sense, inst = "dual", inst.primal

    def pieces(f: PiecewiseFn):
        return [[_fmt(x) for x in p] for p in f.pieces]

    return {
        "schema": 1,
        "sense": sense,
        "T": _fmt(inst.T),
        "m": inst.m,
        "n": inst.n,
        "breakpoints": [_fmt(x) for x in inst.breakpoints.points],
        "A": [[pieces(f) for f in row] for row in inst.A],
        "b": [pieces(f) for f in inst.b],
        "c": [pieces(f) for f in inst.c],
    }


def dump_instance(inst: CTLPInstance | CDPInstance) -> str:
    return json.dumps(instance_to_dict(inst), indent=1)


# --- trajectories ------------------------------------------------------------


class Interpolation(str, enum.Enum):
    PIECEWISE_LINEAR = "PiecewiseLinear"
    PIECEWISE_CONSTANT_RIGHT = "PiecewiseConstantRight"


class Trajectory:
    """Vector-valued function of time given by its values at grid nodes."""

    def __init__(self, grid: TimeGrid, values, interpolation: Interpolation = Interpolation.PIECEWISE_LINEAR):
        vals = np.array(values, dtype=float)
        if vals.ndim == 1:
            vals = vals.reshape(-1, 1)
        if vals.shape[0] != len(grid):
            raise InputError(f"{vals.shape[0]} value rows for {len(grid)} grid nodes")
        if not np.all(np.isfinite(vals)):
            raise InputError("trajectory values must be finite")
        vals.setflags(write=False)
        self.grid = grid
        self.values = vals
        self.interpolation = Interpolation(interpolation)

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    @classmethod
    def sample(cls, grid: TimeGrid, fn: Callable[[float, int], Sequence[float]], **kw) -> "Trajectory":
        """Evaluate ``fn(t, interval)`` at every node."""
        return cls(grid, [np.asarray(fn(t, k), dtype=float) for t, k in grid], **kw)

    @classmethod
    def constant(cls, grid: TimeGrid, value: Sequence[float]) -> "Trajectory":
        return cls(grid, np.tile(np.asarray(value, dtype=float), (len(grid), 1)))

    def map(self, fn: Callable[[np.ndarray], np.ndarray]) -> "Trajectory":
        return Trajectory(self.grid, fn(self.values), self.interpolation)

    def component(self, i: int) -> PiecewiseFn:
        """Component ``i`` as a piecewise polynomial on the grid's distinct times."""
        bp = Breakpoints(self.grid.times)
        pieces = []
        for j, jn in self.grid.segments():
            t0, t1 = self.grid.nodes[j], self.grid.nodes[jn]
            v0, v1 = self.values[j, i], self.values[jn, i]
            if self.interpolation is Interpolation.PIECEWISE_LINEAR:
                slope = (v1 - v0) / (t1 - t0)
                pieces.append([v0 - slope * t0, slope])
            else:
                pieces.append([v0])
        return PiecewiseFn(bp, pieces)

    def to_csv(self, dest: str | Path | io.TextIOBase | None = None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t"] + [f"v{i + 1}" for i in range(self.dim)])
        for t, row in zip(self.grid.nodes, self.values):
            w.writerow([f"{t:.17g}"] + [f"{v:.17g}" for v in row])
        text = buf.getvalue()
        if isinstance(dest, (str, Path)):
            Path(dest).write_text(text)
        elif dest is not None:
            dest.write(text)
        return text

    @classmethod
    def read_csv(cls, path: str | Path, breakpoints: Breakpoints, **kw) -> "Trajectory":
        return cls.from_csv(Path(path).read_text(), breakpoints, **kw)

    @classmethod
    def from_csv(cls, text: str, breakpoints: Breakpoints, **kw) -> "Trajectory":
        """Parse a ``t,v1,...`` table; a breakpoint listed twice gives left then right limit.

        A breakpoint listed once is used for both one-sided limits.  Every
        breakpoint must appear.
        """
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or not rows[0] or rows[0][0].strip() != "t":
            raise InputError("trajectory CSV must start with a 't,v1,...' header")
        try:
            data = [[float(x) for x in r] for r in rows[1:] if r]
        except ValueError as exc:
            raise InputError(f"bad number in trajectory CSV: {exc}") from None
        if not data:
            raise InputError("trajectory CSV has no rows")
        width = len(rows[0])
        if any(len(r) != width for r in data):
            raise InputError("ragged trajectory CSV")
        ts = np.array([r[0] for r in data])
        vals = np.array([r[1:] for r in data])
        if np.any(np.diff(ts) < 0):
            raise InputError("trajectory times must be non-decreasing")
        pts = breakpoints.points
        missing = [p for p in pts if p not in ts]
        if missing:
            raise InputError(f"trajectory lacks breakpoint rows at t={missing}")
        nodes, owners, out = [], [], []
        j = 0
        while j < len(ts):
            t = ts[j]
            dup = j + 1 < len(ts) and ts[j + 1] == t
            if dup and t not in pts:
                raise InputError(f"repeated time t={t} is not a breakpoint")
            k = breakpoints.locate(t)
            interior = t in pts and 0.0 < t < breakpoints.T
            if interior:
                left, right = vals[j], vals[j + 1] if dup else vals[j]
                nodes += [t, t]
                owners += [k - 1, k]
                out += [left, right]
                j += 2 if dup else 1
            else:
                nodes.append(t)
                owners.append(k)
                out.append(vals[j])
                j += 1
        return cls(TimeGrid(breakpoints, nodes, owners), np.array(out), **kw)


def trajectory_from_csv(path: str | Path, inst: CTLPInstance, **kw) -> Trajectory:
    return Trajectory.read_csv(path, inst.breakpoints, **kw)


def eval_instance(inst: CTLPInstance, t: float, piece: int | None = None):
    return inst.at(t, piece)


def _check_grid(inst: CTLPInstance, traj: Trajectory, dim: int, what: str) -> None:
    if traj.dim != dim:
        raise InputError(f"{what} has dimension {traj.dim}, expected {dim}")
    if not grid_covers(traj.grid, inst):
        raise InputError(f"{what} grid does not contain the instance breakpoints")


def grid_covers(grid: TimeGrid, inst: CTLPInstance) -> bool:
    """Every data breakpoint is a grid breakpoint, so both one-sided limits are nodes."""
    if grid.breakpoints == inst.breakpoints:
        return True
    return grid.breakpoints.T == inst.T and bool(np.all(np.isin(inst.breakpoints.points, grid.breakpoints.points)))


def feasibility_residual(inst: CTLPInstance, z: Trajectory) -> float:
    """``sup_nodes max(0, max_i (a_iᵀz - b_i))``; zero means feasible on the grid."""
    _check_grid(inst, z, inst.n, "z")
    worst = 0.0
    for j in range(len(z.grid)):
        A, b, _ = node_data(inst, z.grid, j)
        if inst.m:
            worst = max(worst, float(np.max(A @ z.values[j] - b)))
    return worst


def data_piece(inst: CTLPInstance, grid: TimeGrid, j: int) -> int:
    """Instance piece to use at grid node ``j`` (grids may be finer than the data)."""
    if grid.breakpoints == inst.breakpoints:
        return int(grid.owners[j])
    t = float(grid.nodes[j])
    if grid.at_right_end(j):
        # left limit: the data piece ending at or after t
        k = inst.breakpoints.locate(t)
        return k - 1 if t == inst.breakpoints.points[k] and k > 0 else k
    return inst.breakpoints.locate(t)


def node_data(inst: CTLPInstance, grid: TimeGrid, j: int):
    """``(A, b, c)`` at grid node ``j`` honouring its one-sided limit."""
    return inst.at(float(grid.nodes[j]), data_piece(inst, grid, j))


class VerdictKind(str, enum.Enum):
    BOUNDED = "Bounded"
    UNBOUNDED_AT = "UnboundedAt"
    INFEASIBLE_AT = "InfeasibleAt"


@dataclass(frozen=True)
class BoundednessVerdict:
    kind: VerdictKind
    t: float | None = None
    direction: tuple[float, ...] | None = None

    def __bool__(self) -> bool:
        return self.kind is VerdictKind.BOUNDED


def boundedness_probe(inst: CTLPInstance, grid: TimeGrid) -> BoundednessVerdict:
    """Check every pointwise polyhedron is non-empty and bounded.

    Solves ``max zⱼ`` for all ``j`` and then ``min zⱼ``; the first failure is
    reported.  Passing is a grid-level diagnostic, not a proof for a.e. ``t``.
    """
    eye = np.eye(inst.n)
    for j in range(len(grid)):
        A, b, _ = node_data(inst, grid, j)
        t = float(grid.nodes[j])
        for sign in (1.0, -1.0):
            for col in range(inst.n):
                sol = solve_lp(FiniteLP(A, b, -sign * eye[col]))
                if sol.status is Status.INFEASIBLE:
                    return BoundednessVerdict(VerdictKind.INFEASIBLE_AT, t)
                if sol.status is Status.UNBOUNDED:
                    return BoundednessVerdict(VerdictKind.UNBOUNDED_AT, t, tuple(sign * eye[col]))
    return BoundednessVerdict(VerdictKind.BOUNDED)
