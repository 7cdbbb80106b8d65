"""Dense two-phase simplex for ``min cᵀz  s.t.  Az <= b`` with free ``z``.

Free variables are split as ``z = z⁺ - z⁻`` and every row gets a slack, so the
tableau works on ``[A, -A, I] x = b, x >= 0``.  Pivoting follows Bland's rule,
which rules out cycling and makes results reproducible.  A brute-force vertex
enumerator is provided as an independent test oracle for tiny problems.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError

FEAS_TOL = 1e-9
KKT_TOL = 1e-9
CS_TOL = 1e-9
PIVOT_TOL = 1e-11


class Status(str, enum.Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class FiniteLP:
    A: np.ndarray
    b: np.ndarray
    c: np.ndarray

    def __post_init__(self):
        A = np.array(self.A, dtype=float)
        c = np.array(self.c, dtype=float).reshape(-1)
        if A.size == 0:
            A = A.reshape(0, c.size)
        b = np.array(self.b, dtype=float).reshape(-1)
        if A.ndim != 2 or A.shape != (b.size, c.size):
            raise InputError(f"inconsistent LP dimensions: A{A.shape}, b({b.size}), c({c.size})")
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b)) and np.all(np.isfinite(c))):
            raise InputError("LP data must be finite")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)

    @property
    def m(self) -> int:
        return self.A.shape[0]

    @property
    def n(self) -> int:
        return self.A.shape[1]


@dataclass
class LPSolution:
    status: Status
    z: np.ndarray | None = None
    objective: float = float("nan")
    dual: np.ndarray | None = None
    active_rows: tuple[int, ...] = ()
    ray: np.ndarray | None = field(default=None, repr=False)

    @property
    def optimal(self) -> bool:
        return self.status is Status.OPTIMAL


class _Tableau:
    """Standard-form tableau ``min cᵀx, Ax = b, x >= 0`` with ``b >= 0``."""

    def __init__(self, A: np.ndarray, b: np.ndarray, n_real: int):
        m, N = A.shape
        self.m, self.n_real = m, n_real
        # artificial columns N..N+m-1 give the phase-one starting basis
        self.T = np.zeros((m + 1, N + m + 1))
        self.T[:m, :N] = A
        self.T[:m, N : N + m] = np.eye(m)
        self.T[:m, -1] = b
        self.basis = list(range(N, N + m))
        self.n_cols = N + m
        self.allowed = np.ones(N + m, dtype=bool)

    def set_cost(self, cost: np.ndarray) -> None:
        self.T[-1, :-1] = cost
        self.T[-1, -1] = 0.0
        for r, j in enumerate(self.basis):
            if self.T[-1, j] != 0.0:
                self.T[-1] -= self.T[-1, j] * self.T[r]

    def pivot(self, r: int, s: int) -> None:
        T = self.T
        T[r] /= T[r, s]
        for i in range(T.shape[0]):
            if i != r and T[i, s] != 0.0:
                T[i] -= T[i, s] * T[r]
        self.basis[r] = s

    def run(self, max_iter: int = 5000) -> int | None:
        """Iterate Bland pivots; returns an entering column if unbounded."""
        T = self.T
        for _ in range(max_iter):
            reduced = T[-1, :-1]
            cand = np.flatnonzero((reduced < -PIVOT_TOL) & self.allowed)
            if cand.size == 0:
                return None
            s = int(cand[0])
            col = T[:-1, s]
            rows = np.flatnonzero(col > PIVOT_TOL)
            if rows.size == 0:
                return s
            ratios = T[rows, -1] / col[rows]
            best = ratios.min()
            ties = rows[ratios <= best + PIVOT_TOL * max(1.0, abs(best))]
            r = int(min(ties, key=lambda i: self.basis[i]))
            self.pivot(r, s)
        raise RuntimeError("simplex iteration limit reached")

    def values(self) -> np.ndarray:
        x = np.zeros(self.n_cols)
        for r, j in enumerate(self.basis):
            x[j] = self.T[r, -1]
        return x


def _standard_simplex(A: np.ndarray, b: np.ndarray, c: np.ndarray, tol: float = FEAS_TOL):
    """Two-phase simplex on ``min cᵀx, Ax = b, x >= 0``.

    Returns ``(status, x, y, ray)`` where ``y`` solves the dual ``Aᵀy <= c`` at
    the final basis and ``ray`` is a recession direction when unbounded.
    """
    m, N = A.shape
    sign = np.where(b < 0, -1.0, 1.0)
    As, bs = A * sign[:, None], b * sign
    tab = _Tableau(As, bs, N)

    phase1 = np.concatenate([np.zeros(N), np.ones(m)])
    tab.set_cost(phase1)
    tab.run()
    infeas = -tab.T[-1, -1]
    if infeas > tol * max(1.0, np.abs(bs).max(initial=0.0)):
        return Status.INFEASIBLE, None, None, None

    # drive zero-level artificials out of the basis; rows that cannot pivot are redundant
    redundant = []
    for r, j in enumerate(list(tab.basis)):
        if j < N:
            continue
        nz = np.flatnonzero(np.abs(tab.T[r, :N]) > PIVOT_TOL)
        if nz.size:
            tab.pivot(r, int(nz[0]))
        else:
            redundant.append(r)
    tab.allowed[N:] = False

    tab.set_cost(np.concatenate([c, np.zeros(m)]))
    entering = tab.run()
    if entering is not None:
        ray = np.zeros(tab.n_cols)
        ray[entering] = 1.0
        for r, j in enumerate(tab.basis):
            ray[j] = -tab.T[r, entering]
        return Status.UNBOUNDED, None, None, ray[:N]

    x = tab.values()[:N]
    keep = [r for r in range(m) if r not in redundant]
    B = As[np.ix_(keep, [tab.basis[r] for r in keep])]
    y = np.zeros(m)
    if keep:
        y_keep = np.linalg.solve(B.T, c[[tab.basis[r] for r in keep]])
        y[keep] = y_keep
    return Status.OPTIMAL, x, y * sign, None


def solve_lp(lp: FiniteLP, feas_tol: float = FEAS_TOL) -> LPSolution:
    """Minimise ``cᵀz`` over ``Az <= b`` with ``z`` free in sign.

    On success ``dual`` holds ``u >= 0`` with ``c + Aᵀu = 0`` and
    ``u_i (b - Az)_i = 0``.
    """
    m, n = lp.m, lp.n
    if m == 0:
        if np.any(lp.c != 0):
            return LPSolution(Status.UNBOUNDED, ray=-lp.c / np.abs(lp.c).max())
        return LPSolution(Status.OPTIMAL, np.zeros(n), 0.0, np.zeros(0), ())
    A_std = np.hstack([lp.A, -lp.A, np.eye(m)])
    c_std = np.concatenate([lp.c, -lp.c, np.zeros(m)])
    status, x, y, ray = _standard_simplex(A_std, lp.b, c_std, feas_tol)
    if status is Status.INFEASIBLE:
        return LPSolution(status)
    if status is Status.UNBOUNDED:
        return LPSolution(status, ray=ray[:n] - ray[n : 2 * n])
    z = x[:n] - x[n : 2 * n]
    u = -y
    u[(u < 0) & (u > -KKT_TOL)] = 0.0
    slack = lp.b - lp.A @ z
    active = tuple(int(i) for i in np.flatnonzero(np.abs(slack) <= feas_tol * max(1.0, np.abs(lp.b).max())))
    return LPSolution(Status.OPTIMAL, z, float(lp.c @ z), u, active)


def is_feasible(A_eq: np.ndarray, b_eq: np.ndarray, tol: float = FEAS_TOL) -> bool:
    """Phase-one test for ``{x >= 0 : A_eq x = b_eq}`` being non-empty."""
    A_eq = np.atleast_2d(np.asarray(A_eq, dtype=float))
    b_eq = np.asarray(b_eq, dtype=float).reshape(-1)
    if A_eq.shape[1] == 0:
        return bool(np.all(np.abs(b_eq) <= tol))
    status, *_ = _standard_simplex(A_eq, b_eq, np.zeros(A_eq.shape[1]), tol)
    return status is Status.OPTIMAL


ORACLE_MAX_N = 3
ORACLE_MAX_M = 8


def _null_direction(M: np.ndarray, n: int) -> np.ndarray | None:
    """Unit vector spanning ``null(M)`` when that null space is a line."""
    if M.shape[0] == 0:
        return np.ones(1) if n == 1 else None
    _, s, vt = np.linalg.svd(M)
    rank = int(np.sum(s > 1e-10 * max(1.0, s[0])))
    return vt[-1] if rank == n - 1 else None


def enumerate_oracle(lp: FiniteLP, tol: float = 1e-9) -> LPSolution:
    """Solve a tiny LP by enumerating minimal faces and extreme rays.

    Works in the orthogonal complement of the lineality space ``null(A)``:
    every non-empty feasible set has a point there defined by ``rank(A)``
    tight rows, and the recession cone (modulo lineality) is generated by
    directions with ``rank(A) - 1`` tight rows.
    """
    m, n = lp.m, lp.n
    if n > ORACLE_MAX_N or m > ORACLE_MAX_M:
        raise InputError(f"oracle limited to n <= {ORACLE_MAX_N}, m <= {ORACLE_MAX_M}")
    A, b, c = lp.A, lp.b, lp.c
    if m:
        _, s, vt = np.linalg.svd(A)
        r = int(np.sum(s > 1e-10 * max(1.0, s[0])))
    else:
        vt, r = np.eye(n), 0
    null = vt[r:].T  # n x (n - r)
    scale = max(1.0, np.abs(b).max(initial=0.0))

    best_z, best_val = None, np.inf
    for S in itertools.combinations(range(m), r):
        M = np.vstack([A[list(S)], null.T])
        if np.linalg.matrix_rank(M) < n:
            continue
        z = np.linalg.solve(M, np.concatenate([b[list(S)], np.zeros(n - r)]))
        if m and np.max(A @ z - b) > tol * scale:
            continue
        val = float(c @ z)
        if val < best_val:
            best_z, best_val = z, val
    if best_z is None:
        return LPSolution(Status.INFEASIBLE)

    if null.size and np.max(np.abs(c @ null)) > tol:
        return LPSolution(Status.UNBOUNDED, ray=-(null @ (c @ null)))
    for S in itertools.combinations(range(m), r - 1) if r >= 1 else ():
        d = _null_direction(np.vstack([A[list(S)], null.T]), n)
        if d is None:
            continue
        for dd in (d, -d):
            if np.max(A @ dd) <= tol and c @ dd < -tol:
                return LPSolution(Status.UNBOUNDED, ray=dd)

    slack = b - A @ best_z
    active = tuple(int(i) for i in np.flatnonzero(np.abs(slack) <= tol * scale))
    return LPSolution(Status.OPTIMAL, best_z, best_val, None, active)
