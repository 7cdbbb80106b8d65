"""Pointwise solution of a continuous-time LP on a time grid.

The constraint ``A(t) z(t) <= b(t)`` and the integrand ``c(t)ᵀz(t)`` never
couple two time instants, so minimising the finite LP at each node and
interpolating gives the grid solution.

When the LP at a node has several optimal vertices (typical at breakpoints and
where the active set changes), the vertex is chosen to match the neighbouring
optimum inside the node's owner interval: a probe LP is solved a short step
into the interval, and its active rows are re-solved at the node.  This keeps
the interpolated trajectory affine wherever the true optimum is.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InputError
from .instance import CDPInstance, CTLPInstance, Trajectory, _check_grid, data_piece, grid_covers, node_data
from .linalg import pinv, svd
from .simplex import FEAS_TOL, FiniteLP, LPSolution, Status, solve_lp
from .timefunc import Breakpoints, PiecewiseFn, TimeGrid, integrate

PROBE_STEP = 1e-6
_TIE_TOL = 1e-9


@dataclass
class SolveResult:
    """Grid solution; ``z`` and ``u`` are ``None`` unless every node is optimal."""

    status: Status
    per_node_status: list[Status]
    z: Trajectory | None = None
    u: Trajectory | None = None
    objective: float = float("nan")
    witness: tuple[int, float] | None = None
    node_objectives: np.ndarray | None = field(default=None, repr=False)

    @property
    def optimal(self) -> bool:
        return self.status is Status.OPTIMAL


def _probe_vertex(inst: CTLPInstance, grid: TimeGrid, j: int, A, b, c, sol: LPSolution) -> np.ndarray:
    t, piece = float(grid.nodes[j]), data_piece(inst, grid, j)
    lo, hi = inst.breakpoints.interval(piece)
    step = PROBE_STEP * (hi - lo)
    tp = t - step if grid.at_right_end(j) else t + step
    if not (lo <= tp <= hi):
        return sol.z
    probe = solve_lp(FiniteLP(*inst.at(tp, piece)))
    if not probe.optimal or not probe.active_rows:
        return sol.z
    rows = list(probe.active_rows)
    if svd(A[rows]).rank < inst.n:
        return sol.z
    z = pinv(A[rows]) @ b[rows]
    scale = max(1.0, float(np.abs(b).max(initial=0.0)))
    if np.max(A @ z - b) > FEAS_TOL * scale:
        return sol.z
    if c @ z > sol.objective + _TIE_TOL * max(1.0, abs(sol.objective)):
        return sol.z
    return z


def solve(inst: CTLPInstance, grid: TimeGrid) -> SolveResult:
    """Solve the LP at every grid node and assemble ``z`` and the duals ``u``.

    The first node that is infeasible or unbounded is returned as
    ``witness = (node index, t)`` and the overall status is taken from it.
    """
    if not grid_covers(grid, inst):
        raise InputError("grid breakpoints must include every instance breakpoint")
    statuses: list[Status] = []
    zs, us, vals = [], [], []
    for j in range(len(grid)):
        A, b, c = node_data(inst, grid, j)
        sol = solve_lp(FiniteLP(A, b, c))
        statuses.append(sol.status)
        if not sol.optimal:
            return SolveResult(sol.status, statuses, witness=(j, float(grid.nodes[j])))
        z = _probe_vertex(inst, grid, j, A, b, c, sol) if inst.m else sol.z
        zs.append(z)
        us.append(sol.dual + 0.0)
        vals.append(float(c @ z))
    z_traj = Trajectory(grid, zs)
    u_traj = Trajectory(grid, np.array(us).reshape(len(grid), inst.m))
    return SolveResult(
        Status.OPTIMAL,
        statuses,
        z=z_traj,
        u=u_traj,
        objective=objective_value(inst, z_traj),
        node_objectives=np.array(vals),
    )


def _integral_of_product(coeffs: tuple[PiecewiseFn, ...], traj: Trajectory) -> float:
    bp = Breakpoints(traj.grid.times)
    total = PiecewiseFn.constant(0.0, bp)
    for i, f in enumerate(coeffs):
        total = total + f.refine(bp) * traj.component(i)
    return integrate(total)


def objective_value(inst: CTLPInstance, z: Trajectory) -> float:
    """``∫ c(t)ᵀ z(t) dt`` with ``z`` interpolated as the trajectory says, integrated exactly."""
    _check_grid(inst, z, inst.n, "z")
    return _integral_of_product(inst.c, z)


def dual_objective_value(dual: CDPInstance, w: Trajectory) -> float:
    """``∫ b(t)ᵀ w(t) dt``, exact for the trajectory's interpolant."""
    _check_grid(dual.primal, w, dual.n_vars, "w")
    if dual.n_vars == 0:
        return 0.0
    return _integral_of_product(dual.primal.b, w)


