"""Dual problem, duality gap and complementary slackness checks.

The dual of ``min ∫cᵀz  s.t.  Az <= b`` is ``max ∫bᵀw  s.t.  Aᵀw = c, w <= 0``.
Dual trajectories are checked here, never solved for; the usual source is
``w = -u`` with ``u`` the recovered multipliers.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .certify import CertKind, RegularityCertificate, grid_of, json_float
from .errors import DomainError, InputError
from .instance import CDPInstance, CTLPInstance, Trajectory, feasibility_residual, node_data
from .linalg import gram_det
from .solver import dual_objective_value, objective_value
from .timefunc import TimeGrid

GAP_TOL = 1e-7
CS_TOL = 1e-9
RESIDUAL_TOL = 1e-9
HYPOTHESIS_FLOOR = 1e-8
_SIGN_SLACK = 1e-12


def build_dual(inst: CTLPInstance) -> CDPInstance:
    if isinstance(inst, CDPInstance):
        raise InputError("the dual of a dual instance is not defined here")
    return CDPInstance(inst)


def multiplier_to_dual(u: Trajectory) -> Trajectory:
    return u.map(lambda v: -v + 0.0)


def dual_feasibility(dual: CDPInstance, w: Trajectory, grid: TimeGrid | None = None) -> tuple[float, float]:
    """``(sup ||Aᵀw - c||∞, sup max(0, maxᵢ wᵢ))`` over the grid nodes."""
    g = grid_of(w, grid)
    if w.dim != dual.n_vars:
        raise InputError(f"w has dimension {w.dim}, expected {dual.n_vars}")
    eq, sign = 0.0, 0.0
    for j in range(len(g)):
        A, b, c = node_data(dual.primal, g, j)
        wj = w.values[j, : dual.n_vars]
        eq = max(eq, float(np.abs(A.T @ wj - c).max()))
        sign = max(sign, float(wj.max(initial=0.0)))
    return eq, sign


def _is_beta_a(cert: RegularityCertificate | None) -> bool:
    if cert is None or not cert.holds:
        return False
    return cert.kind in (CertKind.BETA_A, CertKind.BETA_FR) or cert.isharp_in_I0


class DualityVerdict(str, enum.Enum):
    WEAK = "WeakDualityHolds"
    ZERO_GAP = "ZeroGap"
    STRONG = "StrongDualityCertified"


@dataclass
class DualityReport:
    F: float
    G: float
    gap: float
    primal_residual: float
    dual_eq_residual: float
    dual_sign_violation: float
    cs_residual: float
    verdicts: list[DualityVerdict]
    withheld: str = ""

    def to_dict(self) -> dict:
        return {
            "F": self.F,
            "G": self.G,
            "gap": self.gap,
            "primal_residual": self.primal_residual,
            "dual_eq_residual": self.dual_eq_residual,
            "dual_sign_violation": self.dual_sign_violation,
            "cs_residual": self.cs_residual,
            "verdicts": [v.value for v in self.verdicts],
            "withheld": self.withheld or None,
        }

    @property
    def strong(self) -> bool:
        return DualityVerdict.STRONG in self.verdicts


def _cs_sup(inst: CTLPInstance, z: Trajectory, w: Trajectory, g: TimeGrid) -> float:
    worst = 0.0
    for j in range(len(g)):
        A, b, _ = node_data(inst, g, j)
        if inst.m:
            worst = max(worst, abs(float((b - A @ z.values[j]) @ w.values[j])))
    return worst


def duality_report(
    inst: CTLPInstance,
    z: Trajectory,
    w: Trajectory,
    grid: TimeGrid | None = None,
    certificate: RegularityCertificate | None = None,
    gap_tol: float = GAP_TOL,
    residual_tol: float = RESIDUAL_TOL,
) -> DualityReport:
    """Objectives, gap and feasibility residuals of a primal/dual pair.

    Verdicts are withheld when either trajectory is infeasible beyond
    ``residual_tol`` (scaled by the data bound).  ``StrongDualityCertified``
    additionally needs a certificate satisfying the β-A assumption.
    """
    g = grid_of(z, grid)
    grid_of(w, g)
    dual = build_dual(inst)
    F = objective_value(inst, z)
    G = dual_objective_value(dual, w)
    prim = feasibility_residual(inst, z)
    eq, sign = dual_feasibility(dual, w, g)
    cs = _cs_sup(inst, z, w, g)
    tol = residual_tol * max(1.0, inst.data_bound)
    verdicts: list[DualityVerdict] = []
    withheld = ""
    if prim > tol:
        withheld = f"primal trajectory infeasible (residual {prim:.3e})"
    elif eq > tol or sign > tol:
        withheld = f"dual trajectory infeasible (equality {eq:.3e}, sign {sign:.3e})"
    else:
        gap = F - G
        if gap >= -gap_tol:
            verdicts.append(DualityVerdict.WEAK)
        if abs(gap) <= gap_tol:
            verdicts.append(DualityVerdict.ZERO_GAP)
            if _is_beta_a(certificate):
                verdicts.append(DualityVerdict.STRONG)
    return DualityReport(F, G, F - G, prim, eq, sign, cs, verdicts, withheld)


@dataclass
class CSReport:
    """Complementary slackness conditions on the grid.

    ``fc1``: slacks ``b - Az`` non-negative; ``fc2``: ``w`` dual feasible;
    ``fc3``: ``sup |slackᵀw|`` below tolerance.  ``optimal_pair`` needs all
    three; ``certified`` additionally needs a β-A certificate.
    """

    min_slack: float
    dual_eq_residual: float
    dual_sign_violation: float
    cs_residual: float
    tol: float
    certified_by: str | None
    slacks: Trajectory = field(repr=False)

    @property
    def fc1(self) -> bool:
        return self.min_slack >= -self.tol

    @property
    def fc2(self) -> bool:
        return self.dual_eq_residual <= self.tol and self.dual_sign_violation <= self.tol

    @property
    def fc3(self) -> bool:
        return self.cs_residual <= self.tol

    @property
    def optimal_pair(self) -> bool:
        return self.fc1 and self.fc2 and self.fc3

    @property
    def certified(self) -> bool:
        return self.optimal_pair and self.certified_by is not None

    def to_dict(self) -> dict:
        return {
            "FC1": self.fc1,
            "FC2": self.fc2,
            "FC3": self.fc3,
            "optimal_pair": self.optimal_pair,
            "certified": self.certified,
            "certified_by": self.certified_by,
            "tol": self.tol,
            "min_slack": json_float(self.min_slack),
            "dual_eq_residual": self.dual_eq_residual,
            "dual_sign_violation": self.dual_sign_violation,
            "cs_residual": self.cs_residual,
        }


def complementary_slackness(
    inst: CTLPInstance,
    z: Trajectory,
    w: Trajectory,
    grid: TimeGrid | None = None,
    certificate: RegularityCertificate | None = None,
    tol: float = CS_TOL,
) -> CSReport:
    g = grid_of(z, grid)
    grid_of(w, g)
    slacks = np.zeros((len(g), inst.m))
    for j in range(len(g)):
        A, b, _ = node_data(inst, g, j)
        slacks[j] = b - A @ z.values[j]
    eq, sign = dual_feasibility(build_dual(inst), w, g)
    cs = _cs_sup(inst, z, w, g)
    by = None
    if _is_beta_a(certificate):
        by = (certificate.basis or certificate.kind).value
    return CSReport(float(slacks.min(initial=np.inf)), eq, sign, cs, tol, by, Trajectory(g, slacks))


@dataclass
class HypothesisHReport:
    det_lower_bound: float
    holds: bool
    node_dets: np.ndarray = field(repr=False)
    witness: tuple[int, float] | None = None

    def to_dict(self) -> dict:
        return {
            "det_lower_bound": self.det_lower_bound,
            "holds": self.holds,
            "witness": None if self.witness is None else {"node": self.witness[0], "t": self.witness[1]},
        }


def upsilon(A: np.ndarray, w: np.ndarray) -> np.ndarray:
    """The ``(n+m) x 2m`` block matrix ``[[Aᵀ, 0], [-I, diag(-2 sqrt(-w))]]``."""
    m, n = A.shape
    D = np.diag(-2.0 * np.sqrt(-np.minimum(w, 0.0)))
    return np.block([[A.T, np.zeros((n, m))], [-np.eye(m), D]])


def check_hypothesis_h(
    dual: CDPInstance, w: Trajectory, grid: TimeGrid | None = None, floor: float = HYPOTHESIS_FLOOR
) -> HypothesisHReport:
    """Grid minimum of ``det(Υ Υᵀ)``; a diagnostic, nothing is derived from it.

    Components of ``w`` up to ``1e-12`` above zero are treated as zero; larger
    positive entries raise :class:`DomainError`.
    """
    g = grid_of(w, grid)
    if w.dim != dual.n_vars:
        raise InputError(f"w has dimension {w.dim}, expected {dual.n_vars}")
    dets = []
    for j in range(len(g)):
        wj = w.values[j]
        if wj.max(initial=0.0) > _SIGN_SLACK:
            raise DomainError(f"w has a positive component at node {j} (t={g.nodes[j]:.17g})")
        A, _, _ = node_data(dual.primal, g, j)
        dets.append(gram_det(upsilon(A, wj)))
    dets = np.array(dets)
    lb = float(dets.min())
    witness = None
    if lb < floor:
        j = int(np.flatnonzero(dets < floor)[0])
        witness = (j, float(g.nodes[j]))
    return HypothesisHReport(lb, lb >= floor, dets, witness)
