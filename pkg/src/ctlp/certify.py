"""Regularity certificates, multiplier recovery and KKT checks at a candidate solution.

Index sets are 0-based row indices.  Given a trajectory ``z`` on a grid:

* the β-active set at a node holds rows with ``-β <= aᵢᵀz - bᵢ <= active_tol``,
  the active set rows with ``|aᵢᵀz - bᵢ| <= active_tol``;
* the full-rank certificate (``BetaFR``) asks for a uniform lower bound on the
  Gram determinant of the β-active rows;
* the regularity certificate (``BetaRC``) asks for a subset of β-active rows
  generating the same cone whose Gram determinant is uniformly bounded below;
* ``BetaA`` holds when ``BetaFR`` holds, or ``BetaRC`` holds with the chosen
  subset inside the active set at every node.

Uniform bounds are only ever witnessed on grid nodes.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .errors import CertificateError, DomainError, InputError
from .instance import CTLPInstance, Trajectory, node_data
from .linalg import gram_det, pinv, sigma_min_positive, solve, spectral_norm, svd
from .simplex import is_feasible
from .timefunc import TimeGrid

ACTIVE_TOL = 1e-7
FR_FLOOR = 1e-8
DEFAULT_BETA = 1e-2
CONE_TOL = 1e-9
LAMBDA_NEG_TOL = 1e-8
RECONSTRUCTION_TOL = 1e-8
KKT_TOL = 1e-7
_REL = 1e-9


class InfeasibleTrajectoryError(DomainError):
    """Raised when a trajectory violates a constraint by more than the activity tolerance."""

    def __init__(self, residual: float, node: int, t: float):
        super().__init__(f"trajectory infeasible at node {node} (t={t:.17g}): residual {residual:.3e}")
        self.residual, self.node, self.t = residual, node, t


def grid_of(z: Trajectory, grid: TimeGrid | None) -> TimeGrid:
    if grid is None or grid is z.grid:
        return z.grid
    if np.array_equal(grid.nodes, z.grid.nodes) and np.array_equal(grid.owners, z.grid.owners):
        return z.grid
    raise InputError("trajectory must be sampled on the requested grid")


def _index_lists(sets) -> list[list[int]]:
    return [list(s) for s in sets]


# --- active sets ---------------------------------------------------------------


@dataclass
class ActiveSetProfile:
    grid: TimeGrid
    beta: float
    active_tol: float
    I0: list[tuple[int, ...]]
    Ibeta: list[tuple[int, ...]]
    residuals: np.ndarray = field(repr=False)

    def to_dict(self) -> dict:
        return {
            "beta": self.beta,
            "active_tol": self.active_tol,
            "t": self.grid.nodes.tolist(),
            "I0": _index_lists(self.I0),
            "Ibeta": _index_lists(self.Ibeta),
        }


def active_sets(
    inst: CTLPInstance,
    z: Trajectory,
    beta: float = DEFAULT_BETA,
    grid: TimeGrid | None = None,
    active_tol: float = ACTIVE_TOL,
) -> ActiveSetProfile:
    """Per-node active and β-active row sets of ``z``."""
    if not beta > 0:
        raise InputError(f"beta must be positive, got {beta}")
    grid = grid_of(z, grid)
    if z.dim != inst.n:
        raise InputError(f"z has dimension {z.dim}, expected {inst.n}")
    I0, Ib, res = [], [], np.zeros((len(grid), inst.m))
    for j in range(len(grid)):
        A, b, _ = node_data(inst, grid, j)
        r = A @ z.values[j] - b
        if inst.m and r.max() > active_tol:
            raise InfeasibleTrajectoryError(float(r.max()), j, float(grid.nodes[j]))
        res[j] = r
        I0.append(tuple(int(i) for i in np.flatnonzero(np.abs(r) <= active_tol)))
        Ib.append(tuple(int(i) for i in np.flatnonzero((r >= -beta) & (r <= active_tol))))
    return ActiveSetProfile(grid, float(beta), active_tol, I0, Ib, res)


# --- certificates --------------------------------------------------------------


class CertKind(str, enum.Enum):
    BETA_FR = "BetaFR"
    BETA_RC = "BetaRC"
    BETA_A = "BetaA"
    FAILS = "Fails"

    def __str__(self) -> str:
        return self.value


@dataclass
class RegularityCertificate:
    """Outcome of one regularity test.

    ``det_lower_bound`` and ``sigma_min_lower_bound`` are minima over grid nodes
    of the Gram determinant and smallest positive singular value of the rows
    the certificate relies on (β-active rows for ``BetaFR``, the selected
    subset for ``BetaRC``).  ``witness`` is the first failing node.
    """

    kind: CertKind
    tested: CertKind
    beta: float
    det_lower_bound: float
    sigma_min_lower_bound: float
    isharp: list[tuple[int, ...]] | None
    isharp_in_I0: bool
    profile: ActiveSetProfile = field(repr=False)
    node_dets: np.ndarray = field(repr=False)
    witness: tuple[int, float] | None = None
    reason: str = ""
    basis: CertKind | None = None

    @property
    def holds(self) -> bool:
        return self.kind is not CertKind.FAILS

    def to_dict(self) -> dict:
        out = {
            "tested": self.tested.value,
            "kind": self.kind.value,
            "holds": self.holds,
            "beta": self.beta,
            "det_lower_bound": self.det_lower_bound,
            "sigma_min_lower_bound": json_float(self.sigma_min_lower_bound),
            "isharp_in_I0": self.isharp_in_I0,
            "witness": None if self.witness is None else {"node": self.witness[0], "t": self.witness[1]},
            "reason": self.reason,
        }
        if self.basis is not None:
            out["basis"] = self.basis.value
        if self.isharp is not None:
            out["isharp"] = _index_lists(self.isharp)
        out["node_dets"] = self.node_dets.tolist()
        return out


def json_float(x: float):
    return None if not np.isfinite(x) else float(x)


def _subset_in(small, big) -> bool:
    return set(small) <= set(big)


def _profile(inst, z, beta, grid, profile, active_tol) -> ActiveSetProfile:
    if profile is not None:
        if profile.beta != beta:
            raise InputError(f"profile was built for beta={profile.beta}, not {beta}")
        return profile
    return active_sets(inst, z, beta, grid, active_tol)


def _sigma_min(rows: np.ndarray) -> float:
    return sigma_min_positive(rows) if rows.shape[0] and np.any(rows) else np.inf


def check_beta_fr(
    inst: CTLPInstance,
    z: Trajectory,
    beta: float = DEFAULT_BETA,
    grid: TimeGrid | None = None,
    *,
    profile: ActiveSetProfile | None = None,
    fr_floor: float = FR_FLOOR,
    active_tol: float = ACTIVE_TOL,
) -> RegularityCertificate:
    """Test for a uniform Gram-determinant bound on the β-active rows."""
    prof = _profile(inst, z, beta, grid, profile, active_tol)
    dets, sigmas = [], []
    for j, ib in enumerate(prof.Ibeta):
        A, _, _ = node_data(inst, prof.grid, j)
        rows = A[list(ib)]
        dets.append(gram_det(rows))
        sigmas.append(_sigma_min(rows))
    dets = np.array(dets)
    det_lb = float(dets.min())
    in_I0 = all(_subset_in(ib, i0) for ib, i0 in zip(prof.Ibeta, prof.I0))
    common = dict(
        tested=CertKind.BETA_FR,
        beta=prof.beta,
        det_lower_bound=det_lb,
        sigma_min_lower_bound=float(min(sigmas)),
        isharp=list(prof.Ibeta),
        isharp_in_I0=in_I0,
        profile=prof,
        node_dets=dets,
    )
    if det_lb >= fr_floor:
        return RegularityCertificate(CertKind.BETA_FR, **common)
    j = int(np.flatnonzero(dets < fr_floor)[0])
    return RegularityCertificate(
        CertKind.FAILS,
        witness=(j, float(prof.grid.nodes[j])),
        reason=f"Gram determinant of beta-active rows is {dets[j]:.3e} < {fr_floor:g}",
        **common,
    )


def cone_member(x, rows, tol: float = CONE_TOL) -> bool:
    """True iff ``x = rowsᵀλ`` for some ``λ >= 0`` (phase-one LP)."""
    x = np.asarray(x, dtype=float).reshape(-1)
    rows = np.asarray(rows, dtype=float).reshape(-1, x.size)
    if rows.shape[0] == 0:
        return bool(np.abs(x).max(initial=0.0) <= tol)
    return is_feasible(rows.T, x, tol)


def select_isharp(rows, tol: float = CONE_TOL) -> tuple[int, ...]:
    """Pick rows (local positions) generating the same cone as all of ``rows``.

    Rows are scanned in order and kept when not already in the cone of the
    kept ones; a second pass, in reverse order, drops any kept row that the
    others generate.  Zero rows are never kept.
    """
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    keep: list[int] = []
    for i, r in enumerate(rows):
        if np.abs(r).max(initial=0.0) <= tol:
            continue
        if not cone_member(r, rows[keep], tol):
            keep.append(i)
    for i in reversed(list(keep)):
        others = [k for k in keep if k != i]
        if others and cone_member(rows[i], rows[others], tol):
            keep.remove(i)
    return tuple(keep)


def check_beta_rc(
    inst: CTLPInstance,
    z: Trajectory,
    beta: float = DEFAULT_BETA,
    grid: TimeGrid | None = None,
    *,
    profile: ActiveSetProfile | None = None,
    fr_floor: float = FR_FLOOR,
    active_tol: float = ACTIVE_TOL,
) -> RegularityCertificate:
    """Select a cone-generating subset per node and bound its Gram determinant."""
    prof = _profile(inst, z, beta, grid, profile, active_tol)
    isharp, dets, sigmas = [], [], []
    cone_fail = None
    for j, ib in enumerate(prof.Ibeta):
        A, _, _ = node_data(inst, prof.grid, j)
        rows = A[list(ib)]
        sel = tuple(ib[k] for k in select_isharp(rows)) if ib else ()
        sharp = A[list(sel)]
        if cone_fail is None and not all(cone_member(r, sharp) for r in rows):
            cone_fail = j
        isharp.append(sel)
        dets.append(gram_det(sharp))
        sigmas.append(_sigma_min(sharp))
    dets = np.array(dets)
    det_lb = float(dets.min())
    common = dict(
        tested=CertKind.BETA_RC,
        beta=prof.beta,
        det_lower_bound=det_lb,
        sigma_min_lower_bound=float(min(sigmas)),
        isharp=isharp,
        isharp_in_I0=all(_subset_in(s, i0) for s, i0 in zip(isharp, prof.I0)),
        profile=prof,
        node_dets=dets,
    )
    if cone_fail is not None:
        j = cone_fail
        return RegularityCertificate(
            CertKind.FAILS,
            witness=(j, float(prof.grid.nodes[j])),
            reason="selected rows do not generate the cone of the beta-active rows",
            **common,
        )
    if det_lb < fr_floor:
        j = int(np.flatnonzero(dets < fr_floor)[0])
        return RegularityCertificate(
            CertKind.FAILS,
            witness=(j, float(prof.grid.nodes[j])),
            reason=f"Gram determinant of selected rows is {dets[j]:.3e} < {fr_floor:g}",
            **common,
        )
    return RegularityCertificate(CertKind.BETA_RC, **common)


def check_beta_a(
    inst: CTLPInstance,
    z: Trajectory,
    beta: float = DEFAULT_BETA,
    grid: TimeGrid | None = None,
    *,
    fr: RegularityCertificate | None = None,
    rc: RegularityCertificate | None = None,
    fr_floor: float = FR_FLOOR,
    active_tol: float = ACTIVE_TOL,
) -> RegularityCertificate:
    """``BetaFR``, or ``BetaRC`` with every selected subset inside the active set."""
    if fr is None or rc is None:
        prof = (fr or rc).profile if (fr or rc) else active_sets(inst, z, beta, grid, active_tol)
        fr = fr or check_beta_fr(inst, z, beta, profile=prof, fr_floor=fr_floor)
        rc = rc or check_beta_rc(inst, z, beta, profile=prof, fr_floor=fr_floor)
    for base in (fr, rc):
        if base.holds and (base is fr or base.isharp_in_I0):
            return RegularityCertificate(
                CertKind.BETA_A,
                tested=CertKind.BETA_A,
                beta=base.beta,
                det_lower_bound=base.det_lower_bound,
                sigma_min_lower_bound=base.sigma_min_lower_bound,
                isharp=base.isharp,
                isharp_in_I0=base.isharp_in_I0,
                profile=base.profile,
                node_dets=base.node_dets,
                basis=base.kind,
            )
    if rc.holds:
        j = next(j for j, (s, i0) in enumerate(zip(rc.isharp, rc.profile.I0)) if not _subset_in(s, i0))
        witness, reason = (j, float(rc.profile.grid.nodes[j])), "selected rows include an inactive constraint"
    else:
        witness, reason = rc.witness, "neither BetaFR nor BetaRC holds"
    return RegularityCertificate(
        CertKind.FAILS,
        tested=CertKind.BETA_A,
        beta=rc.beta,
        det_lower_bound=rc.det_lower_bound,
        sigma_min_lower_bound=rc.sigma_min_lower_bound,
        isharp=rc.isharp,
        isharp_in_I0=rc.isharp_in_I0,
        profile=rc.profile,
        node_dets=rc.node_dets,
        witness=witness,
        reason=reason,
    )


# --- multipliers ---------------------------------------------------------------


@dataclass
class MultiplierRecovery:
    """Recovered multipliers plus diagnostics of the conic folding step."""

    u: Trajectory
    min_multiplier: float
    reconstruction_residual: float
    negative_lambda: list[tuple[int, float, float]]
    negative_multipliers: list[tuple[int, float, float]]

    def to_dict(self) -> dict:
        return {
            "min_multiplier": json_float(self.min_multiplier),
            "reconstruction_residual": self.reconstruction_residual,
            "negative_lambda": [{"node": j, "t": t, "min_entry": v} for j, t, v in self.negative_lambda],
            "negative_multipliers": [{"node": j, "t": t, "min_entry": v} for j, t, v in self.negative_multipliers],
        }


def _full_rank_multiplier(A, b, c, z, ib) -> np.ndarray:
    # augmented matrix [Δg | ΔA] with g the constraint values at z
    mask = np.zeros(A.shape[0])
    mask[list(ib)] = 1.0
    g = A @ z - b
    M = np.hstack([(mask * g)[:, None], mask[:, None] * A])
    return -pinv(M).T @ np.concatenate([[0.0], c])


def recover_multipliers_detailed(
    inst: CTLPInstance,
    z: Trajectory,
    beta: float,
    grid: TimeGrid | None,
    cert: RegularityCertificate,
    tol: float = KKT_TOL,
) -> MultiplierRecovery:
    """Pseudo-inverse multipliers, folded onto the selected rows for ``BetaRC``."""
    if not cert.holds:
        raise CertificateError(f"cannot recover multipliers without a certificate ({cert.reason})")
    if cert.beta != beta:
        raise InputError(f"certificate was issued for beta={cert.beta}, not {beta}")
    prof = cert.profile
    grid_of(z, grid if grid is not None else prof.grid)
    path = cert.basis if cert.kind is CertKind.BETA_A else cert.kind
    us = np.zeros((len(prof.grid), inst.m))
    recon = 0.0
    neg_lambda, neg_u = [], []
    for j, ib in enumerate(prof.Ibeta):
        A, b, c = node_data(inst, prof.grid, j)
        t = float(prof.grid.nodes[j])
        if not ib:
            continue
        if path is CertKind.BETA_FR:
            us[j] = _full_rank_multiplier(A, b, c, z.values[j], ib)
        else:
            mask = np.zeros(inst.m)
            mask[list(ib)] = 1.0
            u_tilde = -pinv(mask[:, None] * A).T @ c
            sharp = list(cert.isharp[j])
            flat = [i for i in ib if i not in cert.isharp[j]]
            u_bar = u_tilde[sharp]
            if flat:
                As, Af = A[sharp], A[flat]
                Lam = solve(As @ As.T, As @ Af.T).T
                recon = max(recon, float(np.abs(Af - Lam @ As).max()))
                if Lam.min() < -LAMBDA_NEG_TOL:
                    neg_lambda.append((j, t, float(Lam.min())))
                u_bar = u_bar + Lam.T @ u_tilde[flat]
            us[j, sharp] = u_bar
        if us[j].min(initial=0.0) < -tol:
            neg_u.append((j, t, float(us[j].min())))
    if recon > RECONSTRUCTION_TOL:
        raise CertificateError(f"conic reconstruction residual {recon:.3e} exceeds {RECONSTRUCTION_TOL:g}")
    u = Trajectory(prof.grid, us + 0.0)
    return MultiplierRecovery(u, float(us.min(initial=np.inf)), recon, neg_lambda, neg_u)


def recover_multipliers(
    inst: CTLPInstance,
    z: Trajectory,
    beta: float,
    grid: TimeGrid | None,
    cert: RegularityCertificate,
) -> Trajectory:
    return recover_multipliers_detailed(inst, z, beta, grid, cert).u


# --- KKT -----------------------------------------------------------------------


@dataclass
class KKTReport:
    stationarity_residual: float
    min_multiplier: float
    complementarity_residual: float
    primal_residual: float
    tol: float
    worst_node: int | None

    @property
    def passed(self) -> bool:
        return (
            self.stationarity_residual <= self.tol
            and self.min_multiplier >= -self.tol
            and self.complementarity_residual <= self.tol
        )

    def to_dict(self) -> dict:
        return {
            "pass": self.passed,
            "tol": self.tol,
            "stationarity_residual": self.stationarity_residual,
            "min_multiplier": json_float(self.min_multiplier),
            "complementarity_residual": self.complementarity_residual,
            "primal_residual": self.primal_residual,
            "worst_stationarity_node": self.worst_node,
        }


def check_kkt(
    inst: CTLPInstance, z: Trajectory, u: Trajectory, grid: TimeGrid | None = None, tol: float = KKT_TOL
) -> KKTReport:
    """Stationarity, sign and complementarity residuals of ``(z, u)`` over the grid."""
    g = grid_of(z, grid)
    grid_of(u, g)
    if z.dim != inst.n or (u.dim != inst.m and not (inst.m == 0 and u.values.size == 0)):
        raise InputError(f"expected z of dimension {inst.n} and u of dimension {inst.m}")
    stat, comp, prim, worst = 0.0, 0.0, 0.0, None
    umin = float(u.values.min(initial=np.inf))
    for j in range(len(g)):
        A, b, c = node_data(inst, g, j)
        uj = u.values[j, : inst.m]
        s = float(np.abs(c + A.T @ uj).max())
        if worst is None or s > stat:
            stat, worst = s, j
        if inst.m:
            r = A @ z.values[j] - b
            comp = max(comp, float(np.abs(uj * r).max()))
            prim = max(prim, float(max(0.0, r.max())))
    return KKTReport(stat, umin, comp, prim, tol, worst)


# --- Lemma 1 constants ---------------------------------------------------------


@dataclass
class Lemma1Witness:
    """Constants linking the determinant bound and the singular-value bound.

    ``C`` and ``Khat`` are the witnessed minima over blocks of the smallest
    positive singular value and of the Gram determinant.  ``C_from_Khat`` is
    the singular-value bound implied by ``Khat`` and ``Khat_from_C`` the
    determinant bound implied by ``C``; ``consistent`` says both implications
    held on the data and that full rank with a positive ``C`` coincided with a
    positive ``Khat``.  ``Khat_literal`` is the weaker-exponent variant
    ``C if C >= 1 else C**m``, reported for comparison only.
    """

    C: float
    Khat: float
    consistent: bool
    K: float
    m: int
    full_rank: bool
    C_from_Khat: float
    Khat_from_C: float
    Khat_literal: float
    literal_converse_holds: bool
    forward_holds: bool
    converse_holds: bool

    def __iter__(self) -> Iterator:
        return iter((self.C, self.Khat, self.consistent))

    def to_dict(self) -> dict:
        return {k: json_float(v) if isinstance(v, float) else v for k, v in self.__dict__.items()}


def khat_from_sigma(C: float, m: int) -> float:
    """Determinant bound implied by ``sigma_min >= C`` for blocks of at most ``m`` rows."""
    return C * C if C >= 1.0 else C ** (2 * m)


def sigma_from_khat(Khat: float, K: float, m: int) -> float:
    """Singular-value bound implied by ``det >= Khat`` and ``||block|| <= K``."""
    return float(np.sqrt(Khat / (K * K) ** (m - 1))) if K * K >= 1.0 else float(np.sqrt(Khat))


def lemma1_constants(blocks, K: float, m: int) -> Lemma1Witness:
    """Check the two implications on explicit row blocks with ``||block|| <= K``."""
    blocks = [np.atleast_2d(np.asarray(B, dtype=float)) for B in blocks if np.asarray(B).size]
    if not blocks:
        raise InputError("need at least one non-empty block")
    sig, dets, full = [], [], True
    for B in blocks:
        if B.shape[0] > m:
            raise InputError(f"block has {B.shape[0]} rows, more than m={m}")
        if spectral_norm(B) > K * (1 + _REL):
            raise InputError(f"block norm {spectral_norm(B):.6g} exceeds K={K:.6g}")
        full &= svd(B).rank == B.shape[0]
        sig.append(sigma_min_positive(B) if np.any(B) else 0.0)
        dets.append(gram_det(B))
    C, Khat = float(min(sig)), float(min(dets))
    C_from_K = sigma_from_khat(Khat, K, m)
    forward = Khat <= 0.0 or C >= C_from_K * (1 - _REL)
    K_from_C = khat_from_sigma(C, m)
    converse = not full or Khat >= K_from_C * (1 - _REL)
    K_lit = C if C >= 1.0 else C**m
    literal = not full or Khat >= K_lit * (1 - _REL)
    agree = (Khat > 0.0) == (full and C > 0.0)
    return Lemma1Witness(
        C=C,
        Khat=Khat,
        consistent=bool(forward and converse and agree),
        K=float(K),
        m=m,
        full_rank=bool(full),
        C_from_Khat=C_from_K,
        Khat_from_C=K_from_C,
        Khat_literal=float(K_lit),
        literal_converse_holds=bool(literal),
        forward_holds=bool(forward),
        converse_holds=bool(converse),
    )


def lemma1_witness(
    inst: CTLPInstance,
    z: Trajectory,
    beta: float = DEFAULT_BETA,
    grid: TimeGrid | None = None,
    *,
    profile: ActiveSetProfile | None = None,
    active_tol: float = ACTIVE_TOL,
) -> Lemma1Witness:
    """Lemma-1 constants for the β-active blocks of ``z`` (nodes with empty sets skipped)."""
    prof = _profile(inst, z, beta, grid, profile, active_tol)
    blocks = []
    for j, ib in enumerate(prof.Ibeta):
        if ib:
            A, _, _ = node_data(inst, prof.grid, j)
            blocks.append(A[list(ib)])
    if not blocks:
        raise DomainError("no node has a beta-active row")
    K = max([inst.data_bound] + [spectral_norm(B) for B in blocks])
    return lemma1_constants(blocks, K, inst.m)


# --- combined report -----------------------------------------------------------


@dataclass
class CertificationReport:
    profile: ActiveSetProfile
    fr: RegularityCertificate
    rc: RegularityCertificate
    a: RegularityCertificate
    lemma1: Lemma1Witness | None

    @property
    def any_holds(self) -> bool:
        return self.fr.holds or self.rc.holds

    def to_dict(self) -> dict:
        return {
            "beta": self.profile.beta,
            "index_base": 0,
            "active_sets": self.profile.to_dict(),
            "BetaFR": self.fr.to_dict(),
            "BetaRC": self.rc.to_dict(),
            "BetaA": self.a.to_dict(),
            "lemma1": None if self.lemma1 is None else self.lemma1.to_dict(),
        }


def certify(
    inst: CTLPInstance,
    z: Trajectory,
    beta: float = DEFAULT_BETA,
    grid: TimeGrid | None = None,
    *,
    fr_floor: float = FR_FLOOR,
    active_tol: float = ACTIVE_TOL,
) -> CertificationReport:
    """Run every certificate test at one β."""
    prof = active_sets(inst, z, beta, grid, active_tol)
    fr = check_beta_fr(inst, z, beta, profile=prof, fr_floor=fr_floor)
    rc = check_beta_rc(inst, z, beta, profile=prof, fr_floor=fr_floor)
    a = check_beta_a(inst, z, beta, fr=fr, rc=rc)
    lemma = lemma1_witness(inst, z, beta, profile=prof) if any(prof.Ibeta) else None
    return CertificationReport(prof, fr, rc, a, lemma)


def beta_sweep(
    inst: CTLPInstance, z: Trajectory, lo: float, hi: float, count: int, grid: TimeGrid | None = None, **kw
) -> list[CertificationReport]:
    """Certification at ``count`` log-spaced β values in ``[lo, hi]``."""
    if not (0 < lo <= hi) or count < 1:
        raise InputError("beta sweep needs 0 < lo <= hi and count >= 1")
    betas = np.geomspace(lo, hi, count) if count > 1 else np.array([lo])
    return [certify(inst, z, float(b), grid, **kw) for b in betas]
