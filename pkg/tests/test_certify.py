import json

import numpy as np
import pytest
from conftest import constant_instance
from randinst import random_instance

from ctlp.bundled import multipliers, reference
from ctlp.certify import (
    CertKind,
    InfeasibleTrajectoryError,
    active_sets,
    beta_sweep,
    certify,
    check_beta_a,
    check_beta_fr,
    check_beta_rc,
    check_kkt,
    cone_member,
    khat_from_sigma,
    lemma1_constants,
    lemma1_witness,
    recover_multipliers,
    recover_multipliers_detailed,
    select_isharp,
    sigma_from_khat,
)
from ctlp.errors import CertificateError, InputError
from ctlp.instance import Trajectory, node_data
from ctlp.linalg import spectral_norm, svd
from ctlp.solver import solve
from ctlp.timefunc import TimeGrid, refine_grid

BETA = 1 / 8
TAIL_ROWS = [[1.0, -1.0], [1.0, 1.0], [0.0, 1.0]]


def node_index(grid, t, owner=None):
    hits = [j for j, (s, k) in enumerate(grid) if s == t and (owner is None or k == owner)]
    return hits[-1]


@pytest.fixture(scope="module")
def ex1_head(ex1):
    """The bundled instance cut to ``[0, 1]`` with the reference trajectory."""
    head = ex1.restrict(1.0)
    grid = TimeGrid.from_times(head.breakpoints, [0.25, 0.5, 0.75])
    return head, reference(grid)["z"]


@pytest.fixture(scope="module")
def identity_instance():
    inst = constant_instance([[1, 0], [0, 1]], [0, 0], [-1, -1])
    return inst, Trajectory.constant(refine_grid(inst.breakpoints, 3), [0, 0])


class TestActiveSets:
    @pytest.mark.parametrize(
        "t, ibeta, i0",
        [(0.5, (3, 4), (3, 4)), (1.5, (2, 4), (2, 4)), (1.95, (2, 3, 4), (2, 4))],
    )
    def test_example_nodes(self, ex1, ex1_ref, ex1_grid, t, ibeta, i0):
        prof = active_sets(ex1, ex1_ref["z"], BETA)
        j = node_index(ex1_grid, t)
        assert prof.Ibeta[j] == ibeta
        assert prof.I0[j] == i0

    def test_active_subset_of_beta_active(self, ex1, ex1_ref):
        prof = active_sets(ex1, ex1_ref["z"], BETA)
        assert all(set(a) <= set(b) for a, b in zip(prof.I0, prof.Ibeta))

    def test_membership_matches_residuals(self, ex1, ex1_ref):
        for beta in (1e-3, BETA, 1.0, 10.0):
            prof = active_sets(ex1, ex1_ref["z"], beta)
            for j, r in enumerate(prof.residuals):
                expect = tuple(i for i in range(ex1.m) if -beta <= r[i] <= prof.active_tol)
                assert prof.Ibeta[j] == expect

    def test_infeasible_trajectory_carries_residual(self, ex1, ex1_grid):
        z = Trajectory.constant(ex1_grid, [3.0, 3.0])
        with pytest.raises(InfeasibleTrajectoryError) as info:
            active_sets(ex1, z, BETA)
        assert info.value.residual > 1.0 and info.value.node == 0

    def test_beta_must_be_positive(self, ex1, ex1_ref):
        with pytest.raises(InputError):
            active_sets(ex1, ex1_ref["z"], 0.0)

    def test_grid_mismatch(self, ex1, ex1_ref):
        with pytest.raises(InputError):
            active_sets(ex1, ex1_ref["z"], BETA, refine_grid(ex1.breakpoints, 3))

    def test_serialises(self, ex1, ex1_ref):
        d = active_sets(ex1, ex1_ref["z"], BETA).to_dict()
        assert json.loads(json.dumps(d))["Ibeta"][5] == [2, 3, 4]


class TestFullRank:
    def test_fails_at_end_of_horizon(self, ex1, ex1_ref):
        cert = check_beta_fr(ex1, ex1_ref["z"], BETA)
        assert cert.kind is CertKind.FAILS and not cert.holds
        j, t = cert.witness
        assert 1.9 <= t <= 2.0
        assert cert.node_dets[j] == pytest.approx(0.0, abs=1e-12)
        assert cert.det_lower_bound == pytest.approx(0.0, abs=1e-12)

    def test_first_interval_has_unit_determinant(self, ex1_head):
        head, z = ex1_head
        cert = check_beta_fr(head, z, BETA)
        assert cert.kind is CertKind.BETA_FR
        assert cert.det_lower_bound == pytest.approx(1.0, abs=1e-12)

    def test_identity_rows(self, identity_instance):
        inst, z = identity_instance
        cert = check_beta_fr(inst, z, BETA)
        assert cert.kind is CertKind.BETA_FR
        assert cert.det_lower_bound == pytest.approx(1.0, abs=1e-12)

    def test_floor_is_respected(self, ex1_head):
        head, z = ex1_head
        assert not check_beta_fr(head, z, BETA, fr_floor=1.5).holds


class TestIsharpSelection:
    def test_tail_rows(self):
        # the first and third rows generate the second: (1,1) = (1,-1) + 2 (0,1)
        assert select_isharp(TAIL_ROWS) == (0, 2)

    def test_single_row(self):
        assert select_isharp([[3.0, -1.0]]) == (0,)

    def test_duplicate_rows(self):
        assert select_isharp([[1.0, 0.0], [1.0, 0.0]]) == (0,)

    def test_colinear_rows(self):
        assert select_isharp([[1.0, 0.0], [2.0, 0.0]]) == (0,)

    def test_zero_rows_are_skipped(self):
        assert select_isharp([[0.0, 0.0], [0.0, 1.0]]) == (1,)

    def test_opposite_rows_both_kept(self):
        assert select_isharp([[1.0, 0.0], [-1.0, 0.0]]) == (0, 1)

    def test_selection_generates_every_row(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            rows = rng.integers(-3, 4, (int(rng.integers(1, 6)), 3)).astype(float)
            sel = select_isharp(rows)
            assert all(cone_member(r, rows[list(sel)]) for r in rows)
            # no selected row is generated by the others
            for i in sel:
                others = [k for k in sel if k != i]
                assert not others or not cone_member(rows[i], rows[others])


class TestConeMember:
    def test_nonnegative_combination(self):
        assert cone_member([1, 1], [[1, -1], [0, 1]])

    def test_opposite_direction(self):
        assert not cone_member([-1, 0], [[1, 0]])

    def test_apex(self):
        assert cone_member([0, 0], [[1, 2], [3, -1]])
        assert cone_member([0, 0], np.zeros((0, 2)))

    def test_empty_rows(self):
        assert not cone_member([1, 0], np.zeros((0, 2)))

    def test_needs_negative_coefficient(self):
        # (0,1) = ((1,1) - (1,-1)) / 2 uses a negative weight
        assert not cone_member([0, 1], [[1, -1], [1, 1]])


class TestRegularityCondition:
    def test_example_holds_inside_active_set(self, ex1, ex1_ref, ex1_grid):
        cert = check_beta_rc(ex1, ex1_ref["z"], BETA)
        assert cert.kind is CertKind.BETA_RC and cert.isharp_in_I0
        assert cert.det_lower_bound >= 1 - 1e-9
        assert cert.isharp[node_index(ex1_grid, 1.95)] == (2, 4)

    def test_full_rank_instance_selects_all_beta_active(self, ex1_head):
        head, z = ex1_head
        cert = check_beta_rc(head, z, BETA)
        assert cert.kind is CertKind.BETA_RC
        assert cert.isharp == cert.profile.Ibeta

    def test_colinear_rows(self):
        inst = constant_instance([[1, 0], [2, 0]], [0, 0], [-1, 0])
        z = Trajectory.constant(refine_grid(inst.breakpoints, 2), [0, 0])
        cert = check_beta_rc(inst, z, BETA)
        assert cert.kind is CertKind.BETA_RC
        assert all(s == (0,) for s in cert.isharp)
        assert cert.det_lower_bound == pytest.approx(1.0)

    def test_cone_soundness(self, ex1, ex1_ref):
        cert = check_beta_rc(ex1, ex1_ref["z"], BETA)
        for j, ib in enumerate(cert.profile.Ibeta):
            A, _, _ = node_data(ex1, cert.profile.grid, j)
            sharp = A[list(cert.isharp[j])]
            assert all(cone_member(A[i], sharp) for i in ib)

    def test_inverse_gram_bounded_by_sigma(self, ex1, ex1_ref):
        cert = check_beta_rc(ex1, ex1_ref["z"], BETA)
        C = cert.sigma_min_lower_bound
        for j, sel in enumerate(cert.isharp):
            A, _, _ = node_data(ex1, cert.profile.grid, j)
            G = A[list(sel)] @ A[list(sel)].T
            assert spectral_norm(np.linalg.inv(G)) <= (1 / C**2) * (1 + 1e-8)

    def test_assumption_a_from_regularity(self, ex1, ex1_ref):
        cert = check_beta_a(ex1, ex1_ref["z"], BETA)
        assert cert.kind is CertKind.BETA_A and cert.basis is CertKind.BETA_RC

    def test_assumption_a_from_full_rank(self, ex1_head):
        head, z = ex1_head
        cert = check_beta_a(head, z, BETA)
        assert cert.kind is CertKind.BETA_A and cert.basis is CertKind.BETA_FR

    def test_assumption_a_rejects_inactive_selection(self):
        # second row is beta-active but slack; it generates nothing the first does not
        inst = constant_instance([[1, 0], [0, 1]], [0, 0.05], [-1, 0])
        z = Trajectory.constant(refine_grid(inst.breakpoints, 2), [0, 0])
        rep = certify(inst, z, 0.1)
        assert rep.rc.holds and not rep.rc.isharp_in_I0
        assert rep.fr.holds
        assert rep.a.basis is CertKind.BETA_FR


@pytest.fixture(scope="module")
def recovered(ex1):
    grid = TimeGrid.from_times(ex1.breakpoints, [0.5, 1.5])
    z = reference(grid)["z"]
    rep = certify(ex1, z, BETA)
    return grid, z, rep, recover_multipliers_detailed(ex1, z, BETA, None, rep.a)


class TestMultipliers:
    def test_closed_forms(self, recovered):
        grid, _, _, rec = recovered
        for j, (t, k) in enumerate(grid):
            assert np.abs(rec.u.values[j] - multipliers(t, k)).max() <= 1e-8

    def test_start_and_end(self, recovered):
        grid, _, _, rec = recovered
        assert rec.u.values[0] == pytest.approx([0, 0, 0, 1, 0], abs=1e-12)
        assert rec.u.values[-1] == pytest.approx([0, 0, 1, 0, 2], abs=1e-12)

    def test_support_inside_selection(self, recovered):
        _, _, rep, rec = recovered
        for j, sel in enumerate(rep.a.isharp):
            off = [i for i in range(rec.u.dim) if i not in sel]
            assert np.all(rec.u.values[j, off] == 0.0)

    def test_no_negative_diagnostics(self, recovered):
        rec = recovered[3]
        assert rec.negative_lambda == [] and rec.negative_multipliers == []
        assert rec.reconstruction_residual <= 1e-12

    def test_regularity_and_full_rank_routes_agree(self, ex1_head):
        head, z = ex1_head
        rep = certify(head, z, BETA)
        via_fr = recover_multipliers(head, z, BETA, None, rep.fr)
        via_rc = recover_multipliers(head, z, BETA, None, rep.rc)
        assert np.abs(via_fr.values - via_rc.values).max() <= 1e-10

    def test_zero_cost_needs_no_multipliers(self):
        inst = constant_instance([[1, 0], [0, 1]], [0, 0], [0, 0])
        z = Trajectory.constant(refine_grid(inst.breakpoints, 2), [0, 0])
        rep = certify(inst, z, BETA)
        assert np.all(recover_multipliers(inst, z, BETA, None, rep.a).values == 0.0)

    def test_refuses_failed_certificate(self, ex1, ex1_ref):
        cert = check_beta_fr(ex1, ex1_ref["z"], BETA)
        with pytest.raises(CertificateError):
            recover_multipliers(ex1, ex1_ref["z"], BETA, None, cert)

    def test_beta_mismatch(self, ex1, ex1_ref):
        cert = check_beta_rc(ex1, ex1_ref["z"], BETA)
        with pytest.raises(InputError):
            recover_multipliers(ex1, ex1_ref["z"], 0.5, None, cert)

    def test_round_trip_on_random_instances(self):
        rng = np.random.default_rng(11)
        certified = 0
        for _ in range(20):
            inst = random_instance(rng)
            res = solve(inst, refine_grid(inst.breakpoints, 2))
            rep = certify(inst, res.z, 1e-3)
            for cert in (rep.fr, rep.rc):
                if cert.holds:
                    certified += 1
                    u = recover_multipliers(inst, res.z, 1e-3, None, cert)
                    assert check_kkt(inst, res.z, u).stationarity_residual <= 1e-7
                    assert u.values.min() >= -1e-7
        assert certified >= 20


class TestKKT:
    def test_reference_pair_passes(self, ex1, ex1_ref):
        rep = check_kkt(ex1, ex1_ref["z"], ex1_ref["u"])
        assert rep.passed
        assert rep.stationarity_residual <= 1e-12
        assert rep.complementarity_residual <= 1e-12

    def test_missing_multipliers(self, ex1, ex1_ref, ex1_grid):
        rep = check_kkt(ex1, ex1_ref["z"], Trajectory.constant(ex1_grid, [0] * 5))
        assert not rep.passed and rep.stationarity_residual >= 1.0

    def test_perturbed_last_multiplier(self, ex1, ex1_ref, ex1_grid):
        u = ex1_ref["u"].values.copy()
        j = node_index(ex1_grid, 1.5)
        u[j, 4] += 0.1
        rep = check_kkt(ex1, ex1_ref["z"], Trajectory(ex1_grid, u))
        assert not rep.passed
        assert rep.stationarity_residual == pytest.approx(0.1, abs=1e-12)
        assert rep.worst_node == j
        assert rep.complementarity_residual <= 1e-12

    def test_negative_multiplier_fails(self, ex1, ex1_ref, ex1_grid):
        u = ex1_ref["u"].values.copy()
        u[0, 0] = -1.0
        assert not check_kkt(ex1, ex1_ref["z"], Trajectory(ex1_grid, u)).passed

    def test_dimension_mismatch(self, ex1, ex1_ref, ex1_grid):
        with pytest.raises(InputError):
            check_kkt(ex1, ex1_ref["z"], Trajectory.constant(ex1_grid, [0] * 4))


class TestLemma1:
    def test_scaled_identity(self):
        w = lemma1_constants([2 * np.eye(2)], K=2.0, m=2)
        assert w.C == pytest.approx(2.0) and w.Khat == pytest.approx(16.0)
        assert w.consistent and w.full_rank

    def test_rank_deficient_block(self):
        w = lemma1_constants([TAIL_ROWS], K=spectral_norm(TAIL_ROWS), m=3)
        assert w.C > 0 and w.Khat == pytest.approx(0.0, abs=1e-12)
        assert not w.full_rank
        assert w.consistent

    def test_first_interval(self, ex1_head):
        head, z = ex1_head
        C, Khat, ok = lemma1_witness(head, z, BETA)
        assert C == pytest.approx((np.sqrt(5) - 1) / 2, abs=1e-12)
        assert Khat == pytest.approx(1.0, abs=1e-12)
        assert ok

    def test_literal_constant_counterexample(self):
        w = lemma1_constants([[[0.5, 0.0]]], K=1.0, m=1)
        assert w.Khat == pytest.approx(0.25) and w.Khat_literal == pytest.approx(0.5)
        assert not w.literal_converse_holds
        assert w.converse_holds and w.consistent

    def test_constant_maps(self):
        assert khat_from_sigma(2.0, 3) == 4.0
        assert khat_from_sigma(0.5, 3) == pytest.approx(0.5**6)
        assert sigma_from_khat(16.0, 2.0, 2) == pytest.approx(2.0)
        assert sigma_from_khat(0.25, 0.5, 2) == pytest.approx(0.5)

    def test_block_too_large(self):
        with pytest.raises(InputError):
            lemma1_constants([np.eye(3)], K=1.0, m=2)
        with pytest.raises(InputError):
            lemma1_constants([3 * np.eye(2)], K=1.0, m=2)

    def test_random_full_row_rank_blocks(self):
        rng = np.random.default_rng(9)
        for _ in range(50):
            k, n = int(rng.integers(1, 4)), 4
            B = rng.normal(size=(k, n)) * rng.uniform(0.1, 3)
            if svd(B).rank < k:
                continue
            w = lemma1_constants([B], K=spectral_norm(B), m=4)
            assert w.forward_holds and w.converse_holds and w.consistent


class TestCertify:
    def test_report(self, ex1, ex1_ref):
        rep = certify(ex1, ex1_ref["z"], BETA)
        assert not rep.fr.holds and rep.rc.holds and rep.a.holds
        assert rep.any_holds
        d = json.loads(json.dumps(rep.to_dict()))
        assert d["index_base"] == 0
        assert d["BetaRC"]["isharp_in_I0"] is True
        assert d["BetaA"]["basis"] == "BetaRC"

    def test_sweep(self, ex1, ex1_ref):
        reports = beta_sweep(ex1, ex1_ref["z"], 1e-3, 10.0, 5)
        assert [r.profile.beta for r in reports] == pytest.approx(np.geomspace(1e-3, 10.0, 5).tolist())
        sizes = [sum(len(s) for s in r.profile.Ibeta) for r in reports]
        assert sizes == sorted(sizes)
        assert reports[0].rc.holds and not reports[-1].any_holds

    def test_sweep_arguments(self, ex1, ex1_ref):
        with pytest.raises(InputError):
            beta_sweep(ex1, ex1_ref["z"], 1.0, 0.1, 3)
        with pytest.raises(InputError):
            beta_sweep(ex1, ex1_ref["z"], 0.1, 1.0, 0)
