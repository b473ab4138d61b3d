import math

import numpy as np
import pytest
from scipy.integrate import quad

from reluphase import (
    BoundInputs,
    LabeledDataset,
    Rng,
    TrainConfig,
    TrainResult,
    TrajectoryRecord,
    build_output_map,
    cp_upper_bound,
    detect_phases,
    monotonicity_step_threshold,
    monotonicity_audit,
    network_params,
    nonowner_norm_violations,
    owner_norm_violations,
    p_r_lower_bound,
    phase2_sum_bound,
    sphere_area,
    t1_bound,
    train,
)


def toy_inputs(**overrides):
    kw = dict(
        v=1.0,
        eta=0.1,
        radius=1.0,
        data_min=1.0,
        data_max=1.0,
        density_min=1.0,
        density_max=1.0,
        subspace_dim=2,
        n_classes=2,
    )
    kw.update(overrides)
    return BoundInputs(**kw)


class TestSphereArea:
    def test_known_areas(self):
        assert sphere_area(0) == pytest.approx(2.0, rel=1e-14)
        assert sphere_area(1) == pytest.approx(2.0 * math.pi, rel=1e-14)
        assert sphere_area(2) == pytest.approx(4.0 * math.pi, rel=1e-14)
        assert sphere_area(3) == pytest.approx(2.0 * math.pi**2, rel=1e-14)

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            sphere_area(-1)


class TestBoundInputs:
    def test_validation(self):
        with pytest.raises(ValueError):
            toy_inputs(v=0.0)
        with pytest.raises(ValueError):
            toy_inputs(eta=-0.1)
        with pytest.raises(ValueError):
            toy_inputs(data_min=2.0, data_max=1.0)
        with pytest.raises(ValueError):
            toy_inputs(density_min=-0.1)
        with pytest.raises(ValueError):
            toy_inputs(density_min=2.0, density_max=1.0)
        with pytest.raises(ValueError):
            toy_inputs(subspace_dim=0)
        with pytest.raises(ValueError):
            toy_inputs(n_classes=1)


class TestGradientCoefficientBound:
    def test_formula(self):
        assert cp_upper_bound(toy_inputs()) == 1.0
        bi = toy_inputs(data_max=2.0, density_min=0.1, density_max=0.25, subspace_dim=3)
        assert cp_upper_bound(bi) == pytest.approx(4.0 * 0.25, rel=1e-14)


class TestCapMassBound:
    def test_planar_toy_value(self):
        # sin(beta) = 1/2 so beta = pi/6; in the plane the bound collapses to
        # density * beta / pi = density / 6.
        assert p_r_lower_bound(toy_inputs()) == pytest.approx(1.0 / 6.0, rel=1e-10)
        assert p_r_lower_bound(toy_inputs(density_min=0.3)) == pytest.approx(0.05, rel=1e-10)

    def test_three_dimensional_value(self):
        bi = toy_inputs(subspace_dim=3)
        beta = math.asin(0.5)
        expected = 1.0 * (sphere_area(1) / sphere_area(2)) * (1.0 - math.cos(beta))
        assert p_r_lower_bound(bi) == pytest.approx(expected, rel=1e-10)

    def test_matches_direct_quadrature(self):
        bi = toy_inputs(v=0.7, data_max=1.5, radius=2.0, subspace_dim=4, density_min=0.2)
        beta = math.asin(1.0 / (2.0 * 0.7 * 1.5 * 2.0))
        integral, _ = quad(lambda t: math.sin(t) ** 2, 0.0, beta)
        expected = 0.2 * (sphere_area(2) / sphere_area(3)) * integral
        assert p_r_lower_bound(bi) == pytest.approx(expected, rel=1e-8)

    def test_requires_wide_enough_product(self):
        with pytest.raises(ValueError, match="2 \\* v"):
            p_r_lower_bound(toy_inputs(v=0.25))
        with pytest.raises(ValueError, match="subspace_dim"):
            p_r_lower_bound(toy_inputs(subspace_dim=1))


class TestPhaseBounds:
    def test_t1_toy_value(self):
        # C_p = 1, R = 1, v = 1, eta = 0.1, p_R = 1/6: bound is 1/(0.1/36) = 360.
        assert t1_bound(toy_inputs()) == pytest.approx(360.0, rel=1e-9)

    def test_t1_zero_density_rejected(self):
        with pytest.raises(ValueError, match="density_min"):
            t1_bound(toy_inputs(density_min=0.0))

    def test_phase2_toy_value(self):
        # 4 * v * n^2 * C_p * R^3 * M^2 / eta = 4 * 4 / 0.1 = 160.
        assert phase2_sum_bound(toy_inputs()) == pytest.approx(160.0, rel=1e-12)

    def test_step_threshold(self):
        bi = toy_inputs(data_max=2.0, density_min=0.5, density_max=0.5, n_classes=3)
        cp = cp_upper_bound(bi)  # 2^1 * 0.5 = 1
        r = 0.4
        expected = min(r / (cp * 4.0), r / (2.0 * 1.0 * 3.0 * 2.0))
        assert monotonicity_step_threshold(r, bi) == pytest.approx(expected, rel=1e-12)
        with pytest.raises(ValueError):
            monotonicity_step_threshold(0.0, bi)


def fabricated_result(timeline_weights, class1_losses, trained=(1,), v=1.0):
    """TrainResult with hand-picked weight snapshots and class-1 losses."""
    k = timeline_weights[0].shape[1]
    omap = build_output_map(2, k, v)
    params = network_params(timeline_weights[-1], omap)
    records = []
    for t, loss1 in enumerate(class1_losses):
        W = timeline_weights[t]
        norms = np.linalg.norm(W, axis=0)
        records.append(
            TrajectoryRecord(
                t=t,
                loss=loss1,
                loss_per_class={1: loss1, 2: 0.0},
                neuron_norms=norms,
                weight_norm=float(norms.sum()),
                grad_norm=0.0,
            )
        )
    cfg = TrainConfig(eta=0.01, max_iters=len(records) - 1, train_classes=trained)
    return TrainResult(
        params=params,
        records=records,
        weights=list(timeline_weights),
        stop_reason="max_iters",
        converged_at=None,
        max_weight_norm=max(r.weight_norm for r in records),
        diverged=False,
        config=cfg,
        data_labels=(1, 2),
    )


def clustered_then_spread():
    """Three snapshots: class-1 owners clustered (fails), then a tripod (holds)."""
    tripod = np.array([[1.0, -0.5, -0.5], [0.0, math.sqrt(3) / 2, -math.sqrt(3) / 2]])
    clustered = np.array([[1.0, 1.0, 1.0], [0.0, 0.1, -0.1]])
    snaps = []
    for owner_dirs in (clustered, tripod, tripod):
        W = np.zeros((2, 6))
        W[:, 0::2] = owner_dirs  # class 1 owns columns 0, 2, 4
        W[:, 1::2] = 0.2 * tripod  # class 2 spread from the start
        snaps.append(W)
    return snaps


class TestDetectPhases:
    def test_hand_built_timeline(self):
        res = fabricated_result(clustered_then_spread(), [0.9, 0.4, 0.1])
        report = detect_phases(res, 1)
        assert report.gc_timeline == (False, True, True)
        assert report.first_hold == 1
        assert report.t1_size == 1
        assert report.t2_size == 2
        assert report.persistence == 1.0
        assert report.sum_sq_loss_t2 == pytest.approx(0.4**2 + 0.1**2, rel=1e-12)
        assert all(rec.gc_flags == {1: flag} for rec, flag in zip(res.records, report.gc_timeline))

    def test_flapping_timeline_persistence(self):
        snaps = clustered_then_spread()
        snaps.append(snaps[0])  # holds, then falls back to the clustered state
        res = fabricated_result(snaps, [0.9, 0.4, 0.3, 0.2])
        report = detect_phases(res, 1)
        assert report.gc_timeline == (False, True, True, False)
        assert report.first_hold == 1
        assert report.persistence == pytest.approx(2.0 / 3.0)
        assert report.t1_size == 2
        assert report.t2_size == 2

    def test_never_holds(self):
        snaps = [clustered_then_spread()[0]] * 3
        res = fabricated_result(snaps, [0.9, 0.8, 0.7])
        report = detect_phases(res, 1)
        assert report.first_hold is None
        assert report.persistence is None
        assert report.t2_size == 0
        assert report.sum_sq_loss_t2 == 0.0

    def test_second_class_uses_its_own_columns(self):
        res = fabricated_result(clustered_then_spread(), [0.9, 0.4, 0.1])
        report = detect_phases(res, 2)
        assert report.gc_timeline == (True, True, True)

    def test_zero_columns_count_as_not_holding(self):
        snaps = clustered_then_spread()
        snaps[0][:, 0::2] = 0.0
        res = fabricated_result(snaps, [0.9, 0.4, 0.1])
        report = detect_phases(res, 1)
        assert report.gc_timeline == (False, True, True)

    def test_misaligned_weights_rejected(self):
        res = fabricated_result(clustered_then_spread(), [0.9, 0.4, 0.1])
        object.__setattr__(res, "weights", res.weights[:-1])
        with pytest.raises(ValueError, match="keep_weights"):
            detect_phases(res, 1)

    def test_unowned_class_rejected(self):
        res = fabricated_result(clustered_then_spread(), [0.9, 0.4, 0.1])
        with pytest.raises(ValueError, match="owns no hidden units"):
            detect_phases(res, 3)


class TestNormViolationDetectors:
    def test_owner_decrease_flagged(self):
        norms = np.array([[1.0, 5.0], [0.9, 5.0], [1.1, 5.0]])
        out = owner_norm_violations(norms, [0, 1, 2], [0])
        assert len(out) == 1
        v = out[0]
        assert (v.t_from, v.t_to, v.unit, v.kind) == (0, 1, 0, "owner_decrease")
        assert v.delta == pytest.approx(-0.1)

    def test_owner_tolerance(self):
        norms = np.array([[1.0], [1.0 - 1e-14]])
        assert owner_norm_violations(norms, [0, 1], [0]) == []

    def test_nonowner_growth_above_radius_flagged(self):
        norms = np.array([[0.5, 2.0], [0.6, 2.5]])
        out = nonowner_norm_violations(norms, [0, 1], [0, 1], r=1.0)
        assert len(out) == 1
        assert out[0].unit == 1
        assert out[0].kind == "nonowner_increase"
        assert out[0].delta == pytest.approx(0.5)

    def test_nonowner_growth_below_radius_ignored(self):
        norms = np.array([[0.5], [5.0]])
        assert nonowner_norm_violations(norms, [0, 1], [0], r=1.0) == []


class TestMonotonicityAudit:
    def planar_run(self, eta=0.05):
        rng = Rng(13)
        X = np.vstack([rng.normal((12, 2)) + np.array([2.0, 0.0])])
        data = LabeledDataset(X, np.ones(12, dtype=int))
        params = network_params(rng.normal((2, 4)), build_output_map(2, 4, 0.5))
        return train(params, data, TrainConfig(eta=eta, max_iters=60, train_classes=(1,)))

    def test_clean_run_has_no_owner_violations(self):
        res = self.planar_run()
        assert monotonicity_audit(res, 1) == []

    def test_bias_mode_rejected(self):
        rng = Rng(13)
        data = LabeledDataset(rng.normal((6, 2)) + 2.0, np.ones(6, dtype=int))
        params = network_params(rng.normal((2, 4)), build_output_map(2, 4, 0.5), np.full(4, 0.1))
        res = train(params, data, TrainConfig(eta=0.05, max_iters=5, train_classes=(1,)))
        with pytest.raises(ValueError, match="no-bias"):
            monotonicity_audit(res, 1)

    def test_wrong_train_classes_rejected(self):
        res = self.planar_run()
        with pytest.raises(ValueError, match="train classes"):
            monotonicity_audit(res, 2)

    def test_nonowner_checks_gated_by_step_threshold(self):
        res = self.planar_run()
        # fabricate a non-owner increase above the radius and confirm the
        # audit only sees it when the step size is below the step threshold
        norms = np.array([rec.neuron_norms for rec in res.records])
        nonowner = int(np.flatnonzero(res.params.output.owner != 1)[0])
        res.records[0].neuron_norms = norms[0].copy()
        res.records[1].neuron_norms = norms[1].copy()
        res.records[0].neuron_norms[nonowner] = 2.0
        res.records[1].neuron_norms[nonowner] = 3.0
        bi = toy_inputs(eta=res.config.eta, data_max=2.0)
        r = 1.0
        assert res.config.eta < monotonicity_step_threshold(r, bi)
        flagged = monotonicity_audit(res, 1, r=r, bounds=bi)
        assert any(v.kind == "nonowner_increase" and v.unit == nonowner for v in flagged)
        # same run audited without bound inputs makes no non-owner claim
        assert all(v.kind != "nonowner_increase" for v in monotonicity_audit(res, 1))
        # a threshold-violating step size disables the non-owner check too
        tight = toy_inputs(eta=res.config.eta, data_max=100.0, density_max=100.0)
        assert res.config.eta >= monotonicity_step_threshold(r, tight)
        assert all(
            v.kind != "nonowner_increase" for v in monotonicity_audit(res, 1, r=r, bounds=tight)
        )
