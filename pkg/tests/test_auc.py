import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from msburden import (
    ArmDataset,
    StateSpace,
    auc_arm,
    auc_contrast,
    auc_influence_se,
    auc_influence_values,
    mean_score_curve,
    running_auc_ratio,
)
from msburden.auc import auc_bootstrap_se, auc_curve
from msburden.errors import NonPositiveHorizon, ZeroControlBurden
from msburden.km import event_grid, km_on_grid, rmst_on_grid, transition_samples

from conftest import random_arm, random_pair


def weighted_auc(data, tau, weights):
    samples = transition_samples(data)
    grid = event_grid(samples, tau)
    total = len(samples) * tau
    for s in samples:
        total -= rmst_on_grid(km_on_grid(s.times, s.events, grid, weights), grid, tau)
    return total


def jackknife_influence(data, tau, eps=1e-6):
    """n * d AUC / d w_i by central differences of the frequency-weighted estimator."""
    n = data.n
    bumps = np.ones((2 * n, n))
    bumps[np.arange(n), np.arange(n)] += eps
    bumps[n + np.arange(n), np.arange(n)] -= eps
    vals = weighted_auc(data, tau, bumps)
    return n * (vals[:n] - vals[n:]) / (2 * eps)


def test_no_events():
    sp = StateSpace.default(4)
    data = ArmDataset(1, np.full((5, 5), 7.0), np.zeros((5, 5)), sp)
    est = auc_arm(data, 6.0)
    assert est.auc == 0.0 and est.rmst_components == (6.0,) * 5 and est.se == 0.0
    assert mean_score_curve(data, 6.0)(3.0) == 0.0


def test_k0_hand_example():
    data = ArmDataset(1, [[1.0], [2.0], [3.0]], [[1], [0], [1]], StateSpace(("death",)))
    est = auc_arm(data, 3.0)
    assert est.auc == pytest.approx(3 - 7 / 3, rel=1e-14)


def test_single_subject_all_events_at_one():
    data = ArmDataset(1, [[1.0] * 5], [[1] * 5], StateSpace.default(4))
    curve = mean_score_curve(data, 6.0)
    assert curve(0.5) == 0.0 and curve(1.0) == 5.0 and curve(6.0) == 5.0
    assert auc_arm(data, 6.0).auc == pytest.approx(25.0)


def test_nonpositive_tau():
    data = ArmDataset(1, [[1.0]], [[1]], StateSpace(("death",)))
    with pytest.raises(NonPositiveHorizon):
        auc_arm(data, 0.0)


@settings(max_examples=120, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.5, 12.0))
def test_identities(seed, tau):
    rng = np.random.default_rng(seed)
    data = random_arm(rng, int(rng.integers(0, 5)), int(rng.integers(1, 30)))
    est = auc_arm(data, tau)
    k1 = data.state_space.n_transitions
    assert est.auc == pytest.approx(k1 * tau - sum(est.rmst_components), rel=1e-12, abs=1e-12)
    assert mean_score_curve(data, tau).integrate(tau) == pytest.approx(est.auc, rel=1e-12, abs=1e-11)
    assert -1e-12 <= est.auc <= k1 * tau + 1e-12
    curve = mean_score_curve(data, tau)
    assert np.all(np.diff(curve.values) >= -1e-12)
    assert np.all((curve.values >= -1e-12) & (curve.values <= k1 + 1e-12))


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.5, 10.0))
def test_influence_values_sum_to_zero(seed, tau):
    rng = np.random.default_rng(seed)
    data = random_arm(rng, int(rng.integers(0, 5)), int(rng.integers(2, 30)))
    xi = auc_influence_values(data, tau)
    assert abs(xi.sum()) <= 1e-9 * max(1.0, np.abs(xi).sum())


def test_duplication_shrinks_se_by_root_two(rng):
    data = random_arm(rng, 4, 40, ties=False)
    doubled = data.take(np.concatenate([np.arange(40), np.arange(40)]))
    assert auc_influence_se(doubled, 4.0) == pytest.approx(
        auc_influence_se(data, 4.0) / math.sqrt(2), rel=1e-12
    )


def test_influence_close_to_infinitesimal_jackknife():
    rng = np.random.default_rng(3)
    data = random_arm(rng, 4, 400, ties=False)
    tau = 5.0
    xi = auc_influence_values(data, tau)
    ij = jackknife_influence(data, tau)
    # the two linearisations differ only by O(1/n) discrete-hazard factors
    assert np.corrcoef(xi, ij)[0, 1] > 0.995
    se_ij = math.sqrt(np.mean(ij**2) / data.n)
    assert auc_influence_se(data, tau) == pytest.approx(se_ij, rel=0.03)


def test_influence_se_tracks_bootstrap():
    rng = np.random.default_rng(11)
    data = random_arm(rng, 4, 300, ties=False)
    assert auc_influence_se(data, 4.0) == pytest.approx(
        auc_bootstrap_se(data, 4.0, 1000, seed=5), rel=0.1
    )


class TestContrast:
    def test_identical_arms(self, rng):
        data = random_arm(rng, 4, 30)
        c = auc_contrast(data, data.with_arm(0), 6.0)
        assert c.ratio == 1.0 and c.difference == 0.0
        assert c.ratio_p == pytest.approx(1.0) and c.difference_p == pytest.approx(1.0)

    @settings(max_examples=80, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.floats(1.0, 10.0))
    def test_algebra(self, seed, tau):
        rng = np.random.default_rng(seed)
        t, c = random_pair(rng)
        out = auc_contrast(t, c, tau)
        assert out.difference == out.treated.auc - out.control.auc
        assert out.difference == pytest.approx(-sum(out.component_differences), abs=1e-11)
        if out.control.auc > 0 and out.treated.auc > 0:
            assert out.ratio == out.treated.auc / out.control.auc
            z = 1.959963984540054
            se = math.hypot(out.treated.se / out.treated.auc, out.control.se / out.control.auc)
            assert out.log_ratio_se == pytest.approx(se)
            assert out.ratio_ci[0] == pytest.approx(out.ratio * math.exp(-z * se))
            assert out.ratio_ci[1] == pytest.approx(out.ratio * math.exp(z * se))
        dse = math.hypot(out.treated.se, out.control.se)
        assert out.difference_se == pytest.approx(dse)

    def test_zero_control_burden(self):
        sp = StateSpace(("death",))
        treated = ArmDataset(1, [[1.0], [5.0]], [[1], [0]], sp)
        control = ArmDataset(0, [[5.0], [5.0]], [[0], [0]], sp)
        out = auc_contrast(treated, control, 4.0)
        assert math.isnan(out.ratio) and out.difference > 0
        assert any("ZeroControlBurden" in w for w in out.warnings)
        with pytest.raises(ZeroControlBurden):
            auc_contrast(treated, control, 4.0, strict_ratio=True)

    def test_horizon_warning(self):
        sp = StateSpace(("death",))
        data = ArmDataset(1, [[1.0], [2.0]], [[1], [0]], sp)
        with pytest.warns(UserWarning):
            est = auc_arm(data, 6.0)
        assert est.warnings


def test_running_ratio_matches_arm_estimates(rng):
    t, c = random_pair(rng, k=3, n=20)
    times = np.array([1.0, 2.5, 4.0])
    ratio = running_auc_ratio(t, c, times)
    for tt, r in zip(times, ratio):
        a1, a0 = auc_arm(t, tt).auc, auc_arm(c, tt).auc
        if a0 > 0:
            assert r == pytest.approx(a1 / a0, rel=1e-12)
    np.testing.assert_allclose(auc_curve(t, times), [auc_arm(t, x).auc for x in times], rtol=1e-12)
