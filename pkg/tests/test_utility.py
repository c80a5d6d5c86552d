import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from msburden import (
    SubjectRecord,
    UtilitySpec,
    auc_contrast,
    comparative_utility,
    cumulative_utility,
    expected_utility,
    expected_utility_contrast,
    mean_score_curve,
)
from msburden.errors import CensoredInput, NonMonotoneScores

from conftest import random_arm, random_pair

trajectories = st.lists(st.floats(0.0, 10.0), min_size=1, max_size=5).map(sorted)


def test_examples():
    assert cumulative_utility([2.0], UtilitySpec("fixed", (1,)), 6.0) == 4.0
    # 40% at 1, death at 3 with consecutive scores over [0, 5]
    assert cumulative_utility([1.0, 3.0], UtilitySpec.consecutive(2), 5.0) == 2.0 + 4.0
    # state skipping: ties contribute zero occupancy
    assert cumulative_utility([2.0, 2.0, 2.0], UtilitySpec.consecutive(3), 4.0) == 6.0


@pytest.mark.parametrize("scores", [(2, 1), (-1, 1), (0, np.inf)])
def test_rejects_bad_scores(scores):
    with pytest.raises(NonMonotoneScores):
        UtilitySpec("fixed", scores)


def test_rejects_censored_record():
    with pytest.raises(CensoredInput):
        cumulative_utility(SubjectRecord("a", 1, [1, 2], [1, 0]), UtilitySpec.consecutive(2), 3.0)


@settings(max_examples=100, deadline=None)
@given(trajectories, st.floats(0.1, 12.0), st.data())
def test_linear_in_scores(times, tau, data):
    m = len(times)
    a = np.cumsum(data.draw(st.lists(st.floats(0, 5), min_size=m, max_size=m)))
    b = np.cumsum(data.draw(st.lists(st.floats(0, 5), min_size=m, max_size=m)))
    ua = cumulative_utility(times, UtilitySpec("fixed", a), tau)
    ub = cumulative_utility(times, UtilitySpec("fixed", b), tau)
    uab = cumulative_utility(times, UtilitySpec("fixed", a + 2 * b), tau)
    assert uab == pytest.approx(ua + 2 * ub, rel=1e-12, abs=1e-12)
    # consecutive scores give the area under the integer score path
    path = sum(max(0.0, tau - t) for t in times)
    assert cumulative_utility(times, UtilitySpec.consecutive(m), tau) == pytest.approx(path)


@settings(max_examples=100, deadline=None)
@given(trajectories, trajectories, st.floats(0.1, 12.0))
def test_comparative_bridge(a, b, tau):
    m = min(len(a), len(b))
    a, b = a[:m], b[:m]
    wins_b = comparative_utility(a, b, tau)
    wins_a = comparative_utility(b, a, tau)
    assert np.all(wins_b >= 0) and np.all(wins_a >= 0)
    # the two processes are never both strictly better than each other
    assert wins_a.sum() + wins_b.sum() <= tau + 1e-12


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.5, 10.0))
def test_consecutive_scores_reduce_to_auc(seed, tau):
    rng = np.random.default_rng(seed)
    t, c = random_pair(rng)
    spec = UtilitySpec.consecutive(t.state_space.n_transitions)
    out = expected_utility_contrast(t, c, spec, tau)
    auc = auc_contrast(t, c, tau)
    assert out.reduction == pytest.approx(-auc.difference, rel=1e-12, abs=1e-12 * tau)
    assert out.treated == pytest.approx(auc.treated.auc, rel=1e-12, abs=1e-12 * tau)


def test_uncensored_plugin_equals_subject_average(rng):
    data = random_arm(rng, 3, 30, censor=False, ties=False)
    spec = UtilitySpec("fixed", (0.5, 1.0, 1.0, 3.0))
    direct = np.mean([cumulative_utility(row, spec, 4.0) for row in data.x])
    assert expected_utility(data, spec, 4.0) == pytest.approx(direct, rel=1e-12)


def test_death_only_scores_give_rmst_loss(rng):
    t, c = random_pair(rng, k=2, n=30)
    spec = UtilitySpec("fixed", (0, 0, 1))
    out = expected_utility_contrast(t, c, spec, 5.0)
    auc = auc_contrast(t, c, 5.0)
    assert out.difference == pytest.approx(-auc.component_differences[-1], abs=1e-12)


def test_mean_curve_integrates_to_expected_utility(rng):
    data = random_arm(rng, 4, 40)
    spec = UtilitySpec.consecutive(5)
    assert mean_score_curve(data, 6.0).integrate(6.0) == pytest.approx(
        expected_utility(data, spec, 6.0), rel=1e-12
    )
