import math

import numpy as np
import pytest

from msburden import (
    TrialScenario,
    simulate_trial,
    summarize_first_events,
    summarize_worst_state,
    true_estimands,
)
from msburden.errors import InvalidScenario
from msburden.simulate import draw_transition_times, exponential_rmst, transition_survival

BASE = dict(
    n_per_arm=300,
    rates_treated=(0.3, 0.4, 0.5),
    rates_control=(0.4, 0.5, 0.6),
    death_rate_treated=0.05,
    death_rate_control=0.08,
    dropout_rate=0.05,
    admin_time=5.0,
    seed=3,
)


@pytest.mark.parametrize(
    "change",
    [
        {"rates_treated": (0.3, 0.4)},
        {"rates_control": (0.4, -0.5, 0.6)},
        {"death_rate_control": -1.0},
        {"n_per_arm": 0},
        {"frailty_variance": -0.1},
        {"admin_time": 0.0},
        {"assessment_interval": -1.0},
        {"labels": ("a", "b")},
    ],
)
def test_invalid_scenarios(change):
    with pytest.raises(InvalidScenario):
        TrialScenario(**{**BASE, **change})


def test_dict_round_trip():
    sc = TrialScenario(**BASE, labels=("40%", "ESRD", "death"))
    assert TrialScenario.from_dict(sc.to_dict()) == sc
    with pytest.raises(InvalidScenario):
        TrialScenario.from_dict({**sc.to_dict(), "bogus": 1})


def test_deterministic():
    a = simulate_trial(TrialScenario(**BASE))
    b = simulate_trial(TrialScenario(**BASE))
    assert a.treated == b.treated and a.control == b.control
    c = simulate_trial(TrialScenario(**{**BASE, "seed": 4}))
    assert not np.array_equal(a.treated.x, c.treated.x)


@pytest.mark.parametrize("interval", [0.0, 0.5])
def test_tallies_match_dataset_summaries(interval):
    trial = simulate_trial(TrialScenario(**{**BASE, "assessment_interval": interval}))
    for name, data in (("treated", trial.treated), ("control", trial.control)):
        assert trial.tallies[name]["first_events"] == summarize_first_events(data)
        assert trial.tallies[name]["worst_state"] == summarize_worst_state(data)


def test_assessment_grid_creates_ties():
    trial = simulate_trial(TrialScenario(**{**BASE, "assessment_interval": 0.5}))
    x, d = trial.treated.x, trial.treated.delta
    seen = d[:, :-1].astype(bool)
    on_grid = np.isclose(x[:, :-1] / 0.5, np.round(x[:, :-1] / 0.5)) | (x[:, :-1] == x[:, -1:])
    assert np.all(on_grid[seen])
    both = (d[:, 0] == 1) & (d[:, 1] == 1)
    assert np.any(x[both, 0] == x[both, 1])


def test_censoring_bounded_by_admin_time():
    trial = simulate_trial(TrialScenario(**BASE))
    assert trial.treated.x.max() <= BASE["admin_time"]


def test_vanishing_rates_give_no_events():
    trial = simulate_trial(TrialScenario(**{**BASE, "rates_treated": (1e-12,) * 3,
                                            "death_rate_treated": 0.0}))
    assert trial.treated.delta.sum() == 0


def test_matches_generator_survival():
    rates, death = np.array([0.3, 0.5, 0.4]), 0.1
    times = draw_transition_times(np.random.default_rng(1), 100_000, rates, death)
    ts = np.array([1.0, 3.0, 5.0])
    expect = transition_survival(rates, ts, death)
    for i, t in enumerate(ts):
        emp = (times > t).mean(axis=0)
        se = np.sqrt(expect[i] * (1 - expect[i]) / times.shape[0])
        assert np.all(np.abs(emp - expect[i]) <= 3 * se)


def test_frailty_keeps_mean_one_hazard_at_start():
    # marginal first-transition survival under gamma frailty: (1 + v L t)^(-1/v)
    rate, v = 0.5, 0.8
    times = draw_transition_times(np.random.default_rng(2), 100_000, [rate], 0.0, v)[:, 0]
    for t in (0.5, 2.0):
        expect = (1 + v * rate * t) ** (-1 / v)
        se = math.sqrt(expect * (1 - expect) / times.size)
        assert abs((times > t).mean() - expect) <= 3 * se


def test_true_estimands_k0_closed_form():
    sc = TrialScenario(n_per_arm=1, rates_treated=(0.2,), rates_control=(0.3,), seed=5)
    truth = true_estimands(sc, 4.0, n_mc=100_000)
    rmst1, rmst0 = exponential_rmst(0.2, 4.0), exponential_rmst(0.3, 4.0)
    assert abs(truth["auc_treated"] - (4 - rmst1)) <= 3 * truth["auc_treated_mcse"]
    assert abs(truth["rmtif_overall"] - (rmst1 - rmst0)) <= 3 * truth["rmtif_overall_mcse"]
    assert truth["composite_hazard_ratio"] == pytest.approx(2 / 3)
    with pytest.raises(ValueError):
        true_estimands(sc, 4.0, n_mc=10)
