"""Two-arm progressive multistate trial simulator and Monte-Carlo truths.

Each subject moves 0 -> 1 -> ... -> K+1 with exponential gap times; in
state ``j`` the hazard of moving to ``j + 1`` is ``rates[j]``. An optional
direct-death hazard ``death_rate`` acts in every non-fatal state, so death
can arrive before the renal-type states (all later transition times then
equal the death time). A gamma frailty with mean 1 multiplies all of a
subject's hazards.

Observation: censoring at ``min(admin_time, Exp(dropout_rate))``. With an
assessment interval ``> 0`` every non-fatal transition is seen at the next
visit (or at death, if that comes first), which produces tied times.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.linalg import expm

from .errors import InvalidScenario
from .types import ArmDataset, StateSpace

__all__ = [
    "TrialScenario",
    "SimulatedTrial",
    "simulate_trial",
    "true_estimands",
    "transition_survival",
    "exponential_rmst",
    "draw_transition_times",
    "signed_win_times",
]

CHUNK = 10_000


@dataclass(frozen=True)
class TrialScenario:
    """Generative description of a two-arm trial.

    ``rates_treated`` / ``rates_control`` hold one progression hazard per
    transition (per year). ``n_per_arm`` may be an int or a
    ``(treated, control)`` pair.
    """

    n_per_arm: object
    rates_treated: tuple
    rates_control: tuple
    death_rate_treated: float = 0.0
    death_rate_control: float = 0.0
    frailty_variance: float = 0.0
    admin_time: float = 6.0
    dropout_rate: float = 0.0
    assessment_interval: float = 0.0
    seed: int = 0
    labels: tuple = field(default=())

    def __post_init__(self):
        rt = tuple(float(r) for r in self.rates_treated)
        rc = tuple(float(r) for r in self.rates_control)
        object.__setattr__(self, "rates_treated", rt)
        object.__setattr__(self, "rates_control", rc)
        n = self.n_per_arm
        n = (int(n), int(n)) if np.isscalar(n) else tuple(int(v) for v in n)
        object.__setattr__(self, "n_per_arm", n)
        labels = tuple(self.labels) or StateSpace.default(len(rt) - 1).labels
        object.__setattr__(self, "labels", labels)
        problems = []
        if len(rt) < 1 or len(rt) != len(rc):
            problems.append("rate vectors must be non-empty and of equal length")
        if any(not (r > 0 and math.isfinite(r)) for r in rt + rc):
            problems.append("progression rates must be positive and finite")
        if min(self.death_rate_treated, self.death_rate_control) < 0:
            problems.append("death rates must be non-negative")
        if len(n) != 2 or min(n) < 1:
            problems.append("each arm needs at least one subject")
        if not self.frailty_variance >= 0:
            problems.append("frailty variance must be >= 0")
        if not (self.admin_time > 0 and math.isfinite(self.admin_time)):
            problems.append("administrative censoring time must be positive and finite")
        if not self.dropout_rate >= 0:
            problems.append("dropout rate must be >= 0")
        if not self.assessment_interval >= 0:
            problems.append("assessment interval must be >= 0")
        if len(labels) != len(rt):
            problems.append(f"{len(rt)} transitions but {len(labels)} labels")
        if problems:
            raise InvalidScenario("; ".join(problems))

    @property
    def state_space(self) -> StateSpace:
        return StateSpace(self.labels)

    def rates(self, arm: int):
        if arm == 1:
            return np.array(self.rates_treated), self.death_rate_treated
        return np.array(self.rates_control), self.death_rate_control

    def to_dict(self) -> dict:
        d = asdict(self)
        d["n_per_arm"] = list(self.n_per_arm)
        for key in ("rates_treated", "rates_control", "labels"):
            d[key] = list(d[key])
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "TrialScenario":
        known = set(cls.__dataclass_fields__)
        extra = set(d) - known
        if extra:
            raise InvalidScenario(f"unknown scenario fields {sorted(extra)}")
        return cls(**d)


@dataclass
class SimulatedTrial:
    treated: ArmDataset
    control: ArmDataset
    tallies: dict
    true_times: dict


def draw_transition_times(rng, n, rates, death_rate=0.0, frailty_variance=0.0):
    """True transition times ``T_1 <= ... <= T_{K+1}``, shape ``(n, K + 1)``.

    The number and order of random draws does not depend on the parameter
    values, so streams stay aligned across scenarios.
    """
    m = len(rates)
    if frailty_variance > 0:
        shape = 1.0 / frailty_variance
        frailty = rng.gamma(shape, frailty_variance, size=n)
    else:
        rng.gamma(1.0, 1.0, size=n)
        frailty = np.ones(n)
    prog = rng.standard_exponential((n, m))
    death = rng.standard_exponential((n, m))
    times = np.empty((n, m))
    now = np.zeros(n)
    dead = np.zeros(n, dtype=bool)
    for j in range(m):
        gap = prog[:, j] / (frailty * rates[j])
        if death_rate > 0:
            gap_d = death[:, j] / (frailty * death_rate)
            dies = ~dead & (gap_d < gap)
        else:
            dies = np.zeros(n, dtype=bool)
        step = np.where(dies, death[:, j] / (frailty * max(death_rate, 1e-300)), gap)
        now = np.where(dead, now, now + step)
        dead |= dies
        times[:, j] = now
    return times


def _observe(rng, times, scenario: TrialScenario):
    n, m = times.shape
    drop = rng.standard_exponential(n)
    cens = np.full(n, float(scenario.admin_time))
    if scenario.dropout_rate > 0:
        cens = np.minimum(cens, drop / scenario.dropout_rate)
    seen = times.copy()
    step = scenario.assessment_interval
    if step > 0:
        visits = np.ceil(times[:, :-1] / step) * step
        seen[:, :-1] = np.minimum(visits, times[:, -1:])
    delta = (seen <= cens[:, None]).astype(np.int8)
    x = np.where(delta == 1, seen, cens[:, None])
    return x, delta, seen, cens


def _tallies(seen, cens, labels):
    """First-event and worst-state counts straight from the generator's arrays."""
    observed = seen <= cens[:, None]
    first = {lab: 0 for lab in labels}
    worst = {"censored": 0, **{lab: 0 for lab in labels}}
    for row, obs in zip(seen, observed):
        if not obs[0]:
            worst["censored"] += 1
            continue
        k_first = max(k for k in range(len(labels)) if obs[k] and row[k] == row[0])
        first[labels[k_first]] += 1
        worst[labels[int(obs.sum()) - 1]] += 1
    first["total_events"] = int(observed[:, 0].sum())
    worst["total"] = int(seen.shape[0])
    return {"first_events": first, "worst_state": worst}


def _arm_streams(seed, arm, n):
    """One generator per fixed-size block of subjects for an arm."""
    root = np.random.SeedSequence([int(seed), int(arm)])
    n_blocks = max(1, -(-n // CHUNK))
    return [np.random.default_rng(s) for s in root.spawn(n_blocks)]


def _simulate_arm(scenario, arm):
    n = scenario.n_per_arm[0] if arm == 1 else scenario.n_per_arm[1]
    rates, death_rate = scenario.rates(arm)
    xs, ds, seens, cs, ts = [], [], [], [], []
    for b, rng in enumerate(_arm_streams(scenario.seed, arm, n)):
        size = min(CHUNK, n - b * CHUNK)
        t = draw_transition_times(rng, size, rates, death_rate, scenario.frailty_variance)
        x, d, seen, c = _observe(rng, t, scenario)
        xs.append(x)
        ds.append(d)
        seens.append(seen)
        cs.append(c)
        ts.append(t)
    prefix = "T" if arm == 1 else "C"
    ids = [f"{prefix}{i:06d}" for i in range(n)]
    data = ArmDataset(arm, np.vstack(xs), np.vstack(ds), scenario.state_space, ids)
    tallies = _tallies(np.vstack(seens), np.concatenate(cs), scenario.labels)
    return data, tallies, np.vstack(ts)


def simulate_trial(scenario: TrialScenario) -> SimulatedTrial:
    """Draw one trial. Records are validated on construction."""
    treated, tally1, t1 = _simulate_arm(scenario, 1)
    control, tally0, t0 = _simulate_arm(scenario, 0)
    return SimulatedTrial(treated, control, {"treated": tally1, "control": tally0},
                          {"treated": t1, "control": t0})


def signed_win_times(t1, t0, tau):
    """Per-pair stage win times of row ``i`` of ``t1`` against row ``i`` of ``t0``.

    Returns shape ``(n, K + 1)``: time treated is better, credited to the
    control's state, minus time control is better, credited to the treated
    state.
    """
    n, m = t1.shape
    knots = np.sort(np.concatenate((np.zeros((n, 1)), t1, t0), axis=1), axis=1)
    knots = np.minimum(knots, tau)
    widths = np.diff(np.concatenate((knots, np.full((n, 1), float(tau))), axis=1), axis=1)
    y1 = (t1[:, None, :] <= knots[:, :, None]).sum(axis=2)
    y0 = (t0[:, None, :] <= knots[:, :, None]).sum(axis=2)
    out = np.empty((n, m))
    for k in range(1, m + 1):
        win = (y1 < y0) & (y0 == k)
        lose = (y0 < y1) & (y1 == k)
        out[:, k - 1] = np.sum(widths * (win.astype(float) - lose), axis=1)
    return out


def _mean_se(values):
    values = np.asarray(values, dtype=float)
    return float(values.mean()), float(values.std(ddof=1) / math.sqrt(values.shape[0]))


def true_estimands(scenario: TrialScenario, tau: float, n_mc: int = 1_000_000, seed=None) -> dict:
    """Monte-Carlo truths on uncensored, continuously observed processes.

    AUC truths average the subject-level ``A(tau)``; RMT-IF truths average
    signed win times of independent treated-control pairs. Every value comes
    with its Monte-Carlo standard error.
    """
    if n_mc < 100_000:
        raise ValueError("n_mc must be at least 1e5")
    seed = scenario.seed if seed is None else seed
    root = np.random.SeedSequence([int(seed), 7919])
    n_blocks = -(-n_mc // CHUNK)
    streams = root.spawn(2 * n_blocks)
    m = len(scenario.rates_treated)
    sums = {"a1": [], "a0": [], "w": []}
    for b in range(n_blocks):
        size = min(CHUNK, n_mc - b * CHUNK)
        r1, d1 = scenario.rates(1)
        r0, d0 = scenario.rates(0)
        t1 = draw_transition_times(np.random.default_rng(streams[2 * b]), size, r1, d1,
                                   scenario.frailty_variance)
        t0 = draw_transition_times(np.random.default_rng(streams[2 * b + 1]), size, r0, d0,
                                   scenario.frailty_variance)
        sums["a1"].append(m * tau - np.minimum(t1, tau).sum(axis=1))
        sums["a0"].append(m * tau - np.minimum(t0, tau).sum(axis=1))
        sums["w"].append(signed_win_times(t1, t0, tau))
    a1 = np.concatenate(sums["a1"])
    a0 = np.concatenate(sums["a0"])
    w = np.vstack(sums["w"])
    auc1, se1 = _mean_se(a1)
    auc0, se0 = _mean_se(a0)
    ratio = auc1 / auc0 if auc0 > 0 else float("nan")
    ratio_se = abs(ratio) * math.hypot(se1 / auc1, se0 / auc0) if auc0 > 0 and auc1 > 0 else float("nan")
    overall, overall_se = _mean_se(w.sum(axis=1))
    stage = [_mean_se(w[:, k]) for k in range(m)]
    (r1, dr1), (r0, dr0) = scenario.rates(1), scenario.rates(0)
    return {
        "tau": float(tau),
        "n_mc": int(n_mc),
        "seed": int(seed),
        "labels": list(scenario.labels),
        "auc_treated": auc1,
        "auc_treated_mcse": se1,
        "auc_control": auc0,
        "auc_control_mcse": se0,
        "auc_ratio": ratio,
        "auc_ratio_mcse": ratio_se,
        "auc_difference": auc1 - auc0,
        "auc_difference_mcse": math.hypot(se1, se0),
        "rmtif_overall": overall,
        "rmtif_overall_mcse": overall_se,
        "rmtif_stages": [s[0] for s in stage],
        "rmtif_stages_mcse": [s[1] for s in stage],
        # hazard of leaving state 0, conditional on frailty
        "composite_hazard_ratio": float((r1[0] + dr1) / (r0[0] + dr0)),
    }


def exponential_rmst(rate: float, tau: float) -> float:
    """``int_0^tau exp(-rate t) dt``."""
    return (1.0 - math.exp(-rate * tau)) / rate


def transition_survival(rates, t, death_rate=0.0):
    """``P(T_k > t)`` for every transition under the frailty-free generator.

    Computed from the matrix exponential of the chain's generator; returns
    shape ``(len(t), K + 1)``.
    """
    rates = np.asarray(rates, dtype=float)
    m = rates.size
    q = np.zeros((m + 1, m + 1))
    for j in range(m):
        q[j, j + 1] += rates[j]
        q[j, m] += death_rate
        q[j, j] = -q[j].sum()
    t = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.empty((t.size, m))
    for i, ti in enumerate(t):
        occ = expm(q * ti)[0]
        out[i] = np.cumsum(occ)[:m]
    return out
