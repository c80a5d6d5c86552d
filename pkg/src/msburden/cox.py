"""Time-to-first-event composite analysis with a two-arm Cox model.

The composite time is the first observed transition (or the censoring
time), so it is simply ``x_1`` with indicator ``delta_1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import chi2, norm

from .errors import MonotoneLikelihood, NoEvents
from .km import TransitionSample, fit_nelson_aalen
from .types import ArmDataset, StepCurve

__all__ = [
    "CompositeSample",
    "CoxFit",
    "to_composite",
    "cox_partial_likelihood",
    "fit_cox_hr",
    "logrank_test",
    "cumulative_hazard_curves",
]


@dataclass(frozen=True, eq=False)
class CompositeSample:
    time: np.ndarray
    event: np.ndarray
    arm: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.time, dtype=float)
        e = np.asarray(self.event).astype(bool)
        a = np.asarray(self.arm).astype(int)
        if not (t.shape == e.shape == a.shape) or t.ndim != 1:
            raise ValueError("time, event and arm must be equal-length vectors")
        if np.any(t < 0):
            raise ValueError("composite times must be non-negative")
        object.__setattr__(self, "time", t)
        object.__setattr__(self, "event", e)
        object.__setattr__(self, "arm", a)

    def __len__(self):
        return self.time.size


@dataclass(frozen=True)
class CoxFit:
    beta: float
    se: float
    hr: float
    ci: tuple
    p: float
    loglik: float
    loglik_null: float
    score: float
    iterations: int
    ties: str


def to_composite(treated: ArmDataset, control: ArmDataset) -> CompositeSample:
    """One row per subject: first transition time (or censoring) and arm."""
    time = np.concatenate((treated.x[:, 0], control.x[:, 0]))
    event = np.concatenate((treated.delta[:, 0], control.delta[:, 0]))
    arm = np.concatenate((np.full(treated.n, treated.arm), np.full(control.n, control.arm)))
    return CompositeSample(time, event, arm)


class _RiskSets:
    """Per distinct event time sums needed by the binary-covariate partial likelihood."""

    def __init__(self, sample: CompositeSample, ties: str):
        if ties not in ("efron", "breslow"):
            raise ValueError(f"ties must be 'efron' or 'breslow', got {ties!r}")
        t, e, z = sample.time, sample.event, sample.arm.astype(float)
        self.ev_times = np.unique(t[e])
        g = self.ev_times.size
        # subjects at risk at event time j: t >= ev_times[j]
        pos = np.searchsorted(self.ev_times, t, side="right") - 1
        keep = pos >= 0
        self.n_risk = np.cumsum(np.bincount(pos[keep], minlength=g)[::-1])[::-1].astype(float)
        self.n1_risk = np.cumsum(np.bincount(pos[keep], weights=z[keep], minlength=g)[::-1])[::-1]
        ej = np.searchsorted(self.ev_times, t[e])
        self.d = np.bincount(ej, minlength=g).astype(float)
        self.d1 = np.bincount(ej, weights=z[e], minlength=g)
        self.sum_z_events = float(z[e].sum())
        # one row per event: its group and rank within the tie
        order = np.argsort(ej, kind="stable")
        grp = ej[order]
        start = np.searchsorted(grp, np.arange(g))
        rank = np.arange(grp.size) - start[grp]
        self.grp = grp
        self.frac = rank / self.d[grp] if ties == "efron" else np.zeros(grp.size)

    def evaluate(self, beta):
        """Log partial likelihood, score and information at ``beta``."""
        r = math.exp(beta)
        n0 = self.n_risk - self.n1_risk
        s0 = n0 + r * self.n1_risk
        s1 = r * self.n1_risk
        d0 = (self.d - self.d1) + r * self.d1
        d1 = r * self.d1
        g, f = self.grp, self.frac
        phi0 = s0[g] - f * d0[g]
        phi1 = s1[g] - f * d1[g]
        p = phi1 / phi0
        loglik = beta * self.sum_z_events - np.sum(np.log(phi0))
        score = self.sum_z_events - np.sum(p)
        info = np.sum(p - p * p)  # binary covariate: z**2 == z
        return float(loglik), float(score), float(info)


def cox_partial_likelihood(sample: CompositeSample, beta: float, ties: str = "efron"):
    """``(loglik, score, information)`` of the one-covariate Cox model at ``beta``."""
    return _RiskSets(sample, ties).evaluate(beta)


def fit_cox_hr(
    sample: CompositeSample,
    alpha: float = 0.05,
    ties: str = "efron",
    max_iter: int = 100,
    beta_bound: float = 30.0,
) -> CoxFit:
    """Maximum partial-likelihood hazard ratio of arm 1 versus arm 0.

    Newton-Raphson with step halving whenever the likelihood is non-finite
    or decreases. Stops when ``|score| < 1e-10`` or the step is below
    ``1e-12``.

    Raises
    ------
    NoEvents
        No composite events at all.
    MonotoneLikelihood
        The likelihood keeps increasing as ``|beta|`` grows (for instance an
        arm with no events), so no finite estimate exists.
    """
    if not sample.event.any():
        raise NoEvents("no composite events; the hazard ratio is not estimable")
    for a in (0, 1):
        if not sample.event[sample.arm == a].any():
            raise MonotoneLikelihood(f"arm {a} has no events; the partial likelihood is monotone")
    rs = _RiskSets(sample, ties)
    beta = 0.0
    ll0, score, info = rs.evaluate(beta)
    ll = ll0
    it = 0
    for it in range(1, max_iter + 1):
        if abs(score) < 1e-10:
            break
        if not info > 0:
            raise MonotoneLikelihood("information vanished before convergence")
        step = score / info
        while True:
            cand = beta + step
            try:
                ll_c, score_c, info_c = rs.evaluate(cand)
            except (OverflowError, ZeroDivisionError, FloatingPointError):
                ll_c = float("nan")
            if math.isfinite(ll_c) and ll_c >= ll - 1e-12 * abs(ll):
                break
            step /= 2.0
            if abs(step) < 1e-12:
                break
        if abs(step) < 1e-12:
            break
        beta, ll, score, info = cand, ll_c, score_c, info_c
        if abs(beta) > beta_bound:
            raise MonotoneLikelihood(f"|beta| exceeded {beta_bound}; the estimate diverges")
    else:
        raise MonotoneLikelihood(f"no convergence after {max_iter} Newton steps")
    if not info > 1e-8:
        # flat likelihood at the optimum: the maximiser sits at infinity
        raise MonotoneLikelihood(f"information {info:.3g} at beta={beta:.3g}; the estimate diverges")
    se = 1.0 / math.sqrt(info)
    z = norm.ppf(1.0 - alpha / 2.0)
    return CoxFit(
        beta=beta,
        se=se,
        hr=math.exp(beta),
        ci=(math.exp(beta - z * se), math.exp(beta + z * se)),
        p=float(2.0 * norm.sf(abs(beta) / se)),
        loglik=ll,
        loglik_null=ll0,
        score=score,
        iterations=it,
        ties=ties,
    )


def logrank_test(sample: CompositeSample):
    """Two-sample log-rank test of arm 1 versus arm 0.

    Returns ``(observed_minus_expected, variance, chi2_stat, p)`` for arm 1,
    using the hypergeometric variance at each distinct event time.
    """
    t, e, z = sample.time, sample.event, sample.arm == 1
    stat_u, stat_v = 0.0, 0.0
    for s in np.unique(t[e]):
        at_risk = t >= s
        n = at_risk.sum()
        n1 = (at_risk & z).sum()
        dead = e & (t == s)
        d = dead.sum()
        d1 = (dead & z).sum()
        stat_u += d1 - d * n1 / n
        if n > 1:
            stat_v += d * (n1 / n) * (1 - n1 / n) * (n - d) / (n - 1)
    stat = stat_u**2 / stat_v if stat_v > 0 else 0.0
    return stat_u, stat_v, stat, float(chi2.sf(stat, 1))


def cumulative_hazard_curves(sample: CompositeSample) -> dict:
    """Nelson-Aalen cumulative hazard of the composite endpoint per arm."""
    out = {}
    for a in (1, 0):
        m = sample.arm == a
        if not m.any():
            continue
        inc = fit_nelson_aalen(TransitionSample(sample.time[m], sample.event[m]))
        out[a] = inc.cumulative() if inc.jump_times.size else StepCurve([], [], 0.0)
    return out
