"""Area under the mean cumulative-score curve.

The cumulative score of a subject at time ``t`` is the number of transitions
already made, ``N(t) = sum_k I(T_k <= t)``. Its area up to ``tau`` is
``A(tau) = (K + 1) tau - sum_k min(T_k, tau)``, so the arm-level mean is
``(K + 1) tau`` minus the sum of the per-transition restricted means. Each
restricted mean is estimated from the Kaplan-Meier curve of that transition.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import norm

from .errors import DegenerateVariance, NonPositiveHorizon, ZeroControlBurden
from .km import (
    event_grid,
    fit_km,
    fit_nelson_aalen,
    km_on_grid,
    rmst,
    rmst_on_grid,
    transition_samples,
)
from .types import ArmDataset, StepCurve

__all__ = [
    "AucArmEstimate",
    "AucContrast",
    "mean_score_curve",
    "auc_arm",
    "auc_influence_values",
    "auc_influence_se",
    "auc_bootstrap_se",
    "auc_contrast",
    "auc_curve",
    "running_auc_ratio",
    "wald",
]


class HorizonWarning(UserWarning):
    """The horizon extends past the last observed time of an arm."""


@dataclass(frozen=True)
class AucArmEstimate:
    tau: float
    auc: float
    rmst_components: tuple
    se: float
    n: int
    labels: tuple
    warnings: tuple = ()


@dataclass(frozen=True)
class AucContrast:
    """Treatment-versus-control AUC contrasts.

    ``ratio`` inference is on the log scale; ``difference`` is treated minus
    control in event-years. ``component_differences`` holds the treated minus
    control restricted means per transition, so that
    ``difference == -sum(component_differences)``.
    """

    tau: float
    alpha: float
    treated: AucArmEstimate
    control: AucArmEstimate
    ratio: float
    log_ratio_se: float
    ratio_ci: tuple
    ratio_p: float
    difference: float
    difference_se: float
    difference_ci: tuple
    difference_p: float
    component_differences: tuple
    labels: tuple
    warnings: tuple = field(default=())


def wald(estimate, se, alpha, null=0.0):
    """Normal-theory CI and two-sided p-value."""
    z = norm.ppf(1.0 - alpha / 2.0)
    lo, hi = estimate - z * se, estimate + z * se
    if se > 0:
        p = float(2.0 * norm.sf(abs(estimate - null) / se))
    else:
        p = 1.0 if estimate == null else 0.0
    return (float(lo), float(hi)), p


def _check_tau(tau):
    if not tau > 0:
        raise NonPositiveHorizon(f"tau must be positive, got {tau}")


def _horizon_warnings(data: ArmDataset, tau) -> tuple:
    last = float(data.x.max())
    if tau > last:
        msg = f"tau={tau} exceeds the last observed time {last:g} in arm {data.arm}; KM tails carried forward"
        return (msg,)
    return ()


def mean_score_curve(data: ArmDataset, tau: float) -> StepCurve:
    """Estimated mean cumulative score ``(K + 1) - sum_k S_k(t)`` on ``[0, tau]``."""
    curves = [fit_km(s) for s in transition_samples(data)]
    k1 = len(curves)
    return StepCurve.combine(curves, [-1.0] * k1, constant=float(k1)).truncate(tau)


def auc_influence_values(data: ArmDataset, tau: float) -> np.ndarray:
    """Estimated influence function of the arm AUC for every subject.

    For transition ``k`` the contribution of subject ``i`` is the martingale
    integral ``int_0^tau w_k(u) dM_ik(u)`` with weight
    ``w_k(u) = int_u^tau S_k(v) dv / y_k(u)``, where ``y_k(u)`` is the
    empirical fraction with ``X_k >= u`` and ``dM_ik = dN_ik - I(X_ik >= u) dLambda_k``
    uses Nelson-Aalen increments. Returns an array of length ``n``; the
    values sum to zero up to rounding.
    """
    _check_tau(tau)
    n = data.n
    xi = np.zeros(n)
    for sample in transition_samples(data):
        inc = fit_nelson_aalen(sample)
        keep = inc.jump_times <= tau
        u = inc.jump_times[keep]
        if u.size == 0:
            continue
        surv = StepCurve(u, np.cumprod(1.0 - inc.increments[keep]), 1.0)
        tail = surv.area_to(tau) - surv.area_to(u)
        y = inc.at_risk[keep] / n
        w = tail / y
        dlam = inc.increments[keep]
        comp = np.concatenate(([0.0], np.cumsum(w * dlam)))
        x = sample.times
        # compensator: sum over jumps u_j <= min(X_i, tau)
        pos = np.searchsorted(u, x, side="right")
        xi -= comp[pos]
        hit = sample.events & (x <= tau)
        idx = np.searchsorted(u, x[hit])
        xi[hit] += w[idx]
    return xi


def auc_influence_se(data: ArmDataset, tau: float) -> float:
    """Influence-function standard error ``sqrt(mean(xi**2) / n)`` of the arm AUC."""
    xi = auc_influence_values(data, tau)
    if not np.any(xi):
        # a nonzero tail area with two or more at risk must leave a trace in xi
        for sample in transition_samples(data):
            inc = fit_nelson_aalen(sample)
            keep = (inc.jump_times < tau) & (inc.at_risk >= 2) & (inc.n_events < inc.at_risk)
            if np.any(keep):
                raise DegenerateVariance(
                    "all influence values vanished although events carry weight"
                )
    return float(math.sqrt(np.mean(xi**2) / data.n))


def auc_arm(data: ArmDataset, tau: float) -> AucArmEstimate:
    """Arm-level AUC with its influence-function standard error.

    The AUC is computed from the restricted-mean identity and cross-checked
    against the area under :func:`mean_score_curve`.
    """
    _check_tau(tau)
    samples = transition_samples(data)
    components = tuple(rmst(fit_km(s), tau) for s in samples)
    k1 = len(components)
    auc = k1 * tau - math.fsum(components)
    area = mean_score_curve(data, tau).integrate(tau)
    if not math.isclose(area, auc, rel_tol=1e-10, abs_tol=1e-12 * k1 * tau):
        raise ArithmeticError(f"AUC identity broken: {auc!r} vs curve area {area!r}")
    notes = _horizon_warnings(data, tau)
    for msg in notes:
        warnings.warn(msg, HorizonWarning, stacklevel=2)
    return AucArmEstimate(
        tau=float(tau),
        auc=float(auc),
        rmst_components=components,
        se=auc_influence_se(data, tau),
        n=data.n,
        labels=data.state_space.labels,
        warnings=notes,
    )


def auc_contrast(
    treated: ArmDataset,
    control: ArmDataset,
    tau: float,
    alpha: float = 0.05,
    strict_ratio: bool = False,
) -> AucContrast:
    """Ratio and difference of arm AUCs with Wald inference.

    The log-ratio standard error comes from the delta method,
    ``sqrt(se1**2 / auc1**2 + se0**2 / auc0**2)``.

    If the control AUC is zero the ratio is undefined: with ``strict_ratio``
    a :class:`ZeroControlBurden` is raised, otherwise the ratio fields are
    NaN and the problem is recorded in ``warnings``.
    """
    if treated.state_space != control.state_space:
        raise ValueError("arms must share one state space")
    if not 0 < alpha < 1:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    est1, est0 = auc_arm(treated, tau), auc_arm(control, tau)
    notes = list(est1.warnings + est0.warnings)

    diff = est1.auc - est0.auc
    diff_se = math.hypot(est1.se, est0.se)
    diff_ci, diff_p = wald(diff, diff_se, alpha)

    nan = float("nan")
    if est0.auc > 0 and est1.auc > 0:
        ratio = est1.auc / est0.auc
        log_se = math.hypot(est1.se / est1.auc, est0.se / est0.auc)
        (lo, hi), ratio_p = wald(math.log(ratio), log_se, alpha)
        ratio_ci = (math.exp(lo), math.exp(hi))
    elif est0.auc > 0:
        ratio, log_se, ratio_ci, ratio_p = 0.0, nan, (nan, nan), nan
        notes.append("treated AUC is zero; log-ratio inference undefined")
    else:
        if strict_ratio:
            raise ZeroControlBurden("control AUC is zero; the AUC ratio is undefined")
        ratio, log_se, ratio_ci, ratio_p = nan, nan, (nan, nan), nan
        notes.append("ZeroControlBurden: control AUC is zero; ratio undefined")

    comp = tuple(a - b for a, b in zip(est1.rmst_components, est0.rmst_components))
    return AucContrast(
        tau=float(tau),
        alpha=float(alpha),
        treated=est1,
        control=est0,
        ratio=float(ratio),
        log_ratio_se=float(log_se),
        ratio_ci=tuple(float(v) for v in ratio_ci),
        ratio_p=float(ratio_p),
        difference=float(diff),
        difference_se=float(diff_se),
        difference_ci=diff_ci,
        difference_p=diff_p,
        component_differences=comp,
        labels=treated.state_space.labels,
        warnings=tuple(notes),
    )


def auc_curve(data: ArmDataset, times) -> np.ndarray:
    """Estimated AUC ``(K + 1) t - sum_k RMST_k(t)`` at each of ``times``."""
    times = np.asarray(times, dtype=float)
    curves = [fit_km(s) for s in transition_samples(data)]
    total = sum(np.asarray(c.area_to(times)) for c in curves)
    return len(curves) * times - total


def running_auc_ratio(treated: ArmDataset, control: ArmDataset, times) -> np.ndarray:
    """Treated/control AUC ratio as a function of the horizon (NaN where control is 0)."""
    a1 = auc_curve(treated, times)
    a0 = auc_curve(control, times)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(a0 > 0, a1 / np.where(a0 > 0, a0, 1.0), np.nan)


def auc_bootstrap_se(data: ArmDataset, tau: float, n_boot: int = 1000, seed=None) -> float:
    """Bootstrap standard error of the arm AUC (subjects resampled with replacement).

    Independent of the influence-function route; used to check it.
    """
    _check_tau(tau)
    samples = transition_samples(data)
    grid = event_grid(samples, tau)
    rng = np.random.default_rng(seed)
    n = data.n
    draws = rng.integers(0, n, size=(n_boot, n))
    weights = np.stack([np.bincount(row, minlength=n) for row in draws]).astype(float)
    aucs = np.full(n_boot, len(samples) * float(tau))
    for s in samples:
        surv = km_on_grid(s.times, s.events, grid, weights)
        aucs -= rmst_on_grid(surv, grid, tau)
    return float(np.std(aucs, ddof=1))
