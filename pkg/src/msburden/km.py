"""One-sample nonparametric estimators for a single transition.

Kaplan-Meier survival, Nelson-Aalen hazard increments, empirical at-risk
fractions and restricted mean survival time, all as exact step-function
computations. Tied times are handled with events before censorings.

The ``*_on_grid`` helpers evaluate the same estimators for many
frequency-weight vectors at once; the bootstrap routines use them.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse

from .errors import EmptySample, NonPositiveHorizon
from .types import ArmDataset, StepCurve

__all__ = [
    "TransitionSample",
    "HazardIncrements",
    "fit_km",
    "fit_nelson_aalen",
    "rmst",
    "at_risk_fraction",
    "transition_samples",
    "event_grid",
    "km_on_grid",
    "rmst_on_grid",
]


@dataclass(frozen=True, eq=False)
class TransitionSample:
    """Marginal censored sample ``(X_k, delta_k)`` of one transition."""

    times: np.ndarray
    events: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float).ravel()
        e = np.asarray(self.events).astype(bool).ravel()
        if t.shape != e.shape:
            raise ValueError("times and events must have equal length")
        if np.any(t < 0) or not np.all(np.isfinite(t)):
            raise ValueError("times must be finite and non-negative")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "events", e)

    def __len__(self):
        return self.times.size


@dataclass(frozen=True, eq=False)
class HazardIncrements:
    """Nelson-Aalen jumps: ``increments[j] = events[j] / at_risk[j]`` at ``jump_times[j]``."""

    jump_times: np.ndarray
    increments: np.ndarray
    at_risk: np.ndarray
    n_events: np.ndarray

    def cumulative(self) -> StepCurve:
        return StepCurve(self.jump_times, np.cumsum(self.increments), 0.0)

    def as_dict(self) -> dict:
        return dict(zip(self.jump_times.tolist(), self.increments.tolist()))


def transition_samples(data: ArmDataset) -> list:
    """Split an arm into its per-transition marginal samples."""
    return [TransitionSample(data.x[:, k], data.delta[:, k]) for k in range(data.x.shape[1])]


def _event_table(sample: TransitionSample):
    """Distinct event times with event counts and at-risk counts ``#(X >= t)``."""
    if len(sample) == 0:
        raise EmptySample("cannot fit an estimator to an empty sample")
    t_sorted = np.sort(sample.times)
    ev_times, n_events = np.unique(sample.times[sample.events], return_counts=True)
    at_risk = t_sorted.size - np.searchsorted(t_sorted, ev_times, side="left")
    return ev_times, n_events.astype(float), at_risk.astype(float)


def fit_nelson_aalen(sample: TransitionSample) -> HazardIncrements:
    """Nelson-Aalen hazard increments ``d_j / Y_j`` at each distinct event time.

    Examples
    --------
    >>> inc = fit_nelson_aalen(TransitionSample([1, 2, 3], [1, 0, 1]))
    >>> inc.as_dict()
    {1.0: 0.3333333333333333, 3.0: 1.0}
    """
    t, d, y = _event_table(sample)
    return HazardIncrements(t, d / y, y, d)


def fit_km(sample: TransitionSample) -> StepCurve:
    """Kaplan-Meier product-limit survival curve.

    Jumps occur only at event times. Beyond the largest observed time the
    last value is carried forward.
    """
    inc = fit_nelson_aalen(sample)
    surv = np.cumprod(1.0 - inc.increments)
    return StepCurve(inc.jump_times, surv, 1.0)


def rmst(curve: StepCurve, tau: float) -> float:
    """Restricted mean: exact area under ``curve`` on ``[0, tau]``."""
    if not tau > 0:
        raise NonPositiveHorizon(f"tau must be positive, got {tau}")
    return curve.integrate(tau)


def at_risk_fraction(sample: TransitionSample, t, left: bool = False):
    """Empirical ``P(X > t)``, or ``P(X >= t)`` when ``left`` is set.

    The left-limit version is the at-risk indicator used in martingale
    integrals.
    """
    times = np.sort(sample.times)
    t = np.asarray(t, dtype=float)
    n = times.size
    if n == 0:
        return np.zeros_like(t) if t.ndim else 0.0
    side = "left" if left else "right"
    out = (n - np.searchsorted(times, t, side=side)) / n
    return out if np.ndim(out) else float(out)


def event_grid(samples, tau=None):
    """Sorted distinct event times of several samples, optionally only those < ``tau``."""
    parts = [s.times[s.events] for s in samples]
    grid = np.unique(np.concatenate(parts + [np.zeros(0)]))
    if tau is not None:
        grid = grid[grid < tau]
    return grid


def _grid_operators(times, events, grid):
    """Sparse subject-to-grid incidence matrices for at-risk and event counts.

    A subject is attached to the largest grid point not exceeding its time,
    which preserves ``#(X >= g)`` at every grid point ``g``. Event times not
    on the grid are ignored.
    """
    n = times.size
    col = np.searchsorted(grid, times, side="right") - 1
    keep = col >= 0
    on_grid = keep & (grid[np.clip(col, 0, None)] == times) if grid.size else keep
    rows = np.arange(n)
    shape = (n, grid.size)
    occ = sparse.csr_matrix((np.ones(keep.sum()), (rows[keep], col[keep])), shape=shape)
    ev = events & on_grid
    evt = sparse.csr_matrix((np.ones(ev.sum()), (rows[ev], col[ev])), shape=shape)
    return occ, evt


def km_on_grid(times, events, grid, weights=None):
    """Kaplan-Meier values at every grid point for many weight vectors.

    Parameters
    ----------
    times, events : ndarray, shape (n,)
    grid : ndarray, shape (G,)
        Sorted distinct times. Must contain every event time at which the
        curve is wanted to jump (see :func:`event_grid`).
    weights : ndarray, shape (B, n), optional
        Frequency weights (bootstrap multiplicities). Defaults to one row of
        ones, which reproduces :func:`fit_km` at the grid points.

    Returns
    -------
    ndarray, shape (B, G)
        ``S(grid[j])`` (right-continuous value) for each weight row.
    """
    times = np.asarray(times, dtype=float)
    events = np.asarray(events).astype(bool)
    if weights is None:
        weights = np.ones((1, times.size))
    weights = np.atleast_2d(np.asarray(weights, dtype=float))
    occ, evt = _grid_operators(times, events, grid)
    count = np.asarray((occ.T @ weights.T).T)
    died = np.asarray((evt.T @ weights.T).T)
    at_risk = np.cumsum(count[:, ::-1], axis=1)[:, ::-1]
    with np.errstate(invalid="ignore", divide="ignore"):
        hazard = np.where(died > 0, died / np.where(at_risk > 0, at_risk, 1.0), 0.0)
    return np.cumprod(1.0 - hazard, axis=1)


def rmst_on_grid(surv, grid, tau):
    """Areas on ``[0, tau]`` under step curves tabulated by :func:`km_on_grid`.

    ``grid`` must start at or after 0; the curve equals 1 before ``grid[0]``.
    """
    lefts = np.concatenate(([0.0], grid))
    vals = np.concatenate((np.ones(surv.shape[:-1] + (1,)), surv), axis=-1)
    rights = np.concatenate((grid, [np.inf]))
    widths = np.clip(np.minimum(rights, tau) - lefts, 0.0, None)
    return vals @ widths
