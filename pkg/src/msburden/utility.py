"""Cumulative utility of a progressive trajectory.

A utility assigns a weight to each occupied state and integrates it over
``[0, tau]``. Fixed non-decreasing scores give a burden measure; scores
``1..K+1`` give the cumulative-score AUC. The comparative utility weights
state ``k`` by whether a counterpart process is below ``k``; averaging it
over independent treated-control pairs gives the time in favor of
treatment, stage by stage.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CensoredInput, NonMonotoneScores, NonPositiveHorizon
from .km import fit_km, rmst, transition_samples
from .types import ArmDataset, SubjectRecord

__all__ = [
    "UtilitySpec",
    "UtilityContrast",
    "cumulative_utility",
    "comparative_utility",
    "expected_utility",
    "expected_utility_contrast",
]


@dataclass(frozen=True)
class UtilitySpec:
    """``kind`` is ``"fixed"`` (per-state ``scores``) or ``"comparative"``."""

    kind: str = "fixed"
    scores: tuple = ()

    def __post_init__(self):
        if self.kind not in ("fixed", "comparative"):
            raise ValueError(f"unknown utility kind {self.kind!r}")
        scores = tuple(float(s) for s in self.scores)
        object.__setattr__(self, "scores", scores)
        if self.kind == "fixed":
            if not scores:
                raise ValueError("fixed utilities need one score per state")
            arr = np.asarray(scores)
            if not np.all(np.isfinite(arr)) or arr[0] < 0 or np.any(np.diff(arr) < 0):
                raise NonMonotoneScores(
                    f"scores must be finite, non-negative and non-decreasing, got {scores}"
                )

    @classmethod
    def consecutive(cls, n_transitions: int) -> "UtilitySpec":
        return cls("fixed", tuple(range(1, n_transitions + 1)))


@dataclass(frozen=True)
class UtilityContrast:
    """Arm-level expected utilities.

    ``difference`` is treated minus control. ``reduction`` is control minus
    treated, the burden removed by treatment.
    """

    tau: float
    treated: float
    control: float
    difference: float
    reduction: float
    scores: tuple


def _trajectory(trajectory):
    if isinstance(trajectory, SubjectRecord):
        if not all(trajectory.delta):
            raise CensoredInput(f"subject {trajectory.subject_id!r} has censored transitions")
        times = trajectory.x
    else:
        times = trajectory
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or np.any(np.diff(times) < 0) or np.any(times < 0):
        raise ValueError("a trajectory is a non-decreasing vector of transition times")
    if not np.all(np.isfinite(times)):
        raise CensoredInput("trajectory has unobserved (infinite) transition times")
    return times


def _occupancy(times, tau):
    """Time spent in states ``1..K+1`` within ``[0, tau]``."""
    clipped = np.minimum(times, tau)
    upper = np.append(clipped[1:], tau)
    return upper - clipped


def cumulative_utility(trajectory, spec: UtilitySpec, tau: float) -> float:
    """Exact integral of the state scores along one fully observed trajectory.

    Examples
    --------
    >>> cumulative_utility([2.0], UtilitySpec("fixed", (1,)), 6.0)
    4.0
    """
    if spec.kind != "fixed":
        raise ValueError("use comparative_utility for comparative utilities")
    if not tau > 0:
        raise NonPositiveHorizon(f"tau must be positive, got {tau}")
    times = _trajectory(trajectory)
    if len(spec.scores) != times.size:
        raise ValueError(f"{times.size} transitions but {len(spec.scores)} scores")
    return float(np.dot(spec.scores, _occupancy(times, tau)))


def comparative_utility(trajectory, counterpart, tau: float) -> np.ndarray:
    """Per-state time where this process is in state ``k`` and the counterpart below ``k``.

    Returns an array of length ``K + 1``; its sum is the gross win time of
    the counterpart over this process.
    """
    if not tau > 0:
        raise NonPositiveHorizon(f"tau must be positive, got {tau}")
    own, other = _trajectory(trajectory), _trajectory(counterpart)
    if own.size != other.size:
        raise ValueError("trajectories must have the same number of transitions")
    knots = np.unique(np.concatenate(([0.0], own, other)))
    knots = knots[knots < tau]
    widths = np.diff(np.append(knots, tau))
    y_own = (own[None, :] <= knots[:, None]).sum(axis=1)
    y_other = (other[None, :] <= knots[:, None]).sum(axis=1)
    out = np.zeros(own.size)
    for k in range(1, own.size + 1):
        out[k - 1] = np.sum(widths * ((y_own == k) & (y_other < k)))
    return out


def expected_utility(data: ArmDataset, spec: UtilitySpec, tau: float) -> float:
    """Kaplan-Meier plug-in for the mean fixed-score utility of an arm.

    Uses ``E U = sum_k (s_k - s_{k-1}) (tau - RMST_k)`` with ``s_0 = 0``.
    """
    if spec.kind != "fixed":
        raise ValueError("only fixed-score utilities have a dataset-level estimator")
    m = data.state_space.n_transitions
    if len(spec.scores) != m:
        raise ValueError(f"{m} transitions but {len(spec.scores)} scores")
    steps = np.diff(np.concatenate(([0.0], spec.scores)))
    lost = np.array([tau - rmst(fit_km(s), tau) for s in transition_samples(data)])
    return float(np.dot(steps, lost))


def expected_utility_contrast(
    treated: ArmDataset, control: ArmDataset, spec: UtilitySpec, tau: float
) -> UtilityContrast:
    if treated.state_space != control.state_space:
        raise ValueError("arms must share one state space")
    u1 = expected_utility(treated, spec, tau)
    u0 = expected_utility(control, spec, tau)
    return UtilityContrast(float(tau), u1, u0, u1 - u0, u0 - u1, spec.scores)
