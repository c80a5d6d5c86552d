"""Multistate data model: state spaces, subject records, arm datasets, step curves.

A progressive process with ``K`` non-fatal ordered states plus death is
observed through ``K + 1`` censored transition times ``x_k`` and event
indicators ``delta_k``, where transition ``k`` is entry into state ``k`` or
any more severe state.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    CensorMismatch,
    DeathExcluded,
    IndicatorViolation,
    LengthMismatch,
    MonotonicityViolation,
    NegativeTime,
)

__all__ = [
    "StateSpace",
    "SubjectRecord",
    "ArmDataset",
    "StepCurve",
    "validate_subject",
    "project_endpoints",
    "summarize_first_events",
    "summarize_worst_state",
    "CENSORED",
]

CENSORED = "censored"


@dataclass(frozen=True)
class StateSpace:
    """Ordered transition targets; the last label is always death.

    Parameters
    ----------
    labels : sequence of str
        One name per transition target, states ``1..K+1`` in increasing
        severity.
    """

    labels: tuple

    def __post_init__(self):
        labels = tuple(str(lab) for lab in self.labels)
        if len(labels) < 1:
            raise ValueError("a state space needs at least the death state")
        if len(set(labels)) != len(labels):
            raise ValueError(f"state labels must be unique, got {labels}")
        object.__setattr__(self, "labels", labels)

    @classmethod
    def default(cls, k_severity_states: int) -> "StateSpace":
        if k_severity_states < 0:
            raise ValueError("K must be non-negative")
        labels = [f"state_{k}" for k in range(1, k_severity_states + 1)]
        return cls(tuple(labels) + ("death",))

    @property
    def k_severity_states(self) -> int:
        return len(self.labels) - 1

    @property
    def n_transitions(self) -> int:
        return len(self.labels)

    @property
    def death_label(self) -> str:
        return self.labels[-1]

    def index(self, key) -> int:
        """Zero-based column of a transition given its label or 1-based number."""
        if isinstance(key, (int, np.integer)) and not isinstance(key, bool):
            if not 1 <= key <= self.n_transitions:
                raise KeyError(f"transition {key} outside 1..{self.n_transitions}")
            return int(key) - 1
        try:
            return self.labels.index(str(key))
        except ValueError:
            raise KeyError(f"unknown transition label {key!r}") from None


@dataclass(frozen=True)
class SubjectRecord:
    subject_id: object
    arm: int
    x: tuple
    delta: tuple

    def __post_init__(self):
        object.__setattr__(self, "x", tuple(float(v) for v in self.x))
        object.__setattr__(self, "delta", tuple(int(v) for v in self.delta))
        object.__setattr__(self, "arm", int(self.arm))


def _check_rows(x, delta, ids):
    """Vectorised validation of record rows; raises on the first bad row."""
    x = np.asarray(x, dtype=float)
    delta = np.asarray(delta)
    bad = ~np.isfinite(x).all(axis=1) | (x < 0).any(axis=1)
    if bad.any():
        i = int(np.argmax(bad))
        raise NegativeTime(f"times must be finite and >= 0, got {x[i].tolist()}", ids[i])
    if not np.isin(delta, (0, 1)).all():
        i = int(np.argmax(~np.isin(delta, (0, 1)).all(axis=1)))
        raise IndicatorViolation(f"indicators must be 0/1, got {delta[i].tolist()}", ids[i])
    bad = (np.diff(x, axis=1) < 0).any(axis=1)
    if bad.any():
        i = int(np.argmax(bad))
        raise MonotonicityViolation(f"x decreases across transitions: {x[i].tolist()}", ids[i])
    bad = (np.diff(delta, axis=1) > 0).any(axis=1)
    if bad.any():
        i = int(np.argmax(bad))
        raise IndicatorViolation(
            f"a censored transition is followed by an observed one: {delta[i].tolist()}", ids[i]
        )
    bad = ((delta == 0) & (x != x[:, -1:])).any(axis=1)
    if bad.any():
        i = int(np.argmax(bad))
        raise CensorMismatch(
            f"censored transitions must share one censoring time: {x[i].tolist()}", ids[i]
        )


def validate_subject(record: SubjectRecord, space: StateSpace) -> SubjectRecord:
    """Check one record against the progressive-process invariants.

    Equal consecutive event times (state skipping) are legal. Returns the
    record unchanged so calls can be chained.

    Raises
    ------
    NegativeTime, MonotonicityViolation, IndicatorViolation, CensorMismatch
        On the first violated rule.
    LengthMismatch
        If the vectors do not have one entry per transition.
    """
    m = space.n_transitions
    if len(record.x) != m or len(record.delta) != m:
        raise LengthMismatch(
            f"expected {m} times and indicators, got {len(record.x)} and {len(record.delta)}",
            record.subject_id,
        )
    _check_rows(
        np.asarray(record.x, dtype=float)[None, :],
        np.asarray(record.delta)[None, :],
        [record.subject_id],
    )
    return record


class ArmDataset:
    """Subjects of one arm, stored column-wise.

    Parameters
    ----------
    arm : {0, 1}
        1 for treatment, 0 for control.
    x, delta : array_like, shape (n, K + 1)
        Observed times and event indicators.
    state_space : StateSpace
    ids : sequence, optional
        Subject identifiers; defaults to ``0..n-1``.
    validate : bool
        Run the record invariants over every row.
    """

    def __init__(self, arm, x, delta, state_space, ids=None, validate=True):
        x = np.array(x, dtype=float, ndmin=2)
        delta = np.array(delta, dtype=np.int8, ndmin=2)
        if int(arm) not in (0, 1):
            raise ValueError(f"arm must be 0 or 1, got {arm!r}")
        if x.shape[0] == 0:
            raise ValueError("an arm dataset must be non-empty")
        if x.shape != delta.shape or x.shape[1] != state_space.n_transitions:
            raise LengthMismatch(
                f"x {x.shape} and delta {delta.shape} must both be (n, {state_space.n_transitions})"
            )
        ids = tuple(range(x.shape[0])) if ids is None else tuple(ids)
        if len(ids) != x.shape[0]:
            raise ValueError("one id per subject is required")
        if validate:
            _check_rows(x, delta, ids)
        x.setflags(write=False)
        delta.setflags(write=False)
        self.arm = int(arm)
        self.x = x
        self.delta = delta
        self.state_space = state_space
        self.ids = ids

    @classmethod
    def from_records(cls, records: Iterable[SubjectRecord], state_space: StateSpace, arm=None):
        records = list(records)
        if not records:
            raise ValueError("an arm dataset must be non-empty")
        arm = records[0].arm if arm is None else int(arm)
        for rec in records:
            if rec.arm != arm:
                raise ValueError(f"subject {rec.subject_id!r} is in arm {rec.arm}, expected {arm}")
            validate_subject(rec, state_space)
        return cls(
            arm,
            [r.x for r in records],
            [r.delta for r in records],
            state_space,
            ids=[r.subject_id for r in records],
            validate=False,
        )

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def subjects(self) -> tuple:
        return tuple(
            SubjectRecord(sid, self.arm, tuple(xr), tuple(dr))
            for sid, xr, dr in zip(self.ids, self.x.tolist(), self.delta.tolist())
        )

    def take(self, index) -> "ArmDataset":
        """Subset (or resample) rows; indices may repeat."""
        index = np.asarray(index)
        return ArmDataset(
            self.arm,
            self.x[index],
            self.delta[index],
            self.state_space,
            ids=[self.ids[i] for i in index],
            validate=False,
        )

    def with_arm(self, arm) -> "ArmDataset":
        return ArmDataset(arm, self.x, self.delta, self.state_space, self.ids, validate=False)

    def __len__(self):
        return self.n

    def __eq__(self, other):
        if not isinstance(other, ArmDataset):
            return NotImplemented
        return (
            self.arm == other.arm
            and self.state_space == other.state_space
            and self.ids == other.ids
            and np.array_equal(self.x, other.x)
            and np.array_equal(self.delta, other.delta)
        )

    def __repr__(self):
        return f"ArmDataset(arm={self.arm}, n={self.n}, labels={self.state_space.labels})"


def project_endpoints(data: ArmDataset, keep: Sequence) -> ArmDataset:
    """Restrict a dataset to a subset of transitions.

    ``keep`` holds labels or 1-based transition numbers and must contain
    death. Retained transitions keep their original ``(x, delta)`` and are
    re-indexed in severity order, so death stays the last (``K' + 1``) state.
    """
    space = data.state_space
    cols = sorted({space.index(k) for k in keep})
    if not cols:
        raise DeathExcluded("keep must be non-empty and contain death")
    if cols[-1] != space.n_transitions - 1:
        raise DeathExcluded(f"death ({space.death_label!r}) must be kept, got {list(keep)}")
    new_space = StateSpace(tuple(space.labels[c] for c in cols))
    return ArmDataset(
        data.arm, data.x[:, cols], data.delta[:, cols], new_space, data.ids, validate=False
    )


def summarize_first_events(data: ArmDataset) -> dict:
    """Count subjects by the most severe state reached at their first event time.

    Returns a dict keyed by state label plus ``"total_events"``.
    """
    labels = data.state_space.labels
    x, d = data.x, data.delta.astype(bool)
    any_event = d[:, 0]
    at_first = d & (x == x[:, :1])
    # most severe transition tied with the first event time
    last = x.shape[1] - 1 - np.argmax(at_first[:, ::-1], axis=1)
    counts = np.bincount(last[any_event], minlength=len(labels))
    out = {lab: int(c) for lab, c in zip(labels, counts)}
    out["total_events"] = int(any_event.sum())
    return out


def summarize_worst_state(data: ArmDataset) -> dict:
    """Count subjects by worst observed state; event-free subjects go to ``"censored"``."""
    labels = data.state_space.labels
    n_events = data.delta.astype(int).sum(axis=1)
    counts = np.bincount(n_events, minlength=len(labels) + 1)
    out = {CENSORED: int(counts[0])}
    out.update({lab: int(c) for lab, c in zip(labels, counts[1:])})
    out["total"] = int(data.n)
    return out


@dataclass(frozen=True, eq=False)
class StepCurve:
    """Right-continuous piecewise-constant function on ``[0, inf)``.

    ``value(t)`` is ``values[j]`` for the largest ``jump_times[j] <= t`` and
    ``initial_value`` before the first jump.
    """

    jump_times: np.ndarray
    values: np.ndarray
    initial_value: float = 1.0
    _area: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        t = np.asarray(self.jump_times, dtype=float).ravel()
        v = np.asarray(self.values, dtype=float).ravel()
        if t.shape != v.shape:
            raise ValueError("jump_times and values must have equal length")
        if t.size and (np.any(np.diff(t) <= 0) or t[0] < 0):
            raise ValueError("jump_times must be non-negative and strictly increasing")
        t.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "jump_times", t)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "initial_value", float(self.initial_value))
        # cumulative area from 0 up to each jump time
        if t.size:
            levels = np.concatenate(([self.initial_value], v[:-1]))
            widths = np.diff(np.concatenate(([0.0], t)))
            area = np.cumsum(levels * widths)
        else:
            area = np.zeros(0)
        area.setflags(write=False)
        object.__setattr__(self, "_area", area)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        idx = np.searchsorted(self.jump_times, t, side="right") - 1
        vals = np.where(idx >= 0, self.values[np.clip(idx, 0, None)] if self.values.size else 0.0,
                        self.initial_value)
        return vals if vals.ndim else float(vals)

    def left_limit(self, t):
        """Value just before ``t``."""
        t = np.asarray(t, dtype=float)
        idx = np.searchsorted(self.jump_times, t, side="left") - 1
        vals = np.where(idx >= 0, self.values[np.clip(idx, 0, None)] if self.values.size else 0.0,
                        self.initial_value)
        return vals if vals.ndim else float(vals)

    def area_to(self, t):
        """Exact integral of the curve over ``[0, t]`` (vectorised in ``t``)."""
        t = np.asarray(t, dtype=float)
        idx = np.searchsorted(self.jump_times, t, side="right") - 1
        safe = np.clip(idx, 0, None)
        if self.jump_times.size:
            at_jump = self._area[safe] + self.values[safe] * (t - self.jump_times[safe])
        else:
            at_jump = np.zeros_like(t)
        out = np.where(idx >= 0, at_jump, self.initial_value * t)
        return out if out.ndim else float(out)

    def integrate(self, upper, lower=0.0) -> float:
        """Exact integral over ``[lower, upper]`` as a sum of rectangles."""
        upper, lower = float(upper), float(lower)
        inner = self.jump_times[(self.jump_times > lower) & (self.jump_times < upper)]
        knots = np.concatenate(([lower], inner, [upper]))
        levels = self(knots[:-1])
        return float(np.sum(np.atleast_1d(levels) * np.diff(knots)))

    def truncate(self, tau) -> "StepCurve":
        """Drop jumps after ``tau``."""
        keep = self.jump_times <= tau
        return StepCurve(self.jump_times[keep], self.values[keep], self.initial_value)

    @staticmethod
    def combine(curves, weights, constant=0.0) -> "StepCurve":
        """Pointwise ``constant + sum(w * curve)`` on the union of jump sets."""
        curves = list(curves)
        jumps = np.unique(np.concatenate([c.jump_times for c in curves] + [np.zeros(0)]))
        init = constant + sum(w * c.initial_value for c, w in zip(curves, weights))
        vals = np.full(jumps.shape, float(constant))
        for c, w in zip(curves, weights):
            vals = vals + w * np.atleast_1d(c(jumps))
        return StepCurve(jumps, vals, init)
