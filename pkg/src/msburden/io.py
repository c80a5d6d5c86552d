"""Canonical wide CSV format for two-arm multistate data.

One row per subject::

    subject_id,arm,x_1:<label 1>,...,x_M:<label M>,d_1:<label 1>,...,d_M:<label M>

``M = K + 1`` transitions in severity order, the last being death. The
``:<label>`` suffix is optional on input (labels then default to
``state_1..state_K, death``). ``arm`` is 1 (treated) or 0 (control), ``d_k``
is 0 or 1, and times are written with ``repr`` so they round-trip exactly.
"""

from __future__ import annotations

import csv
import re
from pathlib import Path

import numpy as np

from .errors import HeaderMismatch, ParseError, ValidationError
from .types import ArmDataset, StateSpace, SubjectRecord, validate_subject

__all__ = ["ingest_csv", "write_csv", "format_float"]

_COL = re.compile(r"^([xd])_(\d+)(?::(.*))?$")


def format_float(v) -> str:
    return repr(float(v))


def _parse_header(header):
    if header[:2] != ["subject_id", "arm"]:
        raise HeaderMismatch(f"header must start with subject_id,arm; got {header[:2]}")
    cols = header[2:]
    if not cols or len(cols) % 2:
        raise HeaderMismatch("expected x_1..x_M followed by d_1..d_M")
    m = len(cols) // 2
    labels = []
    for j, name in enumerate(cols):
        match = _COL.match(name)
        kind, k = ("x", j + 1) if j < m else ("d", j - m + 1)
        if not match or match.group(1) != kind or int(match.group(2)) != k:
            raise HeaderMismatch(f"column {j + 3} should be {kind}_{k}, got {name!r}")
        label = match.group(3)
        if j < m:
            labels.append(label)
        elif label is not None and label != labels[k - 1]:
            raise HeaderMismatch(f"label of d_{k} ({label!r}) differs from x_{k} ({labels[k - 1]!r})")
    if all(lab is None for lab in labels):
        return StateSpace.default(m - 1)
    if any(lab is None or lab == "" for lab in labels):
        raise HeaderMismatch("either every x column carries a label or none does")
    return StateSpace(tuple(labels))


def ingest_csv(path):
    """Read the canonical CSV into ``(treated, control)`` arm datasets.

    Raises
    ------
    HeaderMismatch
        Malformed header.
    ParseError
        A row that cannot be parsed; carries the 1-based line number.
    ValidationError
        A row breaking a record invariant; the message names the rule, the
        subject and the line.
    """
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise HeaderMismatch(f"{path} is empty") from None
        space = _parse_header([h.strip() for h in header])
        m = space.n_transitions
        arms = {0: [], 1: []}
        seen = set()
        for row in reader:
            line = reader.line_num
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 2 + 2 * m:
                raise ParseError(f"expected {2 + 2 * m} fields, got {len(row)}", line)
            sid = row[0].strip()
            if sid in seen:
                raise ParseError(f"duplicate subject_id {sid!r}", line)
            seen.add(sid)
            try:
                arm = int(row[1])
                x = [float(v) for v in row[2 : 2 + m]]
                d = [int(v) for v in row[2 + m :]]
            except ValueError as err:
                raise ParseError(str(err), line) from None
            if arm not in (0, 1):
                raise ParseError(f"arm must be 0 or 1, got {arm}", line)
            rec = SubjectRecord(sid, arm, x, d)
            try:
                validate_subject(rec, space)
            except ValidationError as err:
                raise type(err)(f"{err.detail} (line {line})", sid) from None
            arms[arm].append(rec)
    for arm, recs in arms.items():
        if not recs:
            raise ParseError(f"no subjects in arm {arm}")
    treated = ArmDataset.from_records(arms[1], space, arm=1)
    control = ArmDataset.from_records(arms[0], space, arm=0)
    return treated, control


def write_csv(treated: ArmDataset, control: ArmDataset, path) -> None:
    """Write both arms (treated first) in the canonical format."""
    if treated.state_space != control.state_space:
        raise ValueError("arms must share one state space")
    labels = treated.state_space.labels
    m = len(labels)
    header = ["subject_id", "arm"]
    header += [f"x_{k + 1}:{lab}" for k, lab in enumerate(labels)]
    header += [f"d_{k + 1}:{lab}" for k, lab in enumerate(labels)]
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for data in (treated, control):
            for sid, xr, dr in zip(data.ids, data.x, data.delta):
                w.writerow([sid, data.arm] + [format_float(v) for v in xr]
                           + [str(int(v)) for v in np.asarray(dr)[:m]])
