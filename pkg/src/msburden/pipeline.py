"""Batch analysis and simulation runs driven by JSON config files.

Every number written here comes from a library call; this module only
arranges results into tables and the JSON summary.
"""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import math
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .auc import auc_contrast, mean_score_curve, running_auc_ratio
from .cox import cumulative_hazard_curves, fit_cox_hr, to_composite
from .errors import ConfigError, MsburdenError
from .io import format_float, ingest_csv, write_csv
from .rmtif import rmtif_infer
from .simulate import TrialScenario, simulate_trial, true_estimands
from .types import (
    ArmDataset,
    project_endpoints,
    summarize_first_events,
    summarize_worst_state,
)
from .utility import UtilitySpec, expected_utility_contrast

__all__ = [
    "AnalysisConfig",
    "SimulationConfig",
    "load_config",
    "analyze_datasets",
    "run_analysis",
    "run_simulation",
    "OUTPUT_ENV",
]

log = logging.getLogger(__name__)

OUTPUT_ENV = "MSBURDEN_OUTPUT_DIR"


@dataclass(frozen=True)
class AnalysisConfig:
    """Settings of an ``analyze`` run.

    ``endpoints`` lists the transition labels to analyse in severity order
    (default: every column of the input). ``scores`` maps each label to a
    utility score (default: consecutive integers within each subset).
    ``sensitivity_subsets`` is a list of label lists, each containing death;
    by default only the full endpoint set is analysed.
    """

    input: str
    output_dir: str = "msburden-out"
    tau: float = 6.0
    alpha: float = 0.05
    endpoints: tuple = ()
    scores: dict = field(default_factory=dict)
    n_boot: int = 1000
    seed: int = 0
    sensitivity_subsets: tuple = ()
    ties: str = "efron"
    ci_method: str = "normal"

    def __post_init__(self):
        object.__setattr__(self, "endpoints", tuple(self.endpoints))
        object.__setattr__(
            self, "sensitivity_subsets", tuple(tuple(s) for s in self.sensitivity_subsets)
        )
        if not (isinstance(self.tau, (int, float)) and self.tau > 0 and math.isfinite(self.tau)):
            raise ConfigError(f"tau must be a positive number, got {self.tau!r}")
        if not 0 < self.alpha < 1:
            raise ConfigError(f"alpha must lie in (0, 1), got {self.alpha!r}")
        if int(self.n_boot) < 100:
            raise ConfigError(f"n_boot must be at least 100, got {self.n_boot!r}")
        if self.ties not in ("efron", "breslow"):
            raise ConfigError(f"ties must be 'efron' or 'breslow', got {self.ties!r}")
        if self.ci_method not in ("normal", "percentile"):
            raise ConfigError(f"ci_method must be 'normal' or 'percentile', got {self.ci_method!r}")
        if self.endpoints:
            death = self.endpoints[-1]
            for subset in self.sensitivity_subsets:
                if death not in subset:
                    raise ConfigError(f"sensitivity subset {list(subset)} omits death ({death!r})")

    def hashable(self) -> dict:
        """Config content that determines results (paths excluded)."""
        d = asdict(self)
        d.pop("output_dir")
        d.pop("input")
        d["endpoints"] = list(self.endpoints)
        d["sensitivity_subsets"] = [list(s) for s in self.sensitivity_subsets]
        return d


@dataclass(frozen=True)
class SimulationConfig:
    scenario: TrialScenario
    output_dir: str = "msburden-sim"
    tau: float = 6.0
    n_mc: int = 1_000_000
    truth_seed: int = None

    def __post_init__(self):
        if not self.tau > 0:
            raise ConfigError(f"tau must be positive, got {self.tau!r}")


def _resolve_output(config_value, override):
    if override:
        return override
    return os.environ.get(OUTPUT_ENV) or config_value


def load_config(path, **overrides):
    """Read a JSON config file into an :class:`AnalysisConfig` or :class:`SimulationConfig`.

    A config with a ``"scenario"`` object is a simulation config. Relative
    ``input`` paths are resolved against the config file's directory.
    Keyword overrides whose value is ``None`` are ignored.
    """
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as err:
        raise ConfigError(f"cannot read config {path}: {err}") from None
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    overrides = {k: v for k, v in overrides.items() if v is not None}
    out = _resolve_output(raw.get("output_dir"), overrides.pop("output_dir", None))
    if out is not None:
        raw["output_dir"] = out
    if "scenario" in raw:
        scen = dict(raw.pop("scenario"))
        if "seed" in overrides:
            scen["seed"] = overrides.pop("seed")
        raw.update({k: v for k, v in overrides.items() if k in ("tau",)})
        unknown = set(raw) - {"output_dir", "tau", "n_mc", "truth_seed"}
        if unknown:
            raise ConfigError(f"unknown simulation config keys {sorted(unknown)}")
        return SimulationConfig(TrialScenario.from_dict(scen), **raw)
    raw.update(overrides)
    if "input" not in raw:
        raise ConfigError("analysis config needs an 'input' path")
    inp = Path(raw["input"])
    if not inp.is_absolute():
        raw["input"] = str(path.parent / inp)
    unknown = set(raw) - set(AnalysisConfig.__dataclass_fields__)
    if unknown:
        raise ConfigError(f"unknown analysis config keys {sorted(unknown)}")
    return AnalysisConfig(**raw)


def _clean(obj):
    """JSON-ready copy: NaN/inf become null, tuples become lists, numpy scalars unwrap."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def _dump_json(obj, path):
    text = json.dumps(_clean(obj), indent=2, sort_keys=True, allow_nan=False)
    Path(path).write_text(text + "\n")


def _write_rows(path, header, rows):
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([format_float(v) if isinstance(v, (float, np.floating)) else v for v in row])


def _subset_scores(config, labels):
    if not config.scores:
        return UtilitySpec.consecutive(len(labels))
    missing = [lab for lab in labels if lab not in config.scores]
    if missing:
        raise ConfigError(f"no score given for {missing}")
    return UtilitySpec("fixed", tuple(config.scores[lab] for lab in labels))


def _analyze_subset(treated, control, config):
    tau, alpha = float(config.tau), float(config.alpha)
    labels = treated.state_space.labels
    out = {"endpoints": list(labels)}
    out["first_events"] = {
        "treated": summarize_first_events(treated),
        "control": summarize_first_events(control),
    }
    out["worst_state"] = {
        "treated": summarize_worst_state(treated),
        "control": summarize_worst_state(control),
    }
    composite = to_composite(treated, control)
    cox = fit_cox_hr(composite, alpha=alpha, ties=config.ties)
    out["cox"] = asdict(cox)
    auc = auc_contrast(treated, control, tau, alpha)
    out["auc"] = {
        "treated": asdict(auc.treated),
        "control": asdict(auc.control),
        "ratio": auc.ratio,
        "log_ratio_se": auc.log_ratio_se,
        "ratio_ci": auc.ratio_ci,
        "ratio_p": auc.ratio_p,
        "difference": auc.difference,
        "difference_se": auc.difference_se,
        "difference_ci": auc.difference_ci,
        "difference_p": auc.difference_p,
        "component_differences": dict(zip(labels, auc.component_differences)),
        "warnings": auc.warnings,
    }
    rm = rmtif_infer(treated, control, tau, config.n_boot, config.seed, alpha, config.ci_method)
    out["rmtif"] = asdict(rm)
    spec = _subset_scores(config, labels)
    out["utility"] = asdict(expected_utility_contrast(treated, control, spec, tau))
    curves = {
        "cumhaz": cumulative_hazard_curves(composite),
        "score": (mean_score_curve(treated, tau), mean_score_curve(control, tau)),
    }
    return out, (auc, rm, cox, curves)


def _write_subset_files(folder: Path, result, objs, treated, control, tau):
    auc, rm, cox, curves = objs
    labels = result["endpoints"]
    folder.mkdir(parents=True, exist_ok=True)

    rows = [[arm] + [result["first_events"][arm][lab] for lab in labels]
            + [result["first_events"][arm]["total_events"]] for arm in ("treated", "control")]
    _write_rows(folder / "first_events.csv", ["arm"] + labels + ["total_events"], rows)
    rows = [[arm, result["worst_state"][arm]["censored"]]
            + [result["worst_state"][arm][lab] for lab in labels]
            + [result["worst_state"][arm]["total"]] for arm in ("treated", "control")]
    _write_rows(folder / "worst_state.csv", ["arm", "censored"] + labels + ["total"], rows)

    rows = [
        ["auc_treated", auc.treated.auc, auc.treated.se, "", "", ""],
        ["auc_control", auc.control.auc, auc.control.se, "", "", ""],
        ["auc_ratio", auc.ratio, auc.log_ratio_se, auc.ratio_ci[0], auc.ratio_ci[1], auc.ratio_p],
        ["auc_difference", auc.difference, auc.difference_se, auc.difference_ci[0],
         auc.difference_ci[1], auc.difference_p],
    ]
    rows += [[f"rmst_gain:{lab}", float(d), "", "", "", ""]
             for lab, d in zip(labels, auc.component_differences)]
    rows += [[f"rmst_treated:{lab}", float(v), "", "", "", ""]
             for lab, v in zip(labels, auc.treated.rmst_components)]
    rows += [[f"rmst_control:{lab}", float(v), "", "", "", ""]
             for lab, v in zip(labels, auc.control.rmst_components)]
    _write_rows(folder / "auc.csv", ["quantity", "estimate", "se", "ci_low", "ci_high", "p"], rows)

    rows = [[lab, est, se, ci[0], ci[1], p]
            for lab, est, se, ci, p in zip(labels, rm.stages, rm.stage_se, rm.stage_ci, rm.stage_p)]
    rows.append(["overall", rm.overall, rm.overall_se, rm.overall_ci[0], rm.overall_ci[1], rm.overall_p])
    _write_rows(folder / "rmtif.csv", ["outcome_avoided", "estimate", "se", "ci_low", "ci_high", "p"], rows)

    rows = []
    for arm, name in ((1, "treated"), (0, "control")):
        curve = curves["cumhaz"].get(arm)
        if curve is None:
            continue
        rows.append([name, 0.0, curve.initial_value])
        rows += [[name, float(t), float(v)] for t, v in zip(curve.jump_times, curve.values)]
    _write_rows(folder / "composite_cumhaz.csv", ["arm", "time", "cumulative_hazard"], rows)

    s1, s0 = curves["score"]
    times = np.unique(np.concatenate(([0.0, tau], s1.jump_times, s0.jump_times)))
    times = times[times <= tau]
    ratio = running_auc_ratio(treated, control, times)
    rows = [[float(t), float(a), float(b), float(r)]
            for t, a, b, r in zip(times, s1(times), s0(times), ratio)]
    _write_rows(folder / "mean_score.csv",
                ["time", "mean_score_treated", "mean_score_control", "auc_ratio"], rows)


def _sensitivity_row(result):
    cox, auc, rm = result["cox"], result["auc"], result["rmtif"]
    return [
        " + ".join(result["endpoints"]),
        cox["hr"], cox["ci"][0], cox["ci"][1], cox["p"],
        auc["ratio"], auc["ratio_ci"][0], auc["ratio_ci"][1], auc["ratio_p"],
        auc["difference"], auc["difference_se"], auc["difference_p"],
        rm["overall"], rm["overall_se"], rm["overall_p"],
    ]


SENSITIVITY_HEADER = [
    "endpoints",
    "cox_hr", "cox_ci_low", "cox_ci_high", "cox_p",
    "auc_ratio", "auc_ratio_ci_low", "auc_ratio_ci_high", "auc_ratio_p",
    "auc_difference", "auc_difference_se", "auc_difference_p",
    "rmtif", "rmtif_se", "rmtif_p",
]


def analyze_datasets(treated: ArmDataset, control: ArmDataset, config: AnalysisConfig,
                     write: bool = True, meta: dict = None):
    """Run every configured endpoint subset on in-memory datasets.

    Returns ``(summary, failed)`` where ``failed`` counts subsets whose
    estimation raised. Subsets are projections of the given datasets.
    """
    endpoints = config.endpoints or treated.state_space.labels
    if tuple(endpoints) != treated.state_space.labels:
        treated = project_endpoints(treated, endpoints)
        control = project_endpoints(control, endpoints)
    death = treated.state_space.death_label
    subsets = config.sensitivity_subsets or (tuple(endpoints),)
    summary = {
        "software": {"name": "msburden", "version": __version__},
        "config": config.hashable(),
        "config_hash": hashlib.sha256(
            json.dumps(_clean(config.hashable()), sort_keys=True).encode()
        ).hexdigest(),
        "seed": config.seed,
        "tau": float(config.tau),
        "alpha": float(config.alpha),
        "n": {"treated": treated.n, "control": control.n},
        "subsets": [],
    }
    summary.update(meta or {})
    out_dir = Path(config.output_dir)
    failed = 0
    rows = []
    for i, subset in enumerate(subsets, start=1):
        entry = {"index": i, "endpoints": list(subset)}
        try:
            if death not in subset:
                raise ConfigError(f"subset {list(subset)} omits death ({death!r})")
            t_sub = project_endpoints(treated, subset)
            c_sub = project_endpoints(control, subset)
            result, objs = _analyze_subset(t_sub, c_sub, config)
            entry.update(result)
            entry["status"] = "ok"
            rows.append(_sensitivity_row(result))
            if write:
                _write_subset_files(out_dir / f"subset_{i}", result, objs, t_sub, c_sub,
                                    float(config.tau))
        except (MsburdenError, KeyError, ArithmeticError, ValueError) as err:
            failed += 1
            entry["status"] = "error"
            entry["error"] = f"{type(err).__name__}: {err}"
            log.error("subset %d (%s) failed: %s", i, ", ".join(subset), err)
        summary["subsets"].append(entry)
    if write:
        out_dir.mkdir(parents=True, exist_ok=True)
        _write_rows(out_dir / "sensitivity.csv", SENSITIVITY_HEADER, rows)
        _dump_json(summary, out_dir / "summary.json")
    return _clean(summary), failed


def run_analysis(config: AnalysisConfig):
    """Ingest ``config.input`` and run :func:`analyze_datasets`; writes reports."""
    treated, control = ingest_csv(config.input)
    digest = hashlib.sha256(Path(config.input).read_bytes()).hexdigest()
    return analyze_datasets(treated, control, config, meta={"input_sha256": digest})


def run_simulation(config: SimulationConfig):
    """Simulate one trial, write ``data.csv``, ``truth.json`` and ``tallies.json``."""
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    trial = simulate_trial(config.scenario)
    write_csv(trial.treated, trial.control, out / "data.csv")
    truth = true_estimands(config.scenario, config.tau, config.n_mc, config.truth_seed)
    truth["scenario"] = config.scenario.to_dict()
    truth["software"] = {"name": "msburden", "version": __version__}
    _dump_json(truth, out / "truth.json")
    _dump_json(trial.tallies, out / "tallies.json")
    return trial, truth
