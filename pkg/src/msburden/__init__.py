"""Cumulative disease burden estimands for progressive multistate outcomes."""

__version__ = "0.1.0"

from .auc import (
    AucArmEstimate,
    AucContrast,
    auc_arm,
    auc_bootstrap_se,
    auc_contrast,
    auc_influence_se,
    auc_influence_values,
    mean_score_curve,
    running_auc_ratio,
)
from .cox import (
    CompositeSample,
    CoxFit,
    cumulative_hazard_curves,
    fit_cox_hr,
    logrank_test,
    to_composite,
)
from .errors import *  # noqa: F401,F403
from .km import (
    HazardIncrements,
    TransitionSample,
    at_risk_fraction,
    fit_km,
    fit_nelson_aalen,
    rmst,
)
from .rmtif import RmtifEstimate, RmtifReport, rmtif_estimate, rmtif_infer, rmtif_pairwise_oracle
from .simulate import TrialScenario, simulate_trial, true_estimands
from .types import (
    ArmDataset,
    StateSpace,
    StepCurve,
    SubjectRecord,
    project_endpoints,
    summarize_first_events,
    summarize_worst_state,
    validate_subject,
)
from .utility import (
    UtilitySpec,
    comparative_utility,
    cumulative_utility,
    expected_utility,
    expected_utility_contrast,
)
