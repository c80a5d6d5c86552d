"""
Cumulative disease burden: the AUC of the mean score
====================================================

Each subject moves through 40% eGFR decline, ESRD and death. The score is
the number of transitions so far, and the burden up to tau is the area
under that step path.
"""

import numpy as np
from msburden import ArmDataset, StateSpace, auc_arm, auc_contrast, mean_score_curve

space = StateSpace(("40%", "ESRD", "death"))

# rows are subjects, columns the three transition times; d=0 marks censoring
treated = ArmDataset(
    1,
    x=[[1.0, 4.0, 5.5], [2.0, 3.0, 3.0], [6.0, 6.0, 6.0], [3.5, 6.0, 6.0]],
    delta=[[1, 1, 1], [1, 1, 1], [0, 0, 0], [1, 0, 0]],
    state_space=space,
)
control = ArmDataset(
    0,
    x=[[0.5, 2.0, 4.0], [1.0, 1.0, 2.5], [3.0, 6.0, 6.0], [2.0, 5.0, 6.0]],
    delta=[[1, 1, 1], [1, 1, 1], [1, 0, 0], [1, 1, 0]],
    state_space=space,
)

tau = 6.0
est = auc_arm(treated, tau)
print("treated AUC", est.auc, "SE", est.se)

# the same number from the mean score curve
print("area under mean score", mean_score_curve(treated, tau).integrate(tau))

c = auc_contrast(treated, control, tau)
print(f"ratio {c.ratio:.3f} CI {np.round(c.ratio_ci, 3)}")
print(f"difference {c.difference:.3f} (SE {c.difference_se:.3f})")

# minus the difference splits into RMST gains per transition
for lab, g in zip(c.labels, c.component_differences):
    print(f"  RMST gain before {lab}: {g:+.3f}")
