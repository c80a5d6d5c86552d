"""
Kaplan-Meier curves and restricted mean survival time
=====================================================

Three subjects: an event at 1, a censoring at 2, an event at 3.
"""

import numpy as np
from msburden import TransitionSample, fit_km, fit_nelson_aalen, rmst

sample = TransitionSample([1.0, 2.0, 3.0], [1, 0, 1])
curve = fit_km(sample)

# the curve drops to 2/3 at t=1 and stays there until the last event
for t in (0.5, 1.0, 2.5, 3.0):
    print(f"S({t}) = {curve(t):.4f}")

# the area up to tau is an exact sum of rectangles: 1 + 2 * 2/3
print("rmst(3) =", rmst(curve, 3.0))

# Nelson-Aalen increments d/Y at each event time
print(fit_nelson_aalen(sample).as_dict())

# evaluation is vectorised
print(curve(np.linspace(0, 4, 9)))
