"""Why no scheme in this family beats 2.025 on complete graphs.

Two triangle families force envelopes on the rounding functions: the
all-plus family caps f_plus from above, the two-equal-plus family pins
it inside a root interval. Around length 0.48 the interval detaches
from the cap once the target ratio drops to 2.025.
"""

import numpy as np

import ccpivot as cc

print(f"{'alpha':>7} {'x':>5} {'interval':>18} {'cap':>7} contradiction")
for alpha in (2.5, 2.06, 2.03, 2.025, 2.0):
    r = cc.lower_bound_check(alpha, 0.48)
    iv = f"({r.root_interval[0]:.3f}, {r.root_interval[1]:.3f})" if r.root_interval else "none"
    print(f"{alpha:>7} {r.x:>5} {iv:>18} {r.upper_bound:>7.4f} {r.contradiction}")
print()

# scan x at the threshold ratio: the contradiction needs the right probe
print("alpha = 2.025, scanning x:")
for x in np.arange(0.40, 0.50, 0.02):
    r = cc.lower_bound_check(2.025, float(x))
    print(f"  x = {x:.2f}: contradiction = {r.contradiction}")
print()

# the envelopes the argument uses, tabulated around the probe
bc = cc.bound_curves(2.06)
scheme = cc.get_scheme("complete206")
print("envelopes at alpha = 2.06 (the shipped scheme stays inside):")
print(f"{'x':>5} {'lower':>8} {'f_plus':>8} {'upper':>8}")
for x in (0.30, 0.40, 0.45, 0.48):
    lo = float(bc.f_plus_lower(x))
    hi = float(bc.f_plus_upper(x))
    print(f"{x:>5} {lo:>8.4f} {float(scheme.f_plus(x)):>8.4f} {hi:>8.4f}")
