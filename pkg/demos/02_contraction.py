"""Contraction coefficients: closed form, optimizer and certified upper bounds."""

import math

from hockeystick import core
from hockeystick.contraction import (
    eta_choi_upper,
    eta_depolarizing_closed,
    eta_lower_optimize,
    estimate_contraction,
)

print("depolarizing channel: closed form vs search over orthogonal pure pairs")
for d in (2, 3):
    for p in (0.1, 0.3, 0.7):
        for eps in (0.0, 0.1, 1.0):
            g = math.exp(eps)
            val, _ = eta_lower_optimize(core.depolarizing(p, d), g, restarts=50, seed=1)
            print(f"  D={d} p={p} eps={eps}: closed {eta_depolarizing_closed(p, d, g):.6f}  search {val:.6f}")

ad = core.amplitude_damping(0.4)
print("\namplitude damping (decay 0.4), no closed form:")
for method in ("optimize", "trace", "choi", "fvdg"):
    est = estimate_contraction(ad, math.exp(0.1), method, restarts=50, seed=1)
    print(f"  {method:<8} [{est.lower:.6f}, {est.upper:.6f}]  {','.join(est.method_tags)}")
print(f"  Choi upper bound alone: {eta_choi_upper(ad, math.exp(0.1)):.6f}")
