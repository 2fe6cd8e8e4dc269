"""Hockey-stick divergence: definitions, bounds and the smoothing witness."""

import math

import numpy as np

from hockeystick import core
from hockeystick.divergences import (
    fvdg_upper_bound,
    hockey_stick,
    hockey_stick_trace_form,
    renyi_divergence,
    smooth_dmax_witness,
    trace_distance,
    trace_distance_sandwich,
)

rho = core.basis_state(2, 0)
sigma = core.maximally_mixed(2)

print("E_gamma(|0><0| || 1/2) as gamma grows:")
for eps in (0.0, 0.1, 0.2, 0.5, math.log(2)):
    g = math.exp(eps)
    print(f"  eps={eps:.3f}  E={hockey_stick(rho, sigma, g):.6f}  trace form={hockey_stick_trace_form(rho, sigma, g):.6f}")
print(f"at gamma=1 it is the trace distance: {trace_distance(rho, sigma):.6f}")

rng = np.random.default_rng(0)
a, b = core.sample_state(3, seed=rng), core.sample_state(3, seed=rng)
g = 1.3
lo, hi = trace_distance_sandwich(a, b, g)
print(f"\nrandom qutrit pair, gamma={g}:")
print(f"  trace-distance sandwich   {lo:.6f} <= {hockey_stick(a, b, g):.6f} <= {hi:.6f}")
print(f"  fidelity upper bound      {fvdg_upper_bound(a, b, g):.6f}")

w = smooth_dmax_witness(a, b, g)
print(f"  witness gamma*sigma: D_max <= {w.dmax_value:.6f}, smoothing radius {w.smoothing_radius:.6f}")

print("\nsandwiched Renyi divergence interpolates Umegaki (alpha->1) and D_max (alpha->inf):")
for alpha in (0.5, 1.0001, 2.0, 10.0, math.inf):
    print(f"  alpha={alpha:<7} {renyi_divergence('sandwiched', a, b, alpha):.6f}")
print(f"  Umegaki      {renyi_divergence('umegaki', a, b):.6f}")
