"""Hypothesis-testing view: sampled error points against the privacy region."""

import numpy as np

from hockeystick import core
from hockeystick.hypothesis import (
    PrivacyRegion,
    region_contains,
    region_corner,
    region_subset_check,
    relax_budget,
    sample_channel_region,
)

rho = np.diag([2 / 3, 1 / 3]).astype(complex)
sigma = np.diag([1 / 3, 2 / 3]).astype(complex)
eps, delta = 0.2, 0.01
region = PrivacyRegion(eps, delta)
print(f"R({eps}, {delta}) corner: {region_corner(eps, delta)}")

for p in (0.72, 0.3):
    pts = sample_channel_region(core.depolarizing(p), rho, sigma, 1000, 42, [eps])
    outside = [pt for pt in pts if not region_contains(region, pt)]
    print(f"\ndepolarizing p={p}: {len(outside)}/{len(pts)} error points outside R({eps}, {delta})")

# a second pair at trace distance 1/2 is a weaker neighbour relation, so even p=0.72 leaks
pairs = [(rho, sigma), (core.basis_state(2, 0), core.maximally_mixed(2))]
for p in (0.72, 0.3):
    v = region_subset_check(core.depolarizing(p), pairs, eps, delta, 500, 42)
    print(f"p={p} over {len(pairs)} pairs: {v.report(delta)}")

print("\nrelaxing delta buys back epsilon:")
for dt in (0.01, 0.02, 0.05, 0.1, 0.5):
    print(f"  delta~={dt:<5} eps~={relax_budget(eps, delta, dt):.6f}")
