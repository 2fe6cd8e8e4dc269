"""Renyi differential privacy and local differential privacy of channels."""

import math

from hockeystick import core, privacy as pv

ch = core.depolarizing(0.5)
pairs = [core.sample_orthogonal_pure_pair(2, seed=s) for s in range(20)]
for alpha in (1.5, 2.0, 5.0):
    eps_r = pv.renyi_dp_certify(ch, pairs, alpha)
    approx = pv.renyi_to_approx_dp(pv.RenyiBudget(eps_r, alpha), 1e-5)
    print(f"alpha={alpha}: empirical Renyi eps {eps_r:.6f} -> ({approx.epsilon:.6f}, 1e-5)-DP")

print(f"pure eps-DP implies Renyi-DP at any order: {pv.renyi_from_pure_dp(0.3)}")

print("\nlocal DP of depolarizing noise, and the implied trace contraction bound")
for p in (0.2, 0.5, 0.9):
    ch = core.depolarizing(p)
    for eps in (0.1, 0.5):
        d_hat = pv.ldp_delta_estimate(ch, eps, 200, seed=0)
        eta1 = pv.ldp_delta_estimate(ch, 0.0, 200, seed=0)
        print(f"  p={p} eps={eps}: delta ~ {d_hat:.4f}, eta_1 ~ {eta1:.4f} <= phi = {pv.ldp_eta1_bound(eps, d_hat):.4f}")
print(f"\nphi(0.1, 0.05) = {pv.ldp_eta1_bound(0.1, 0.05):.7f} (1 - e^-0.1 * 0.95 = {1 - math.exp(-0.1) * 0.95:.7f})")
