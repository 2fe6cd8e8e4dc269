"""Privacy budgets of noisy layered circuits and the privacy/usefulness gap."""

from hockeystick import core, privacy as pv
from hockeystick.contraction import choi_min_eigenvalue

kappa, eps = 0.1, 0.1
print(f"global depolarizing layers, kappa={kappa}, eps={eps}")
print("  n   contraction-only (p=0.3)   improved (p=0.3)   improved (p=0.1)")
for n in range(1, 13):
    algo = pv.depolarizing_algorithm([0.3] * n)
    generic = pv.delta_layered_generic(algo, kappa, eps)
    print(f"  {n:<3} {generic:<26.6f} {pv.delta_global_depolarizing([0.3] * n, 2, kappa, eps):<18.6f}"
          f" {pv.delta_global_depolarizing([0.1] * n, 2, kappa, eps):.6f}")

print("\nlocal depolarizing on k qubits (p=0.2), delta at eps=0.5 and the trace-distance floor")
for n in (1, 2, 5, 10, 20, 30):
    d = pv.delta_local_depolarizing(0.2, 2, 1, n, kappa, 0.5)
    floor = pv.trace_lower_bound_local(0.2, 1, n, kappa)
    print(f"  n={n:<3} delta={d:.6f}  output distance >= {floor.value:.3e}")

ad = core.amplitude_damping(0.3)
lam = choi_min_eigenvalue(ad)
print(f"\namplitude damping noise: lambda_min(Choi(N^dagger N)) = {lam:.6f}")
for n in (1, 5, 10, 20):
    print(f"  n={n:<3} delta <= {pv.delta_qubit_noise(lam, 1, n, kappa, eps):.6f}")

print("\nsmallest eps for delta=1e-3 at kappa=0.5 under D_0.3 layers:")
for n in (1, 2, 4, 8):
    print(f"  n={n}: eps={pv.eps_global_depolarizing([0.3] * n, 2, 0.5, 1e-3):.6f}")
