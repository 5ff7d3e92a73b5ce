"""A small measurement-rate vs sparsity phase diagram.

For each (alpha, rho) cell the harness draws fresh instances, runs the
blind solver, and records the corrected MSE.  Black cells mean perfect
reconstruction, white cells mean failure; the counting bound
alpha_min = P rho / (P - 1) separates what is information-theoretically
possible.  Expect a transition between alpha_min and 1.
"""

import numpy as np

from calamp import SweepSpec, alpha_min, run_phase_diagram

alphas = [round(a, 2) for a in np.arange(0.2, 1.21, 0.1)]
rhos = [round(r, 2) for r in np.arange(0.1, 0.91, 0.1)]
spec = SweepSpec(
    alphas=alphas, rhos=rhos, Ps=(2,), sigma2s=(0.01,), Ns=(128,),
    replicates=3, base_seed=2,
)
print(f"running {len(alphas) * len(rhos)} cells x {spec.replicates} replicates at N=128 ...")
result = run_phase_diagram(spec, threads=8)
result.to_csv("phase_diagram.csv")
print("wrote phase_diagram.csv")

cells = {(g.alpha, g.rho): g for g in result.aggregates}
shades = " .:-=+*#%@"  # white (failure) .. black (success)
print("\nmean log10 MSE_corr, alpha down, rho across; '@' = perfect recovery")
print("      " + "".join(f"{r:>6.1f}" for r in rhos))
for a in sorted(alphas, reverse=True):
    row = []
    for r in rhos:
        g = cells[(a, r)]
        level = min(max(-g.mean_log10_mse / 12.0, 0.0), 1.0)  # 0 .. 12 orders
        row.append(shades[int(level * (len(shades) - 1))])
    print(f"a={a:4.1f}  " + "     ".join(row))

print("\ncounting bound alpha_min(rho) for P=2:",
      ", ".join(f"{r:.1f}->{alpha_min(2, r):.2f}" for r in rhos))
