"""Distortion strength vs number of calibrating signals.

With one signal, blind calibration is impossible at any distortion level;
adding signals buys tolerance to larger gain variance sigma2.  As sigma2
goes to 0 the problem degenerates to ordinary compressed sensing with known
gains.  Success region should grow with P.
"""

from calamp import SweepSpec, alpha_min, run_sigma_p_diagram

sigma2s = (1e-4, 1e-3, 1e-2, 5e-2)
Ps = (1, 2, 3, 4)
spec = SweepSpec(
    alphas=(0.75,), rhos=(0.3,), Ps=Ps, sigma2s=sigma2s, Ns=(128,),
    replicates=4, base_seed=17,
)
print(f"running {len(sigma2s) * len(Ps)} cells x {spec.replicates} replicates at "
      f"rho=0.3, alpha=0.75, N=128 ...")
result = run_sigma_p_diagram(spec, threads=8)
result.to_csv("sigma_p.csv")
print("wrote sigma_p.csv\n")

cells = {(g.sigma2, g.P): g for g in result.aggregates}
print("success rate; sigma2 across, P down")
print("        " + "".join(f"{s:>9.0e}" for s in sigma2s))
for P in Ps:
    row = "".join(f"{cells[(s, P)].success_rate:9.2f}" for s in sigma2s)
    bound = alpha_min(P, 0.3)
    note = "  (alpha_min = %.2f > alpha: impossible)" % bound if bound > 0.75 else ""
    print(f"P = {P}  {row}{note}")
