"""Look at the two posterior-moment (denoising) functions.

The signal denoiser shrinks a noisy pseudo-observation R toward zero unless
the evidence for a non-zero component is strong; the gain denoiser combines
the uniform prior, the |d|^P tilt, and a Gaussian factor.  Both are compared
against brute-force quadrature.
"""

import numpy as np
import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from calamp import (
    GaussBernoulliPrior,
    UniformGainPrior,
    gain_posterior_moments,
    quadrature_oracle,
    signal_posterior_moments,
)

# --- Signal side: posterior mean vs pseudo-observation for a few sparsities
R = np.linspace(-4, 4, 401)
fig, axes = plt.subplots(1, 2, figsize=(11, 4))
for rho in (0.05, 0.2, 1.0):
    stats = signal_posterior_moments(GaussBernoulliPrior(rho=rho), 0.25, R)
    axes[0].plot(R, stats.mean, label=f"rho = {rho}")
axes[0].plot(R, R, "k:", lw=0.8, label="identity")
axes[0].set_xlabel("pseudo-observation R")
axes[0].set_ylabel("posterior mean")
axes[0].set_title("spike-and-slab shrinkage (Sigma^2 = 0.25)")
axes[0].legend()

# Cross-check one point against the quadrature oracle (spike handled as an
# explicit atom).
prior = GaussBernoulliPrior(rho=0.2)
sigma2, r0 = 0.25, 1.5
closed = signal_posterior_moments(prior, sigma2, r0)


def log_slab(x):
    return (
        np.log(prior.rho)
        - 0.5 * np.log(2 * np.pi * prior.variance)
        - x**2 / (2 * prior.variance)
        - (x - r0) ** 2 / (2 * sigma2)
    )


slab = quadrature_oracle(log_slab, (-12.0, 12.0), 100_001)
log_atom = np.log(1 - prior.rho) - r0**2 / (2 * sigma2)
p_slab = 1.0 / (1.0 + np.exp(log_atom - slab.log_normalizer))
oracle_mean = p_slab * slab.mean
print(f"signal posterior mean at R={r0}: closed={float(closed.mean):.12f} "
      f"oracle={oracle_mean:.12f}")

# --- Gain side: posterior mean vs Gaussian-factor location T
gain_prior = UniformGainPrior(center=1.0, variance=0.01)
T = np.linspace(0.6, 1.4, 401)
for P, C2 in ((2, 0.05), (2, 0.005), (8, 0.005)):
    gm = gain_posterior_moments(gain_prior, P, np.full_like(T, C2), T)
    axes[1].plot(T, gm.mean, label=f"P = {P}, C^2 = {C2}")
lo, hi = gain_prior.support
axes[1].axhline(lo, color="k", ls=":", lw=0.8)
axes[1].axhline(hi, color="k", ls=":", lw=0.8)
axes[1].set_xlabel("Gaussian-factor location T")
axes[1].set_ylabel("posterior gain mean")
axes[1].set_title("uniform-prior gain denoiser (support dotted)")
axes[1].legend()

fig.tight_layout()
fig.savefig("denoisers.png", dpi=120)
print("wrote denoisers.png")
