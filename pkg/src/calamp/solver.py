"""Joint signal/gain message-passing solver for the product transfer channel.

One sweep updates, in order: projection variances V, Onsager-corrected
projections omega (using the previous sweep's residual terms), fresh residual
terms (e, h) from the new omega, gain-factor parameters (C2, T), gain moments
(k, l), signal-factor parameters (Sigma2, R), and signal moments (a, v).
New gains feed the residual terms of the *next* sweep.  Damping is applied
both to the projection messages (omega, V) and to the estimates (a, v, k, l);
estimate-only damping leaves a slow limit cycle between the signal and gain
blocks.

In known-gain mode the gain block is pinned to the true gains, which reduces
every update to plain Bayesian GAMP for an additive white Gaussian channel.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .channel import gain_CT, product_eh
from .model import GaussBernoulliPrior, UniformGainPrior
from .priors import gain_posterior_moments, signal_posterior_moments

__all__ = [
    "SolverConfig",
    "SolverState",
    "SolveResult",
    "DivergenceError",
    "initialize",
    "iterate_once",
    "compute_crit",
    "compute_mse_corr",
    "run",
]

GAIN_MODES = ("blind", "known")
STATUS_CONVERGED = "converged"
STATUS_STALLED = "stalled"
STATUS_MAX_ITERS = "max_iters"

# Variances are clamped into [VARIANCE_FLOOR, VARIANCE_CEIL] before downstream
# use: catastrophic cancellation near convergence produces tiny negatives, and
# the h-sums can go non-positive transiently.
VARIANCE_FLOOR = 1e-18
VARIANCE_CEIL = 1e18


class DivergenceError(RuntimeError):
    """Raised when a sweep produces non-finite state."""

    def __init__(self, iteration):
        super().__init__(f"divergence: non-finite solver state at iteration {iteration}")
        self.iteration = iteration


@dataclass(frozen=True)
class SolverConfig:
    assumed_signal_prior: GaussBernoulliPrior
    assumed_gain_prior: UniformGainPrior
    max_iters: int = 2000
    damping: float = 0.5          # new <- damping*new + (1-damping)*old
    delta_reg: float = 1e-17      # stabilizer added to the channel noise variance
    crit_tol: float = 1e-13
    stall_window: int = 100       # sweeps without a new crit minimum before stopping
    gain_mode: str = "blind"
    seed: int | None = None

    def __post_init__(self):
        if not 0.0 < self.damping <= 1.0:
            raise ValueError(f"damping must be in (0, 1], got {self.damping}")
        if self.crit_tol <= 0.0:
            raise ValueError(f"crit_tol must be > 0, got {self.crit_tol}")
        if self.stall_window < 1:
            raise ValueError(f"stall_window must be >= 1, got {self.stall_window}")
        if self.max_iters < 1:
            raise ValueError(f"max_iters must be >= 1, got {self.max_iters}")
        if self.delta_reg < 0.0:
            raise ValueError(f"delta_reg must be >= 0, got {self.delta_reg}")
        if self.gain_mode not in GAIN_MODES:
            raise ValueError(f"gain_mode must be one of {GAIN_MODES}, got {self.gain_mode!r}")


@dataclass
class SolverState:
    a: np.ndarray        # (N, P) signal posterior means
    v: np.ndarray        # (N, P) signal posterior variances, >= 0
    omega: np.ndarray    # (M, P) Onsager-corrected projections
    V: np.ndarray        # (M, P) projection variances, > 0 after clamping
    e: np.ndarray        # (M, P) channel residual terms
    h: np.ndarray        # (M, P) channel curvature terms
    k: np.ndarray        # (M,)   gain posterior means
    l: np.ndarray        # (M,)   gain posterior variances, >= 0
    Sigma2: np.ndarray   # (N, P) signal-factor variances, > 0 after clamping
    R: np.ndarray        # (N, P) signal-factor locations
    iter: int = 0
    crit_trace: list = field(default_factory=list)


@dataclass
class SolveResult:
    a_final: np.ndarray
    k_final: np.ndarray
    iterations: int
    status: str                     # converged | stalled | max_iters
    crit_final: float
    mse_corr: float | None = None
    s_hat: float | None = None
    crit_trace: list = field(default_factory=list)

    def to_dict(self):
        return {
            "converged": self.status,
            "iterations": self.iterations,
            "crit_final": self.crit_final,
            "mse_corr": self.mse_corr,
            "s_hat": self.s_hat,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2)


def initialize(instance, config):
    """Starting state: omega = Y, signal stats at the assumed prior moments,
    gain stats at the assumed gain prior moments (true gains if known)."""
    N, P, M = instance.N, instance.P, instance.M
    x_mean, x_var = config.assumed_signal_prior.moments()
    if config.gain_mode == "known":
        k = instance.d0.astype(float).copy()
        l = np.zeros(M)
    else:
        d_mean, d_var = config.assumed_gain_prior.moments()
        k = np.full(M, d_mean)
        l = np.full(M, d_var)
    v = np.full((N, P), x_var)
    return SolverState(
        a=np.full((N, P), x_mean),
        v=v,
        omega=instance.Y.copy(),
        V=instance.F_squared @ np.maximum(v, VARIANCE_FLOOR),
        e=np.zeros((M, P)),
        h=np.zeros((M, P)),
        k=k,
        l=l,
        Sigma2=np.ones((N, P)),
        R=np.zeros((N, P)),
    )


def iterate_once(state, instance, config):
    """One full sweep; returns the new state.  Raises DivergenceError on
    non-finite values."""
    F, F2, Y = instance.F, instance.F_squared, instance.Y
    delta = instance.delta + config.delta_reg
    damp = config.damping

    V_new = F2 @ np.maximum(state.v, VARIANCE_FLOOR)
    omega_new = F @ state.a - V_new * state.e
    V = damp * V_new + (1.0 - damp) * state.V
    omega = damp * omega_new + (1.0 - damp) * state.omega
    e, h = product_eh(Y, omega, V, state.k, state.l, delta)

    if config.gain_mode == "known":
        k, l = state.k, state.l
    else:
        C2, T = gain_CT(Y, omega, V, delta)
        gm = gain_posterior_moments(config.assumed_gain_prior, instance.P, C2, T)
        k = damp * gm.mean + (1.0 - damp) * state.k
        l = damp * gm.variance + (1.0 - damp) * state.l

    # Per-component precisions can go non-positive when l*y^2 dominates h;
    # clamping keeps Sigma2 inside [VARIANCE_FLOOR, VARIANCE_CEIL].
    precision = F2.T @ h
    Sigma2 = 1.0 / np.clip(precision, 1.0 / VARIANCE_CEIL, 1.0 / VARIANCE_FLOOR)
    R = state.a + Sigma2 * (F.T @ e)
    ps = signal_posterior_moments(config.assumed_signal_prior, Sigma2, R)
    a = damp * ps.mean + (1.0 - damp) * state.a
    v = damp * ps.variance + (1.0 - damp) * state.v

    iteration = state.iter + 1
    for arr in (a, v, k, l, omega, V):
        if not np.all(np.isfinite(arr)):
            raise DivergenceError(iteration)

    return SolverState(
        a=a, v=v, omega=omega, V=V, e=e, h=h, k=k, l=l,
        Sigma2=Sigma2, R=R, iter=iteration, crit_trace=state.crit_trace,
    )


def compute_crit(state, instance):
    """Mean squared residual between gain-scaled readings and projections."""
    resid = state.k[:, None] * instance.Y - instance.F @ state.a
    return float(np.mean(resid**2))


def compute_mse_corr(a, k, X0, d0):
    """Scale-corrected reconstruction error.

    s_hat = mean(d0 / k) estimates the global scale left free by the product
    channel; the error is measured against s_hat * a.
    """
    k = np.asarray(k, dtype=float)
    if np.any(k == 0.0):
        raise ValueError("zero gain estimate: scale correction undefined")
    s_hat = float(np.mean(np.asarray(d0, dtype=float) / k))
    mse = float(np.mean((np.asarray(X0, dtype=float) - s_hat * np.asarray(a, dtype=float)) ** 2))
    return mse, s_hat


def run(instance, config, state=None):
    """Iterate to convergence, stall, or the sweep budget.

    Stops when crit < crit_tol (converged) or when crit has not reached a new
    minimum for stall_window sweeps (stalled).  The returned estimates are the
    best-crit iterate seen, not necessarily the last one: damped iterations can
    oscillate after finding the solution.
    """
    if state is None:
        state = initialize(instance, config)
    best_crit = np.inf
    best_a = state.a
    best_k = state.k
    best_iter = state.iter
    status = STATUS_MAX_ITERS
    iterations = state.iter

    for _ in range(config.max_iters):
        state = iterate_once(state, instance, config)
        iterations = state.iter
        crit = compute_crit(state, instance)
        state.crit_trace.append(crit)
        if crit < best_crit:
            best_crit = crit
            best_a = state.a
            best_k = state.k
            best_iter = state.iter
        if crit < config.crit_tol:
            status = STATUS_CONVERGED
            break
        if state.iter - best_iter >= config.stall_window:
            status = STATUS_STALLED
            break

    mse_corr = s_hat = None
    if instance.X0 is not None and instance.d0 is not None:
        mse_corr, s_hat = compute_mse_corr(best_a, best_k, instance.X0, instance.d0)
    return SolveResult(
        a_final=best_a,
        k_final=best_k,
        iterations=iterations,
        status=status,
        crit_final=float(best_crit),
        mse_corr=mse_corr,
        s_hat=s_hat,
        crit_trace=state.crit_trace,
    )
