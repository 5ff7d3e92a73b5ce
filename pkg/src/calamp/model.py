"""Measurement model: signal/gain priors, random instances, product transfer channel.

An instance couples P sparse signals (columns of X0), one multiplicative gain
per sensor (d0), a dense Gaussian measurement matrix F, and the distorted
readings Y[mu, l] = (sum_i F[mu, i] X0[i, l] + noise) / d0[mu].
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

__all__ = [
    "GaussBernoulliPrior",
    "UniformGainPrior",
    "GenerationConfig",
    "ProblemInstance",
    "generate_matrix",
    "generate_signals",
    "generate_gains",
    "forward_product_channel",
    "generate_instance",
    "load_instance",
]


@dataclass(frozen=True)
class GaussBernoulliPrior:
    """Sparse signal prior: zero with probability 1 - rho, else Gaussian slab.

    rho is the density of non-zero components; the slab is N(mean, variance).
    rho = 1 degenerates to a pure Gaussian.
    """

    rho: float
    mean: float = 0.0
    variance: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.rho <= 1.0:
            raise ValueError(f"rho must be in (0, 1], got {self.rho}")
        if self.variance <= 0.0:
            raise ValueError(f"slab variance must be > 0, got {self.variance}")

    def moments(self):
        """Mean and variance of the full mixture (spike included)."""
        m = self.rho * self.mean
        second = self.rho * (self.variance + self.mean**2)
        return m, second - m**2


@dataclass(frozen=True)
class UniformGainPrior:
    """Uniform gain prior parameterized by its center and variance.

    The support is [center - sqrt(3*variance), center + sqrt(3*variance)];
    variance = 0 is a point mass at the center.  Gains divide the
    measurements, so configurations whose support touches 0 are rejected.
    """

    center: float = 1.0
    variance: float = 0.0

    def __post_init__(self):
        if self.variance < 0.0:
            raise ValueError(f"gain variance must be >= 0, got {self.variance}")
        lo, hi = self.support
        if lo <= 0.0 <= hi:
            raise ValueError(
                f"gain support [{lo}, {hi}] must exclude 0 (gains divide measurements)"
            )

    @property
    def half_width(self):
        return math.sqrt(3.0 * self.variance)

    @property
    def support(self):
        return self.center - self.half_width, self.center + self.half_width

    def moments(self):
        return self.center, self.variance


@dataclass(frozen=True)
class GenerationConfig:
    """Everything needed to draw one reproducible problem instance."""

    N: int
    M: int
    P: int
    signal_prior: GaussBernoulliPrior
    gain_prior: UniformGainPrior
    delta: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.N < 1 or self.M < 1 or self.P < 1:
            raise ValueError(f"dimensions must be >= 1, got N={self.N} M={self.M} P={self.P}")
        if self.delta < 0.0:
            raise ValueError(f"delta must be >= 0, got {self.delta}")

    def to_dict(self):
        """Flat JSON-friendly form, keys as documented in the file schema."""
        return {
            "N": self.N,
            "M": self.M,
            "P": self.P,
            "rho": self.signal_prior.rho,
            "sigma2": self.gain_prior.variance,
            "delta": self.delta,
            "seed": self.seed,
            "signal_mean": self.signal_prior.mean,
            "signal_variance": self.signal_prior.variance,
            "gain_center": self.gain_prior.center,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            N=int(d["N"]),
            M=int(d["M"]),
            P=int(d["P"]),
            signal_prior=GaussBernoulliPrior(
                rho=float(d["rho"]),
                mean=float(d.get("signal_mean", 0.0)),
                variance=float(d.get("signal_variance", 1.0)),
            ),
            gain_prior=UniformGainPrior(
                center=float(d.get("gain_center", 1.0)),
                variance=float(d["sigma2"]),
            ),
            delta=float(d.get("delta", 0.0)),
            seed=int(d.get("seed", 0)),
        )

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


@dataclass
class ProblemInstance:
    """Ground truth plus observables for one blind-calibration problem."""

    F: np.ndarray        # (M, N) measurement matrix
    X0: np.ndarray       # (N, P) true signals
    d0: np.ndarray       # (M,)   true gains
    Y: np.ndarray        # (M, P) sensor readings
    delta: float = 0.0
    seed: int = 0
    config: GenerationConfig | None = None

    @property
    def M(self):
        return self.F.shape[0]

    @property
    def N(self):
        return self.F.shape[1]

    @property
    def P(self):
        return self.X0.shape[1]

    @cached_property
    def F_squared(self):
        """Elementwise square of F, cached (used by every solver sweep)."""
        return self.F**2

    def save(self, path):
        extra = {}
        if self.config is not None:
            extra["config_json"] = np.str_(self.config.to_json())
        np.savez(
            path,
            F=self.F,
            X0=self.X0,
            d0=self.d0,
            Y=self.Y,
            delta=np.float64(self.delta),
            seed=np.int64(self.seed),
            **extra,
        )


def load_instance(path):
    with np.load(path) as data:
        config = None
        if "config_json" in data:
            config = GenerationConfig.from_json(str(data["config_json"]))
        return ProblemInstance(
            F=data["F"],
            X0=data["X0"],
            d0=data["d0"],
            Y=data["Y"],
            delta=float(data["delta"]),
            seed=int(data["seed"]),
            config=config,
        )


def generate_matrix(N, M, seed):
    """Draw an M x N matrix with iid N(0, 1/N) entries."""
    if N < 1 or M < 1:
        raise ValueError(f"dimensions must be >= 1, got N={N} M={M}")
    rng = np.random.default_rng(seed)
    return rng.standard_normal((M, N)) / math.sqrt(N)


def generate_signals(N, P, prior, seed):
    """Draw an N x P matrix of iid spike-and-slab entries."""
    rng = np.random.default_rng(seed)
    # Fixed draw order (mask first) keeps the stream reproducible across P.
    mask = rng.random((N, P)) < prior.rho
    slab = prior.mean + math.sqrt(prior.variance) * rng.standard_normal((N, P))
    return np.where(mask, slab, 0.0)


def generate_gains(M, prior, seed):
    """Draw M iid gains uniform over the prior support."""
    lo, hi = prior.support
    rng = np.random.default_rng(seed)
    return rng.uniform(lo, hi, M)


def forward_product_channel(F, X0, d0, delta, seed=None):
    """Readings Y with Y[mu, l] = ((F @ X0)[mu, l] + noise) / d0[mu].

    Noise is iid N(0, delta); delta = 0 gives noiseless readings and
    consumes no random numbers.
    """
    d0 = np.asarray(d0, dtype=float)
    if np.any(d0 == 0.0):
        raise ValueError("zero gain: product channel divides by d0")
    if delta < 0.0:
        raise ValueError(f"delta must be >= 0, got {delta}")
    Z = F @ X0
    if delta > 0.0:
        Z = Z + math.sqrt(delta) * np.random.default_rng(seed).standard_normal(Z.shape)
    return Z / d0[:, None]


def generate_instance(config):
    """Draw a full instance; sub-streams (matrix, signals, gains, noise) are
    spawned from one seed so each component is independently reproducible."""
    s_matrix, s_signals, s_gains, s_noise = np.random.SeedSequence(config.seed).spawn(4)
    F = generate_matrix(config.N, config.M, s_matrix)
    X0 = generate_signals(config.N, config.P, config.signal_prior, s_signals)
    d0 = generate_gains(config.M, config.gain_prior, s_gains)
    Y = forward_product_channel(F, X0, d0, config.delta, s_noise)
    return ProblemInstance(
        F=F, X0=X0, d0=d0, Y=Y, delta=config.delta, seed=config.seed, config=config
    )
