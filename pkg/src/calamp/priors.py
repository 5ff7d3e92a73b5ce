"""Posterior-moment (denoising) functions for signal and gain estimation.

Signal components are denoised under a spike-and-slab measure: the prior times
a Gaussian factor exp(-(x - R)^2 / (2 Sigma^2)).  Gains are denoised under the
uniform prior tilted by |d|^P and a Gaussian factor exp(-(d - T)^2 / (2 C^2)).
A generic log-space quadrature oracle is provided to validate both.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, NamedTuple

import numpy as np

__all__ = [
    "PosteriorStats",
    "GainMoments",
    "OracleMoments",
    "signal_posterior_moments",
    "gain_posterior_moments",
    "quadrature_oracle",
]

# Exponent gap beyond which the softer mixture component is numerically zero
# (also below the exp overflow threshold of ~709.8).
_EXP_CLIP = 700.0


@dataclass
class PosteriorStats:
    """First two posterior moments of a signal component (arrays broadcast)."""

    mean: np.ndarray
    variance: np.ndarray


@dataclass
class GainMoments:
    """First two posterior moments of a sensor gain (arrays broadcast)."""

    mean: np.ndarray
    variance: np.ndarray


class OracleMoments(NamedTuple):
    mean: float
    variance: float
    log_normalizer: float


def signal_posterior_moments(prior, sigma2, R):
    """Exact mean/variance of x under the spike-and-slab measure.

    The posterior is a two-component mixture: an atom at 0 with weight
    proportional to (1 - rho) exp(-R^2 / (2 sigma2)), and a Gaussian obtained
    by conjugating the slab with the quadratic factor.  Weights are combined
    in log space so extreme R or tiny sigma2 cannot overflow.
    """
    sigma2 = np.asarray(sigma2, dtype=float)
    R = np.asarray(R, dtype=float)
    if np.any(sigma2 <= 0.0):
        raise ValueError("sigma2 must be > 0")
    rho, slab_mean, slab_var = prior.rho, prior.mean, prior.variance

    v_post = slab_var * sigma2 / (slab_var + sigma2)
    m_post = v_post * (slab_mean / slab_var + R / sigma2)

    with np.errstate(divide="ignore"):
        log_spike = math.log1p(-rho) if rho < 1.0 else -np.inf
        log_spike = log_spike - R**2 / (2.0 * sigma2)
        log_slab = (
            math.log(rho)
            + 0.5 * (np.log(sigma2) - np.log(slab_var + sigma2))
            - (R - slab_mean) ** 2 / (2.0 * (slab_var + sigma2))
        )
    gap = np.clip(log_spike - log_slab, -_EXP_CLIP, _EXP_CLIP)
    p_slab = 1.0 / (1.0 + np.exp(gap))

    mean = p_slab * m_post
    variance = p_slab * v_post + p_slab * (1.0 - p_slab) * m_post**2
    return PosteriorStats(mean=mean, variance=np.maximum(variance, 0.0))


@lru_cache(maxsize=8)
def _leggauss(n):
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


def gain_posterior_moments(prior, P, C2, T, nodes=512):
    """Mean/variance of d under the tilted measure P_D(d) |d|^P exp(-(d-T)^2/(2 C2)).

    Deterministic Gauss-Legendre quadrature over the prior support, restricted
    to a window of half-width (30 + P) * C around the clipped location T so the
    rule still resolves the integrand when C is tiny (the window covers the
    whole support whenever C is comparable to it).  Computed in log space with
    max-subtraction; the quadrature scale factor cancels in the moment ratios.
    """
    C2 = np.asarray(C2, dtype=float)
    T = np.asarray(T, dtype=float)
    if np.any(C2 <= 0.0):
        raise ValueError("C2 must be > 0")
    if prior.variance == 0.0:
        shape = np.broadcast_shapes(C2.shape, T.shape)
        return GainMoments(
            mean=np.full(shape, prior.center), variance=np.zeros(shape)
        )

    lo, hi = prior.support
    C = np.sqrt(C2)
    loc = np.clip(T, lo, hi)
    half = (30.0 + P) * C
    w_lo = np.maximum(lo, loc - half)
    w_hi = np.minimum(hi, loc + half)

    xi, wi = _leggauss(nodes)
    mid = 0.5 * (w_lo + w_hi)
    rad = 0.5 * (w_hi - w_lo)
    d = mid[..., None] + rad[..., None] * xi

    log_f = P * np.log(np.abs(d)) - (d - T[..., None]) ** 2 / (2.0 * C2[..., None])
    log_f -= log_f.max(axis=-1, keepdims=True)
    f = wi * np.exp(log_f)
    z = f.sum(axis=-1)
    mean = (f * d).sum(axis=-1) / z
    variance = (f * (d - mean[..., None]) ** 2).sum(axis=-1) / z
    return GainMoments(mean=mean, variance=np.maximum(variance, 0.0))


def quadrature_oracle(log_weight: Callable, support, nodes):
    """Normalized first two moments of exp(log_weight) by midpoint Riemann sum.

    Integration runs in log space with max-subtraction.  `support` is a
    (lo, hi) interval; infinite endpoints are handled by a tan change of
    variables.  Raises if every node underflows ("degenerate measure").
    """
    if nodes < 2:
        raise ValueError("nodes must be >= 2")
    lo, hi = support
    if math.isinf(lo) or math.isinf(hi):
        if not (math.isinf(lo) and math.isinf(hi)):
            raise ValueError("support must be a finite interval or the full real line")
        t = (np.arange(nodes) + 0.5) / nodes * 2.0 - 1.0          # midpoints in (-1, 1)
        x = np.tan(0.5 * math.pi * t)
        log_jac = np.log(0.5 * math.pi * (1.0 + x**2)) + math.log(2.0 / nodes)
    else:
        h = (hi - lo) / nodes
        x = lo + (np.arange(nodes) + 0.5) * h
        log_jac = math.log(h)

    with np.errstate(over="ignore", invalid="ignore"):
        log_w = np.asarray(log_weight(x), dtype=float) + log_jac
    log_w = np.where(np.isnan(log_w), -np.inf, log_w)
    top = log_w.max()
    if not np.isfinite(top):
        raise ValueError("degenerate measure: every quadrature weight underflows")
    w = np.exp(log_w - top)
    z = w.sum()
    mean = float((w * x).sum() / z)
    variance = float((w * (x - mean) ** 2).sum() / z)
    return OracleMoments(mean=mean, variance=variance, log_normalizer=float(top + np.log(z)))
