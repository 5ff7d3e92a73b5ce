"""Output-side message computations for the product transfer channel.

The production path is analytic: per-reading residual terms (e, h) and
per-sensor Gaussian-factor parameters (C2, T) for the gain posterior.
`numeric_G` evaluates the log generating function of the output channel by
quadrature; it exists to validate the analytic path on tiny problems and is
never used inside the solver loop.
"""

from __future__ import annotations

import math

import numpy as np

from .priors import _leggauss

__all__ = ["product_eh", "gain_CT", "numeric_G"]


def _per_sensor(values, like):
    """Broadcast a per-sensor vector against an (M, P) array."""
    arr = np.asarray(values, dtype=float)
    if arr.ndim == 1 and np.ndim(like) == 2:
        return arr[:, None]
    return arr


def product_eh(y, omega, V, k, l, delta):
    """Residual terms of the product channel, elementwise over readings.

    e = (k y - omega) / (V + delta)
    h = 1 / (V + delta) - l y^2 / (V + delta)^2

    k and l are per-sensor gain moments (broadcast along the signal axis).
    """
    y = np.asarray(y, dtype=float)
    omega = np.asarray(omega, dtype=float)
    Vd = np.asarray(V, dtype=float) + delta
    if np.any(Vd <= 0.0):
        raise ValueError("V + delta must be > 0 (upstream clamping failed)")
    k = _per_sensor(k, y)
    l = _per_sensor(l, y)
    e = (k * y - omega) / Vd
    h = 1.0 / Vd - l * y**2 / Vd**2
    return e, h


def gain_CT(y, omega, V, delta):
    """Gaussian-factor parameters of the gain posterior, one pair per sensor.

    1 / C2 = sum_n y_n^2 / (V_n + delta)
    T = C2 * sum_n y_n omega_n / (V_n + delta)
    """
    y = np.asarray(y, dtype=float)
    omega = np.asarray(omega, dtype=float)
    Vd = np.asarray(V, dtype=float) + delta
    if np.any(Vd <= 0.0):
        raise ValueError("V + delta must be > 0 (upstream clamping failed)")
    inv_C2 = (y**2 / Vd).sum(axis=-1)
    if np.any(inv_C2 <= 0.0):
        raise ValueError("uninformative sensor: all readings zero, gain unidentifiable")
    C2 = 1.0 / inv_C2
    T = C2 * (y * omega / Vd).sum(axis=-1)
    return C2, T


def numeric_G(y_row, omega_row, V_row, theta, prior, delta, quad_nodes=2001):
    """Log generating function of one sensor's output messages, by quadrature.

    Evaluates ln of the integral over the gain d of

        P_D(d) e^(theta d) prod_n |d| Normal(y_n d; omega_n, V_n + delta)

    For the product channel the (projection, noise) integral collapses to the
    Gaussian density of y*d above; the |d| Jacobian is included, so the value
    matches the plain Gaussian log likelihood when the prior is a point mass
    at d = 1.  Deterministic given quad_nodes.
    """
    y = np.atleast_1d(np.asarray(y_row, dtype=float))
    omega = np.atleast_1d(np.asarray(omega_row, dtype=float))
    Vd = np.atleast_1d(np.asarray(V_row, dtype=float)) + delta
    if np.any(Vd <= 0.0):
        raise ValueError("V + delta must be > 0")
    P = y.size
    log_norm = -0.5 * np.log(2.0 * math.pi * Vd)

    def log_gtilde(d):
        # d: (..., 1) against readings (P,)
        z = d * y
        return (
            P * np.log(np.abs(d[..., 0]))
            + (log_norm - (z - omega) ** 2 / (2.0 * Vd)).sum(axis=-1)
        )

    if prior.variance == 0.0:
        d0 = np.array([prior.center])
        return float(theta * prior.center + log_gtilde(d0[:, None])[0])

    lo, hi = prior.support
    xi, wi = _leggauss(quad_nodes)
    d = 0.5 * (lo + hi) + 0.5 * (hi - lo) * xi
    log_w = theta * d + log_gtilde(d[:, None]) - math.log(hi - lo)
    top = log_w.max()
    if not np.isfinite(top):
        raise ValueError("degenerate measure: every quadrature weight underflows")
    total = (wi * np.exp(log_w - top)).sum() * 0.5 * (hi - lo)
    return float(top + math.log(total))
