"""Beam correlations: direct evaluation and closed-form approximations.

Each closed form here has a brute-force counterpart built from explicit
beam vectors, so the approximations can be certified numerically.
"""

import numpy as np
from scipy.optimize import brentq

from .array import Location, focusing_vector, upa_focusing
from .numerics import fresnel_ratio, sinc_integral_ratio

__all__ = [
    "exact_correlation",
    "fresnel_beta_ula",
    "fresnel_correlation_ula",
    "correlation_2d_trend",
    "upa_distance_orthogonality_trend",
    "bilinear_gain_loss",
    "bilinear_min_distance",
    "upa_distance_betas",
    "upa_distance_correlation_approx",
]


def exact_correlation(v1, v2):
    """``|v1^H v2|`` for two beam vectors of equal length."""
    v1 = np.asarray(v1)
    v2 = np.asarray(v2)
    if v1.shape != v2.shape:
        raise ValueError(f"length mismatch: {v1.shape} vs {v2.shape}")
    return float(abs(np.vdot(v1, v2)))


def fresnel_beta_ula(geom, r_l, r_m, phi):
    """Fresnel argument for two ULA beams at the same azimuth."""
    d, lam = geom.spacing, geom.wavelength
    inv = abs(1.0 / r_l - 1.0 / r_m)
    return geom.n1 * np.sqrt(d * d * np.cos(phi) ** 2 / (2.0 * lam) * inv)


def fresnel_correlation_ula(geom, r_l, r_m, phi):
    """Closed-form ``|G(beta)|`` approximation of a same-angle ULA correlation."""
    if not (r_l > 0 and r_m > 0):
        raise ValueError("distances must be positive")
    return float(abs(fresnel_ratio(fresnel_beta_ula(geom, r_l, r_m, phi))))


def correlation_2d_trend(geom, loc1, loc2, n_sweep, exact_distance=False):
    """Correlation of two ULA focusing vectors as the element count grows.

    Spacing and wavelength stay fixed; only ``n1`` varies.
    """
    out = []
    for n in n_sweep:
        g = geom.with_size(int(n))
        v1 = focusing_vector(g, loc1, exact=exact_distance)
        v2 = focusing_vector(g, loc2, exact=exact_distance)
        out.append(exact_correlation(v1, v2))
    return out


def upa_distance_orthogonality_trend(geom, n1_sweep, r_l, r_m, theta, phi):
    """Same-direction UPA correlation (bilinear term kept) versus ``n1``."""
    out = []
    for n1 in n1_sweep:
        g = geom.with_size(int(n1))
        v1 = upa_focusing(g, Location(r_l, theta, phi))
        v2 = upa_focusing(g, Location(r_m, theta, phi))
        out.append(exact_correlation(v1, v2))
    return out


def _bilinear_eta(geom, r, theta, phi):
    factor = np.cos(theta) * np.sin(theta) * np.sin(phi)
    k, d = geom.wavenumber, geom.spacing
    return geom.n1 * geom.n2 * k * d * d * factor / (4.0 * r)


def bilinear_gain_loss(geom, loc):
    """Gain ``|Si(eta)/eta|`` kept when a UPA beam drops the ``n1 n2`` term."""
    if geom.layout != "UPA":
        raise ValueError("bilinear loss is defined for UPA geometries")
    eta = _bilinear_eta(geom, loc.r, loc.theta, loc.phi)
    return float(abs(sinc_integral_ratio(eta)))


def bilinear_min_distance(geom, gain, angle_factor=np.sqrt(3) / 4):
    """Smallest distance at which the bilinear-term gain stays >= ``gain``.

    ``angle_factor`` is ``cos(theta) sin(theta) sin(phi)``; its maximum over
    the front half-space, ``sqrt(3)/4``, gives the worst case.  Uses the
    monotone decay of ``Si(eta)/eta`` on ``[0, pi]``.
    """
    if not 0 < gain < 1:
        raise ValueError("gain must lie in (0, 1)")
    if sinc_integral_ratio(np.pi) > gain:
        raise ValueError("gain below the monotone range of Si(x)/x")
    eta = brentq(lambda x: sinc_integral_ratio(x) - gain, 1e-12, np.pi, xtol=1e-14)
    k, d = geom.wavenumber, geom.spacing
    return geom.n1 * geom.n2 * k * d * d * angle_factor / (4.0 * eta)


def upa_distance_betas(geom, beta0, theta, phi):
    """Per-axis Fresnel arguments ``(beta1, beta2)`` for a common ``beta0``."""
    c = np.cos(theta)
    u = np.sin(theta) * np.sin(phi)
    b1 = geom.n1 * np.asarray(beta0) * np.sqrt(max(1.0 - c * c, 0.0))
    b2 = geom.n2 * np.asarray(beta0) * np.sqrt(max(1.0 - u * u, 0.0))
    return b1, b2


def upa_distance_correlation_approx(geom, r_l, r_m, theta, phi):
    """``|G(beta1) G(beta2)|`` for two bilinear-free UPA beams, same direction."""
    if not (r_l > 0 and r_m > 0):
        raise ValueError("distances must be positive")
    beta0 = np.sqrt(geom.spacing**2 / (2.0 * geom.wavelength) * abs(1.0 / r_l - 1.0 / r_m))
    b1, b2 = upa_distance_betas(geom, beta0, theta, phi)
    return float(abs(fresnel_ratio(b1) * fresnel_ratio(b2)))
