"""Special functions and small dense linear algebra shared by the package.

The Fresnel and sine integrals are thin, validated wrappers around
:mod:`scipy.special` (accurate to a few ulp), with the removable
singularities of the ratio forms handled explicitly.
"""

import numpy as np
from scipy import linalg, special

__all__ = [
    "SingularMatrixError",
    "fresnel_c",
    "fresnel_s",
    "fresnel_ratio",
    "sine_integral",
    "sinc_integral_ratio",
    "dirichlet_sinc",
    "hermitian_inverse",
    "seeded_stream",
    "complex_normal",
]

#: Below this argument the ratio G(beta) = (C + jS)/beta uses its series.
SERIES_CUTOFF = 1e-4

#: Condition number above which a user Gram matrix is treated as singular.
MAX_CONDITION = 1e12


class SingularMatrixError(np.linalg.LinAlgError):
    """Raised when a Gram matrix is singular or too ill-conditioned to invert.

    In this package that almost always means two users share a location or
    were assigned the same analog beam.
    """


def _check_finite(x):
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise ValueError("argument must be finite")
    return x


def _scalar_or_array(out, like):
    return out.item() if np.ndim(like) == 0 else out


def fresnel_c(x):
    """Fresnel cosine integral ``C(x) = int_0^x cos(pi t^2 / 2) dt``.

    Accepts scalars or arrays. Odd in ``x``.
    """
    x = _check_finite(x)
    s, c = special.fresnel(np.abs(x))
    return _scalar_or_array(np.sign(x) * c, x)


def fresnel_s(x):
    """Fresnel sine integral ``S(x) = int_0^x sin(pi t^2 / 2) dt``."""
    x = _check_finite(x)
    s, c = special.fresnel(np.abs(x))
    return _scalar_or_array(np.sign(x) * s, x)


def fresnel_ratio(beta):
    """Complex ratio ``G(beta) = (C(beta) + j S(beta)) / beta``.

    ``G(0) = 1``; below ``SERIES_CUTOFF`` the Taylor series
    ``1 + j pi beta^2 / 6 - pi^2 beta^4 / 40`` is used to avoid 0/0.
    """
    beta = _check_finite(beta)
    b = np.atleast_1d(np.abs(beta))
    out = np.empty(b.shape, dtype=complex)
    small = b < SERIES_CUTOFF
    bs = b[small]
    out[small] = 1.0 - np.pi**2 * bs**4 / 40.0 + 1j * np.pi * bs**2 / 6.0
    s, c = special.fresnel(b[~small])
    out[~small] = (c + 1j * s) / b[~small]
    return out.item() if np.ndim(beta) == 0 else out.reshape(np.shape(beta))


def sine_integral(x):
    """Sine integral ``Si(x) = int_0^x sin(t)/t dt``."""
    x = _check_finite(x)
    si, _ = special.sici(x)
    return _scalar_or_array(np.asarray(si, dtype=float), x)


def sinc_integral_ratio(x):
    """``Si(x) / x`` with the limit value 1 at ``x = 0``."""
    x = _check_finite(x)
    xa = np.atleast_1d(x)
    out = np.ones(xa.shape)
    small = np.abs(xa) < 1e-4
    # Si(x)/x = 1 - x^2/18 + x^4/600 - ...
    out[small] = 1.0 - xa[small] ** 2 / 18.0
    si, _ = special.sici(xa[~small])
    out[~small] = si / xa[~small]
    return out.item() if np.ndim(x) == 0 else out.reshape(np.shape(x))


def dirichlet_sinc(n, alpha):
    """Dirichlet kernel ``sin(n alpha / 2) / (n sin(alpha / 2))``.

    At ``alpha = 0 (mod 2 pi)`` the continuous limit ``+-1`` is returned.

    Parameters
    ----------
    n : int
        Number of array elements (>= 1).
    alpha : float or array_like
        Phase progression between adjacent elements, in radians.
    """
    if int(n) != n or n < 1:
        raise ValueError("n must be a positive integer")
    alpha = _check_finite(alpha)
    a = np.atleast_1d(alpha)
    half = a / 2.0
    den = n * np.sin(half)
    out = np.empty(a.shape)
    # Distance of alpha/2 from the nearest multiple of pi.
    m = np.round(half / np.pi)
    resid = half - m * np.pi
    near = np.abs(resid) < 1e-9
    out[~near] = np.sin(n * half[~near]) / den[~near]
    # Limit at alpha/2 = m*pi: (-1)^{m (n - 1)}.
    out[near] = np.where((m[near] * (n - 1)) % 2 == 0, 1.0, -1.0)
    return out.item() if np.ndim(alpha) == 0 else out


def hermitian_inverse(m, *, max_condition=MAX_CONDITION):
    """Invert a small Hermitian positive-definite matrix.

    Parameters
    ----------
    m : array_like, shape (K, K)
        Hermitian matrix, typically a user Gram matrix such as ``B^H B``.
    max_condition : float
        Matrices with a 2-norm condition number above this are rejected.

    Returns
    -------
    ndarray, shape (K, K)
        The inverse, symmetrized so it is exactly Hermitian.

    Raises
    ------
    SingularMatrixError
        If ``m`` is singular, not positive definite, or ill-conditioned.
    """
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix contains non-finite entries")
    h = 0.5 * (m + m.conj().T)
    eig = np.linalg.eigvalsh(h)
    if eig[0] <= 0 or eig[-1] / eig[0] > max_condition:
        cond = np.inf if eig[0] <= 0 else eig[-1] / eig[0]
        raise SingularMatrixError(
            f"matrix is singular or ill-conditioned (condition {cond:.3g}); "
            "check for coincident users or duplicated beams"
        )
    factor = linalg.cho_factor(h, lower=True)
    inv = linalg.cho_solve(factor, np.eye(h.shape[0], dtype=h.dtype))
    return 0.5 * (inv + inv.conj().T)


def seeded_stream(master_seed, *stream_index):
    """Independent, reproducible random generator for one stream.

    Streams are derived with :class:`numpy.random.SeedSequence` spawn keys,
    so ``(seed, 0)`` and ``(seed, 1)`` never overlap and the draws for a
    stream do not depend on which other streams were consumed first.
    Additional indices address nested sub-streams, e.g.
    ``seeded_stream(seed, drop, 2)``.
    """
    key = tuple(int(i) for i in stream_index)
    if any(i < 0 for i in key):
        raise ValueError("stream indices must be non-negative")
    ss = np.random.SeedSequence(int(master_seed), spawn_key=key)
    return np.random.Generator(np.random.PCG64(ss))


def complex_normal(rng, size=None, variance=1.0):
    """Circularly-symmetric complex Gaussian draws ``CN(0, variance)``."""
    scale = np.sqrt(variance / 2.0)
    return scale * (rng.standard_normal(size) + 1j * rng.standard_normal(size))
