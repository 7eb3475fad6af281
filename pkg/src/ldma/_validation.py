"""Input validation helpers.

scikit-learn's ``check_array`` rejects complex data, so channel matrices
get their own checker with the same spirit: coerce, check shape, reject
non-finite values.
"""

import numpy as np

from .array import ArrayGeometry


def check_channels(X, n_antennas=None):
    """Coerce channel input to a complex ``(K, N)`` array, one user per row.

    A single 1-D channel vector is promoted to one row.
    """
    h = np.asarray(X)
    if h.dtype == object:
        raise TypeError("channel input must be numeric")
    h = h.astype(complex, copy=False)
    if h.ndim == 1:
        h = h[None, :]
    if h.ndim != 2 or h.shape[0] == 0:
        raise ValueError(f"expected a non-empty 2-D channel array, got shape {h.shape}")
    if n_antennas is not None and h.shape[1] != n_antennas:
        raise ValueError(f"channel length {h.shape[1]} does not match {n_antennas} antennas")
    if not np.all(np.isfinite(h)):
        raise ValueError("channel input contains NaN or inf")
    return h


def check_geometry(geom, layout=None):
    if not isinstance(geom, ArrayGeometry):
        raise TypeError(f"expected an ArrayGeometry, got {type(geom).__name__}")
    if layout is not None and geom.layout != layout:
        raise ValueError(f"expected a {layout} geometry, got {geom.layout}")
    return geom


def check_analog(F, n_antennas, n_users):
    f = np.asarray(F, dtype=complex)
    if f.shape != (n_antennas, n_users):
        raise ValueError(f"analog precoder must be {n_antennas}x{n_users}, got {f.shape}")
    return f


def check_positive(value, name, allow_zero=False):
    ok = value >= 0 if allow_zero else value > 0
    if not (np.isfinite(value) and ok):
        raise ValueError(f"{name} must be {'non-negative' if allow_zero else 'positive'}, got {value}")
    return value
