"""Spectrum efficiency and closed-form rate expressions.

Rates use ``SNR = P / sigma^2`` with an equal split ``p_k = P / K`` unless
a solution carries its own stream powers.
"""

import itertools

import numpy as np
from scipy.optimize import brentq

from ._validation import check_channels
from .array import ArrayGeometry, Location, focusing_vector
from .correlation import exact_correlation
from .numerics import MAX_CONDITION, hermitian_inverse
from .precoding import sum_rate_from_precoder

__all__ = [
    "spectrum_efficiency",
    "ideal_capacity",
    "single_path_zf_rate",
    "three_user_bound",
    "tridiagonal_gamma",
    "tridiagonal_matrix",
    "equalize_linear_users",
    "linear_users_bound",
    "linear_adjacent_correlation",
    "search_linear_placement",
    "three_user_linear_bound",
]


def spectrum_efficiency(X, solution, powers=None, noise_variance=1.0):
    """Sum and per-user rates of a precoding solution on channels ``X``.

    ``R = sum_k log2(1 + p_k |h_k^H F_A f_k|^2 / (sigma^2 + sum_{l != k} p_l |h_k^H F_A f_l|^2))``.

    Returns
    -------
    total : float
    per_user : ndarray (K,)
    """
    h = check_channels(X)
    p = solution.stream_powers if powers is None else np.broadcast_to(powers, (h.shape[0],))
    if np.any(np.asarray(p) < 0):
        raise ValueError("stream powers must be non-negative")
    rates = sum_rate_from_precoder(h.conj(), solution.precoder, p, noise_variance)
    return float(np.sum(rates)), rates


def ideal_capacity(n_users, n_antennas, gains, total_power, noise_variance=1.0):
    """Interference-free sum rate ``sum_k log2(1 + P/(K sigma^2) N |alpha_k|^2)``."""
    a2 = np.abs(np.broadcast_to(gains, (n_users,))) ** 2
    snr = total_power / (n_users * noise_variance)
    return float(np.sum(np.log2(1.0 + snr * n_antennas * a2)))


def single_path_zf_rate(beams, gains, total_power, noise_variance=1.0):
    """Zero-forcing sum rate for single-path users with matched analog beams.

    ``R = sum_k log2(1 + P/(K sigma^2) N |alpha_k|^2 / [(B^H B)^{-1}]_kk)``
    with ``B`` the ``N x K`` matrix of unit-norm focusing vectors.
    """
    b = np.asarray(beams, dtype=complex)
    n, k = b.shape
    diag = np.real(np.diag(hermitian_inverse(b.conj().T @ b)))
    a2 = np.abs(np.broadcast_to(gains, (k,))) ** 2
    snr = total_power / (k * noise_variance)
    return float(np.sum(np.log2(1.0 + snr * n * a2 / diag)))


def three_user_bound(g, r0, n_antennas, alpha, total_power, n_users=3, noise_variance=1.0,
                     xtol=1e-12):
    """Balanced-interference point and rate bound for three collinear users.

    Solves ``|g(x)| = |g(r0 - x)|`` by bisection on ``[0, r0]``, then with
    ``G = |g(x_hat)|^2`` and ``tau = P N |alpha|^2 / (K sigma^2)`` returns
    ``2 log2(1 + tau (1 - 2G)/(1 - G)) + log2(1 + tau (1 - 2G))``.

    Parameters
    ----------
    g : callable
        Correlation between neighbours as a function of their offset.
    r0 : float
        Offset between the two outer users.

    Returns
    -------
    x_hat : float
    bound : float
    """
    if not r0 > 0:
        raise ValueError("r0 must be positive")

    def diff(x):
        return abs(g(x)) - abs(g(r0 - x))

    lo, hi = 0.0, float(r0)
    f_lo, f_hi = diff(lo), diff(hi)
    if f_lo == 0:
        x_hat = lo
    elif f_hi == 0:
        x_hat = hi
    elif np.sign(f_lo) == np.sign(f_hi):
        raise ValueError("no sign change of |g(x)| - |g(r0 - x)| on [0, r0]")
    else:
        x_hat = brentq(diff, lo, hi, xtol=xtol)
    big_g = abs(g(x_hat)) ** 2
    if big_g >= 0.5:
        raise ValueError(f"neighbour correlation too high for the bound (|g|^2 = {big_g:.3f})")
    tau = total_power * n_antennas * abs(alpha) ** 2 / (n_users * noise_variance)
    bound = 2.0 * np.log2(1.0 + tau * (1.0 - 2.0 * big_g) / (1.0 - big_g)) + np.log2(
        1.0 + tau * (1.0 - 2.0 * big_g)
    )
    return float(x_hat), float(bound)


def tridiagonal_matrix(n_users, delta):
    """Hermitian Toeplitz tridiagonal ``T`` with unit diagonal and ``delta`` below it."""
    t = np.eye(n_users, dtype=complex)
    idx = np.arange(n_users - 1)
    t[idx + 1, idx] = delta
    t[idx, idx + 1] = np.conj(delta)
    return t


def tridiagonal_gamma(n_users, delta_abs):
    """Diagonal of ``T^{-1}`` for the tridiagonal ``T`` via its three-term recurrence.

    ``theta_i = theta_{i-1} - |delta|^2 theta_{i-2}``, ``theta_{-1} = 0``,
    ``theta_0 = 1`` and ``gamma_k = theta_{k-1} theta_{K-k} / theta_K``.
    """
    if int(n_users) != n_users or n_users < 1:
        raise ValueError("n_users must be a positive integer")
    d2 = float(delta_abs) ** 2
    if d2 > 0.5 or delta_abs < 0:
        raise ValueError(f"|delta|^2 must lie in [0, 1/2], got {d2}")
    theta = np.empty(n_users + 2)  # theta[i + 1] holds theta_i
    theta[0], theta[1] = 0.0, 1.0
    for i in range(1, n_users + 1):
        theta[i + 1] = theta[i] - d2 * theta[i - 1]
    k = np.arange(1, n_users + 1)
    return theta[k] * theta[n_users - k + 1] / theta[n_users + 1]


def _inv_r_grid(r_min, r_max, n):
    return np.linspace(1.0 / r_min, 1.0 / r_max, n)


def linear_adjacent_correlation(geom, radii, theta=np.pi / 2, phi=0.0):
    """Correlations of neighbouring focusing vectors along one direction."""
    vs = [focusing_vector(geom, Location(r, theta, phi)) for r in radii]
    return np.array([exact_correlation(a, b) for a, b in zip(vs[:-1], vs[1:])])


def equalize_linear_users(geom, n_users, r_min, r_max, theta=np.pi / 2, phi=0.0,
                          gap_tol=1e-4, max_sweeps=200):
    """Place users on ``[r_min, r_max]`` so neighbour correlations are equal.

    The outer users sit at the interval ends.  Interior users start evenly
    spaced in ``1/r`` (where the quadratic-phase correlation depends only on
    the spacing) and are refined by Gauss-Seidel bisection: each interior
    user moves between its neighbours until it sees equal correlation on
    both sides.  Stops once the max-min gap of the neighbour correlations is
    below ``gap_tol``.

    Returns
    -------
    radii : ndarray, decreasing
    correlations : ndarray of neighbour correlations
    """
    if n_users < 2:
        raise ValueError("need at least two users")
    if not 0 < r_min < r_max:
        raise ValueError("need 0 < r_min < r_max")
    u = _inv_r_grid(r_min, r_max, n_users)

    def corr(a, b):
        return exact_correlation(
            focusing_vector(geom, Location(1.0 / a, theta, phi)),
            focusing_vector(geom, Location(1.0 / b, theta, phi)),
        )

    def gap(u):
        c = linear_adjacent_correlation(geom, 1.0 / u, theta, phi)
        return c, c.max() - c.min()

    c, g = gap(u)
    sweeps = 0
    while g >= gap_tol:
        if sweeps >= max_sweeps:
            raise RuntimeError(
                f"user placement did not converge after {max_sweeps} sweeps "
                f"(correlation gap {g:.3g}, correlations {np.round(c, 4).tolist()})"
            )
        for i in range(1, n_users - 1):
            left, right = u[i - 1], u[i + 1]

            def f(x):
                return corr(left, x) - corr(x, right)

            fl, fr = f(left), f(right)
            if np.sign(fl) != np.sign(fr):
                u[i] = brentq(f, right, left, xtol=1e-14) if left > right else brentq(f, left, right, xtol=1e-14)
        c, g = gap(u)
        sweeps += 1
    return 1.0 / u, c


def linear_users_bound(n_users, geom, r_min, r_max, snr, alpha=1.0, theta=np.pi / 2, phi=0.0):
    """Rate bound for users spread along one direction, ignoring non-neighbours.

    ``sum_k log2(1 + (P/(K sigma^2)) N |alpha|^2 / gamma_k)`` with ``gamma_k``
    from :func:`tridiagonal_gamma` at the equalized neighbour correlation.

    Returns
    -------
    bound : float
    delta_abs : float
    gamma : ndarray
    radii : ndarray
    """
    if not isinstance(geom, ArrayGeometry):
        raise TypeError("geom must be an ArrayGeometry")
    n = geom.n_antennas
    tau = snr * n * abs(alpha) ** 2 / n_users
    if n_users == 1:
        return float(np.log2(1.0 + tau)), 0.0, np.ones(1), np.array([r_min])
    radii, c = equalize_linear_users(geom, n_users, r_min, r_max, theta, phi)
    delta = float(c.max())
    gamma = tridiagonal_gamma(n_users, delta)
    return float(np.sum(np.log2(1.0 + tau / gamma))), delta, gamma, radii


def _batched_rates(gram_stack, snr_per_user, n):
    # Sum rate for a stack of (K, K) Gram matrices; singular members give -inf.
    out = np.full(gram_stack.shape[0], -np.inf)
    sv = np.linalg.svd(gram_stack, compute_uv=False)
    ok = sv[:, -1] > sv[:, 0] / MAX_CONDITION
    if np.any(ok):
        diag = np.real(np.diagonal(np.linalg.inv(gram_stack[ok]), axis1=1, axis2=2))
        out[ok] = np.sum(np.log2(1.0 + snr_per_user * n / diag), axis=1)
    return out


def search_linear_placement(geom, n_users, r_min, r_max, snr, grid_size=200,
                            theta=np.pi / 2, phi=0.0, start=None, full_search_max_users=3,
                            max_sweeps=100):
    """Best single-path ZF sum rate over user placements along one direction.

    Candidate radii form a ``grid_size``-point grid uniform in ``1/r``.  For
    ``n_users <= full_search_max_users`` every combination of grid points is
    scored.  The best placement (or ``start``, if better) is then refined by
    coordinate ascent: each user in turn moves to the grid point that
    maximizes the sum rate, until a sweep changes nothing.  With ``start``
    given, the result is never below the rate at ``start``.

    Returns
    -------
    rate : float
    radii : ndarray, decreasing in ``1/r``
    info : dict
        ``{"grid_size", "full_search", "sweeps"}``
    """
    if n_users < 1:
        raise ValueError("need at least one user")
    if n_users > grid_size:
        raise ValueError("more users than grid points")
    n = geom.n_antennas
    tau = snr / n_users
    u_grid = _inv_r_grid(r_min, r_max, grid_size)
    vg = np.stack([focusing_vector(geom, Location(1.0 / u, theta, phi)) for u in u_grid])
    gram = vg.conj() @ vg.T

    def rate_of(vs):
        g = vs.conj() @ vs.T
        return _batched_rates(g[None], tau, n)[0]

    best_rate, best_u = -np.inf, None
    full = n_users <= full_search_max_users
    if full:
        combos = np.array(list(itertools.combinations(range(grid_size), n_users)))
        for chunk in np.array_split(combos, max(1, combos.shape[0] // 200_000)):
            rates = _batched_rates(gram[chunk[:, :, None], chunk[:, None, :]], tau, n)
            j = int(np.argmax(rates))
            if rates[j] > best_rate:
                best_rate, best_u = float(rates[j]), u_grid[chunk[j]].copy()
    if start is not None:
        u0 = 1.0 / np.asarray(start, dtype=float)
        r0 = rate_of(np.stack([focusing_vector(geom, Location(1.0 / u, theta, phi)) for u in u0]))
        if r0 > best_rate:
            best_rate, best_u = float(r0), u0.copy()
    if best_u is None:
        best_u = _inv_r_grid(r_min, r_max, n_users)
        best_rate = rate_of(np.stack([focusing_vector(geom, Location(1.0 / u, theta, phi)) for u in best_u]))

    sweeps = 0
    improved = True
    while improved and sweeps < max_sweeps:
        improved = False
        sweeps += 1
        for i in range(n_users):
            vs = np.stack([focusing_vector(geom, Location(1.0 / u, theta, phi)) for u in best_u])
            others = np.delete(np.arange(n_users), i)
            # Gram of (current users with user i replaced by each grid point).
            stack = np.empty((grid_size, n_users, n_users), dtype=complex)
            g_cur = vs.conj() @ vs.T
            cross = vs.conj() @ vg.T  # (K, grid)
            stack[:] = g_cur
            stack[:, others, i] = cross[others].T
            stack[:, i, others] = cross[others].T.conj()
            stack[:, i, i] = np.real(np.diag(gram))
            rates = _batched_rates(stack, tau, n)
            j = int(np.argmax(rates))
            if rates[j] > best_rate * (1.0 + 1e-12):
                best_rate = float(rates[j])
                best_u[i] = u_grid[j]
                improved = True
    order = np.argsort(-best_u)
    info = {"grid_size": int(grid_size), "full_search": bool(full), "sweeps": sweeps}
    return float(best_rate), 1.0 / best_u[order], info


def three_user_linear_bound(geom, r_min, r_max, snr, alpha=1.0, theta=np.pi / 2, phi=0.0,
                            grid_size=4001):
    """Three-user bound for users on ``[r_min, r_max]`` along one direction.

    The outer users sit at the interval ends; ``g`` is the correlation
    magnitude versus the offset in ``1/r`` from the far end, replaced by its
    non-increasing upper envelope (sampled on ``grid_size`` points) so that
    the balance point is unique.

    Returns
    -------
    r_mid : float
        Radius of the middle user.
    bound : float
    """
    u_far, u_near = 1.0 / r_max, 1.0 / r_min
    r0 = u_near - u_far
    b_far = focusing_vector(geom, Location(r_max, theta, phi))
    xs = np.linspace(0.0, r0, grid_size)
    vals = np.array([
        exact_correlation(b_far, focusing_vector(geom, Location(1.0 / (u_far + x), theta, phi)))
        for x in xs
    ])
    env = np.maximum.accumulate(vals[::-1])[::-1]

    def g(x):
        return float(np.interp(x, xs, env))

    x_hat, bound = three_user_bound(g, r0, geom.n_antennas, alpha, snr, 3)
    return 1.0 / (u_far + x_hat), bound
