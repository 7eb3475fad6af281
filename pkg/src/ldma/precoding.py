"""Hybrid precoding pipeline: beam sweeping, effective channel, digital stage.

Channel matrices follow the samples-by-features layout: ``X`` has one user
channel ``h_k`` per row, shape ``(K, N)``.  User ``k`` receives
``conj(h_k) @ x`` for a transmit vector ``x``, so the downlink channel
matrix with rows ``h_k^H`` is ``X.conj()``.

The access scheme (near-field vs far-field) only changes which codebook is
handed to :func:`beam_sweep_assign`; everything downstream is shared.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy import linalg
from scipy.optimize import brentq
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import check_analog, check_channels, check_positive
from .array import focusing_vector, steering_vector
from .numerics import MAX_CONDITION, SingularMatrixError, complex_normal, seeded_stream

__all__ = [
    "PrecodingSolution",
    "beam_sweep_assign",
    "analog_from_codebook",
    "infinite_codebook_analog",
    "effective_channel",
    "zf_digital",
    "wmmse_digital",
    "fully_digital_zf",
    "select_users",
    "design_digital",
    "sum_rate_from_precoder",
    "HybridPrecoder",
    "FullyDigitalZF",
]


@dataclass
class PrecodingSolution:
    """Analog matrix, digital matrix and per-stream powers.

    Attributes
    ----------
    analog : ndarray (N, K) or None
        Selected codewords as columns; ``None`` for fully-digital precoding.
    digital : ndarray (K, K) or (N, K)
        Digital precoder with columns normalized so ``||F_A f_k|| = 1``.
    power_lambda : ndarray (K,)
        Column scaling ``Lambda_kk`` applied to the unnormalized precoder.
    stream_powers : ndarray (K,)
        Transmit power ``p_k`` of each stream.
    scheme : str
    history : list of float
        Sum-rate trace for iterative designs.
    """

    analog: np.ndarray
    digital: np.ndarray
    power_lambda: np.ndarray
    stream_powers: np.ndarray
    scheme: str = "hybrid"
    history: list = field(default_factory=list)

    @property
    def precoder(self):
        """Overall ``N x K`` precoder ``F_A F_D`` (unit-norm columns)."""
        if self.analog is None:
            return self.digital
        return self.analog @ self.digital


def beam_sweep_assign(gains):
    """Give every user a distinct codeword, best beams first.

    The largest remaining ``(user, codeword)`` gain is fixed at each step, so
    a contested codeword goes to the user that sees it strongest and the
    other user falls back to its best unused codeword.  Ties go to the lower
    index.

    Parameters
    ----------
    gains : array_like, shape (K, M)
        Beam gains ``|w_m^H h_k|``.

    Returns
    -------
    ndarray of int, shape (K,)
    """
    g = np.array(gains, dtype=float)
    if g.ndim != 2:
        raise ValueError("gains must be a (K, M) array")
    k, m = g.shape
    if k > m:
        raise ValueError(f"{k} users cannot get distinct beams from {m} codewords")
    out = np.full(k, -1)
    # Sorting once is enough: entries are only ever removed, never changed.
    order = np.argsort(-g, axis=None, kind="stable")
    used_user = np.zeros(k, bool)
    used_cw = np.zeros(m, bool)
    left = k
    for flat in order:
        u, c = divmod(int(flat), m)
        if used_user[u] or used_cw[c]:
            continue
        out[u] = c
        used_user[u] = used_cw[c] = True
        left -= 1
        if left == 0:
            break
    return out


def analog_from_codebook(codebook, assignment):
    """Stack the assigned codewords as the columns of ``F_A``."""
    return codebook.vectors(np.asarray(assignment)).T


def infinite_codebook_analog(geom, locations, model="near"):
    """Analog matrix matched to each user's line-of-sight response (no quantization).

    ``model="far"`` uses steering vectors instead of focusing vectors.
    """
    beam = steering_vector if model == "far" else focusing_vector
    return np.stack([beam(geom, loc) for loc in locations], axis=1)


def effective_channel(X, analog, noise_variance=0.0, rng=None):
    """Effective ``K x K`` channel with rows ``(h_k + n_k)^H F_A``.

    ``n_k ~ CN(0, noise_variance I)`` models estimation noise; with
    ``noise_variance = 0`` the channel is perfect and ``rng`` is unused.
    """
    h = check_channels(X)
    f = check_analog(analog, h.shape[1], np.shape(analog)[1])
    check_positive(noise_variance, "noise_variance", allow_zero=True)
    if noise_variance > 0:
        if rng is None:
            raise ValueError("a random generator is needed when noise_variance > 0")
        h = h + complex_normal(rng, h.shape, noise_variance)
    return h.conj() @ f


def _right_inverse(h, max_condition=MAX_CONDITION):
    """``H^H (H H^H)^{-1}`` through the SVD of ``H``.

    Forming ``H H^H`` would square the condition number; the SVD keeps the
    singularity check on ``H`` itself.
    """
    u, s, vh = np.linalg.svd(h, full_matrices=False)
    if s[-1] <= 0 or s[0] / s[-1] > max_condition:
        cond = np.inf if s[-1] <= 0 else s[0] / s[-1]
        raise SingularMatrixError(
            f"channel matrix is singular or ill-conditioned (condition {cond:.3g}); "
            "check for coincident users or duplicated beams"
        )
    return (vh.conj().T / s[None, :]) @ u.conj().T


def zf_digital(h_eff, analog, total_power=1.0):
    """Zero-forcing digital precoder on the effective channel.

    Columns of ``H^H (H H^H)^{-1}`` are scaled by
    ``Lambda_kk = 1 / ||F_A f_k||`` so each user radiates unit norm; the
    total power is split equally, ``p_k = P / K``.

    Raises
    ------
    SingularMatrixError
        If ``H H^H`` is singular (coincident users or duplicate beams).
    """
    h_eff = np.asarray(h_eff, dtype=complex)
    k = h_eff.shape[0]
    if h_eff.shape != (k, k):
        raise ValueError(f"effective channel must be square, got {h_eff.shape}")
    f_a = check_analog(analog, np.shape(analog)[0], k)
    raw = _right_inverse(h_eff)
    norms = np.linalg.norm(f_a @ raw, axis=0)
    lam = 1.0 / norms
    return PrecodingSolution(
        f_a, raw * lam, lam, np.full(k, total_power / k), scheme="zf"
    )


def sum_rate_from_precoder(h_rows, precoder, powers, noise_variance=1.0):
    """Per-user rates for received gains ``h_rows @ precoder``.

    ``h_rows`` holds ``h_k^H`` (or effective ``h_k^H F_A``) as rows and the
    precoder columns are the per-stream beams.
    """
    a = np.abs(np.asarray(h_rows) @ np.asarray(precoder)) ** 2 * np.asarray(powers)[None, :]
    sig = np.diag(a)
    interf = a.sum(axis=1) - sig
    return np.log2(1.0 + sig / (noise_variance + interf))


def _power_multiplier(a_mat, q_mat, b, total_power):
    """Solve ``sum_k ||L^H (A + mu Q)^{-1} b_k||^2 = P`` for ``mu >= 0``.

    ``Q = L L^H``.  After whitening, ``A`` becomes ``U diag(lam) U^H`` and
    the power is ``sum_i c_i / (lam_i + mu)^2``, decreasing in ``mu``.
    """
    chol = linalg.cholesky(q_mat, lower=True)
    a_w = linalg.solve_triangular(chol, a_mat, lower=True)
    a_w = linalg.solve_triangular(chol, a_w.conj().T, lower=True).conj().T
    a_w = 0.5 * (a_w + a_w.conj().T)
    lam, u = np.linalg.eigh(a_w)
    proj = u.conj().T @ linalg.solve_triangular(chol, b, lower=True)
    c = np.sum(np.abs(proj) ** 2, axis=1)

    def excess(mu):
        return np.sum(c / (lam + mu) ** 2) - total_power

    mu = 0.0
    if lam[0] <= 1e-14 * max(lam[-1], 1.0) or excess(0.0) > 0:
        lo = max(0.0, -lam[0]) + 1e-12 * max(abs(lam[-1]), 1e-300)
        hi = max(1.0, abs(lam[-1]))
        while excess(hi) > 0:
            hi *= 2.0
        mu = lo if excess(lo) <= 0 else brentq(excess, lo, hi, xtol=1e-15, rtol=1e-13, maxiter=500)
    x = linalg.solve_triangular(chol, b, lower=True)
    v_w = u @ ((u.conj().T @ x) / (lam + mu)[:, None])
    return linalg.solve_triangular(chol.conj().T, v_w, lower=False)


def wmmse_digital(
    h_eff,
    analog,
    total_power=1.0,
    noise_variance=1.0,
    max_iter=100,
    tol=1e-6,
    h_true=None,
):
    """Sum-rate WMMSE digital precoder on the effective channel.

    Alternates MMSE receive scalars, MSE weights and the transmit filters.
    The power constraint is the radiated one, ``sum_k v_k^H F_A^H F_A v_k
    <= P``, solved exactly through its Lagrange multiplier, so every update
    is a block-coordinate step and the sum rate never decreases.  The
    iteration starts from the zero-forcing point, hence ends at or above it.

    Parameters
    ----------
    h_eff : ndarray (K, K)
        Effective channel used for the design.
    analog : ndarray (N, K)
    total_power, noise_variance : float
    max_iter : int
    tol : float
        Stop once the relative sum-rate gain of an iteration drops below it.
    h_true : ndarray (K, K), optional
        Effective channel for the recorded rate trace (defaults to ``h_eff``).

    Returns
    -------
    PrecodingSolution
        Columns normalized to ``||F_A f_k|| = 1`` and stream powers
        ``p_k = ||F_A v_k||^2``.
    """
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    check_positive(tol, "tol")
    check_positive(total_power, "total_power")
    check_positive(noise_variance, "noise_variance")
    h_eff = np.asarray(h_eff, dtype=complex)
    k = h_eff.shape[0]
    f_a = check_analog(analog, np.shape(analog)[0], k)
    q_mat = f_a.conj().T @ f_a
    q_mat = 0.5 * (q_mat + q_mat.conj().T)

    zf = zf_digital(h_eff, f_a, total_power)
    v = zf.digital * np.sqrt(zf.stream_powers)[None, :]

    def rate(v):
        return float(np.sum(sum_rate_from_precoder(h_eff, v, np.ones(k), noise_variance)))

    best_v, best = v, rate(v)
    history = [best]
    for _ in range(max_iter):
        rx = h_eff @ v  # rx[k, l] = h_k^H F_A v_l
        total = np.sum(np.abs(rx) ** 2, axis=1) + noise_variance
        sig = np.diag(rx)
        u = sig / total
        w = total / (total - np.abs(sig) ** 2)
        # A = sum_j w_j |u_j|^2 h_j h_j^H (columns h_j = effective row^H)
        hw = h_eff.conj().T * np.sqrt(w * np.abs(u) ** 2)[None, :]
        a_mat = hw @ hw.conj().T
        b = h_eff.conj().T * (w * u)[None, :]
        v = _power_multiplier(a_mat, q_mat, b, total_power)
        cur = rate(v)
        history.append(cur)
        if cur > best:
            gain = cur - best
            best_v, best = v, cur
            if gain <= tol * max(abs(best), 1e-12):
                break
        else:
            break
    col = np.linalg.norm(f_a @ best_v, axis=0)
    off = col == 0
    # A switched-off stream keeps its ZF direction with zero power.
    digital = np.where(off[None, :], zf.digital, best_v / np.where(off, 1.0, col)[None, :])
    powers = col**2
    col = np.where(off, 1.0, col)
    if h_true is not None:
        history = history + [
            float(np.sum(sum_rate_from_precoder(h_true, digital, powers, noise_variance)))
        ]
    return PrecodingSolution(f_a, digital, 1.0 / col, powers, scheme="wmmse", history=history)


def select_users(h_eff, max_condition=MAX_CONDITION):
    """Largest greedily chosen user subset with a well-conditioned effective channel.

    Users are ranked by column-pivoted QR of ``H^H`` (each pick has the most
    energy outside the span of earlier picks); the ranking is truncated
    until the square sub-channel passes the condition check.

    Returns
    -------
    ndarray of int, sorted
    """
    h_eff = np.asarray(h_eff, dtype=complex)
    _, _, piv = linalg.qr(h_eff.conj().T, mode="economic", pivoting=True)
    for r in range(len(piv), 0, -1):
        sub = np.sort(piv[:r])
        sv = np.linalg.svd(h_eff[np.ix_(sub, sub)], compute_uv=False)
        if sv[-1] > 0 and sv[0] / sv[-1] <= max_condition:
            return sub
    raise SingularMatrixError("effective channel is zero; no user can be served")


def _embed(sol, subset, analog):
    # Unserved users keep their analog beam but get no digital stream or power.
    k = analog.shape[1]
    digital = np.zeros((k, k), dtype=complex)
    digital[np.ix_(subset, subset)] = sol.digital
    lam = np.zeros(k)
    lam[subset] = sol.power_lambda
    powers = np.zeros(k)
    powers[subset] = sol.stream_powers
    return PrecodingSolution(analog, digital, lam, powers, sol.scheme, sol.history)


def design_digital(h_eff, analog, method="zf", total_power=1.0, noise_variance=1.0,
                   max_iter=100, tol=1e-6, on_singular="error"):
    """ZF or WMMSE digital stage with a policy for rank-deficient channels.

    ``on_singular="error"`` propagates :class:`SingularMatrixError`;
    ``"drop-users"`` serves only the subset from :func:`select_users`, with
    the whole power budget, and gives the remaining users zero rate.
    """
    if method not in ("zf", "wmmse"):
        raise ValueError(f"digital method must be 'zf' or 'wmmse', got {method!r}")
    if on_singular not in ("error", "drop-users"):
        raise ValueError(f"on_singular must be 'error' or 'drop-users', got {on_singular!r}")

    def design(h, f):
        if method == "zf":
            return zf_digital(h, f, total_power)
        return wmmse_digital(h, f, total_power, noise_variance, max_iter, tol)

    h_eff = np.asarray(h_eff, dtype=complex)
    f_a = np.asarray(analog, dtype=complex)
    try:
        return design(h_eff, f_a)
    except SingularMatrixError:
        if on_singular == "error":
            raise
    subset = select_users(h_eff)
    sol = design(h_eff[np.ix_(subset, subset)], f_a[:, subset])
    return _embed(sol, subset, f_a)


def fully_digital_zf(X, total_power=1.0):
    """Zero-forcing on the full ``N``-dimensional channels.

    Unit-norm columns, equal power split.  Raises
    :class:`SingularMatrixError` when the channels are rank deficient.
    """
    h = check_channels(X)
    k, n = h.shape
    if k > n:
        raise ValueError(f"{k} users exceed {n} antennas")
    rows = h.conj()
    raw = _right_inverse(rows)
    norms = np.linalg.norm(raw, axis=0)
    return PrecodingSolution(
        None, raw / norms, 1.0 / norms, np.full(k, total_power / k), scheme="fully-digital"
    )


class HybridPrecoder(BaseEstimator):
    """Beam-swept analog stage followed by a ZF or WMMSE digital stage.

    Parameters
    ----------
    codebook : Codebook or fitted codebook estimator, optional
        Source of analog beams.  ``fit`` may instead receive the analog
        matrix directly (infinite-codebook mode).
    digital : {"zf", "wmmse"}
    snr_db : float
        ``P / sigma^2`` in dB with ``sigma^2 = 1``.
    csi_noise_variance : float
        Variance of the estimation noise on the effective channel.
    max_iter, tol : WMMSE stopping rule.
    random_state : int or None
        Seed of the estimation-noise draws.
    on_singular : {"error", "drop-users"}
        Policy for a rank-deficient effective channel, see :func:`design_digital`.

    Attributes
    ----------
    assignment_ : ndarray of int or None
    solution_ : PrecodingSolution
    analog_, digital_, powers_ : shortcuts into ``solution_``
    """

    def __init__(
        self,
        codebook=None,
        digital="zf",
        snr_db=20.0,
        csi_noise_variance=0.0,
        max_iter=100,
        tol=1e-6,
        random_state=None,
        on_singular="error",
    ):
        self.codebook = codebook
        self.digital = digital
        self.snr_db = snr_db
        self.csi_noise_variance = csi_noise_variance
        self.max_iter = max_iter
        self.tol = tol
        self.random_state = random_state
        self.on_singular = on_singular

    def _codebook(self):
        cb = self.codebook
        if hasattr(cb, "codebook_"):
            return cb.codebook_
        if hasattr(cb, "fit") and not hasattr(cb, "gains"):
            return cb.fit().codebook_
        return cb

    def fit(self, X, y=None, analog=None, rng=None):
        """Design the precoder for channel rows ``X``.

        Parameters
        ----------
        X : array_like (K, N)
        analog : array_like (N, K), optional
            Fixed analog matrix; skips beam sweeping.
        rng : numpy.random.Generator, optional
            Overrides ``random_state`` for the estimation noise.
        """
        if self.digital not in ("zf", "wmmse"):
            raise ValueError(f"digital must be 'zf' or 'wmmse', got {self.digital!r}")
        h = check_channels(X)
        power = 10.0 ** (self.snr_db / 10.0)
        if analog is None:
            cb = self._codebook()
            if cb is None:
                raise ValueError("either a codebook or an analog matrix is required")
            self.assignment_ = beam_sweep_assign(cb.gains(h))
            analog = analog_from_codebook(cb, self.assignment_)
        else:
            self.assignment_ = None
        if rng is None and self.csi_noise_variance > 0:
            rng = seeded_stream(0 if self.random_state is None else self.random_state, 0)
        h_est = effective_channel(h, analog, self.csi_noise_variance, rng)
        sol = design_digital(
            h_est, analog, self.digital, power, 1.0, self.max_iter, self.tol, self.on_singular
        )
        self.solution_ = sol
        self.analog_ = sol.analog
        self.digital_ = sol.digital
        self.powers_ = sol.stream_powers
        return self

    def user_rates(self, X):
        check_is_fitted(self, "solution_")
        h = check_channels(X)
        sol = self.solution_
        return sum_rate_from_precoder(h.conj(), sol.precoder, sol.stream_powers, 1.0)

    def score(self, X, y=None):
        """Sum spectrum efficiency in bit/s/Hz on channels ``X``."""
        return float(np.sum(self.user_rates(X)))


class FullyDigitalZF(BaseEstimator):
    """Fully-digital zero-forcing baseline with perfect channel knowledge."""

    def __init__(self, snr_db=20.0):
        self.snr_db = snr_db

    def fit(self, X, y=None):
        self.solution_ = fully_digital_zf(X, 10.0 ** (self.snr_db / 10.0))
        self.powers_ = self.solution_.stream_powers
        return self

    def user_rates(self, X):
        check_is_fitted(self, "solution_")
        h = check_channels(X)
        sol = self.solution_
        return sum_rate_from_precoder(h.conj(), sol.precoder, sol.stream_powers, 1.0)

    def score(self, X, y=None):
        return float(np.sum(self.user_rates(X)))

