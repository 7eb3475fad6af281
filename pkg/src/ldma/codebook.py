"""Far-field DFT, ULA polar-domain and UPA spherical-domain codebooks.

A :class:`Codebook` stores one focus label per codeword and synthesizes the
beam vectors on demand, block by block, so large planar-array codebooks
never need to be held in memory at once.

Near-field rings are spaced so that two same-direction beams on adjacent
rings have an (approximate) correlation of at most ``delta``.  The distance
correlation kernel ``|G|`` oscillates; the threshold is placed on its
non-increasing upper envelope so the bound holds for every larger spacing.
"""

import functools
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_channels, check_geometry
from .array import ArrayGeometry, Location, symmetric_indices, upa_focusing
from .numerics import fresnel_ratio

__all__ = [
    "FORMAT_TAG",
    "CodebookFormatError",
    "UnsupportedVersionError",
    "Codebook",
    "FresnelTable",
    "angular_grid",
    "ula_angular_grid",
    "beta_delta_search",
    "beta_delta_ula",
    "distance_rings",
    "build_dft_codebook",
    "build_polar_codebook_ula",
    "build_spherical_codebook",
    "build_uniform_codebook",
    "export_codebook",
    "import_codebook",
    "DFTCodebook",
    "PolarCodebook",
    "SphericalCodebook",
    "UniformDistanceCodebook",
]

FORMAT_TAG = "NFCB1"

# Beam matrices larger than this many entries are generated block-wise.
_CACHE_LIMIT = 1 << 24
_BLOCK = 512


class CodebookFormatError(ValueError):
    """Malformed codebook file."""


class UnsupportedVersionError(CodebookFormatError):
    """Codebook file written with an unknown format tag."""


@dataclass
class Codebook:
    """Ordered set of constant-modulus beams with their focus labels.

    Attributes
    ----------
    geometry : ArrayGeometry
    ring, index1, index2 : ndarray of int
        Ring number ``s`` (0 = far field) and angular grid indices of each
        codeword.  ``index2`` is 0 for a ULA.
    r, theta, phi : ndarray of float
        Focus point of each codeword; ``r = inf`` on ring 0.
    beta_delta : ndarray of float
        Envelope threshold used to place the rings at that direction
        (``nan`` when not applicable).
    kind : str
        ``"dft"``, ``"polar"``, ``"spherical"``, ``"uniform"`` or ``"imported"``.
    delta, rho_min : float or None
    drop_bilinear : bool
        UPA beams omit the ``n1 n2`` phase term (separable form).
    metadata : dict
    """

    geometry: ArrayGeometry
    ring: np.ndarray
    index1: np.ndarray
    index2: np.ndarray
    r: np.ndarray
    theta: np.ndarray
    phi: np.ndarray
    beta_delta: np.ndarray = None
    kind: str = "dft"
    delta: float = None
    rho_min: float = None
    drop_bilinear: bool = True
    metadata: dict = field(default_factory=dict)
    explicit_vectors: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        self.ring = np.asarray(self.ring, dtype=int)
        self.index1 = np.asarray(self.index1, dtype=int)
        self.index2 = np.asarray(self.index2, dtype=int)
        self.r = np.asarray(self.r, dtype=float)
        self.theta = np.asarray(self.theta, dtype=float)
        self.phi = np.asarray(self.phi, dtype=float)
        if self.beta_delta is None:
            self.beta_delta = np.full(self.ring.shape, np.nan)
        self._cache = self.explicit_vectors

    def __len__(self):
        return self.ring.size

    @property
    def n_rings(self):
        """Number of near-field rings (ring 0 excluded)."""
        return int(self.ring.max()) if len(self) else 0

    def focus(self, i):
        return Location(self.r[i], self.theta[i], self.phi[i])

    def ring_indices(self, s):
        return np.flatnonzero(self.ring == s)

    def vectors(self, idx=None):
        """Beam vectors as rows, shape ``(len(idx), N)``."""
        if idx is None:
            idx = np.arange(len(self))
        idx = np.asarray(idx, dtype=int)
        if self._cache is not None:
            return self._cache[idx]
        n = self.geometry.n_antennas
        if len(self) * n <= _CACHE_LIMIT:
            self._cache = self._synthesize(np.arange(len(self)))
            return self._cache[idx]
        return self._synthesize(idx)

    def iter_blocks(self, block=_BLOCK):
        """Yield ``(indices, vectors)`` in codebook order."""
        for start in range(0, len(self), block):
            idx = np.arange(start, min(start + block, len(self)))
            yield idx, self.vectors(idx)

    def gains(self, channels):
        """Beamforming gains ``|w_m^H h_k|``, shape ``(K, M)``.

        ``channels`` holds one channel vector per row.
        """
        h = check_channels(channels, self.geometry.n_antennas)
        out = np.empty((h.shape[0], len(self)))
        g = self.geometry
        if self._cache is None and self._separable() and len(self) * g.n_antennas > _CACHE_LIMIT:
            # w = kron(a, b), so w^H h = a^H H b with H the n1 x n2 reshaped channel.
            hm = h.reshape(-1, g.n1, g.n2)
            for start in range(0, len(self), 4 * _BLOCK):
                idx = np.arange(start, min(start + 4 * _BLOCK, len(self)))
                a, b = self._factors(idx)
                ac, bc = a.conj(), b.conj()
                for user in range(hm.shape[0]):
                    out[user, idx] = np.abs(np.sum((ac @ hm[user]) * bc, axis=1))
            return out
        for idx, w in self.iter_blocks():
            out[:, idx] = np.abs(h @ w.conj().T)
        return out

    def _separable(self):
        return self.geometry.layout == "UPA" and self.drop_bilinear

    def _factors(self, idx):
        """Per-axis beams ``(a, b)`` with ``w = kron(a, b)`` for separable UPA codewords."""
        g = self.geometry
        k, d = g.wavenumber, g.spacing
        r = self.r[idx]
        inv_r = np.where(np.isinf(r), 0.0, 1.0 / r)[:, None]
        theta, phi = self.theta[idx][:, None], self.phi[idx][:, None]
        c = np.cos(theta)
        u = np.sin(theta) * np.sin(phi)
        z = symmetric_indices(g.n1) * d
        y = symmetric_indices(g.n2) * d
        pz = k * (z * c - z**2 * (1.0 - c * c) * inv_r / 2.0)
        py = k * (y * u - y**2 * (1.0 - u * u) * inv_r / 2.0)
        return np.exp(1j * pz) / np.sqrt(g.n1), np.exp(1j * py) / np.sqrt(g.n2)

    def _synthesize(self, idx):
        g = self.geometry
        k, d = g.wavenumber, g.spacing
        r = self.r[idx]
        inv_r = np.where(np.isinf(r), 0.0, 1.0 / r)[:, None]
        theta, phi = self.theta[idx][:, None], self.phi[idx][:, None]
        if g.layout == "ULA":
            nd = symmetric_indices(g.n1) * d
            phase = k * (nd * np.sin(phi) - nd**2 * np.cos(phi) ** 2 * inv_r / 2.0)
            return np.exp(1j * phase) / np.sqrt(g.n1)
        if not self.drop_bilinear:
            return np.stack([upa_focusing(g, self.focus(i)) for i in idx])
        a, b = self._factors(idx)
        return np.einsum("mi,mj->mij", a, b).reshape(len(idx), g.n_antennas)

    def header(self):
        g = self.geometry
        fields = {
            "kind": self.kind,
            "layout": g.layout,
            "n1": g.n1,
            "n2": g.n2,
            "wavelength": repr(float(g.wavelength)),
            "spacing": repr(float(g.spacing)),
            "delta": "none" if self.delta is None else repr(float(self.delta)),
            "rho_min": "none" if self.rho_min is None else repr(float(self.rho_min)),
            "drop_bilinear": int(bool(self.drop_bilinear)),
            "count": len(self),
        }
        return " ".join([FORMAT_TAG] + [f"{k}={v}" for k, v in fields.items()])


class FresnelTable:
    """``G(beta)`` tabulated once on a dense grid and linearly interpolated.

    Arguments beyond the table fall back to direct evaluation.
    """

    def __init__(self, beta_max=64.0, step=1e-3):
        self.step = step
        self.grid = np.arange(0.0, beta_max + step, step)
        self.values = fresnel_ratio(self.grid)

    def __call__(self, beta):
        beta = np.abs(np.asarray(beta, dtype=float))
        inside = beta <= self.grid[-1]
        out = np.empty(beta.shape, dtype=complex)
        b = beta[inside]
        out[inside] = np.interp(b, self.grid, self.values.real) + 1j * np.interp(
            b, self.grid, self.values.imag
        )
        if not np.all(inside):
            out[~inside] = fresnel_ratio(beta[~inside])
        return out


@functools.lru_cache(maxsize=4)
def _default_table():
    return FresnelTable()


def angular_grid(geom):
    """Orthogonal DFT direction grid of a UPA.

    ``cos(theta) = (2 n1 - N1 + 1)/N1`` and
    ``sin(theta) sin(phi) = (2 n2 - N2 + 1)/N2``; pairs with no real azimuth
    are skipped.

    Returns
    -------
    dict
        ``index1``, ``index2``, ``theta``, ``phi`` arrays and ``skipped``
        (count of infeasible pairs).
    """
    check_geometry(geom, "UPA")
    c = (2.0 * np.arange(geom.n1) - geom.n1 + 1) / geom.n1
    u = (2.0 * np.arange(geom.n2) - geom.n2 + 1) / geom.n2
    i1, i2 = np.meshgrid(np.arange(geom.n1), np.arange(geom.n2), indexing="ij")
    i1, i2 = i1.ravel(), i2.ravel()
    cc, uu = c[i1], u[i2]
    sin_t = np.sqrt(1.0 - cc * cc)
    ok = np.abs(uu) <= sin_t + 1e-15
    ratio = np.clip(uu[ok] / sin_t[ok], -1.0, 1.0)
    return {
        "index1": i1[ok],
        "index2": i2[ok],
        "theta": np.arccos(cc[ok]),
        "phi": np.arcsin(ratio),
        "skipped": int((~ok).sum()),
    }


def ula_angular_grid(geom):
    """ULA azimuth grid ``sin(phi_n) = (2n - N + 1)/N``."""
    check_geometry(geom, "ULA")
    s = (2.0 * np.arange(geom.n1) - geom.n1 + 1) / geom.n1
    return np.arange(geom.n1), np.arcsin(s)


def _envelope_crossing(mag_fn, delta, b_hi, resolution, iters=60):
    """Vectorized envelope crossing for a batch of kernels.

    ``mag_fn(b)`` maps an ``(A, R)`` array of arguments (one row per kernel)
    to magnitudes; ``b_hi`` holds one initial upper bound per row.
    """
    b_hi = np.array(b_hi, dtype=float)
    t = np.linspace(0.0, 1.0, resolution + 1)
    while True:
        grid = b_hi[:, None] * t[None, :]
        mag = mag_fn(grid)
        # Suffix maximum: tightest non-increasing majorant of the kernel.
        env = np.maximum.accumulate(mag[:, ::-1], axis=1)[:, ::-1]
        bad = env[:, -1] > delta
        if not bad.any():
            break
        b_hi = np.where(bad, 2.0 * b_hi, b_hi)
    i = np.argmax(env <= delta, axis=1)
    rows = np.arange(len(b_hi))
    lo = grid[rows, np.maximum(i - 1, 0)]
    hi = grid[rows, i]
    # On [lo, hi] the kernel itself drops from above delta to below it.
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        above = mag_fn(mid[:, None])[:, 0] > delta
        lo = np.where(above, mid, lo)
        hi = np.where(above, hi, mid)
    return np.where(i == 0, 0.0, hi)


def _check_delta(delta):
    if not 0 < delta < 1:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")


def _direction_scales(geom, theta, phi):
    c = np.cos(theta)
    u = np.sin(theta) * np.sin(phi)
    s1 = geom.n1 * np.sqrt(np.maximum(1.0 - c * c, 0.0))
    s2 = geom.n2 * np.sqrt(np.maximum(1.0 - u * u, 0.0))
    return np.atleast_1d(s1), np.atleast_1d(s2)


def _beta_delta_batch(delta, theta, phi, geom, table, resolution):
    s1, s2 = _direction_scales(geom, np.asarray(theta, float), np.asarray(phi, float))
    smax = np.maximum(s1, s2)
    if np.any(smax == 0):
        raise ValueError("direction has no distance resolution")

    def mag(b):
        return np.abs(table(s1[:, None] * b) * table(s2[:, None] * b))

    return _envelope_crossing(mag, delta, max(8.0, 2.0 / delta) / smax, resolution)


def beta_delta_search(delta, theta, phi, geom, table=None, resolution=2048):
    """Smallest ``beta0`` past which the UPA distance correlation stays <= ``delta``.

    ``|Gbar(beta0)| = |G(beta1) G(beta2)|`` with ``beta1, beta2`` scaled from
    ``beta0`` by the direction.  The crossing is located on the suffix-max
    envelope of a dense grid and refined by bisection on ``|Gbar|`` itself.
    """
    _check_delta(delta)
    check_geometry(geom, "UPA")
    table = _default_table() if table is None else table
    return float(_beta_delta_batch(delta, theta, phi, geom, table, resolution)[0])


def beta_delta_ula(delta, table=None, resolution=4096):
    """Envelope threshold of the single-factor kernel ``|G(beta)|``."""
    _check_delta(delta)
    table = _default_table() if table is None else table
    b_hi = [max(8.0, 2.0 / delta)]
    return float(_envelope_crossing(lambda b: np.abs(table(b)), delta, b_hi, resolution)[0])


def _first_radius_upa(geom, beta_delta):
    return geom.spacing**2 / (2.0 * geom.wavelength * beta_delta**2)


def distance_rings(theta, phi, beta_delta, rho_min, geom):
    """Ring radii ``r_s = r_1 / s`` at one direction, down to ``rho_min``.

    ``r_1 = d^2 / (2 lambda beta_delta^2)``; consecutive rings then satisfy
    ``|1/r_s - 1/r_(s+1)| = 2 lambda beta_delta^2 / d^2``.  Ring 0 (infinite
    distance) is implicit and not returned.
    """
    if not (beta_delta > 0 and rho_min > 0):
        raise ValueError("beta_delta and rho_min must be positive")
    r1 = _first_radius_upa(geom, beta_delta)
    out = []
    s = 1
    while r1 / s >= rho_min:
        out.append(r1 / s)
        s += 1
    return out


def _labels(ring, i1, i2, r, theta, phi, beta):
    return dict(
        ring=np.concatenate(ring),
        index1=np.concatenate(i1),
        index2=np.concatenate(i2),
        r=np.concatenate(r),
        theta=np.concatenate(theta),
        phi=np.concatenate(phi),
        beta_delta=np.concatenate(beta),
    )


def build_dft_codebook(geom):
    """Far-field codebook on the orthogonal angular grid (ring 0 only)."""
    if geom.layout == "ULA":
        idx, phi = ula_angular_grid(geom)
        n = idx.size
        return Codebook(
            geom, np.zeros(n), idx, np.zeros(n), np.full(n, np.inf),
            np.full(n, np.pi / 2), phi, kind="dft",
        )
    grid = angular_grid(geom)
    n = grid["theta"].size
    return Codebook(
        geom, np.zeros(n), grid["index1"], grid["index2"], np.full(n, np.inf),
        grid["theta"], grid["phi"], kind="dft", metadata={"skipped_directions": grid["skipped"]},
    )


def build_polar_codebook_ula(geom, delta=0.55, rho_min=4.0, table=None):
    """ULA polar-domain codebook.

    Each grid azimuth gets ring 0 (the DFT beam) plus rings
    ``r_s = N^2 d^2 cos^2(phi) / (2 lambda beta_delta^2 s)`` down to
    ``rho_min``.  Near end-fire the rings shrink with ``cos^2(phi)``, so the
    ring count varies per direction.
    """
    check_geometry(geom, "ULA")
    if not rho_min > 0:
        raise ValueError("rho_min must be positive")
    beta = beta_delta_ula(delta, table)
    idx, phi = ula_angular_grid(geom)
    n, d, lam = geom.n1, geom.spacing, geom.wavelength
    r1 = n * n * d * d * np.cos(phi) ** 2 / (2.0 * lam * beta * beta)
    rings, i1, rs, phis = [], [], [], []
    for i, p, rr in zip(idx, phi, r1):
        count = int(np.floor(rr / rho_min + 1e-12))
        while count > 0 and rr / count < rho_min:
            count -= 1
        s = np.arange(count + 1)
        rings.append(s)
        i1.append(np.full(s.size, i))
        with np.errstate(divide="ignore"):
            rs.append(np.where(s == 0, np.inf, rr / np.maximum(s, 1)))
        phis.append(np.full(s.size, p))
    order = np.lexsort((np.concatenate(i1), np.concatenate(rings)))
    lab = _labels(rings, i1, [np.zeros(a.size) for a in i1], rs,
                  [np.full(a.size, np.pi / 2) for a in i1], phis,
                  [np.full(a.size, beta) for a in i1])
    lab = {k: v[order] for k, v in lab.items()}
    return Codebook(geom, kind="polar", delta=delta, rho_min=rho_min, **lab)


def build_spherical_codebook(geom, delta=0.55, rho_min=4.0, table=None):
    """UPA spherical-domain codebook.

    Rings are added while the largest ring radius over all grid directions
    is still at least ``rho_min``; every ring spans the whole angular grid,
    so directions with a smaller first radius also receive rings that fall
    inside ``rho_min``.  Codewords are ordered ring-major, then ``n1``-major.
    """
    check_geometry(geom, "UPA")
    if not rho_min > 0:
        raise ValueError("rho_min must be positive")
    table = _default_table() if table is None else table
    grid = angular_grid(geom)
    _check_delta(delta)
    beta = np.concatenate([
        _beta_delta_batch(delta, grid["theta"][i:i + 256], grid["phi"][i:i + 256], geom, table, 2048)
        for i in range(0, grid["theta"].size, 256)
    ]) if grid["theta"].size else np.empty(0)
    r1 = _first_radius_upa(geom, beta)
    r_max = r1.max() if r1.size else 0.0
    n_rings = 0
    while r_max / (n_rings + 1) >= rho_min:
        n_rings += 1
    m = beta.size
    rings = [np.full(m, s) for s in range(n_rings + 1)]
    with np.errstate(divide="ignore"):
        rs = [np.full(m, np.inf)] + [r1 / s for s in range(1, n_rings + 1)]
    lab = _labels(
        rings,
        [grid["index1"]] * (n_rings + 1),
        [grid["index2"]] * (n_rings + 1),
        rs,
        [grid["theta"]] * (n_rings + 1),
        [grid["phi"]] * (n_rings + 1),
        [beta] * (n_rings + 1),
    )
    meta = {"skipped_directions": grid["skipped"], "directions": m}
    return Codebook(geom, kind="spherical", delta=delta, rho_min=rho_min, metadata=meta, **lab)


def build_uniform_codebook(geom, n_rings, r_min, r_max):
    """Baseline with rings uniformly spaced in distance over ``[r_min, r_max]``.

    Uses the same angular grid and ring-0 beams as the DFT codebook, so with
    ``n_rings`` matched it has the same size as a spherical/polar codebook.
    """
    if not 0 < r_min <= r_max:
        raise ValueError("need 0 < r_min <= r_max")
    base = build_dft_codebook(geom)
    m = len(base)
    radii = np.linspace(r_min, r_max, n_rings) if n_rings > 1 else np.array([r_min] * n_rings)
    rs = [np.full(m, np.inf)] + [np.full(m, r) for r in radii[::-1]]
    lab = _labels(
        [np.full(m, s) for s in range(n_rings + 1)],
        [base.index1] * (n_rings + 1),
        [base.index2] * (n_rings + 1),
        rs,
        [base.theta] * (n_rings + 1),
        [base.phi] * (n_rings + 1),
        [np.full(m, np.nan)] * (n_rings + 1),
    )
    return Codebook(geom, kind="uniform", rho_min=r_min, metadata={"r_max": r_max}, **lab)


def export_codebook(cb, path):
    """Write a codebook in the line-oriented text format.

    Line 1 is the header (``NFCB1`` plus ``key=value`` fields).  Each further
    line is one codeword::

        ring index1 index2 r theta phi re_0 im_0 re_1 im_1 ...

    Floats use the shortest round-trip representation, so export followed
    by import is lossless.
    """
    with open(path, "w") as fh:
        fh.write(cb.header() + "\n")
        for idx, w in cb.iter_blocks():
            inter = np.empty((len(idx), 2 * w.shape[1]))
            inter[:, 0::2] = w.real
            inter[:, 1::2] = w.imag
            for j, i in enumerate(idx):
                head = (
                    f"{cb.ring[i]} {cb.index1[i]} {cb.index2[i]} "
                    f"{float(cb.r[i])!r} {float(cb.theta[i])!r} {float(cb.phi[i])!r} "
                )
                fh.write(head + " ".join(map(repr, inter[j].tolist())) + "\n")


def _parse_header(line):
    parts = line.split()
    if not parts:
        raise CodebookFormatError("line 1: empty header")
    if parts[0] != FORMAT_TAG:
        if parts[0].startswith("NFCB"):
            raise UnsupportedVersionError(f"line 1: unsupported codebook version {parts[0]!r}")
        raise CodebookFormatError(f"line 1: not a codebook file (tag {parts[0]!r})")
    fields = {}
    for p in parts[1:]:
        if "=" not in p:
            raise CodebookFormatError(f"line 1: malformed header field {p!r}")
        k, v = p.split("=", 1)
        fields[k] = v
    required = ("kind", "layout", "n1", "n2", "wavelength", "spacing", "count")
    missing = [k for k in required if k not in fields]
    if missing:
        raise CodebookFormatError(f"line 1: missing header fields {missing}")
    return fields


def import_codebook(path):
    """Read a codebook written by :func:`export_codebook`."""
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise CodebookFormatError("empty file")
    h = _parse_header(lines[0])
    try:
        geom = ArrayGeometry(
            h["layout"], int(h["n1"]), int(h["n2"]), float(h["wavelength"]), float(h["spacing"])
        )
        count = int(h["count"])
    except ValueError as exc:
        raise CodebookFormatError(f"line 1: {exc}") from exc
    n = geom.n_antennas
    records = lines[1:]
    if len(records) != count:
        raise CodebookFormatError(
            f"line {len(lines) + 1}: expected {count} records, found {len(records)} (truncated?)"
        )
    labels = np.empty((count, 6))
    vec = np.empty((count, n), dtype=complex)
    for j, line in enumerate(records):
        tok = line.split()
        if len(tok) != 6 + 2 * n:
            raise CodebookFormatError(
                f"line {j + 2}: expected {6 + 2 * n} fields, found {len(tok)}"
            )
        try:
            labels[j] = [float(t) for t in tok[:6]]
            vals = np.array(tok[6:], dtype=float)
        except ValueError as exc:
            raise CodebookFormatError(f"line {j + 2}: {exc}") from exc
        vec[j] = vals[0::2] + 1j * vals[1::2]

    def opt(key):
        v = h.get(key, "none")
        return None if v == "none" else float(v)

    return Codebook(
        geom,
        labels[:, 0].astype(int), labels[:, 1].astype(int), labels[:, 2].astype(int),
        labels[:, 3], labels[:, 4], labels[:, 5],
        kind=h["kind"], delta=opt("delta"), rho_min=opt("rho_min"),
        drop_bilinear=bool(int(h.get("drop_bilinear", "1"))),
        explicit_vectors=vec,
    )


class _CodebookEstimator(TransformerMixin, BaseEstimator):
    """Shared fit/transform plumbing: ``fit`` builds, ``transform`` returns gains."""

    def fit(self, X=None, y=None):
        """Build the codebook for ``self.geometry``; ``X`` is ignored."""
        self.codebook_ = self._build()
        self.n_codewords_ = len(self.codebook_)
        return self

    def transform(self, X):
        """Beam gains ``|w_m^H h_k|`` for channel rows ``X``, shape ``(K, M)``."""
        check_is_fitted(self, "codebook_")
        return self.codebook_.gains(X)


class DFTCodebook(_CodebookEstimator):
    """Far-field angular codebook.

    Parameters
    ----------
    geometry : ArrayGeometry
    """

    def __init__(self, geometry=None):
        self.geometry = geometry

    def _build(self):
        return build_dft_codebook(check_geometry(self.geometry))


class PolarCodebook(_CodebookEstimator):
    """ULA polar-domain codebook (angle grid x non-uniform distance rings)."""

    def __init__(self, geometry=None, delta=0.55, rho_min=4.0):
        self.geometry = geometry
        self.delta = delta
        self.rho_min = rho_min

    def _build(self):
        return build_polar_codebook_ula(check_geometry(self.geometry), self.delta, self.rho_min)


class SphericalCodebook(_CodebookEstimator):
    """UPA spherical-domain codebook.

    Parameters
    ----------
    geometry : ArrayGeometry
        Planar array description.
    delta : float, default=0.55
        Maximum correlation between same-direction beams on adjacent rings.
    rho_min : float, default=4.0
        Minimum distance (metres) the rings need to reach.
    """

    def __init__(self, geometry=None, delta=0.55, rho_min=4.0):
        self.geometry = geometry
        self.delta = delta
        self.rho_min = rho_min

    def _build(self):
        return build_spherical_codebook(check_geometry(self.geometry), self.delta, self.rho_min)


class UniformDistanceCodebook(_CodebookEstimator):
    def __init__(self, geometry=None, n_rings=1, r_min=4.0, r_max=50.0):
        self.geometry = geometry
        self.n_rings = n_rings
        self.r_min = r_min
        self.r_max = r_max

    def _build(self):
        return build_uniform_codebook(
            check_geometry(self.geometry), self.n_rings, self.r_min, self.r_max
        )
