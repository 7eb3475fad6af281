"""Array geometry, beam steering/focusing vectors and multipath channels.

Conventions
-----------
* Element indices are symmetric about the array centre: ``m - (n - 1)/2``
  for ``m = 0..n-1`` (half-integers when ``n`` is even).
* A ULA lies along the y-axis; azimuth ``phi`` is measured from broadside.
* A UPA lies in the yz-plane.  Index ``n1`` runs along z (paired with
  ``cos(theta)``), ``n2`` along y (paired with ``sin(theta) sin(phi)``).
  Vectors are flattened ``n1``-major, so a far-field UPA steering vector is
  ``kron(a_z, a_y)``.
* Every vector is unit-norm with constant-modulus entries ``1/sqrt(N)``.
"""

from dataclasses import dataclass, field

import numpy as np

from .numerics import complex_normal

__all__ = [
    "SPEED_OF_LIGHT",
    "ArrayGeometry",
    "Location",
    "PathComponent",
    "ChannelRealization",
    "ScatterRegion",
    "symmetric_indices",
    "ula_steering",
    "upa_steering",
    "ula_focusing",
    "ula_focusing_exact",
    "upa_focusing",
    "upa_focusing_exact",
    "steering_vector",
    "focusing_vector",
    "rayleigh_distance",
    "fresnel_boundary",
    "generate_channel",
]

SPEED_OF_LIGHT = 3e8


@dataclass(frozen=True)
class ArrayGeometry:
    """Uniform linear or planar array.

    Parameters
    ----------
    layout : {"ULA", "UPA"}
    n1 : int
        Element count of a ULA, or the z-axis count of a UPA.
    n2 : int
        y-axis count of a UPA; must be 1 for a ULA.
    wavelength : float
        Carrier wavelength in metres.
    spacing : float, optional
        Element spacing in metres; half a wavelength when omitted.
    """

    layout: str
    n1: int
    n2: int = 1
    wavelength: float = 0.01
    spacing: float = None

    def __post_init__(self):
        layout = str(self.layout).upper()
        object.__setattr__(self, "layout", layout)
        if layout not in ("ULA", "UPA"):
            raise ValueError(f"layout must be 'ULA' or 'UPA', got {self.layout!r}")
        if self.spacing is None:
            object.__setattr__(self, "spacing", self.wavelength / 2.0)
        if int(self.n1) != self.n1 or int(self.n2) != self.n2:
            raise ValueError("antenna counts must be integers")
        object.__setattr__(self, "n1", int(self.n1))
        object.__setattr__(self, "n2", int(self.n2))
        if self.n1 < 1 or self.n2 < 1:
            raise ValueError("antenna counts must be >= 1")
        if layout == "ULA" and self.n2 != 1:
            raise ValueError("a ULA has n2 == 1")
        if not (self.spacing > 0 and self.wavelength > 0):
            raise ValueError("spacing and wavelength must be positive")

    @classmethod
    def ula(cls, n, frequency=30e9, spacing=None):
        return cls("ULA", n, 1, SPEED_OF_LIGHT / frequency, spacing)

    @classmethod
    def upa(cls, n1, n2, frequency=30e9, spacing=None):
        return cls("UPA", n1, n2, SPEED_OF_LIGHT / frequency, spacing)

    @property
    def n_antennas(self):
        return self.n1 * self.n2

    @property
    def wavenumber(self):
        return 2.0 * np.pi / self.wavelength

    @property
    def aperture(self):
        """Diagonal extent of the array in metres."""
        d1 = (self.n1 - 1) * self.spacing
        d2 = (self.n2 - 1) * self.spacing
        return float(np.hypot(d1, d2))

    def with_size(self, n1, n2=None):
        """Same spacing and wavelength, different element counts."""
        n2 = self.n2 if n2 is None else n2
        return ArrayGeometry(self.layout, n1, n2, self.wavelength, self.spacing)

    def to_dict(self):
        return {
            "layout": self.layout,
            "n1": self.n1,
            "n2": self.n2,
            "wavelength": self.wavelength,
            "spacing": self.spacing,
        }


@dataclass(frozen=True)
class Location:
    """Point in spherical coordinates about the array centre.

    ``r`` in metres (``inf`` for a far-field direction), ``theta`` the
    elevation and ``phi`` the azimuth in radians.  ULA users sit at
    ``theta = pi/2``.
    """

    r: float
    theta: float = np.pi / 2
    phi: float = 0.0

    def __post_init__(self):
        if not self.r > 0:
            raise ValueError(f"distance must be positive, got {self.r}")
        if not (0.0 <= self.theta <= np.pi and -np.pi / 2 <= self.phi <= np.pi / 2):
            raise ValueError(
                f"direction (theta={self.theta}, phi={self.phi}) is outside the front half-space"
            )


@dataclass
class PathComponent:
    gain: complex
    location: Location
    is_los: bool = False


@dataclass
class ChannelRealization:
    """One user's channel together with the paths that generated it."""

    vector: np.ndarray
    paths: list
    model: str
    geometry: ArrayGeometry
    num_nlos: int = 0

    def reconstruct(self):
        """Rebuild the channel vector from the stored path list."""
        return _assemble(self.geometry, self.paths, self.model, self.num_nlos)


@dataclass(frozen=True)
class ScatterRegion:
    """Box in (r, theta, phi) from which scatterers are drawn uniformly."""

    r_range: tuple = (4.0, 100.0)
    theta_range: tuple = (np.pi / 2, np.pi / 2)
    phi_range: tuple = (-np.pi / 3, np.pi / 3)

    def sample(self, rng, size):
        r = rng.uniform(*self.r_range, size=size)
        theta = rng.uniform(*self.theta_range, size=size)
        phi = rng.uniform(*self.phi_range, size=size)
        return [Location(*t) for t in zip(r, theta, phi)]


def symmetric_indices(count):
    """Element indices ``m - (count - 1)/2`` for ``m = 0..count-1``."""
    if int(count) != count or count < 1:
        raise ValueError("count must be a positive integer")
    return np.arange(count) - (count - 1) / 2.0


def _require(geom, layout):
    if geom.layout != layout:
        raise ValueError(f"expected a {layout} geometry, got {geom.layout}")


def _check_r(r):
    if not r > 0:
        raise ValueError(f"distance must be positive, got {r}")


def ula_steering(geom, phi):
    """Far-field ULA steering vector for azimuth ``phi``."""
    _require(geom, "ULA")
    n = symmetric_indices(geom.n1)
    phase = geom.wavenumber * n * geom.spacing * np.sin(phi)
    return np.exp(1j * phase) / np.sqrt(geom.n1)


def _upa_grid(geom):
    n1 = symmetric_indices(geom.n1)[:, None]
    n2 = symmetric_indices(geom.n2)[None, :]
    return n1, n2


def upa_steering(geom, theta, phi):
    """Far-field UPA steering vector, flattened ``n1``-major."""
    _require(geom, "UPA")
    n1, n2 = _upa_grid(geom)
    kd = geom.wavenumber * geom.spacing
    phase = kd * (n1 * np.cos(theta) + n2 * np.sin(theta) * np.sin(phi))
    return (np.exp(1j * phase) / np.sqrt(geom.n_antennas)).ravel()


def ula_focusing(geom, loc):
    """Near-field ULA focusing vector with the second-order distance expansion.

    Entry ``n`` is ``exp(-j k psi_n) / sqrt(N)`` with
    ``psi_n = -n d sin(phi) + n^2 d^2 cos^2(phi) / (2 r)``.
    """
    _require(geom, "ULA")
    _check_r(loc.r)
    if np.isinf(loc.r):
        return ula_steering(geom, loc.phi)
    nd = symmetric_indices(geom.n1) * geom.spacing
    psi = -nd * np.sin(loc.phi) + nd**2 * np.cos(loc.phi) ** 2 / (2.0 * loc.r)
    return np.exp(-1j * geom.wavenumber * psi) / np.sqrt(geom.n1)


def _range_offset(r, sq_minus_cross):
    # sqrt(r^2 + q) - r without cancellation, q = n^2 d^2 - 2 n d r sin(...)
    return sq_minus_cross / (np.sqrt(r * r + sq_minus_cross) + r)


def ula_focusing_exact(geom, loc):
    """ULA focusing vector from the exact element-to-point distances."""
    _require(geom, "ULA")
    _check_r(loc.r)
    if np.isinf(loc.r):
        return ula_steering(geom, loc.phi)
    nd = symmetric_indices(geom.n1) * geom.spacing
    q = nd**2 - 2.0 * nd * loc.r * np.sin(loc.phi)
    delta = _range_offset(loc.r, q)
    return np.exp(-1j * geom.wavenumber * delta) / np.sqrt(geom.n1)


def upa_focusing(geom, loc, drop_bilinear=False):
    """Near-field UPA focusing vector with the second-order expansion.

    With ``drop_bilinear`` the ``n1 n2`` cross term is omitted, which
    decouples the two axes; codebook entries use this form.
    """
    _require(geom, "UPA")
    _check_r(loc.r)
    if np.isinf(loc.r):
        return upa_steering(geom, loc.theta, loc.phi)
    n1, n2 = _upa_grid(geom)
    d, r = geom.spacing, loc.r
    c = np.cos(loc.theta)
    u = np.sin(loc.theta) * np.sin(loc.phi)
    psi = (
        -n1 * d * c
        - n2 * d * u
        + (n1 * d) ** 2 * (1.0 - c * c) / (2.0 * r)
        + (n2 * d) ** 2 * (1.0 - u * u) / (2.0 * r)
    )
    if not drop_bilinear:
        psi = psi - n1 * n2 * d * d * c * u / r
    return (np.exp(-1j * geom.wavenumber * psi) / np.sqrt(geom.n_antennas)).ravel()


def upa_focusing_exact(geom, loc):
    """UPA focusing vector from exact element-to-point distances."""
    _require(geom, "UPA")
    _check_r(loc.r)
    if np.isinf(loc.r):
        return upa_steering(geom, loc.theta, loc.phi)
    n1, n2 = _upa_grid(geom)
    d, r = geom.spacing, loc.r
    c = np.cos(loc.theta)
    u = np.sin(loc.theta) * np.sin(loc.phi)
    q = (n1 * d) ** 2 + (n2 * d) ** 2 - 2.0 * r * d * (n1 * c + n2 * u)
    delta = _range_offset(r, q)
    return (np.exp(-1j * geom.wavenumber * delta) / np.sqrt(geom.n_antennas)).ravel()


def steering_vector(geom, loc):
    """Far-field response for the direction of ``loc`` (distance ignored)."""
    if geom.layout == "ULA":
        return ula_steering(geom, loc.phi)
    return upa_steering(geom, loc.theta, loc.phi)


def focusing_vector(geom, loc, exact=False, drop_bilinear=False):
    """Near-field response focused on ``loc`` for either layout."""
    if geom.layout == "ULA":
        return ula_focusing_exact(geom, loc) if exact else ula_focusing(geom, loc)
    if exact:
        return upa_focusing_exact(geom, loc)
    return upa_focusing(geom, loc, drop_bilinear=drop_bilinear)


def rayleigh_distance(geom):
    """``2 D^2 / lambda`` for the array's diagonal aperture ``D``."""
    return 2.0 * geom.aperture**2 / geom.wavelength


def fresnel_boundary(geom):
    """``(D/2) (D/lambda)^(1/3)``, below which the quadratic expansion degrades."""
    d = geom.aperture
    return 0.5 * d * (d / geom.wavelength) ** (1.0 / 3.0)


def _response(geom, loc, model):
    if model == "far":
        return steering_vector(geom, loc)
    return focusing_vector(geom, loc)


def _assemble(geom, paths, model, num_nlos):
    n = geom.n_antennas
    h = np.zeros(n, dtype=complex)
    for p in paths:
        scale = np.sqrt(n) if p.is_los else np.sqrt(n / num_nlos)
        h += scale * p.gain * _response(geom, p.location, model)
    return h


def generate_channel(geom, user, num_nlos, kappa, rng, scatter_region=None, model="near"):
    """Rician multipath channel: one LoS path plus ``num_nlos`` scatterers.

    ``h = sqrt(N) a0 v(user) + sqrt(N / L) sum_l a_l v(scatterer_l)`` where
    ``v`` is the steering (``model="far"``) or focusing (``"near"``) vector,
    ``a0 = sqrt(kappa / (kappa + 1))`` and ``a_l ~ CN(0, 1 / (kappa + 1))``.

    Parameters
    ----------
    geom : ArrayGeometry
    user : Location
    num_nlos : int
    kappa : float
        Rician factor (LoS-to-NLoS power ratio), ``>= 0``.
    rng : numpy.random.Generator
        Source of the NLoS gains and scatterer positions.
    scatter_region : ScatterRegion, optional
        Defaults to a box around the user's own sector.
    model : {"near", "far"}

    Returns
    -------
    ChannelRealization
    """
    if model not in ("near", "far"):
        raise ValueError(f"model must be 'near' or 'far', got {model!r}")
    if num_nlos < 0 or kappa < 0:
        raise ValueError("num_nlos and kappa must be non-negative")
    if num_nlos == 0 and kappa == 0:
        raise ValueError("kappa = 0 with no NLoS paths gives an empty channel")
    if scatter_region is None:
        scatter_region = ScatterRegion()
    paths = []
    if kappa > 0 or num_nlos == 0:
        los = np.sqrt(kappa / (kappa + 1.0)) if np.isfinite(kappa) else 1.0
        paths.append(PathComponent(complex(los), user, is_los=True))
    if num_nlos > 0:
        gains = complex_normal(rng, num_nlos, variance=1.0 / (kappa + 1.0))
        for g, loc in zip(gains, scatter_region.sample(rng, num_nlos)):
            paths.append(PathComponent(complex(g), loc))
    h = _assemble(geom, paths, model, num_nlos)
    return ChannelRealization(h, paths, model, geom, num_nlos)
