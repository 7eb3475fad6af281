"""Scenario configuration: dataclass, TOML loading and validation.

A config file is TOML with these sections (every key optional)::

    version = 1

    [array]
    layout = "ULA"          # or "UPA"
    n1 = 512
    n2 = 1
    frequency = 30e9

    [users]
    count = 10
    distribution = "uniform"   # or "linear"
    r_min = 4.0
    r_max = 100.0
    theta_range = [1.5707963267948966, 1.5707963267948966]
    phi_range = [-1.0471975511965976, 1.0471975511965976]
    theta = 1.5707963267948966 # direction shared by linear users
    phi = 0.0

    [channel]
    num_nlos = 5
    kappa = 8.0
    model = "near"

    [codebook]
    delta = 0.55
    rho_min = 4.0          # defaults to users.r_min

    [precoding]
    csi_noise_variance = 0.0
    wmmse_max_iter = 100
    wmmse_tol = 1e-6
    ill_conditioned = "error"   # or "drop-users"

    [run]
    snr_db = [0.0, 10.0, 20.0]
    schemes = ["ldma-zf", "sdma-zf"]
    drops = 100
    seed = 0
"""

import dataclasses
import math
import sys
import warnings
from dataclasses import dataclass, field

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .array import ArrayGeometry, SPEED_OF_LIGHT, fresnel_boundary

__all__ = [
    "CONFIG_VERSION",
    "ACCESS_MODES",
    "DIGITAL_MODES",
    "ConfigError",
    "NearFieldValidityWarning",
    "SchemeSpec",
    "ScenarioConfig",
    "config_from_mapping",
    "load_config",
    "parse_scheme",
]

CONFIG_VERSION = 1
ACCESS_MODES = ("ldma", "sdma", "uniform", "infinite")
DIGITAL_MODES = ("zf", "wmmse")


class ConfigError(ValueError):
    """Invalid or unreadable scenario configuration."""


class NearFieldValidityWarning(UserWarning):
    """Users may sit closer than the quadratic phase model is accurate."""


@dataclass(frozen=True)
class SchemeSpec:
    """One access/digital combination, e.g. ``ldma-zf`` or ``fd-zf``."""

    access: str
    digital: str

    @property
    def name(self):
        if self.access == "fd":
            return "fd-zf"
        return f"{self.access}-{self.digital}"


def parse_scheme(text):
    """Parse ``"<access>-<digital>"`` (or ``"fd-zf"``) into a :class:`SchemeSpec`."""
    t = str(text).strip().lower()
    if t == "fd-zf":
        return SchemeSpec("fd", "zf")
    access, _, digital = t.partition("-")
    if access not in ACCESS_MODES or digital not in DIGITAL_MODES:
        raise ConfigError(
            f"unknown scheme {text!r}; use <{'|'.join(ACCESS_MODES)}>-<zf|wmmse> or fd-zf"
        )
    return SchemeSpec(access, digital)


def _pair(value, name):
    try:
        lo, hi = (float(v) for v in value)
    except (TypeError, ValueError):
        raise ConfigError(f"{name} must be a pair of numbers, got {value!r}") from None
    if lo > hi:
        raise ConfigError(f"{name} must be increasing, got {value!r}")
    return (lo, hi)


@dataclass
class ScenarioConfig:
    """Everything needed to reproduce one Monte-Carlo experiment.

    Defaults describe the uniform ULA scenario: 512 elements at 30 GHz,
    ten users in ``r in [4, 100] m``, ``phi in [-pi/3, pi/3]``, five NLoS
    paths and ``kappa = 8``.
    """

    layout: str = "ULA"
    n1: int = 512
    n2: int = 1
    frequency: float = 30e9
    users: int = 10
    distribution: str = "uniform"
    r_min: float = 4.0
    r_max: float = 100.0
    theta_range: tuple = (math.pi / 2, math.pi / 2)
    phi_range: tuple = (-math.pi / 3, math.pi / 3)
    theta: float = math.pi / 2
    phi: float = 0.0
    num_nlos: int = 5
    kappa: float = 8.0
    model: str = "near"
    delta: float = 0.55
    rho_min: float = None
    csi_noise_variance: float = 0.0
    wmmse_max_iter: int = 100
    wmmse_tol: float = 1e-6
    ill_conditioned: str = "error"
    snr_db: list = field(default_factory=lambda: [20.0])
    schemes: list = field(default_factory=lambda: ["ldma-zf", "sdma-zf"])
    drops: int = 100
    seed: int = 0

    def __post_init__(self):
        self.validate()

    @property
    def geometry(self):
        if self.layout == "ULA":
            return ArrayGeometry.ula(self.n1, self.frequency)
        return ArrayGeometry.upa(self.n1, self.n2, self.frequency)

    @property
    def codebook_rho_min(self):
        return self.r_min if self.rho_min is None else self.rho_min

    @property
    def scheme_specs(self):
        return [parse_scheme(s) for s in self.schemes]

    def validate(self):
        self.layout = str(self.layout).upper()
        if self.layout not in ("ULA", "UPA"):
            raise ConfigError(f"array.layout must be ULA or UPA, got {self.layout!r}")
        if self.layout == "ULA":
            self.n2 = 1
        for name in ("n1", "n2", "users", "drops", "wmmse_max_iter"):
            v = getattr(self, name)
            if isinstance(v, bool) or int(v) != v or v < 1:
                raise ConfigError(f"{name} must be a positive integer, got {v!r}")
            setattr(self, name, int(v))
        if isinstance(self.num_nlos, bool) or int(self.num_nlos) != self.num_nlos or self.num_nlos < 0:
            raise ConfigError(f"num_nlos must be a non-negative integer, got {self.num_nlos!r}")
        self.num_nlos = int(self.num_nlos)
        if not self.frequency > 0:
            raise ConfigError("frequency must be positive")
        if self.distribution not in ("uniform", "linear"):
            raise ConfigError(f"distribution must be 'uniform' or 'linear', got {self.distribution!r}")
        if not 0 < self.r_min <= self.r_max:
            raise ConfigError(f"need 0 < r_min <= r_max, got {self.r_min}, {self.r_max}")
        self.theta_range = _pair(self.theta_range, "theta_range")
        self.phi_range = _pair(self.phi_range, "phi_range")
        if not (0 < self.theta_range[0] and self.theta_range[1] < math.pi):
            raise ConfigError("theta_range must lie inside (0, pi)")
        if not (-math.pi / 2 < self.phi_range[0] and self.phi_range[1] < math.pi / 2):
            raise ConfigError("phi_range must lie inside (-pi/2, pi/2)")
        if not self.kappa >= 0:
            raise ConfigError(f"kappa must be >= 0, got {self.kappa}")
        if self.num_nlos == 0 and self.kappa == 0:
            raise ConfigError("kappa = 0 with num_nlos = 0 leaves no propagation path")
        if self.model not in ("near", "far"):
            raise ConfigError(f"channel model must be 'near' or 'far', got {self.model!r}")
        if not 0 < self.delta < 1:
            raise ConfigError(f"codebook delta must lie in (0, 1), got {self.delta}")
        if self.rho_min is not None and not self.rho_min > 0:
            raise ConfigError("rho_min must be positive")
        if not self.csi_noise_variance >= 0:
            raise ConfigError("csi_noise_variance must be >= 0")
        if not self.wmmse_tol > 0:
            raise ConfigError("wmmse_tol must be positive")
        if self.ill_conditioned not in ("error", "drop-users"):
            raise ConfigError(
                f"ill_conditioned must be 'error' or 'drop-users', got {self.ill_conditioned!r}"
            )
        if isinstance(self.snr_db, (int, float)):
            self.snr_db = [self.snr_db]
        self.snr_db = [float(s) for s in self.snr_db]
        if not self.snr_db:
            raise ConfigError("snr_db must not be empty")
        if isinstance(self.schemes, str):
            self.schemes = [self.schemes]
        if not self.schemes:
            raise ConfigError("at least one scheme is required")
        self.schemes = [parse_scheme(s).name for s in self.schemes]
        if len(set(self.schemes)) != len(self.schemes):
            raise ConfigError("schemes must be distinct")
        if isinstance(self.seed, bool) or int(self.seed) != self.seed or self.seed < 0:
            raise ConfigError(f"seed must be a non-negative integer, got {self.seed!r}")
        self.seed = int(self.seed)
        if self.users > self.n1 * self.n2:
            raise ConfigError("more users than antennas")
        return self

    def check_near_field_validity(self):
        """Warn when ``r_min`` is inside the Fresnel boundary of the array."""
        rf = fresnel_boundary(self.geometry)
        if self.r_min < rf:
            warnings.warn(
                f"r_min = {self.r_min} m is inside the Fresnel boundary ({rf:.2f} m); "
                "the quadratic phase model loses accuracy there",
                NearFieldValidityWarning,
                stacklevel=2,
            )
        return rf

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    def to_dict(self):
        d = dataclasses.asdict(self)
        d["theta_range"] = list(self.theta_range)
        d["phi_range"] = list(self.phi_range)
        d["version"] = CONFIG_VERSION
        d["wavelength"] = SPEED_OF_LIGHT / self.frequency
        d["snr_definition"] = "SNR = P / sigma^2, sigma^2 = 1, p_k = P / K"
        return d


_SECTIONS = {
    "array": {"layout": "layout", "n1": "n1", "n2": "n2", "frequency": "frequency"},
    "users": {
        "count": "users", "distribution": "distribution", "r_min": "r_min", "r_max": "r_max",
        "theta_range": "theta_range", "phi_range": "phi_range", "theta": "theta", "phi": "phi",
    },
    "channel": {"num_nlos": "num_nlos", "kappa": "kappa", "model": "model"},
    "codebook": {"delta": "delta", "rho_min": "rho_min"},
    "precoding": {
        "csi_noise_variance": "csi_noise_variance",
        "wmmse_max_iter": "wmmse_max_iter",
        "wmmse_tol": "wmmse_tol",
        "ill_conditioned": "ill_conditioned",
    },
    "run": {"snr_db": "snr_db", "schemes": "schemes", "drops": "drops", "seed": "seed"},
}


def config_from_mapping(data):
    """Build a :class:`ScenarioConfig` from parsed TOML data."""
    version = data.get("version", CONFIG_VERSION)
    if version != CONFIG_VERSION:
        raise ConfigError(f"unsupported config version {version!r} (expected {CONFIG_VERSION})")
    kwargs = {}
    for section, body in data.items():
        if section == "version":
            continue
        if section not in _SECTIONS or not isinstance(body, dict):
            raise ConfigError(f"unknown config section [{section}]")
        for key, value in body.items():
            if key not in _SECTIONS[section]:
                raise ConfigError(f"unknown key {key!r} in [{section}]")
            kwargs[_SECTIONS[section][key]] = value
    try:
        return ScenarioConfig(**kwargs)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc


def load_config(path):
    """Read and validate a TOML scenario file."""
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return config_from_mapping(data)
