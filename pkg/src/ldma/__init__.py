"""Near-field location division multiple access (LDMA) toolkit.

Beam focusing vectors, distance-aware codebooks, hybrid ZF/WMMSE
precoding, spectrum-efficiency bounds and a reproducible Monte-Carlo
harness.
"""

from .array import (
    ArrayGeometry,
    ChannelRealization,
    Location,
    ScatterRegion,
    focusing_vector,
    fresnel_boundary,
    generate_channel,
    rayleigh_distance,
    steering_vector,
)
from .codebook import (
    Codebook,
    CodebookFormatError,
    DFTCodebook,
    PolarCodebook,
    SphericalCodebook,
    UniformDistanceCodebook,
    build_dft_codebook,
    build_polar_codebook_ula,
    build_spherical_codebook,
    build_uniform_codebook,
    export_codebook,
    import_codebook,
)
from .config import ConfigError, ScenarioConfig, load_config
from .correlation import exact_correlation, fresnel_correlation_ula
from .experiment import ExperimentResult, generate_scenario, run_experiment
from .metrics import (
    ideal_capacity,
    linear_users_bound,
    single_path_zf_rate,
    spectrum_efficiency,
    three_user_bound,
    tridiagonal_gamma,
)
from .numerics import SingularMatrixError
from .precoding import FullyDigitalZF, HybridPrecoder, PrecodingSolution
from .recipes import figure_recipes, run_recipe

__version__ = "0.1.0"
