"""kpzlab: Monte Carlo laboratory for KPZ temporal sample paths.

Solves the multiplicative-noise stochastic heat equation and its additive
linearisation on periodic space-time grids, generates exact fractional
Brownian motion with Hurst parameter 1/4, and statistically verifies the
limit laws of the temporal process at the origin: Gaussian increments,
quartic variation 6/pi, iterated-logarithm and modulus-of-continuity constant
(8/pi)^(1/4), and exceptional-set box dimension 1 - alpha^2.
"""

__version__ = "0.1.0"

from .fields import ADDITIVE, MULTIPLICATIVE, FieldState
from .grid import BoundaryGuardError, GridSpec, make_grid
from .heat import heat_kernel, heat_step, linear_increment_variance
from .initial_data import (
    BROWNIAN,
    FUNCTION,
    NARROW_WEDGE,
    HypParams,
    InitialDatum,
    MomentBound,
    brownian_ic,
    function_ic,
    log_moment_bound,
    make_initial_field,
    narrow_wedge,
    validate_hyp,
)
from .noise import NoiseRealization, noise_statistics, sample_noise
from .path import Path, read_paths_csv, write_paths_csv
from .fbm import (
    KPZ_SCALE,
    FbmSpec,
    fbm_covariance,
    rescale_to_kpz,
    sample_fbm,
    sample_fbm_cholesky,
    sample_fbm_circulant,
)
from .pathstats import (
    INCREMENT_STANDARDIZER,
    MOC_LIL_CONSTANT,
    QUARTIC_VARIATION_RATE,
    BoxCountResult,
    ExceptionalSet,
    ScalingProfile,
    VariationResult,
    alpha_variation,
    box_dimension,
    exceptional_set,
    holder_coefficient,
    ks_normality,
    lil_profile,
    moc_profile,
    standardized_increments,
)
from .solver import (
    Trajectory,
    cole_hopf,
    load_trajectory,
    save_trajectory,
    scaled_height,
    solve,
    stationarity_transform,
)
from .ensemble import EnsembleResult, run_ensemble
from .verify import (
    CheckReport,
    GaussianLimitReport,
    gaussian_limit_check,
    increment_variance_ratio,
    linearity_check,
)

__all__ = [name for name in dir() if not name.startswith("_")]
