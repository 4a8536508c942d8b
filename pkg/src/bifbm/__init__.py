"""Bifractional Brownian motion: exact and approximate sampling plus
estimators for its sample-path properties."""
from ._kernels import BACKEND as KERNEL_BACKEND
from .covariance import (
    BifBmParams,
    CovarianceMatrix,
    SheetParams,
    TimeGrid,
    conditional_variance,
    cov_bifbm,
    cov_matrix,
    cov_sheet,
    increment_variance,
    lamperti_cov,
    q_function,
)
from .errors import (
    BifbmError,
    CirculantEmbeddingError,
    ConfigError,
    EstimatorError,
    GridError,
    NotPositiveDefiniteError,
    ParameterError,
    QuadratureError,
    SingularConditionerError,
    TailMassError,
)
from .rng import RNG_ALGORITHM
from .sampler import (
    SampleField,
    SamplePath,
    sample_cholesky,
    sample_lamperti,
    sample_paths,
    sample_sheet,
    sample_spectral,
)
from .spectral import spectral_density, spectral_density_filon

__version__ = "0.1.0"
