"""Exception hierarchy shared by all modules."""


class BifbmError(Exception):
    """Base class for every error raised by this package."""


class ParameterError(BifbmError, ValueError):
    """Exponents or dimensions outside their admissible range."""


class GridError(BifbmError, ValueError):
    """Malformed time grid, or a grid unsuited to the requested method."""


class NotPositiveDefiniteError(BifbmError):
    """Cholesky factorisation failed even at the maximum diagonal jitter."""


class SingularConditionerError(BifbmError):
    """The conditioning block of a Gram matrix is numerically singular."""


class QuadratureError(BifbmError):
    """An oscillatory quadrature could not reach the requested tolerance."""


class CirculantEmbeddingError(BifbmError):
    """The circulant embedding has negative eigenvalues.

    ``min_eigenvalue`` carries the realised floor so callers can decide
    whether to enlarge the embedding or fall back to an exact sampler.
    """

    def __init__(self, message, min_eigenvalue, embed_size):
        super().__init__(message)
        self.min_eigenvalue = min_eigenvalue
        self.embed_size = embed_size


class TailMassError(BifbmError):
    """Spectral mass beyond ``lambda_max`` exceeds the requested tolerance."""


class EstimatorError(BifbmError, ValueError):
    """An estimator received data it cannot work with (empty set, coarse grid...)."""


class ConfigError(BifbmError, ValueError):
    """Invalid experiment configuration (CLI exit status 2)."""
