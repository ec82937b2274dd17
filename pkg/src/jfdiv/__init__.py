"""Jensen-Fisher divergence and related information functionals for univariate densities."""

__version__ = "0.1.0"

from .densities import (
    Density,
    GammaLikeParams,
    GridDensity,
    HermiteParams,
    SinusoidalParams,
    Support,
    WeightVector,
    grid_density,
    load_grid_density,
    make_gamma_like,
    make_gaussian,
    make_rakhmanov_hermite,
    make_sinusoidal,
    make_smooth_uniform,
    make_uniform,
    mixture,
    read_grid_file,
)
from .divergences import (
    DeBruijnResult,
    DivergenceReport,
    Path,
    Status,
    classic_debruijn_check,
    debruijn_check,
    directed_jfd,
    fisher_divergence_g,
    fisher_information,
    gaussian_smooth,
    jfd,
    jfd_weighted,
    jsd,
    jsd_weighted,
    kl_divergence,
    relative_fisher,
    shannon_entropy,
)
from .errors import (
    DensityError,
    InadmissibleDensity,
    NegativeDensity,
    NormalizationError,
    NotConvergedError,
    TooFewPoints,
    UnsortedAbscissae,
)
from .hermite import hermite_function, hermite_log_abs, hermite_zeros
from .quadrature import QuadConfig, QuadResult, QuadStatus, fisher_integrand, integrate, relative_fisher_integrand
