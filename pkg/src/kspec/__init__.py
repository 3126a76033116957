"""Spectral analysis of the multivariate Kendall tau matrix.

The package covers the pipeline from raw samples to limit-law comparisons:
Kendall tau and covariance estimators (:mod:`kspec.matrix`), empirical
spectral distributions and metric utilities (:mod:`kspec.spectra`), the
Marchenko-Pastur family in closed form (:mod:`kspec.mp`), the general
limit-spectrum fixed-point solver (:mod:`kspec.lsd`), reproducible Monte
Carlo experiments (:mod:`kspec.simulate`), and file formats plus a CLI
(:mod:`kspec.io`, :mod:`kspec.cli`).
"""

from .exceptions import (
    AllPairsDegenerateError,
    AllZeroSpectrumError,
    ConvergenceFailureError,
    DegeneratePairError,
    EmptyGridError,
    GridDoesNotCoverSupportError,
    IndefiniteBeyondToleranceError,
    InsufficientSamplesError,
    KspecError,
    LeftUniquenessSetError,
    NoConvergenceError,
    NotPSDError,
    NotSymmetricError,
    NotUpperHalfPlaneError,
    ShapeMismatchError,
)
from .io import ConfigError, load_manifest, load_sample_matrix, read_kspc, write_kspc
from .lsd import (
    SolverConfig,
    SolverResult,
    SpectralMeasure,
    density_from_stieltjes,
    measure_from_sigma,
    solve_stieltjes,
)
from .matrix import (
    CovarianceForm,
    CovarianceMatrix,
    DegeneratePolicy,
    KendallTauMatrix,
    SampleMatrix,
    delta_n,
    kendall_tau,
    sample_covariance,
)
from .mp import (
    MPParams,
    default_z_grid,
    ise,
    mp_cdf,
    mp_density,
    mp_quantiles,
    mp_stieltjes,
    mp_support,
)
from .simulate import (
    ExperimentResult,
    GeneratorFamily,
    GeneratorSpec,
    ModelSpec,
    generate,
    population_kendall_spectrum,
    psd_sqrt,
    replication_seed,
    run_experiment,
)
from .spectra import (
    BoundCheck,
    SmoothedDensity,
    SpectralDistribution,
    check_levy4_bound,
    check_levy_norm_bound,
    check_rank_bound,
    eigenvalues_symmetric,
    esd_eval,
    kernel_smooth,
    kolmogorov_distance,
    kolmogorov_to_cdf,
    levy_distance,
    stieltjes_empirical,
)

__version__ = "0.1.0"

__all__ = [
    "AllPairsDegenerateError",
    "AllZeroSpectrumError",
    "BoundCheck",
    "ConfigError",
    "ConvergenceFailureError",
    "CovarianceForm",
    "CovarianceMatrix",
    "DegeneratePairError",
    "DegeneratePolicy",
    "EmptyGridError",
    "ExperimentResult",
    "GeneratorFamily",
    "GeneratorSpec",
    "GridDoesNotCoverSupportError",
    "IndefiniteBeyondToleranceError",
    "InsufficientSamplesError",
    "KendallTauMatrix",
    "KspecError",
    "LeftUniquenessSetError",
    "MPParams",
    "ModelSpec",
    "NoConvergenceError",
    "NotPSDError",
    "NotSymmetricError",
    "NotUpperHalfPlaneError",
    "SampleMatrix",
    "ShapeMismatchError",
    "SmoothedDensity",
    "SolverConfig",
    "SolverResult",
    "SpectralDistribution",
    "SpectralMeasure",
    "check_levy4_bound",
    "check_levy_norm_bound",
    "check_rank_bound",
    "default_z_grid",
    "delta_n",
    "density_from_stieltjes",
    "eigenvalues_symmetric",
    "esd_eval",
    "generate",
    "ise",
    "kendall_tau",
    "kernel_smooth",
    "kolmogorov_distance",
    "kolmogorov_to_cdf",
    "levy_distance",
    "load_manifest",
    "load_sample_matrix",
    "measure_from_sigma",
    "mp_cdf",
    "mp_density",
    "mp_quantiles",
    "mp_stieltjes",
    "mp_support",
    "population_kendall_spectrum",
    "psd_sqrt",
    "read_kspc",
    "replication_seed",
    "run_experiment",
    "sample_covariance",
    "solve_stieltjes",
    "stieltjes_empirical",
    "write_kspc",
]
