"""Exact circulant-embedding simulation of improper complex Gaussian processes."""

__version__ = "0.1.0"

from improper_sim.covariance import (
    BivariateCovariance,
    CovarianceSpec,
    FgnParams,
    bivariate_to_complex,
    complex_to_bivariate,
    fgn_autocovariance,
    fgn_normalizer,
    improper_fgn_spec,
    validate_spec,
)
from improper_sim.embedding import (
    CirculantRows,
    EigenSpectrum,
    NegativeEigenvalueError,
    NegEigPolicy,
    apply_policy,
    build_first_rows,
    eigen_spectrum,
)
from improper_sim.exactness import ExactnessReport, exactness_report
from improper_sim.sampler import (
    CirculantSampler,
    SamplePair,
    simulate_batch,
    synthesize_pair,
)

__all__ = [
    "BivariateCovariance",
    "CirculantRows",
    "CirculantSampler",
    "CovarianceSpec",
    "EigenSpectrum",
    "ExactnessReport",
    "FgnParams",
    "NegEigPolicy",
    "NegativeEigenvalueError",
    "SamplePair",
    "apply_policy",
    "bivariate_to_complex",
    "build_first_rows",
    "complex_to_bivariate",
    "eigen_spectrum",
    "exactness_report",
    "fgn_autocovariance",
    "fgn_normalizer",
    "improper_fgn_spec",
    "simulate_batch",
    "synthesize_pair",
    "validate_spec",
]
