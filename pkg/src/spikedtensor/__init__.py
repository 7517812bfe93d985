"""Detectability thresholds and seeded Monte-Carlo experiments for rank-r
spiked complex Gaussian tensor models."""

__version__ = "0.1.0"

from .errors import ConfigError, DimensionError, DomainError, ParameterError
from .moment import (
    HypothesisSample,
    MCEstimate,
    RocCurve,
    default_epsilon,
    e1_e2_split,
    log_lr_mc,
    roc_experiment,
    second_moment_direct_mc,
    second_moment_haar_mc,
    simulate_observation,
    xi_empirical_tail,
    xi_tail_probability,
)
from .rate import (
    GrfCloud,
    PsiSet,
    cloud_bound_violations,
    envelope_gap_median,
    eta_expanded,
    eta_hadamard,
    grf_lower_bound,
    grf_psi_rate,
    lemma_sup_bound,
    psi_blocks_from_mode_operators,
    sample_grf_cloud,
)
from .rng import (
    SeedSpec,
    sample_gaussian_tensor,
    sample_haar_unitaries,
    sample_haar_unitary,
    sample_psi_block,
    sample_unit_sphere,
    unitarity_defect,
)
from .spike import (
    GramSet,
    SpikeSpec,
    SpikeSvd,
    build_spike,
    eta_max,
    factors_from_grams,
    gram_set,
    random_gram,
    spec_from_grams,
    spike_svd,
)
from .tensor import (
    frobenius_inner,
    frobenius_norm,
    mode_product,
    mode_product_naive,
    tensor_dims,
)
from .thresholds import (
    ThresholdReport,
    beta_d_second,
    hoelder_condition,
    main_condition,
    matrix_case_mu_max,
    threshold_report,
)

__all__ = [
    "ConfigError",
    "DimensionError",
    "DomainError",
    "GramSet",
    "GrfCloud",
    "HypothesisSample",
    "MCEstimate",
    "ParameterError",
    "PsiSet",
    "RocCurve",
    "SeedSpec",
    "SpikeSpec",
    "SpikeSvd",
    "ThresholdReport",
    "beta_d_second",
    "build_spike",
    "cloud_bound_violations",
    "default_epsilon",
    "e1_e2_split",
    "envelope_gap_median",
    "eta_expanded",
    "eta_hadamard",
    "eta_max",
    "factors_from_grams",
    "frobenius_inner",
    "frobenius_norm",
    "gram_set",
    "grf_lower_bound",
    "grf_psi_rate",
    "hoelder_condition",
    "lemma_sup_bound",
    "log_lr_mc",
    "main_condition",
    "matrix_case_mu_max",
    "mode_product",
    "mode_product_naive",
    "psi_blocks_from_mode_operators",
    "random_gram",
    "roc_experiment",
    "sample_gaussian_tensor",
    "sample_grf_cloud",
    "sample_haar_unitaries",
    "sample_haar_unitary",
    "sample_psi_block",
    "sample_unit_sphere",
    "second_moment_direct_mc",
    "second_moment_haar_mc",
    "simulate_observation",
    "spec_from_grams",
    "spike_svd",
    "tensor_dims",
    "threshold_report",
    "unitarity_defect",
    "xi_empirical_tail",
    "xi_tail_probability",
]
