"""Pooled-data testing toolkit: generative model, exhaustive ML decoding,
information-theoretic lower bounds, and seeded Monte Carlo experiments."""

from .model import (
    LabelCounts,
    NoiseModel,
    Proportions,
    TestDesign,
    bernoulli_design,
    count_labels,
    observe,
    round_proportions,
    sample_beta,
)
from .infotheory import (
    DiscretePmf,
    GeniePattern,
    QuadratureError,
    binomial_pmf,
    gaussian_mixture_entropy,
    hypergeometric_pmf,
    hypergeometric_variance,
    log_B_ell,
    log_hamming_ball,
    log_multinomial,
    massey_bound,
    pmf_entropy,
)
from .bounds import (
    BoundReport,
    RegimeError,
    approx_recovery_threshold,
    bernoulli_noiseless_bound,
    counting_pe_lower,
    f_ratio,
    fano_bound,
    gaussian_single_item_bound,
    gaussian_subset_bound,
    group_testing_bound,
    mi_gaussian_bernoulli,
    mi_noiseless_bernoulli,
    noiseless_threshold,
    pi_reduced,
)
from .decode import (
    DecodeResult,
    EnumerationGuardError,
    OracleResult,
    approx_success,
    enumerate_B,
    exact_pe_oracle,
    ml_decode,
)
from .experiments import (
    ExperimentConfig,
    PeEstimate,
    SweepResult,
    estimate_pe,
    figure1_data,
    run_trial,
    sweep_n,
)

__version__ = "0.1.0"
