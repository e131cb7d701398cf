"""Numerical laboratory for noncoherent MIMO codeword detection."""

from .model import (
    Alphabet,
    ChannelModel,
    Codeword,
    ConditionalCovariance,
    ModelError,
    NoiseModel,
    PowerConfig,
    SystemDims,
    check_normalizations,
    conditional_covariance,
    expand_codeword,
    sample_received,
    snr,
)
from .detector import DetectorBank, llr, log_likelihood, ml_detect
from .pep import (
    ErrorBounds,
    PepEstimate,
    error_prob_bounds,
    pep_monte_carlo,
    pep_quadform,
    symbol_error_monte_carlo,
)
from .divergence import (
    GammaSpectrum,
    NormalizedCovariance,
    SimoPair,
    equivalent_condition_stats,
    jeffreys_norm_form,
    jeffreys_trace,
    jeffreys_weighted_form,
    normalized_covariance,
    simo_bounds,
    simo_jeffreys,
)
from .singularity import (
    DivergenceCurve,
    SingularityReport,
    SubspaceBasis,
    XiMatrix,
    column_space,
    full_singularity_report,
    high_snr_singularity,
    large_array_curve,
    subspaces_equal,
    unique_identifiability,
    xi_matrix,
)
from .codebooks import (
    GrassmannCodebook,
    SubspaceUnionCodebook,
    chordal_distance,
    energy_constellation,
    random_grassmannian,
    refine_packing,
    subspace_union_codebook,
    validate_codebook,
)

__version__ = "0.1.0"
