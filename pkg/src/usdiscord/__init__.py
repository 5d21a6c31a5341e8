"""Assisted unambiguous state discrimination and the discord it consumes."""

__version__ = "0.1.0"

from .config import DEFAULT, Config, OptimizerConfig, Tolerances
from .correlations import (
    DiscordReport,
    MeasurementBasis,
    OperatorSchmidtDecomposition,
    conditional_entropy,
    discord,
    left_zero_condition_closed_form,
    operator_schmidt,
    zero_discord_certify,
)
from .discrimination import (
    OptimumReport,
    TrialStats,
    alpha_bar,
    equal_overlap_optimal,
    optimal_probability,
    run_monte_carlo,
    success_probability_d,
    success_probability_parameterized,
    success_probability_two,
)
from .ensembles import (
    Ensemble,
    ProtocolState,
    build_d_state,
    build_two_state,
    hadamard_relabel,
    states_from_gram,
    validate_embedding,
)
from .matrixcore import (
    DensityMatrix,
    Spectrum,
    hermitian_spectrum,
    kron,
    mutual_information,
    partial_trace,
    partial_transpose,
    von_neumann_entropy,
)
from .separability import (
    SeparabilityVerdict,
    SeparableDecomposition,
    build_decomposition,
    d_state_condition,
    minor_determinant,
    minor_matrix,
    ppt_test,
    two_state_condition,
)
