"""DoF region, sum DoF, and generalized-signal-alignment synthesis for the
asymmetric two-pair MIMO two-way relay channel."""

from .errors import (
    AlignmentInfeasible,
    GsaRelayError,
    InfeasibleTuple,
    InvalidConfig,
    InvalidDesign,
    InvalidMatrix,
    InvalidTuple,
    NonIntegerTuple,
    SingularMatrix,
    TooManyStreams,
)
from .numkernel import (
    DEFAULT_TOL,
    Tolerance,
    null_space_basis,
    random_complex_gaussian,
    rank,
    solve_square,
)
from .region import (
    FACET_LABELS,
    AntennaConfig,
    DoFTuple,
    Regime,
    RegionConstraint,
    SumDofResult,
    UserPermutation,
    canonical_configs,
    canonicalize,
    in_region,
    optimal_vertices,
    region_constraints,
    regime_of,
    sum_dof_closed_form,
    sum_dof_oracle,
    symmetrize,
)
from .synthesis import (
    ChannelSet,
    DesignDiagnostics,
    FeasibilityReport,
    TransceiverDesign,
    check_gsa_feasibility,
    complete_unidirectional,
    design_bc,
    design_pair_precoders,
    design_relay_compression,
    effective_antennas,
    mac_decoder,
    synthesize,
)
from .linksim import (
    MutualInfoReport,
    RecoveryReport,
    SnrPoint,
    SymbolBlock,
    estimate_dof_slope,
    run_noiseless,
    run_noisy,
)

__version__ = "0.1.0"

__all__ = [
    "AlignmentInfeasible",
    "AntennaConfig",
    "ChannelSet",
    "DEFAULT_TOL",
    "DesignDiagnostics",
    "DoFTuple",
    "FACET_LABELS",
    "FeasibilityReport",
    "GsaRelayError",
    "InfeasibleTuple",
    "InvalidConfig",
    "InvalidDesign",
    "InvalidMatrix",
    "InvalidTuple",
    "MutualInfoReport",
    "NonIntegerTuple",
    "RecoveryReport",
    "Regime",
    "RegionConstraint",
    "SingularMatrix",
    "SnrPoint",
    "SumDofResult",
    "SymbolBlock",
    "Tolerance",
    "TooManyStreams",
    "TransceiverDesign",
    "UserPermutation",
    "canonical_configs",
    "canonicalize",
    "check_gsa_feasibility",
    "complete_unidirectional",
    "design_bc",
    "design_pair_precoders",
    "design_relay_compression",
    "effective_antennas",
    "estimate_dof_slope",
    "in_region",
    "mac_decoder",
    "null_space_basis",
    "optimal_vertices",
    "random_complex_gaussian",
    "rank",
    "region_constraints",
    "regime_of",
    "run_noiseless",
    "run_noisy",
    "solve_square",
    "sum_dof_closed_form",
    "sum_dof_oracle",
    "symmetrize",
    "synthesize",
]
