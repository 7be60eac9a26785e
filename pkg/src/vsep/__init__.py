"""Balanced vertex separators by multiplicative weights.

The pipeline: an outer geometric search over the objective guess runs a
multiplicative-weights update whose feedback comes from a flow-and-
matching oracle against a low-dimensional embedding of the exponential
iterate.  Runs end in a provably balanced separator or an averaged dual
certificate lower-bounding the relaxation.  Exact brute-force oracles
and validators accompany every stage.
"""

from .embedding import (
    AccumulatedOperator,
    Embedding,
    FeedbackMatrix,
    ScheduleError,
    accumulate,
    dense_embedding,
    dense_reference,
    project_embedding,
)
from .flow import (
    FlowError,
    FlowNetwork,
    FlowPath,
    FlowResult,
    SplitNetwork,
    build_split_network,
    decompose,
    max_flow,
)
from .graphs import (
    GraphFormatError,
    SeparatorSolution,
    WeightedGraph,
    brute_force_opt,
    connected_components,
    generate,
    make_graph,
    parse_graph,
    parse_separator,
    render_graph,
    render_separator,
    validate_separator,
)
from .oracle import (
    FeedbackOutcome,
    MatchingOutcome,
    OracleCounters,
    OracleError,
    OracleParams,
    SeparatorOutcome,
    chain,
    easy_case,
    matching,
    run_oracle,
)
from .solver import (
    CertificateFound,
    CertificationError,
    DualCertificate,
    Inconclusive,
    MMWUSchedule,
    PrimalWitness,
    SeparatorFound,
    SolveReport,
    SolverConfig,
    binary_search_solve,
    clamp_epsilon,
    make_oracle_params,
    mmwu_run,
    primal_witness,
    rationalize_beta,
    report_to_dict,
)

__version__ = "0.1.0"

__all__ = [
    "AccumulatedOperator",
    "Embedding",
    "FeedbackMatrix",
    "ScheduleError",
    "accumulate",
    "dense_embedding",
    "dense_reference",
    "project_embedding",
    "FlowError",
    "FlowNetwork",
    "FlowPath",
    "FlowResult",
    "SplitNetwork",
    "build_split_network",
    "decompose",
    "max_flow",
    "GraphFormatError",
    "SeparatorSolution",
    "WeightedGraph",
    "brute_force_opt",
    "connected_components",
    "generate",
    "make_graph",
    "parse_graph",
    "parse_separator",
    "render_graph",
    "render_separator",
    "validate_separator",
    "FeedbackOutcome",
    "MatchingOutcome",
    "OracleCounters",
    "OracleError",
    "OracleParams",
    "SeparatorOutcome",
    "chain",
    "easy_case",
    "matching",
    "run_oracle",
    "CertificateFound",
    "CertificationError",
    "DualCertificate",
    "Inconclusive",
    "MMWUSchedule",
    "PrimalWitness",
    "SeparatorFound",
    "SolveReport",
    "SolverConfig",
    "binary_search_solve",
    "clamp_epsilon",
    "make_oracle_params",
    "mmwu_run",
    "primal_witness",
    "rationalize_beta",
    "report_to_dict",
    "__version__",
]
