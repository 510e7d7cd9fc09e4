"""monolab: numerical laboratory for entanglement monogamy and polygamy.

Subsystem 0 is the most significant tensor factor in every basis ordering.
"""

from .errors import BracketError, CapabilityError, ConsistencyError, DomainError, UnsupportedDimsError
from .io import RunReport, dumps_state, load_state, loads_state, state_from_dict, state_to_dict
from .measures import (
    Cut,
    MeasureSpec,
    MeasureValue,
    bipartite,
    concurrence_2q,
    concurrence_assistance_2q,
    concurrence_pure,
    entropy_pure,
    eof_2q,
    evaluate,
    negativity,
    parse_cut,
    parse_measure,
    wootters_lambdas,
)
from .monogamy import (
    ConjectureScanResult,
    PowerConfig,
    PowerEstimate,
    ResidualReport,
    SamplingConfig,
    ScanBudget,
    SplitSpec,
    check_inequality,
    conjecture_scan,
    estimate_monogamy_power,
    estimate_polygamy_power,
    parse_split,
    polygamy_residual,
    residual,
    theorem2_demo,
)
from .propositions import PropositionConfig, PropositionReport, proposition_driver
from .roof import Ensemble, RoofBudget, RoofProblem, RoofResult, assisted_evaluate, ensemble_from_mixing, roof_optimize
from .states import (
    QuantumState,
    RandomSpec,
    bell_state,
    ghz_class_state,
    ghz_state,
    is_ppt_separable,
    local_unitary,
    partial_transpose,
    random_state,
    reduced_state,
    trace_norm,
    w_state,
    werner_state,
)

__version__ = "0.1.0"

__all__ = [
    "assisted_evaluate",
    "bell_state",
    "bipartite",
    "BracketError",
    "CapabilityError",
    "check_inequality",
    "concurrence_2q",
    "concurrence_assistance_2q",
    "concurrence_pure",
    "conjecture_scan",
    "ConjectureScanResult",
    "ConsistencyError",
    "Cut",
    "DomainError",
    "dumps_state",
    "Ensemble",
    "ensemble_from_mixing",
    "entropy_pure",
    "eof_2q",
    "estimate_monogamy_power",
    "estimate_polygamy_power",
    "evaluate",
    "ghz_class_state",
    "ghz_state",
    "is_ppt_separable",
    "load_state",
    "loads_state",
    "local_unitary",
    "MeasureSpec",
    "MeasureValue",
    "negativity",
    "parse_cut",
    "parse_measure",
    "parse_split",
    "partial_transpose",
    "polygamy_residual",
    "PowerConfig",
    "PowerEstimate",
    "proposition_driver",
    "PropositionConfig",
    "PropositionReport",
    "QuantumState",
    "random_state",
    "RandomSpec",
    "reduced_state",
    "residual",
    "ResidualReport",
    "roof_optimize",
    "RoofBudget",
    "RoofProblem",
    "RoofResult",
    "RunReport",
    "SamplingConfig",
    "ScanBudget",
    "SplitSpec",
    "state_from_dict",
    "state_to_dict",
    "theorem2_demo",
    "trace_norm",
    "UnsupportedDimsError",
    "w_state",
    "werner_state",
    "wootters_lambdas",
]
