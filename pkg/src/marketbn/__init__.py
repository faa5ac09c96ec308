"""Discrete Bayesian-network toolkit for daily financial market data.

The pipeline turns raw price histories into ternary state panels (log
returns, AR-GARCH filtering, tertile binning), learns network structure by
BDeu-scored tabu search under bootstrap consensus, and answers exact
posterior, most-probable-explanation, sensitivity, and next-day shock
queries. A command-line pipeline and a small HTTP service expose the same
computations.
"""

from .dbn import (
    TwoSliceNetwork,
    build_lagged_panel,
    learn_transitions,
    load_two_slice,
    save_two_slice,
    temporal_query,
    unroll,
)
from .discretize import DiscretePanel, discretize
from .errors import FitError, InputError, ZeroProbabilityEvidenceError
from .garch import FilterModel, filter_panel, fit_filter, ljung_box
from .graph import Dag, Pdag, cpdag
from .inference import (
    MpeResult,
    PosteriorReport,
    SweepResult,
    evidence_sweep,
    joint_distribution,
    mpe,
    posterior,
)
from .model import (
    BayesianNetwork,
    Cpt,
    fit_mle,
    load_network,
    network_from_dict,
    network_to_dict,
    save_network,
)
from .panel import TimePanel, load_panel, to_log_returns
from .scoring import BDeuConfig, StateTable, bdeu_score
from .search import (
    EdgeFrequencies,
    SearchControls,
    bootstrap_consensus,
    tabu_search,
)
from .sensitivity import (
    SensitivityReport,
    TornadoEntry,
    arc_diameter,
    mutual_information,
    sensitivity_report,
    sobol_index,
    tornado,
)

__version__ = "0.1.0"

__all__ = [
    "BayesianNetwork",
    "BDeuConfig",
    "Cpt",
    "Dag",
    "DiscretePanel",
    "EdgeFrequencies",
    "FilterModel",
    "FitError",
    "InputError",
    "MpeResult",
    "Pdag",
    "PosteriorReport",
    "SearchControls",
    "SensitivityReport",
    "StateTable",
    "SweepResult",
    "TimePanel",
    "TornadoEntry",
    "TwoSliceNetwork",
    "ZeroProbabilityEvidenceError",
    "arc_diameter",
    "bdeu_score",
    "bootstrap_consensus",
    "build_lagged_panel",
    "cpdag",
    "discretize",
    "evidence_sweep",
    "filter_panel",
    "fit_filter",
    "fit_mle",
    "joint_distribution",
    "learn_transitions",
    "ljung_box",
    "load_network",
    "load_panel",
    "load_two_slice",
    "mpe",
    "mutual_information",
    "network_from_dict",
    "network_to_dict",
    "posterior",
    "save_network",
    "save_two_slice",
    "sensitivity_report",
    "sobol_index",
    "tabu_search",
    "temporal_query",
    "to_log_returns",
    "tornado",
    "unroll",
    "__version__",
]
