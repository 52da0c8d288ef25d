"""Loss probabilities for multi-server preemptive-priority loss systems.

Analytic approximations for the first-come-first-displaced (FCFD) and
last-come-first-displaced (LCFD) protocols, plus a discrete-event
simulator of the exact system to check them against.
"""

__version__ = "0.1.0"

from .analytic import (  # noqa: E402
    AnalyticReport,
    BusyPeriodChain,
    GammaMode,
    NumericalError,
    analyze,
    arrival_loss_probabilities,
    blocking_probabilities,
    busy_period_chain,
    busy_period_chain_fcfd,
    busy_period_chain_lcfd,
    erlang_b,
    loss_probabilities,
    preemption_probabilities,
)
from .comparison import ComparisonReport, compare  # noqa: E402
from .distributions import (  # noqa: E402
    Deterministic,
    ErlangK,
    Exponential,
    Hyperexponential,
    ServiceDistribution,
    ZeroExponential,
)
from .model import (  # noqa: E402
    ModelError,
    PriorityClass,
    Protocol,
    SystemModel,
    cumulative_loads,
    cumulative_rates,
    validate,
)
from .simulator import ClassStats, Job, SimConfig, SimulationReport, run, run_replication, select_victim  # noqa: E402
