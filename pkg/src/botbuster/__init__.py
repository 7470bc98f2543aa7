"""Botnet identification from message innovation rates.

Randomized application-layer DDoS bots emulate normal traffic by picking
messages from a shared, growing dictionary.  Their joint rate of new messages
is lower than that of independent users, which is what the pairwise test in
:mod:`botbuster.rr` and the greedy search in :mod:`botbuster.algorithm`
exploit.
"""

__version__ = "0.1.0"

from .algorithm import BotnetEstimate, TraceIndex, botbuster, botbuster_grid
from .errors import (BotBusterError, ConfigError, DisjointnessError, DomainError, MergeError,
                     NumericalError, OrderingError, TraceFormatError)
from .evaluation import EvalReport, evaluate, evaluate_sweep
from .indicators import Indicators, compute_indicators, r_function
from .rr import Decision, RrSolution, bic_check, reference_quantities, solve_delta_star
from .synth import (BotnetConfig, EmulationDictionary, NormalConfig, Poisson, SimConfig, Synchronous,
                    generate_botnet_trace, generate_normal_trace, merge_traces)
from .trace import (Subnet, SubnetStats, Trace, TraceEvent, fold_event, read_trace, subnet_stats,
                    union_stats, write_trace)
