"""Power allocation, phase regulation and relay selection for a full-duplex
underlay relay network sharing spectrum with a radar receiver."""

from .experiment import Algorithm, SweepRow, SweepSpec, emit_csv, emit_table, parse_csv, run_sweep
from .interference import (CoherentTerms, PhaseAssignment, PhasePartition, coherent_terms, interference_coherent,
                           interference_coherent_expanded, interference_coherent_partition,
                           interference_noncoherent_full, interference_noncoherent_simplified, phase_gradient,
                           phase_hessian_diag)
from .model import (ChannelRealization, PowerAllocation, ScenarioConfig, db_to_linear, generate_channels,
                    linear_to_db, load_config)
from .optimizer import (InfeasiblePointError, SolveResult, SolverOptions, feasible_interval, solve,
                        solve_coordinate_ascent, solve_grid_oracle)
from .partition import PartitionInstance, PartitionSolution, solve_bruteforce, solve_cga, solve_greedy
from .rate import RateBreakdown, achievable_rate, amplification_gain, simplified_rate_objective
from .selection import select, select_multi, select_single

__version__ = "0.1.0"
