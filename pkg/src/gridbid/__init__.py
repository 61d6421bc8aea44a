"""gridbid: iterated generation-bidding game on a DC-approximated power grid.

A deterministic bounded-variable simplex (compiled kernel with a pure-Python
fallback) solves the retailer's economic dispatch; the market layer iterates
the clearing-price fixed point; the game layer evolves supplier prices under
best-response and better-response play and classifies the trajectories.
"""

from .cases import (CaseFile, bundled_case_path, dump_case, load_case,
                    load_case9, load_case_file, parse_case, save_case)
from .dcopf import DispatchSolution, OpfRequest, build_opf, solve_opf
from .errors import (CaseFormatError, ClearingNotConvergedError,
                     DegenerateMarketError, GridbidError, LpInternalError,
                     LpStructureError, NoProfitableAllocationError,
                     OpfInfeasibleError, OracleGuardError, RoundError)
from .game import (Classification, GameConfig, GameEngine, RoundRecord,
                   Trajectory, best_response, better_response_step,
                   classify_trajectory, frozen_utility, play_round,
                   quiver_field, run_game)
from .kernel import kernel_name
from .lp import (LinearProgram, LpSolution, enumerate_vertices_oracle,
                 feasibility_residuals, solve_lp)
from .market import (ClearingState, MarketParams, clearing_fixed_point,
                     clearing_price, consumer_utility, soft_bounds,
                     split_demand, total_demand, utility)
from .network import (Branch, Bus, Generator, Load, PowerNetwork,
                      effective_capacity, total_effective_capacity, validate)
from .sweep import SweepCell, SweepSpec, run_sweep

__version__ = "0.1.0"

__all__ = [
    "Branch", "Bus", "CaseFile", "CaseFormatError", "Classification",
    "ClearingNotConvergedError", "ClearingState", "DegenerateMarketError",
    "DispatchSolution", "GameConfig", "GameEngine",
    "Generator", "GridbidError", "LinearProgram", "Load", "LpInternalError",
    "LpSolution", "LpStructureError", "MarketParams",
    "NoProfitableAllocationError", "OpfInfeasibleError", "OpfRequest",
    "OracleGuardError", "PowerNetwork", "RoundError", "RoundRecord",
    "SweepCell", "SweepSpec", "Trajectory", "best_response",
    "better_response_step", "build_opf", "bundled_case_path",
    "classify_trajectory", "clearing_fixed_point", "clearing_price",
    "consumer_utility", "dump_case", "effective_capacity",
    "enumerate_vertices_oracle", "feasibility_residuals", "frozen_utility",
    "kernel_name", "load_case", "load_case9", "load_case_file", "parse_case",
    "play_round", "quiver_field", "run_game", "run_sweep", "save_case",
    "solve_lp", "solve_opf", "soft_bounds", "split_demand", "total_demand",
    "total_effective_capacity", "utility", "validate",
]
