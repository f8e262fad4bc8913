"""Ride-sharing games, Bayesian uncertainty over vehicle supply, and
mediator signaling through Bayes correlated equilibrium."""

__version__ = "0.1.0"

from .bayes import (
    BayesianGame, NormalFormTable, Prior, build_state_tables, expected_cost,
    expected_table,
)
from .engine import StateInstance, edge_cost, simulate_day, step_allocation, system_cost
from .equilibria import (
    analyze_equilibria, ex_ante_optimum, full_info_optimum, price_of_anarchy,
    pure_bayes_nash,
)
from .lp import LinearProgram, LPStatus, solve_lp, vertex_oracle
from .model import (
    EdgeCostTable, GameDefinition, RoadNetwork, Trip, enumerate_trips,
    validate_cost_table, validate_network, validate_trip,
)
from .signaling import (
    SignalingPolicy, bce_poa, build_bce_lp, policy_value, sample_recommendation,
    solve_bce, verify_ic,
)
from .cli.gamefile import load_game_file
