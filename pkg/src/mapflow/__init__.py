"""Optimal multi-robot path planning on graphs via time-expanded flow models."""

from .core import (
    DiagonalSquare,
    Graph,
    GraphError,
    InstanceError,
    MapfInstance,
    MotionRule,
    Solution,
    SolutionError,
    ValidationReport,
    Violation,
    grid_graph,
    shortest_path_length,
    validate_solution,
)
from .expansion import (
    CostProfile,
    Flow,
    FlowError,
    TimeExpandedNetwork,
    expand,
    flow_to_paths,
    paths_to_flow,
    verify_flow,
)
from .ilp import IlpModel, build_dompp_model, build_tompp_model, check_assignment, export_lp
from .solver import (
    Assignment,
    BridgeError,
    SolveOutcome,
    SolveStatus,
    SolverConfig,
    SolverError,
    solve,
    solve_external,
)
from .planner import PlanConfig, PlanResult, PlanStatus, dompp, tompp
from .puzzle import (
    CycleMove,
    PuzzleState,
    apply_move,
    bfs_depth,
    bfs_solve,
    branching_counts,
    constructive_solve,
    enumerate_cycles,
    puzzle_instance,
    random_state,
)
from .heuristic import RepairConfig, decoupled_paths, local_repair_solve
from .fixtures import (
    corridor_pocket_instance,
    demo_puzzle_instance,
    demo_puzzle_state,
    gen_grid_instance,
    tradeoff_instance,
)
from .formats import FormatError, format_instance, format_solution, parse_instance, parse_solution

__version__ = "0.1.0"
