"""Counting bounds for independent transversals in multipartite graphs."""

from .bounds import (
    BoundReport,
    Method,
    TriangleProgram,
    cycle_bound,
    fhl_baseline,
    main_bound,
    triangle_bound,
    triangle_grid_oracle,
)
from .canonicalize import QGraph, canonicalize, recover_primal, support_graph, to_decomposition
from .construct import ExtremalConstruction, build_extremal, core_guarantee
from .count import CountResult, count_exact, count_naive, count_sample
from .decomp import (
    OddCycleDecomposition,
    brute_min,
    decomposition_count,
    enumerate_decompositions,
    evaluate,
)
from .errors import GuardError, NumericalError, TransversalError, ValidationError
from .lp import (
    DualSolution,
    LogWeights,
    PrimalSolution,
    build_log_weights,
    check_complementary_slackness,
    solve,
    solve_lp2,
    solve_lp2_dual,
)
from .model import DensityMatrix, Mode, MultipartiteGraph, PartSpec, validate_densities

__version__ = "0.1.0"

__all__ = [
    "BoundReport",
    "CountResult",
    "DensityMatrix",
    "DualSolution",
    "ExtremalConstruction",
    "GuardError",
    "LogWeights",
    "Method",
    "Mode",
    "MultipartiteGraph",
    "NumericalError",
    "OddCycleDecomposition",
    "PartSpec",
    "PrimalSolution",
    "QGraph",
    "TransversalError",
    "TriangleProgram",
    "ValidationError",
    "brute_min",
    "build_extremal",
    "build_log_weights",
    "canonicalize",
    "check_complementary_slackness",
    "core_guarantee",
    "count_exact",
    "count_naive",
    "count_sample",
    "cycle_bound",
    "decomposition_count",
    "enumerate_decompositions",
    "evaluate",
    "fhl_baseline",
    "main_bound",
    "recover_primal",
    "solve",
    "solve_lp2",
    "solve_lp2_dual",
    "support_graph",
    "to_decomposition",
    "triangle_bound",
    "triangle_grid_oracle",
    "validate_densities",
]
