"""Independent cascade diffusion with node habituation."""

__version__ = "0.1.0"

from .backend import BACKEND, available_backends
from .diffusion import (BatchOutcome, Cadence, DiffusionConfig, EdgeDraws, Ranking, RunOutcome,
                        Seeding, draw_coordinated, monte_carlo_coverage, rank_nodes, run,
                        run_batch, run_paired)
from .graph import (EdgeListError, Graph, GraphMetrics, generate_ba, generate_er, generate_ws,
                    graph_metrics, load_edge_list, parse_edge_list, read_edge_list,
                    write_edge_list)
from .grid import GridSpec, execute_grid, expand_grid, load_grid_spec, parse_grid_spec
from .habituation import HabituationParams, HabituationState, Phase
from .oracle import OracleLimitError, enumerate_outcomes, exact_expected_coverage
from .stats import compare_paired, pseudomedian, relative_change, summarize, wilcoxon_signed_rank

__all__ = [
    "BACKEND", "available_backends",
    "BatchOutcome", "Cadence", "DiffusionConfig", "EdgeDraws", "Ranking", "RunOutcome",
    "Seeding", "draw_coordinated", "monte_carlo_coverage", "rank_nodes", "run", "run_batch",
    "run_paired",
    "EdgeListError", "Graph", "GraphMetrics", "generate_ba", "generate_er", "generate_ws",
    "graph_metrics", "load_edge_list", "parse_edge_list", "read_edge_list", "write_edge_list",
    "GridSpec", "execute_grid", "expand_grid", "load_grid_spec", "parse_grid_spec",
    "HabituationParams", "HabituationState", "Phase",
    "OracleLimitError", "enumerate_outcomes", "exact_expected_coverage",
    "compare_paired", "pseudomedian", "relative_change", "summarize", "wilcoxon_signed_rank",
]
