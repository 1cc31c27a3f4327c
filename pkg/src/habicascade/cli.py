"""Command-line entry point.

Exit codes: 0 success, 1 usage error, 2 I/O error, 3 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
from pathlib import Path
from typing import Sequence, TextIO

import numpy as np

from . import __version__
from .diffusion import (SETUPS, Cadence, DiffusionConfig, Ranking, Seeding, draw_coordinated,
                        monte_carlo_coverage, rank_nodes, run_batch)
from .graph import EdgeListError, Graph, generate_ba, generate_er, generate_ws, graph_metrics, \
    write_edge_list
from .grid import (GridConfigError, ResultRow, build_network, default_jobs,
                   default_network_name, derive_seed, execute_grid, expand_grid, fmt_number,
                   load_grid_spec, write_run_records)
from .habituation import HabituationParams
from .oracle import OracleLimitError, exact_expected_coverage
from .stats import SUMMARY_AXES, summarize

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_VERIFY = 0, 1, 2, 3

SUMMARY_COLUMNS = (
    "axis", "value", "n_rows",
    "mean_coverage_single", "mean_coverage_single_hab",
    "mean_coverage_sequential", "mean_coverage_sequential_hab",
    "mean_duration_single", "mean_duration_single_hab",
    "mean_duration_sequential", "mean_duration_sequential_hab",
    "decrease_single", "decrease_sequential", "increase_plain", "increase_hab",
    "duration_ratio_plain", "duration_ratio_hab",
    "hab_effect_pseudomedian", "hab_effect_p_value",
    "seq_effect_pseudomedian", "seq_effect_p_value", "truncated",
)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _probability(text: str) -> float:
    value = float(text)
    if not 0.0 <= value <= 1.0:
        raise argparse.ArgumentTypeError(f"{text} is not in [0, 1]")
    return value


def _positive(text: str) -> float:
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError(f"{text} is not positive")
    return value


def _count(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"{text} must be at least 1")
    return value


def _add_diffusion_flags(p: argparse.ArgumentParser, both: bool) -> None:
    p.add_argument("network", help="edge-list file or generator spec such as ba:n=1000,m=7,seed=1")
    p.add_argument("--pp", type=_probability, default=0.05, help="propagation probability")
    p.add_argument("--sf", type=_probability, default=0.02, help="seed fraction")
    p.add_argument("--ranking", choices=[r.value for r in Ranking], default="degree")
    seeding = [s.value for s in Seeding] + (["both"] if both else [])
    p.add_argument("--seeding", choices=seeding, default="both" if both else "single")
    hab = ["on", "off"] + (["both"] if both else [])
    p.add_argument("--habituation", choices=hab, default="both" if both else "on")
    p.add_argument("--tau", type=_positive, default=1.0)
    p.add_argument("--alpha", type=_positive, default=1.05)
    p.add_argument("--cadence", choices=[c.value for c in Cadence], default="revival",
                   help="when sequential seeding spends a seed")
    p.add_argument("--restart", choices=["continuous", "literal"], default="continuous",
                   help="how a recovering node resumes habituating")
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="habicascade", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    gen = sub.add_parser("generate", help="write a synthetic network as an edge list")
    gen.add_argument("model", choices=["ba", "er", "ws"])
    gen.add_argument("--n", type=int, required=True)
    gen.add_argument("--m", type=int, help="BA: edges per new node")
    gen.add_argument("--p", type=float, help="ER: edge probability")
    gen.add_argument("--k", type=int, help="WS: lattice degree (even)")
    gen.add_argument("--beta", type=float, help="WS: rewiring probability")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", type=Path, help="output file (default: stdout)")

    met = sub.add_parser("metrics", help="print network metrics")
    met.add_argument("network")

    run = sub.add_parser("run", help="paired runs on one network, CSV on stdout")
    _add_diffusion_flags(run, both=True)
    run.add_argument("--runs", type=_count, default=5)
    run.add_argument("--out", type=Path, help="output file (default: stdout)")

    grid = sub.add_parser("grid", help="execute a grid file")
    grid.add_argument("config", type=Path)
    grid.add_argument("--out", type=Path, default=Path("."), help="output directory")
    grid.add_argument("--jobs", type=_count, default=default_jobs())
    grid.add_argument("--dry-run", action="store_true",
                      help="print the number of configurations and exit")

    ver = sub.add_parser("verify", help="compare Monte-Carlo coverage with the exact oracle")
    _add_diffusion_flags(ver, both=False)
    ver.add_argument("--samples", type=_count, default=100_000)
    return parser


def _load_network(source: str) -> tuple[str, Graph]:
    try:
        g = build_network(source)
    except (OSError, EdgeListError) as exc:
        raise OSError(f"cannot read network {source!r}: {exc}") from exc
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    return default_network_name(source), g


def _print_metrics(g: Graph, out: TextIO) -> None:
    m = graph_metrics(g)
    print(f"nodes {g.node_count}", file=out)
    print(f"edges {g.edge_count}", file=out)
    print(f"mean_degree {fmt_number(m.mean_degree)}", file=out)
    print(f"global_clustering {fmt_number(m.global_clustering)}", file=out)
    print(f"mean_eigenvector_centrality {fmt_number(m.mean_eigenvector_centrality)}", file=out)


def cmd_generate(args) -> int:
    params = {"ba": ("m",), "er": ("p",), "ws": ("k", "beta")}[args.model]
    missing = [f"--{p}" for p in params if getattr(args, p) is None]
    if missing:
        raise UsageError(f"{args.model} needs {' '.join(missing)}")
    try:
        if args.model == "ba":
            g = generate_ba(args.n, args.m, args.seed)
        elif args.model == "er":
            g = generate_er(args.n, args.p, args.seed)
        else:
            g = generate_ws(args.n, args.k, args.beta, args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if args.out is None:
        write_edge_list(g, sys.stdout)
        _print_metrics(g, sys.stderr)
    else:
        write_edge_list(g, args.out)
        _print_metrics(g, sys.stdout)
    return EXIT_OK


def cmd_metrics(args) -> int:
    _, g = _load_network(args.network)
    _print_metrics(g, sys.stdout)
    return EXIT_OK


def _base_config(args) -> DiffusionConfig:
    if args.sf <= 0:
        raise UsageError("--sf must be positive")
    try:
        hp = HabituationParams(alpha=args.alpha, tau=args.tau, restart=args.restart)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    return DiffusionConfig(args.pp, args.sf, ranking=Ranking(args.ranking),
                           habituation_params=hp, cadence=Cadence(args.cadence))


def cmd_run(args) -> int:
    name, g = _load_network(args.network)
    cfg = _base_config(args)
    setups = [(s, h) for s, h in SETUPS
              if args.seeding in ("both", s.value)
              and args.habituation in ("both", "on" if h else "off")]
    seeds = [derive_seed(args.seed, name, r) for r in range(args.runs)]
    draws = np.stack([draw_coordinated(g, s).values for s in seeds])
    if cfg.ranking is Ranking.DEGREE:
        rankings = rank_nodes(g, Ranking.DEGREE)[None, :]
    else:
        rankings = np.stack([rank_nodes(g, Ranking.RANDOM, s) for s in seeds])
    rows = []
    for seeding, hab in setups:
        b = run_batch(g, cfg.with_setup(seeding, hab), draws, rankings)
        rows.append(ResultRow(
            name, cfg.propagation_probability, cfg.seed_fraction, cfg.ranking,
            cfg.habituation_params.tau, cfg.habituation_params.alpha, seeding, hab,
            tuple(b.coverage.tolist()), tuple(b.duration.tolist()),
            tuple(b.seeds_used.tolist()), tuple(b.truncated.tolist())))
    if args.out is None:
        write_run_records(rows, sys.stdout)
    else:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            write_run_records(rows, fh)
    return EXIT_OK


def write_summary(rows: Sequence[ResultRow], out: TextIO) -> None:
    writer = csv.writer(out, lineterminator="\r\n")
    writer.writerow(SUMMARY_COLUMNS)
    groupings = [("all", [])] + [(axis, [axis]) for axis in SUMMARY_AXES]
    for axis, group_by in groupings:
        for s in summarize(rows, group_by):
            value = "all" if not group_by else s.group[0][1]
            c, d = s.mean_coverage, s.mean_duration
            writer.writerow([
                axis, value if isinstance(value, str) else fmt_number(value), s.n_rows,
                *(fmt_number(c[k]) for k in ("single", "single_hab", "sequential", "sequential_hab")),
                *(fmt_number(d[k]) for k in ("single", "single_hab", "sequential", "sequential_hab")),
                fmt_number(s.decrease_single), fmt_number(s.decrease_sequential),
                fmt_number(s.increase_plain), fmt_number(s.increase_hab),
                fmt_number(s.duration_ratio_plain), fmt_number(s.duration_ratio_hab),
                fmt_number(s.hab_effect_pseudomedian), fmt_number(s.hab_effect_p_value),
                fmt_number(s.seq_effect_pseudomedian), fmt_number(s.seq_effect_p_value),
                fmt_number(s.truncated),
            ])


def cmd_grid(args) -> int:
    try:
        spec = load_grid_spec(args.config)
    except FileNotFoundError as exc:
        raise OSError(f"cannot read grid file: {exc}") from exc
    configs = expand_grid(spec)
    if args.dry_run:
        print(f"configurations {len(configs)}")
        print(f"rows {4 * len(configs)}")
        return EXIT_OK
    graphs = {}
    for net in spec.networks:
        try:
            graphs[net.name] = net.build(spec.base_dir)
        except (OSError, EdgeListError) as exc:
            raise OSError(f"cannot read network {net.source!r}: {exc}") from exc
        except ValueError as exc:
            raise UsageError(f"networks: {exc}") from exc
    rows = execute_grid(spec, jobs=args.jobs, graphs=graphs)
    args.out.mkdir(parents=True, exist_ok=True)
    with open(args.out / "results.csv", "w", encoding="utf-8", newline="") as fh:
        write_run_records(rows, fh)
    with open(args.out / "summary.csv", "w", encoding="utf-8", newline="") as fh:
        write_summary(rows, fh)
    print(f"{len(configs)} configurations, {len(rows)} rows -> {args.out}")
    return EXIT_OK


def cmd_verify(args) -> int:
    _, g = _load_network(args.network)
    cfg = _base_config(args)
    cfg = cfg.with_setup(Seeding(args.seeding), args.habituation == "on")
    ranking = rank_nodes(g, cfg.ranking, args.seed)
    try:
        exact = exact_expected_coverage(g, cfg, ranking)
    except OracleLimitError as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return EXIT_USAGE
    mean, se = monte_carlo_coverage(g, cfg, ranking, args.samples, args.seed)
    bound = 4.0 * se + 1e-9
    ok = abs(mean - exact) <= bound
    print(f"oracle {exact:.9g}")
    print(f"monte_carlo {mean:.9g}")
    print(f"standard_error {se:.9g}")
    print(f"samples {args.samples}")
    print(f"deviation_sigmas {abs(mean - exact) / se if se > 0 else (0.0 if ok else math.inf):.3g}")
    print("PASS" if ok else "FAIL")
    return EXIT_OK if ok else EXIT_VERIFY


COMMANDS = {"generate": cmd_generate, "metrics": cmd_metrics, "run": cmd_run,
            "grid": cmd_grid, "verify": cmd_verify}


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (UsageError, GridConfigError) as exc:
        print(f"habicascade: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"habicascade: error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
