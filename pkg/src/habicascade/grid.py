"""Cartesian experiment grids with paired, coordinated runs and CSV results.

Every run of a network shares its coordinated draws and random ranking
across all grid cells, keyed only by ``(base_seed, network name, run
index)``. Cells therefore differ only in their parameters, never in their
randomness, and adding values to an axis leaves existing cells untouched.
"""

from __future__ import annotations

import csv
import hashlib
import itertools
import os
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, TextIO

import numpy as np

from .diffusion import (SETUPS, Cadence, DiffusionConfig, Ranking, Seeding, draw_coordinated,
                        rank_nodes, run_batch)
from .graph import Graph, generate_ba, generate_er, generate_ws, read_edge_list
from .habituation import HabituationParams

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

__all__ = [
    "Configuration",
    "GridConfigError",
    "GridSpec",
    "NetworkSource",
    "RUN_RECORD_COLUMNS",
    "ResultRow",
    "derive_seed",
    "execute_grid",
    "expand_grid",
    "load_grid_spec",
    "parse_grid_spec",
    "read_run_records",
    "write_run_records",
]

RUN_RECORD_COLUMNS = (
    "network", "ranking", "pp", "seed_fraction", "seeding", "habituation", "tau",
    "alpha", "run_index", "coverage", "duration", "seeds_used", "truncated",
)


class GridConfigError(ValueError):
    def __init__(self, key: str | None, message: str):
        self.key = key
        super().__init__(f"{key}: {message}" if key else message)


_GENERATOR_RE = re.compile(r"^(ba|er|ws):(.*)$")
_GENERATOR_PARAMS = {
    "ba": (generate_ba, {"n": int, "m": int, "seed": int}),
    "er": (generate_er, {"n": int, "p": float, "seed": int}),
    "ws": (generate_ws, {"n": int, "k": int, "beta": float, "seed": int}),
}


@dataclass(frozen=True)
class NetworkSource:
    """A named network: an edge-list path or a generator spec like ``ba:n=1000,m=7,seed=1``."""

    name: str
    source: str

    @property
    def is_generator(self) -> bool:
        return _GENERATOR_RE.match(self.source) is not None

    def build(self, base_dir: Path | None = None) -> Graph:
        return build_network(self.source, base_dir)


def build_network(source: str, base_dir: Path | None = None) -> Graph:
    m = _GENERATOR_RE.match(source)
    if m is None:
        path = Path(source)
        if base_dir is not None and not path.is_absolute():
            path = base_dir / path
        return read_edge_list(path)
    model, rest = m.groups()
    fn, types = _GENERATOR_PARAMS[model]
    kwargs = {}
    for item in filter(None, (s.strip() for s in rest.split(","))):
        key, sep, value = item.partition("=")
        if not sep or key not in types:
            raise ValueError(f"bad {model} parameter {item!r}; expected {', '.join(types)}")
        kwargs[key] = types[key](value)
    missing = set(types) - set(kwargs) - {"seed"}
    if missing:
        raise ValueError(f"{model} generator needs {', '.join(sorted(missing))}")
    seed = kwargs.pop("seed", 0)
    return fn(**kwargs, random_seed=seed)


def default_network_name(source: str) -> str:
    if _GENERATOR_RE.match(source):
        return source
    return Path(source).stem


@dataclass(frozen=True)
class GridSpec:
    networks: tuple[NetworkSource, ...]
    propagation_probabilities: tuple[float, ...]
    seed_fractions: tuple[float, ...]
    rankings: tuple[Ranking, ...]
    taus: tuple[float, ...]
    alpha: float = 1.05
    runs_per_config: int = 5
    base_seed: int = 0
    restart: str = "continuous"
    cadence: Cadence = Cadence.REVIVAL
    base_dir: Path | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        for key in ("networks", "propagation_probabilities", "seed_fractions", "rankings", "taus"):
            if not getattr(self, key):
                raise GridConfigError(key, "axis must not be empty")
        if self.runs_per_config < 1:
            raise GridConfigError("runs_per_config", "must be at least 1")
        names = [n.name for n in self.networks]
        if len(set(names)) != len(names):
            raise GridConfigError("networks", "network names must be unique")
        object.__setattr__(self, "rankings", tuple(Ranking(r) for r in self.rankings))
        object.__setattr__(self, "cadence", Cadence(self.cadence))


_REQUIRED = ("networks", "propagation_probabilities", "seed_fractions", "rankings", "taus")
_OPTIONAL = ("alpha", "runs_per_config", "base_seed", "restart", "cadence", "network_names")


def parse_grid_spec(text: str, base_dir: Path | None = None) -> GridSpec:
    """Parse a grid file: flat ``key = value`` / ``key = [list]`` lines (TOML)."""
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise GridConfigError(None, f"cannot parse grid file: {exc}") from exc
    for key in data:
        if key not in _REQUIRED + _OPTIONAL:
            raise GridConfigError(key, "unknown key")
    for key in _REQUIRED:
        if key not in data:
            raise GridConfigError(key, "missing key")

    def number_list(key: str) -> tuple[float, ...]:
        value = data[key]
        if not isinstance(value, list) or not all(
                isinstance(x, (int, float)) and not isinstance(x, bool) for x in value):
            raise GridConfigError(key, "expected a list of numbers")
        return tuple(float(x) for x in value)

    def string_list(key: str) -> list[str]:
        value = data[key]
        if not isinstance(value, list) or not all(isinstance(x, str) for x in value):
            raise GridConfigError(key, "expected a list of strings")
        return value

    def scalar(key: str, kind, default):
        value = data.get(key, default)
        if kind is float and isinstance(value, int) and not isinstance(value, bool):
            value = float(value)
        if not isinstance(value, kind) or isinstance(value, bool):
            raise GridConfigError(key, f"expected {kind.__name__}")
        return value

    sources = string_list("networks")
    names = string_list("network_names") if "network_names" in data else \
        [default_network_name(s) for s in sources]
    if len(names) != len(sources):
        raise GridConfigError("network_names", "must have one name per network")
    try:
        rankings = tuple(Ranking(r) for r in string_list("rankings"))
    except ValueError as exc:
        raise GridConfigError("rankings", str(exc)) from exc
    if any(not 0 <= x <= 1 for x in number_list("propagation_probabilities")):
        raise GridConfigError("propagation_probabilities", "values must lie in [0, 1]")
    if any(not 0 < x <= 1 for x in number_list("seed_fractions")):
        raise GridConfigError("seed_fractions", "values must lie in (0, 1]")
    if any(x <= 0 for x in number_list("taus")):
        raise GridConfigError("taus", "values must be positive")
    try:
        cadence = Cadence(scalar("cadence", str, "revival"))
    except ValueError as exc:
        raise GridConfigError("cadence", str(exc)) from exc
    restart = scalar("restart", str, "continuous")
    if restart not in ("continuous", "literal"):
        raise GridConfigError("restart", "expected 'continuous' or 'literal'")
    alpha = scalar("alpha", float, 1.05)
    if alpha <= 0:
        raise GridConfigError("alpha", "must be positive")
    return GridSpec(
        networks=tuple(NetworkSource(n, s) for n, s in zip(names, sources)),
        propagation_probabilities=number_list("propagation_probabilities"),
        seed_fractions=number_list("seed_fractions"),
        rankings=rankings,
        taus=number_list("taus"),
        alpha=alpha,
        runs_per_config=scalar("runs_per_config", int, 5),
        base_seed=scalar("base_seed", int, 0),
        restart=restart,
        cadence=cadence,
        base_dir=base_dir,
    )


def load_grid_spec(path: str | Path) -> GridSpec:
    path = Path(path)
    return parse_grid_spec(path.read_text(encoding="utf-8"), base_dir=path.parent)


@dataclass(frozen=True)
class Configuration:
    index: int
    network: str
    pp: float
    seed_fraction: float
    ranking: Ranking
    tau: float


def expand_grid(spec: GridSpec) -> list[Configuration]:
    """Cartesian product in field order: network, pp, seed fraction, ranking, tau."""
    combos = itertools.product(
        [n.name for n in spec.networks], spec.propagation_probabilities,
        spec.seed_fractions, spec.rankings, spec.taus)
    return [Configuration(i, *c) for i, c in enumerate(combos)]


def derive_seed(base_seed: int, network: str, run_index: int) -> int:
    digest = hashlib.blake2b(f"{base_seed}|{network}|{run_index}".encode(), digest_size=8)
    return int.from_bytes(digest.digest(), "big") >> 1


@dataclass(frozen=True)
class ResultRow:
    network: str
    pp: float
    seed_fraction: float
    ranking: Ranking
    tau: float
    alpha: float
    seeding: Seeding
    habituation: bool
    coverages: tuple[float, ...]
    durations: tuple[int, ...]
    seeds_used: tuple[int, ...]
    truncated: tuple[bool, ...]

    @property
    def mean_coverage(self) -> float:
        return float(np.mean(self.coverages))

    @property
    def mean_duration(self) -> float:
        return float(np.mean(self.durations))

    @property
    def any_truncated(self) -> bool:
        return any(self.truncated)

    @property
    def config_key(self) -> tuple:
        return (self.network, self.pp, self.seed_fraction, self.ranking, self.tau, self.alpha)


@dataclass(frozen=True)
class _Unit:
    network: str
    graph: Graph
    pp: float
    seed_fraction: float
    ranking: Ranking
    taus: tuple[float, ...]
    alpha: float
    restart: str
    cadence: Cadence
    runs: int
    base_seed: int


def _execute_unit(unit: _Unit) -> list[list[tuple]]:
    """All taus of one (network, pp, sf, ranking) cell; returns per tau four setups.

    Non-habituated runs do not depend on tau, so they are simulated once.
    """
    g = unit.graph
    seeds = [derive_seed(unit.base_seed, unit.network, r) for r in range(unit.runs)]
    draws = np.stack([draw_coordinated(g, s).values for s in seeds]) if seeds else None
    if unit.ranking is Ranking.DEGREE:
        rankings = rank_nodes(g, Ranking.DEGREE)[None, :]
    else:
        rankings = np.stack([rank_nodes(g, Ranking.RANDOM, s) for s in seeds])

    def summarise(batch):
        return (tuple(float(x) for x in batch.coverage), tuple(int(x) for x in batch.duration),
                tuple(int(x) for x in batch.seeds_used), tuple(bool(x) for x in batch.truncated))

    def config(seeding: Seeding, hab: bool, tau: float) -> DiffusionConfig:
        return DiffusionConfig(
            unit.pp, unit.seed_fraction, unit.ranking, seeding, hab,
            HabituationParams(alpha=unit.alpha, tau=tau, restart=unit.restart),
            cadence=unit.cadence)

    plain = {s: summarise(run_batch(g, config(s, False, unit.taus[0]), draws, rankings))
             for s in Seeding}
    out = []
    for tau in unit.taus:
        per_setup = []
        for seeding, hab in SETUPS:
            res = summarise(run_batch(g, config(seeding, True, tau), draws, rankings)) \
                if hab else plain[seeding]
            per_setup.append(res)
        out.append(per_setup)
    return out


def execute_grid(spec: GridSpec, jobs: int = 1, graphs: dict[str, Graph] | None = None
                 ) -> list[ResultRow]:
    """Run every configuration under all four setups; identical output for any ``jobs``."""
    if graphs is None:
        graphs = {n.name: n.build(spec.base_dir) for n in spec.networks}
    units = [
        _Unit(name, graphs[name], pp, sf, ranking, spec.taus, spec.alpha, spec.restart,
              spec.cadence, spec.runs_per_config, spec.base_seed)
        for name, pp, sf, ranking in itertools.product(
            [n.name for n in spec.networks], spec.propagation_probabilities,
            spec.seed_fractions, spec.rankings)
    ]
    if jobs > 1 and len(units) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_execute_unit, units, chunksize=1))
    else:
        results = [_execute_unit(u) for u in units]

    rows = []
    for unit, per_tau in zip(units, results):
        for tau, per_setup in zip(unit.taus, per_tau):
            for (seeding, hab), (cov, dur, used, trunc) in zip(SETUPS, per_setup):
                rows.append(ResultRow(unit.network, unit.pp, unit.seed_fraction, unit.ranking,
                                      tau, unit.alpha, seeding, hab, cov, dur, used, trunc))
    return rows


def default_jobs() -> int:
    return os.cpu_count() or 1


def fmt_number(x: float | int) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".9g")


def iter_run_records(rows: Iterable[ResultRow]) -> Iterator[list[str]]:
    for row in rows:
        for r, (cov, dur, used, trunc) in enumerate(
                zip(row.coverages, row.durations, row.seeds_used, row.truncated)):
            yield [row.network, row.ranking.value, fmt_number(row.pp),
                   fmt_number(row.seed_fraction), row.seeding.value, fmt_number(row.habituation),
                   fmt_number(row.tau), fmt_number(row.alpha), str(r), fmt_number(cov),
                   str(dur), str(used), fmt_number(trunc)]


def write_run_records(rows: Iterable[ResultRow], out: TextIO) -> None:
    writer = csv.writer(out, lineterminator="\r\n")
    writer.writerow(RUN_RECORD_COLUMNS)
    writer.writerows(iter_run_records(rows))


def _parse_bool(text: str) -> bool:
    if text not in ("true", "false"):
        raise ValueError(f"expected true/false, got {text!r}")
    return text == "true"


def read_run_records(source: TextIO) -> list[ResultRow]:
    """Inverse of :func:`write_run_records`; groups runs back into rows."""
    reader = csv.DictReader(source)
    if tuple(reader.fieldnames or ()) != RUN_RECORD_COLUMNS:
        raise ValueError(f"unexpected CSV header {reader.fieldnames}")
    groups: dict[tuple, list[tuple]] = {}
    for rec in reader:
        key = (rec["network"], float(rec["pp"]), float(rec["seed_fraction"]),
               Ranking(rec["ranking"]), float(rec["tau"]), float(rec["alpha"]),
               Seeding(rec["seeding"]), _parse_bool(rec["habituation"]))
        groups.setdefault(key, []).append(
            (int(rec["run_index"]), float(rec["coverage"]), int(rec["duration"]),
             int(rec["seeds_used"]), _parse_bool(rec["truncated"])))
    rows = []
    for key, runs in groups.items():
        runs.sort()
        _, cov, dur, used, trunc = zip(*runs)
        rows.append(ResultRow(*key, coverages=cov, durations=dur, seeds_used=used,
                              truncated=trunc))
    return rows
