"""Independent cascade runs with habituation, coordinated draws and seeding strategies."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Sequence

import numpy as np

from . import backend
from .graph import Graph
from .habituation import HabituationParams

__all__ = [
    "BatchOutcome",
    "Cadence",
    "DiffusionConfig",
    "EdgeDraws",
    "Ranking",
    "RunOutcome",
    "Seeding",
    "draw_coordinated",
    "draw_stream",
    "monte_carlo_coverage",
    "rank_nodes",
    "run",
    "run_batch",
    "run_paired",
]

# child streams of a run seed; draws and random rankings never share numbers
_DRAW_STREAM = 0
_RANK_STREAM = 1


class Ranking(str, Enum):
    RANDOM = "random"
    DEGREE = "degree"


class Seeding(str, Enum):
    SINGLE_STAGE = "single"
    SEQUENTIAL = "sequential"


class Cadence(str, Enum):
    """When sequential seeding spends its next seed.

    ``REVIVAL`` seeds only on steps where spreading activated nobody, so
    each seed restarts a stalled cascade. ``PER_STEP`` seeds on every step
    until the budget is spent.
    """

    REVIVAL = "revival"
    PER_STEP = "per-step"


@dataclass(frozen=True)
class DiffusionConfig:
    propagation_probability: float
    seed_fraction: float
    ranking: Ranking = Ranking.DEGREE
    seeding: Seeding = Seeding.SINGLE_STAGE
    habituation_enabled: bool = True
    habituation_params: HabituationParams = field(default_factory=HabituationParams)
    max_steps: int | None = None
    cadence: Cadence = Cadence.REVIVAL

    def __post_init__(self) -> None:
        if not 0.0 <= self.propagation_probability <= 1.0:
            raise ValueError(f"propagation probability must lie in [0, 1], "
                             f"got {self.propagation_probability}")
        if not 0.0 < self.seed_fraction <= 1.0:
            raise ValueError(f"seed fraction must lie in (0, 1], got {self.seed_fraction}")
        object.__setattr__(self, "ranking", Ranking(self.ranking))
        object.__setattr__(self, "seeding", Seeding(self.seeding))
        object.__setattr__(self, "cadence", Cadence(self.cadence))

    def budget(self, node_count: int) -> int:
        # the epsilon keeps 0.07 * 100 from rounding up to 8
        return max(1, math.ceil(self.seed_fraction * node_count - 1e-9))

    @property
    def seeding_mode(self) -> int:
        if self.seeding is Seeding.SINGLE_STAGE:
            return 0
        return 1 if self.cadence is Cadence.PER_STEP else 2

    def step_cap(self, node_count: int) -> int:
        return 10 * node_count if self.max_steps is None else self.max_steps

    def with_setup(self, seeding: Seeding, habituation: bool) -> DiffusionConfig:
        return replace(self, seeding=seeding, habituation_enabled=habituation)


@dataclass(frozen=True, eq=False)
class EdgeDraws:
    """One uniform [0, 1) value per directed edge, in CSR order of the graph."""

    values: np.ndarray
    seed: int

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, EdgeDraws):
            return NotImplemented
        return self.seed == other.seed and np.array_equal(self.values, other.values)


def _stream(seed: int, stream: int) -> np.random.Generator:
    return np.random.default_rng([int(seed), stream])


def draw_coordinated(g: Graph, run_seed: int) -> EdgeDraws:
    values = _stream(run_seed, _DRAW_STREAM).random(g.directed_edge_count)
    values.flags.writeable = False
    return EdgeDraws(values=values, seed=int(run_seed))


def draw_stream(g: Graph, seed: int, runs: int) -> np.ndarray:
    """``runs`` rows of coordinated draws from a single generator.

    Cheaper than one :func:`draw_coordinated` call per run when many runs
    are needed and individual run seeds do not matter.
    """
    return _stream(seed, _DRAW_STREAM).random((runs, g.directed_edge_count))


def rank_nodes(g: Graph, strategy: Ranking | str, run_seed: int = 0) -> np.ndarray:
    strategy = Ranking(strategy)
    if strategy is Ranking.DEGREE:
        return np.argsort(-g.degrees(), kind="stable").astype(np.int64)
    return _stream(run_seed, _RANK_STREAM).permutation(g.node_count).astype(np.int64)


@dataclass(frozen=True, eq=False)
class RunOutcome:
    coverage: float
    duration: int
    activations_per_step: tuple[int, ...]
    seeds_used: int
    truncated: bool
    activation_time: np.ndarray

    @property
    def active_set(self) -> frozenset[int]:
        return frozenset(np.flatnonzero(self.activation_time >= 0).tolist())

    def active_by(self, step: int) -> frozenset[int]:
        t = self.activation_time
        return frozenset(np.flatnonzero((t >= 0) & (t <= step)).tolist())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RunOutcome):
            return NotImplemented
        return (self.coverage == other.coverage and self.duration == other.duration
                and self.seeds_used == other.seeds_used and self.truncated == other.truncated
                and np.array_equal(self.activation_time, other.activation_time))


@dataclass(frozen=True)
class BatchOutcome:
    """Column-wise outcomes of many runs under one configuration."""

    activation_time: np.ndarray
    duration: np.ndarray
    seeds_used: np.ndarray
    truncated: np.ndarray

    @property
    def coverage(self) -> np.ndarray:
        n = self.activation_time.shape[1]
        return (self.activation_time >= 0).sum(axis=1) / n

    def outcome(self, r: int) -> RunOutcome:
        times = self.activation_time[r]
        duration = int(self.duration[r])
        per_step = np.bincount(times[times >= 0], minlength=duration + 1)
        return RunOutcome(
            coverage=float(self.coverage[r]),
            duration=duration,
            activations_per_step=tuple(int(x) for x in per_step),
            seeds_used=int(self.seeds_used[r]),
            truncated=bool(self.truncated[r]),
            activation_time=times,
        )


def run_batch(g: Graph, cfg: DiffusionConfig, draws: np.ndarray,
              rankings: np.ndarray | Sequence[int], kernel=None) -> BatchOutcome:
    """Run ``len(draws)`` cascades; ``rankings`` is one row per run or one shared row."""
    draws = np.ascontiguousarray(np.atleast_2d(draws), dtype=np.float64)
    rankings = np.ascontiguousarray(np.atleast_2d(rankings), dtype=np.int64)
    n = g.node_count
    if draws.shape[1] != g.directed_edge_count:
        raise ValueError("draw table does not match the graph's directed edges")
    if rankings.shape[1] != n or rankings.shape[0] not in (1, draws.shape[0]):
        raise ValueError("rankings must cover every node, one row per run or one shared row")
    hp = cfg.habituation_params
    simulate = kernel or backend.simulate_batch
    act, duration, seeds, trunc = simulate(
        g.indptr, g.indices, draws, rankings,
        float(cfg.propagation_probability), cfg.budget(n),
        cfg.seeding_mode, bool(cfg.habituation_enabled),
        float(hp.alpha), float(hp.tau), float(hp.stimulus), float(hp.baseline),
        hp.restart == "continuous", cfg.step_cap(n),
    )
    return BatchOutcome(activation_time=act, duration=duration, seeds_used=seeds,
                        truncated=trunc.astype(bool))


def run(g: Graph, cfg: DiffusionConfig, draws: EdgeDraws | np.ndarray,
        ranking: Sequence[int] | np.ndarray, kernel=None) -> RunOutcome:
    values = draws.values if isinstance(draws, EdgeDraws) else draws
    ranking = np.asarray(ranking, dtype=np.int64)
    if sorted(ranking.tolist()) != list(range(g.node_count)):
        raise ValueError("ranking must be a permutation of all nodes")
    return run_batch(g, cfg, values[None, :], ranking[None, :], kernel=kernel).outcome(0)


def monte_carlo_coverage(g: Graph, cfg: DiffusionConfig, ranking: Sequence[int] | np.ndarray,
                         samples: int, seed: int, chunk: int = 65536,
                         kernel=None) -> tuple[float, float]:
    """Mean coverage of ``samples`` independent runs and its standard error."""
    if samples < 1:
        raise ValueError("samples must be at least 1")
    gen = _stream(seed, _DRAW_STREAM)
    ranking = np.asarray(ranking, dtype=np.int64)[None, :]
    total = 0.0
    total_sq = 0.0
    done = 0
    while done < samples:
        rows = min(chunk, samples - done)
        cov = run_batch(g, cfg, gen.random((rows, g.directed_edge_count)), ranking,
                        kernel=kernel).coverage
        total += float(cov.sum())
        total_sq += float(np.dot(cov, cov))
        done += rows
    mean = total / samples
    var = max(total_sq / samples - mean * mean, 0.0) * samples / max(samples - 1, 1)
    return mean, math.sqrt(var / samples)


SETUPS = tuple((s, h) for s in (Seeding.SINGLE_STAGE, Seeding.SEQUENTIAL) for h in (False, True))


def run_paired(g: Graph, cfg: DiffusionConfig, run_seed: int) -> dict[tuple[Seeding, bool], RunOutcome]:
    """All four seeding x habituation setups under one set of draws and one ranking.

    Keys are ``(seeding, habituation_enabled)``.
    """
    draws = draw_coordinated(g, run_seed)
    ranking = rank_nodes(g, cfg.ranking, run_seed)
    return {(s, h): run(g, cfg.with_setup(s, h), draws, ranking) for s, h in SETUPS}
