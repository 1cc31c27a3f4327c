"""Exact expected coverage on tiny graphs by enumerating attempt outcomes.

For a fixed success/failure label on every attempted directed edge the
cascade is deterministic, and the probability of the label is the product of
the per-attempt success (or failure) probabilities evaluated at attempt time.
Walking the tree of labels therefore gives the exact outcome distribution
without integrating over continuous draws. This module reimplements the step
rules on its own so it can serve as an independent check of the kernels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Sequence

from .diffusion import Cadence, DiffusionConfig, Seeding
from .graph import Graph
from .habituation import HabituationState, Phase, habituate_step, recover_step

__all__ = [
    "MAX_DIRECTED_EDGES",
    "OracleLimitError",
    "OutcomeEnumeration",
    "enumerate_outcomes",
    "exact_expected_coverage",
]

MAX_DIRECTED_EDGES = 20


class OracleLimitError(ValueError):
    pass


@dataclass(frozen=True)
class OutcomeEnumeration:
    labeling: tuple[tuple[tuple[int, int], bool], ...]
    probability: float
    active: frozenset[int]


@dataclass
class _State:
    t: int
    active: frozenset[int]
    frontier: tuple[int, ...]
    hab: dict[int, HabituationState]
    budget_left: int
    ptr: int


def enumerate_outcomes(g: Graph, cfg: DiffusionConfig,
                       ranking: Sequence[int]) -> Iterator[OutcomeEnumeration]:
    """Yield every reachable labeling with its probability and final active set.

    Zero-probability branches are pruned, so masses sum to one.
    """
    if g.directed_edge_count > MAX_DIRECTED_EDGES:
        raise OracleLimitError(
            f"{g.directed_edge_count} directed edges exceeds the enumeration bound "
            f"of {MAX_DIRECTED_EDGES}")
    ranking = [int(v) for v in ranking]
    n = g.node_count
    if sorted(ranking) != list(range(n)):
        raise ValueError("ranking must be a permutation of all nodes")
    nbrs = [g.neighbors(u).tolist() for u in range(n)]
    pp = cfg.propagation_probability
    params = cfg.habituation_params
    budget = min(cfg.budget(n), n)
    cap = cfg.step_cap(n)
    sequential = cfg.seeding is Seeding.SEQUENTIAL
    every_step = cfg.cadence is Cadence.PER_STEP

    first = 1 if sequential else budget
    seeds = tuple(ranking[:first])
    start = _State(t=0, active=frozenset(seeds), frontier=seeds,
                   hab={v: HabituationState() for v in range(n)},
                   budget_left=budget - first, ptr=first)

    def finish_step(state: _State, newly: list[int], contacted: set[int]) -> _State:
        active = set(state.active) | set(newly)
        frontier = list(newly)
        budget_left, ptr = state.budget_left, state.ptr
        if budget_left > 0 and (every_step or not newly):
            while ptr < n and ranking[ptr] in active:
                ptr += 1
            if ptr < n:
                active.add(ranking[ptr])
                frontier.append(ranking[ptr])
                budget_left -= 1
        hab = state.hab
        if cfg.habituation_enabled:
            hab = dict(hab)
            for v in range(n):
                if v in active:
                    continue
                h = hab[v]
                if v in contacted:
                    hab[v] = habituate_step(h, params)
                elif h.factor < params.baseline:
                    hab[v] = recover_step(h, params)
                elif h.phase is not Phase.NEUTRAL:
                    hab[v] = HabituationState(factor=params.baseline)
        return _State(t=state.t, active=frozenset(active), frontier=tuple(frontier),
                      hab=hab, budget_left=budget_left, ptr=ptr)

    def walk(state: _State, prob: float, labels: tuple) -> Iterator[OutcomeEnumeration]:
        if len(state.active) == n or (not state.frontier and state.budget_left == 0):
            yield OutcomeEnumeration(labels, prob, state.active)
            return
        t = state.t + 1
        if t > cap:
            yield OutcomeEnumeration(labels, prob, state.active)
            return
        attempts = [(u, v) for u in state.frontier for v in nbrs[u] if v not in state.active]
        stepping = _State(t=t, active=state.active, frontier=state.frontier, hab=state.hab,
                          budget_left=state.budget_left, ptr=state.ptr)

        def attempt(i: int, newly: list[int], contacted: set[int], prob: float,
                    labels: tuple) -> Iterator[OutcomeEnumeration]:
            while i < len(attempts) and attempts[i][1] in newly:
                i += 1
            if i == len(attempts):
                yield from walk(finish_step(stepping, newly, contacted), prob, labels)
                return
            u, v = attempts[i]
            factor = state.hab[v].factor if cfg.habituation_enabled else 1.0
            p = pp * factor
            touched = contacted | {v}
            if p > 0.0:
                yield from attempt(i + 1, newly + [v], touched, prob * p,
                                   labels + (((u, v), True),))
            if p < 1.0:
                yield from attempt(i + 1, newly, touched, prob * (1.0 - p),
                                   labels + (((u, v), False),))

        yield from attempt(0, [], set(), prob, labels)

    yield from walk(start, 1.0, ())


def exact_expected_coverage(g: Graph, cfg: DiffusionConfig, ranking: Sequence[int]) -> float:
    n = g.node_count
    return math.fsum(o.probability * len(o.active) / n
                     for o in enumerate_outcomes(g, cfg, ranking))
