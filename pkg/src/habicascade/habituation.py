"""Per-node habituation dynamics.

A node that is contacted but not activated habituates: its responsiveness
factor follows the exponential learning curve

    H(n) = y0 - (S / alpha) * (1 - exp(-alpha * n / tau))

where ``n`` counts consecutive contacted steps. A node left alone recovers
toward the baseline along

    H(n) = y0 - (y0 - y1) * exp(-alpha * n / tau)

with ``y1`` the level reached when the rest began. All functions here are
pure and operate on immutable :class:`HabituationState` values.

The compiled and pure-Python simulation kernels inline these formulas; keep
the arithmetic in the same order if you change anything here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import IntEnum

__all__ = [
    "HabituationParams",
    "HabituationState",
    "Phase",
    "RESTART_MODES",
    "effective_probability",
    "habituate_step",
    "increase_curve",
    "pseudo_count",
    "recover_step",
    "recovery_curve",
]

RESTART_MODES = ("continuous", "literal")


class Phase(IntEnum):
    NEUTRAL = 0
    INCREASING = 1
    RECOVERING = 2

    @property
    def signal(self) -> int:
        """The {+1, -1, 0} state code used to describe habituation phases."""
        return {Phase.NEUTRAL: 0, Phase.INCREASING: 1, Phase.RECOVERING: -1}[self]


@dataclass(frozen=True)
class HabituationParams:
    """Parameters of the habituation curve.

    ``restart`` selects what happens when a recovering node is contacted
    again: ``"continuous"`` resumes the increase curve from the current
    factor, ``"literal"`` restarts it from the baseline as if the node had
    never habituated.
    """

    alpha: float = 1.05
    tau: float = 1.0
    stimulus: float = 1.0
    baseline: float = 1.0
    restart: str = "continuous"

    def __post_init__(self) -> None:
        if not self.alpha > 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if not self.tau > 0:
            raise ValueError(f"tau must be positive, got {self.tau}")
        if not self.stimulus > 0:
            raise ValueError(f"stimulus must be positive, got {self.stimulus}")
        if not 0 < self.baseline <= 1:
            raise ValueError(f"baseline must lie in (0, 1], got {self.baseline}")
        if self.stimulus / self.alpha > self.baseline:
            raise ValueError(
                "stimulus/alpha exceeds the baseline; the curve's asymptote would be negative"
            )
        if self.restart not in RESTART_MODES:
            raise ValueError(f"restart must be one of {RESTART_MODES}, got {self.restart!r}")

    @property
    def floor(self) -> float:
        """Asymptote of the increase curve (the lowest reachable factor)."""
        return max(0.0, self.baseline - self.stimulus / self.alpha)


@dataclass(frozen=True)
class HabituationState:
    """Habituation bookkeeping for a single node.

    ``phase_count`` is the number of steps spent in the current phase.
    ``offset`` shifts the increase curve when an increasing run resumes from
    a partially recovered level, so the curve is evaluated at
    ``offset + phase_count``. ``recovery_floor`` is the factor at which the
    current recovery started.
    """

    factor: float = 1.0
    phase: Phase = Phase.NEUTRAL
    phase_count: int = 0
    recovery_floor: float = 1.0
    offset: float = 0.0


def _clamp(value: float, params: HabituationParams) -> float:
    return min(max(value, params.floor), params.baseline)


def increase_curve(n: float, params: HabituationParams) -> float:
    """Factor after ``n`` (possibly fractional) consecutive contacted steps."""
    y = params.baseline - (params.stimulus / params.alpha) * (
        1.0 - math.exp(-params.alpha * n / params.tau)
    )
    return _clamp(y, params)


def recovery_curve(floor: float, n: float, params: HabituationParams) -> float:
    """Factor after ``n`` rest steps starting from ``floor``."""
    # written as a rise above the floor so that n = 0 returns the floor exactly
    y = floor - (params.baseline - floor) * math.expm1(-params.alpha * n / params.tau)
    return min(y, params.baseline)


def pseudo_count(factor: float, params: HabituationParams) -> float:
    """Real-valued step count at which the increase curve equals ``factor``.

    Returns ``math.inf`` when ``factor`` sits at or below the asymptote; the
    increase curve evaluated at infinity is the asymptote itself, so callers
    stay saturated.
    """
    if factor >= params.baseline:
        return 0.0
    arg = 1.0 - params.alpha * (params.baseline - factor) / params.stimulus
    if arg <= 0.0:
        return math.inf
    return -(params.tau / params.alpha) * math.log(arg)


def habituate_step(state: HabituationState, params: HabituationParams) -> HabituationState:
    """Advance one contacted-but-not-activated step."""
    if state.phase is Phase.INCREASING:
        offset, count = state.offset, state.phase_count + 1
    elif state.phase is Phase.RECOVERING and params.restart == "continuous":
        offset, count = pseudo_count(state.factor, params), 1
    else:
        offset, count = 0.0, 1
    return HabituationState(
        factor=increase_curve(offset + count, params),
        phase=Phase.INCREASING,
        phase_count=count,
        recovery_floor=state.recovery_floor,
        offset=offset,
    )


def recover_step(state: HabituationState, params: HabituationParams) -> HabituationState:
    """Advance one rest step. A fully recovered node drops back to neutral."""
    if state.factor >= params.baseline:
        return HabituationState(factor=params.baseline)
    if state.phase is Phase.RECOVERING:
        floor, count = state.recovery_floor, state.phase_count + 1
    else:
        floor, count = state.factor, 1
    return replace(
        state,
        factor=recovery_curve(floor, count, params),
        phase=Phase.RECOVERING,
        phase_count=count,
        recovery_floor=floor,
        offset=0.0,
    )


def effective_probability(base_pp: float, state: HabituationState) -> float:
    return base_pp * state.factor
