"""Paired comparison statistics: relative change, Wilcoxon signed-rank, pseudomedian."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Iterable, Sequence

import numpy as np
from scipy.stats import rankdata

__all__ = [
    "EXACT_MAX_N",
    "PSEUDOMEDIAN_MAX_N",
    "PairedStats",
    "SUMMARY_AXES",
    "SummaryRow",
    "compare_paired",
    "summarize",
    "pseudomedian",
    "relative_change",
    "wilcoxon_signed_rank",
]

EXACT_MAX_N = 25
PSEUDOMEDIAN_MAX_N = 10_000
ALTERNATIVES = ("two-sided", "greater", "less")


def relative_change(reference: float, observed: float, kind: str = "decrease") -> float:
    """Percentage change of ``observed`` relative to ``reference``.

    ``kind="decrease"`` gives ``100 * (reference - observed) / reference``,
    ``kind="increase"`` the opposite sign. A zero reference yields NaN.
    """
    if kind not in ("decrease", "increase"):
        raise ValueError(f"kind must be 'decrease' or 'increase', got {kind!r}")
    if reference == 0:
        return math.nan
    diff = reference - observed if kind == "decrease" else observed - reference
    return 100.0 * diff / reference


@dataclass(frozen=True)
class PairedStats:
    n_pairs: int
    w_statistic: float
    p_value: float
    pseudomedian: float
    mean_relative_change: float = math.nan
    exact: bool = True
    alternative: str = "two-sided"


def _walsh_count_le(d: np.ndarray, x: float) -> int:
    """Number of pairs i <= j with d[i] + d[j] <= x, for sorted ``d``."""
    ordered = np.searchsorted(d, x - d, side="right").sum()
    diagonal = np.count_nonzero(2 * d <= x)
    return int((ordered + diagonal) // 2)


def _walsh_between(d: np.ndarray, lo: float, hi: float) -> np.ndarray:
    """Pair sums s with lo < s <= hi over i <= j, for sorted ``d``."""
    n = len(d)
    start = np.maximum(np.searchsorted(d, lo - d, side="right"), np.arange(n))
    stop = np.maximum(np.searchsorted(d, hi - d, side="right"), start)
    counts = stop - start
    rows = np.repeat(np.arange(n), counts)
    offsets = np.arange(counts.sum()) - np.repeat(np.cumsum(counts) - counts, counts)
    cols = np.repeat(start, counts) + offsets
    return d[rows] + d[cols]


def _kth_walsh_sum(d: np.ndarray, k: int, direct_limit: int = 1 << 21) -> float:
    """The k-th smallest (0-based) pair sum d[i] + d[j], i <= j, of sorted ``d``."""
    lo, hi = float(np.nextafter(2 * d[0], -np.inf)), float(2 * d[-1])
    below = 0  # pair sums <= lo
    n_total = len(d) * (len(d) + 1) // 2
    inside = n_total
    while inside > direct_limit:
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            # lo and hi are adjacent doubles: every remaining candidate equals hi
            return hi
        c = _walsh_count_le(d, mid)
        if c > k:
            hi, inside = mid, c - below
        else:
            lo, below, inside = mid, c, inside - (c - below)
    candidates = np.sort(_walsh_between(d, lo, hi))
    return float(candidates[k - below])


def pseudomedian(differences: Sequence[float]) -> float:
    """Median of the Walsh averages (d_i + d_j) / 2, i <= j.

    Exact for up to ``PSEUDOMEDIAN_MAX_N`` values without materialising all
    pairwise averages.
    """
    d = np.sort(np.asarray(differences, dtype=float))
    n = len(d)
    if n == 0:
        raise ValueError("pseudomedian of an empty sample")
    if n > PSEUDOMEDIAN_MAX_N:
        raise ValueError(f"pseudomedian is computed exactly only up to {PSEUDOMEDIAN_MAX_N} values")
    m = n * (n + 1) // 2
    if m % 2:
        return _kth_walsh_sum(d, m // 2) / 2
    return (_kth_walsh_sum(d, m // 2 - 1) + _kth_walsh_sum(d, m // 2)) / 4


def _exact_tails(ranks: np.ndarray, w_plus: float) -> tuple[float, float]:
    """P(W+ >= w) and P(W+ <= w) over all 2^n equally likely sign assignments."""
    # average ranks are multiples of 1/2, so doubling makes them integers
    doubled = np.rint(2 * ranks).astype(np.int64)
    total = int(doubled.sum())
    counts = np.zeros(total + 1, dtype=np.float64)
    counts[0] = 1.0
    reach = 0
    for r in doubled:
        counts[r:reach + r + 1] += counts[:reach + 1].copy()
        reach += r
    probs = counts / 2.0 ** len(ranks)
    w2 = int(round(2 * w_plus))
    upper = float(probs[w2:].sum())
    lower = float(probs[:w2 + 1].sum())
    return upper, lower


def _normal_tails(ranks: np.ndarray, abs_d: np.ndarray, w_plus: float) -> tuple[float, float, float]:
    n = len(ranks)
    mean = n * (n + 1) / 4.0
    _, tie_counts = np.unique(abs_d, return_counts=True)
    var = n * (n + 1) * (2 * n + 1) / 24.0 - float((tie_counts ** 3 - tie_counts).sum()) / 48.0
    sd = math.sqrt(var)

    def sf(z: float) -> float:
        return 0.5 * math.erfc(z / math.sqrt(2.0))

    upper = sf((w_plus - mean - 0.5) / sd)
    lower = 1.0 - sf((w_plus - mean + 0.5) / sd)
    two = 2.0 * sf(max(abs(w_plus - mean) - 0.5, 0.0) / sd)
    return upper, lower, min(1.0, two)


def wilcoxon_signed_rank(differences: Sequence[float], alternative: str = "two-sided",
                         exact: bool | None = None) -> PairedStats:
    """Wilcoxon signed-rank test on paired differences.

    Zero differences are discarded before ranking. ``exact`` defaults to
    enumeration of the null distribution for n <= 25 and the tie- and
    continuity-corrected normal approximation above that.
    """
    if alternative not in ALTERNATIVES:
        raise ValueError(f"alternative must be one of {ALTERNATIVES}, got {alternative!r}")
    d = np.asarray(differences, dtype=float)
    d = d[d != 0]
    n = len(d)
    if n == 0:
        return PairedStats(n_pairs=0, w_statistic=0.0, p_value=1.0, pseudomedian=0.0,
                           exact=True, alternative=alternative)
    abs_d = np.abs(d)
    ranks = rankdata(abs_d)
    w_plus = float(ranks[d > 0].sum())
    use_exact = n <= EXACT_MAX_N if exact is None else exact
    if use_exact:
        upper, lower = _exact_tails(ranks, w_plus)
        two = min(1.0, 2.0 * min(upper, lower))
    else:
        upper, lower, two = _normal_tails(ranks, abs_d, w_plus)
    p = {"two-sided": two, "greater": upper, "less": lower}[alternative]
    return PairedStats(n_pairs=n, w_statistic=w_plus, p_value=min(max(p, 0.0), 1.0),
                       pseudomedian=pseudomedian(d), exact=use_exact, alternative=alternative)


def compare_paired(reference: Sequence[float], observed: Sequence[float],
                   alternative: str = "two-sided", kind: str = "decrease") -> PairedStats:
    """Paired test of ``reference - observed`` plus the relative change of the means.

    The pseudomedian is reported in the units of the inputs.
    """
    ref = np.asarray(reference, dtype=float)
    obs = np.asarray(observed, dtype=float)
    if ref.shape != obs.shape:
        raise ValueError("reference and observed must pair up")
    result = wilcoxon_signed_rank(ref - obs, alternative=alternative)
    change = relative_change(float(ref.mean()), float(obs.mean()), kind) if len(ref) else math.nan
    return PairedStats(n_pairs=result.n_pairs, w_statistic=result.w_statistic,
                       p_value=result.p_value, pseudomedian=result.pseudomedian,
                       mean_relative_change=change, exact=result.exact,
                       alternative=alternative)


SUMMARY_AXES = ("network", "pp", "seed_fraction", "ranking", "tau")
_SETUP_NAMES = {("single", False): "single", ("single", True): "single_hab",
                ("sequential", False): "sequential", ("sequential", True): "sequential_hab"}


@dataclass(frozen=True)
class SummaryRow:
    """Aggregates over one group of grid rows.

    Coverage means are fractions; decreases and increases are percentages of
    the reference setup's group-mean coverage. The paired tests compare
    per-run coverages in percentage points: ``hab_effect_*`` is
    non-habituated minus habituated under single-stage seeding,
    ``seq_effect_*`` is sequential minus single-stage under habituation.
    """

    group: tuple[tuple[str, Any], ...]
    n_rows: int
    mean_coverage: dict[str, float]
    mean_duration: dict[str, float]
    decrease_single: float
    decrease_sequential: float
    increase_plain: float
    increase_hab: float
    duration_ratio_plain: float
    duration_ratio_hab: float
    hab_effect_pseudomedian: float
    hab_effect_p_value: float
    seq_effect_pseudomedian: float
    seq_effect_p_value: float
    truncated: bool


def _axis_value(row, axis: str):
    value = getattr(row, axis)
    return getattr(value, "value", value)


def _paired_effect(rows: list, reference: tuple, observed: tuple) -> tuple[float, float]:
    ref, obs = [], []
    by_key = {}
    for row in rows:
        by_key[(row.config_key, row.seeding.value, row.habituation)] = row
    for (key, seeding, hab), row in by_key.items():
        if (seeding, hab) != observed:
            continue
        partner = by_key.get((key, *reference))
        if partner is None:
            continue
        ref.extend(partner.coverages)
        obs.extend(row.coverages)
    if not ref:
        return math.nan, math.nan
    diffs = 100.0 * (np.asarray(ref) - np.asarray(obs))
    try:
        result = wilcoxon_signed_rank(diffs)
    except ValueError:
        return math.nan, math.nan
    return result.pseudomedian, result.p_value


def summarize(rows: Iterable, group_by: Sequence[str]) -> list[SummaryRow]:
    """Group grid rows by the named axes and compare the four setups in each group.

    Groups come out sorted by their axis values.
    """
    for axis in group_by:
        if axis not in SUMMARY_AXES:
            raise ValueError(f"unknown axis {axis!r}; expected one of {SUMMARY_AXES}")
    groups: dict[tuple, list] = {}
    for row in rows:
        key = tuple(_axis_value(row, a) for a in group_by)
        groups.setdefault(key, []).append(row)

    out = []
    for key in sorted(groups):
        members = groups[key]
        cov: dict[str, list[float]] = {name: [] for name in _SETUP_NAMES.values()}
        dur: dict[str, list[float]] = {name: [] for name in _SETUP_NAMES.values()}
        for row in members:
            name = _SETUP_NAMES[(row.seeding.value, row.habituation)]
            cov[name].extend(row.coverages)
            dur[name].extend(row.durations)
        mc = {k: float(np.mean(v)) if v else math.nan for k, v in cov.items()}
        md = {k: float(np.mean(v)) if v else math.nan for k, v in dur.items()}
        hab_pm, hab_p = _paired_effect(members, ("single", False), ("single", True))
        seq_pm, seq_p = _paired_effect(members, ("single", True), ("sequential", True))
        out.append(SummaryRow(
            group=tuple(zip(group_by, key)),
            n_rows=len(members),
            mean_coverage=mc,
            mean_duration=md,
            decrease_single=relative_change(mc["single"], mc["single_hab"]),
            decrease_sequential=relative_change(mc["sequential"], mc["sequential_hab"]),
            increase_plain=relative_change(mc["single"], mc["sequential"], "increase"),
            increase_hab=relative_change(mc["single_hab"], mc["sequential_hab"], "increase"),
            duration_ratio_plain=md["sequential"] / md["single"] if md["single"] else math.nan,
            duration_ratio_hab=md["sequential_hab"] / md["single_hab"] if md["single_hab"] else math.nan,
            hab_effect_pseudomedian=hab_pm,
            hab_effect_p_value=hab_p,
            # differences were single minus sequential
            seq_effect_pseudomedian=-seq_pm,
            seq_effect_p_value=seq_p,
            truncated=any(r.any_truncated for r in members),
        ))
    return out
