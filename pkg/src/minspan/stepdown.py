"""Step-down critical values, the MSS estimate and uniform confidence bands."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .bootstrap import BootstrapDraws
from .spanning import SpanningStat


@dataclass(frozen=True)
class TraceStep:
    iteration: int
    selected: tuple[int, ...]
    cv: float


@dataclass
class MssEstimate:
    """Outcome of the step-down procedure.

    ``selected`` and the sets in ``trace`` hold 0-based asset indices.
    ``kind`` names the statistic the estimate was built from (see
    :data:`minspan.bootstrap.KINDS`).
    """

    selected: tuple[int, ...]
    final_cv: float
    level: float
    trace: list[TraceStep]
    adjusted: bool
    stats: list[SpanningStat]
    kind: str = "max"
    candidates: tuple[int, ...] = field(default=())
    variant: str = "mss"
    T: int = 0
    block_len: int = 0
    B: int = 0
    seed: int | None = None
    redraw_count: int = 0
    draws: BootstrapDraws | None = field(default=None, repr=False)


@dataclass(frozen=True)
class ConfidenceBand:
    asset_index: int
    label: str
    alpha_abs: float
    alpha_bound: float
    beta_abs: float
    beta_bound: float
    in_mss: bool
    exceed_source: str  # "alpha" | "beta" | "both" | "none"


def order_statistic_rank(B: int, p: float) -> int:
    """1-based rank ``ceil((1 - p) * B)`` computed in exact decimal arithmetic."""
    if not 0 < p < 1:
        raise ValueError(f"level must lie in (0, 1), got {p}")
    k = math.ceil((1 - Fraction(repr(float(p)))) * B)
    return min(max(k, 1), B)


def quantile_of_max(m_boot: np.ndarray, columns: Sequence[int], p: float) -> float:
    if len(columns) == 0:
        raise ValueError("quantile over an empty set of assets")
    row_max = m_boot[:, list(columns)].max(axis=1)
    k = order_statistic_rank(row_max.shape[0], p)
    return float(np.partition(row_max, k - 1)[k - 1])


def conditional_quantile(draws: BootstrapDraws, subset: Sequence[int], p: float) -> float:
    """(1-p) quantile of the row-wise max of bootstrap statistics over ``subset``.

    ``subset`` holds asset indices, matched against ``draws.assets``.
    """
    pos = _positions(draws, subset)
    return quantile_of_max(draws.m_boot, pos, p)


def _positions(draws: BootstrapDraws, assets: Sequence[int]) -> list[int]:
    cols = list(draws.assets) if draws.assets else list(range(draws.m_boot.shape[1]))
    try:
        return [cols.index(a) for a in assets]
    except ValueError:
        raise ValueError(f"assets {sorted(set(assets) - set(cols))} have no bootstrap column") from None


def stepdown_select(m_stat: np.ndarray, m_boot: np.ndarray, p: float, adjust_empty: bool = True):
    """Core step-down loop over column positions.

    Returns ``(selected, final_cv, trace, adjusted)`` where ``trace`` is a
    list of ``(iteration, selected, cv)`` tuples.
    """
    m_stat = np.asarray(m_stat, dtype=float)
    n = m_stat.shape[0]
    universe = tuple(range(n))
    current: tuple[int, ...] = ()
    trace = []
    j = 0
    while True:
        j += 1
        rest = [i for i in universe if i not in current]
        cv = quantile_of_max(m_boot, rest, p)
        new = tuple(i for i in universe if m_stat[i] > cv)
        trace.append((j, new, cv))
        if new == current or new == universe:
            break
        current = new
    selected = new
    final_cv = 0.0 if selected == universe else cv
    adjusted = False
    if not selected and adjust_empty:
        # first index wins ties
        selected = (int(np.argmax(m_stat)),)
        adjusted = True
    return selected, final_cv, trace, adjusted


def stepdown_estimate(
    stats: Sequence[SpanningStat],
    draws: BootstrapDraws,
    p: float,
    adjust_empty: bool = True,
) -> MssEstimate:
    """Iterate the step-down critical value from the empty set to a fixed point.

    When nothing survives and ``adjust_empty`` is set, the asset with the
    largest statistic is selected and the estimate is flagged ``adjusted``.
    """
    assets = [s.asset_index for s in stats]
    pos = _positions(draws, assets)
    m_boot = draws.m_boot[:, pos]
    m_stat = np.array([s.m_stat for s in stats])
    sel, cv, trace, adjusted = stepdown_select(m_stat, m_boot, p, adjust_empty)
    to_asset = lambda ix: tuple(assets[i] for i in ix)  # noqa: E731
    return MssEstimate(
        selected=to_asset(sel),
        final_cv=cv,
        level=p,
        trace=[TraceStep(it, to_asset(s), c) for it, s, c in trace],
        adjusted=adjusted,
        stats=list(stats),
        kind=draws.kind,
        candidates=tuple(assets),
        T=draws.block_plan.T,
        block_len=draws.block_plan.block_len,
        B=draws.B,
        seed=draws.seed,
        redraw_count=draws.redraw_count,
        draws=draws,
    )


def confidence_bands(estimate: MssEstimate, T: int) -> list[ConfidenceBand]:
    """Per-asset band radii ``T^-1/2 * s * cv`` and which band, if any, is exceeded.

    Radii use the original-sample standard errors. For single-component
    variants only the relevant band counts towards ``exceed_source``.
    """
    cv = estimate.final_cv
    rt = math.sqrt(T)
    selected = set(estimate.selected)
    out = []
    for s in estimate.stats:
        a_abs = abs(s.alpha_hat)
        b_abs = abs(s.beta_sum_hat - 1.0)
        a_bound = s.s1 * cv / rt
        b_bound = s.s2 * cv / rt
        if estimate.kind == "alpha_signed":
            a_ex = s.alpha_hat > a_bound
        else:
            a_ex = a_abs > a_bound
        b_ex = b_abs > b_bound
        if estimate.kind in ("alpha", "alpha_signed"):
            b_ex = False
        elif estimate.kind == "beta":
            a_ex = False
        source = {(True, True): "both", (True, False): "alpha", (False, True): "beta"}.get((a_ex, b_ex), "none")
        out.append(
            ConfidenceBand(s.asset_index, s.label, a_abs, a_bound, b_abs, b_bound, s.asset_index in selected, source)
        )
    return out


def rank_assets(stats: Sequence[SpanningStat]) -> list[tuple[str, float]]:
    """Assets by descending statistic; ties keep ascending index order."""
    order = sorted(range(len(stats)), key=lambda k: (-stats[k].m_stat, stats[k].asset_index))
    return [(stats[k].label, stats[k].m_stat) for k in order]
