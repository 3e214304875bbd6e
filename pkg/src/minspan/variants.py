"""Estimation pipeline and its variants.

Every estimator here runs the same bootstrap and step-down machinery and
differs only in the statistic plugged in:

* ``MSS``: max of the intercept and slope-sum t-ratios
* ``TAN``: intercept t-ratio only (tangency portfolio support)
* ``GMV``: slope-sum t-ratio only (global minimum variance support)
* ``TAN_PLUS``: signed intercept t-ratio (assets with positive alpha)
* ``NONREDUNDANT``: additional assets regressed on a benchmark set only
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .bootstrap import DEFAULT_B, DEFAULT_SEED, BlockPlan, RegressionLayout, bootstrap_statistics, default_block_len
from .errors import PanelError
from .panel import ReturnPanel, require_nonsingular
from .spanning import SpanningStat, fit_exclusion_regression, ols_with_intercept, spanning_statistic
from .stepdown import MssEstimate, stepdown_estimate


class Variant(str, enum.Enum):
    MSS = "mss"
    TAN = "tan"
    GMV = "gmv"
    TAN_PLUS = "tan-plus"
    NONREDUNDANT = "nonredundant"


_KIND = {
    Variant.MSS: "max",
    Variant.TAN: "alpha",
    Variant.GMV: "beta",
    Variant.TAN_PLUS: "alpha_signed",
    Variant.NONREDUNDANT: "max",
}

# targets that can legitimately be empty get no finite-sample adjustment
_ADJUST_EMPTY = {Variant.MSS: True, Variant.GMV: True}


@dataclass(frozen=True)
class VariantSpec:
    kind: Variant = Variant.MSS
    benchmark: tuple[int, ...] | None = None
    additional: tuple[int, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", Variant(self.kind))
        if self.benchmark is not None:
            object.__setattr__(self, "benchmark", tuple(sorted(int(i) for i in self.benchmark)))
        if self.additional is not None:
            object.__setattr__(self, "additional", tuple(sorted(int(i) for i in self.additional)))

    def validate(self, d: int) -> None:
        if self.kind is not Variant.NONREDUNDANT:
            return
        K, N = self.benchmark, self.additional
        if not K or not N:
            raise PanelError("benchmark and additional sets must both be nonempty")
        if set(K) & set(N):
            raise PanelError("benchmark and additional sets overlap")
        if set(K) | set(N) != set(range(d)):
            raise PanelError("benchmark and additional sets must cover every panel column")

    @property
    def statistic_kind(self) -> str:
        return _KIND[self.kind]


def _with_stat(s: SpanningStat, kind: str, T: int) -> SpanningStat:
    if kind == "max":
        return s
    if kind == "alpha":
        m = s.t_alpha
    elif kind == "beta":
        m = s.t_beta
    else:
        m = float(np.sqrt(T) * s.alpha_hat / s.s1)
    return replace(s, m_stat=m)


def variant_statistic(panel: ReturnPanel, spec: VariantSpec, i: int) -> SpanningStat:
    """Sample statistic of asset ``i`` under ``spec``; ``m_stat`` holds the variant value."""
    label = panel.asset_labels[i]
    if spec.kind is Variant.NONREDUNDANT:
        spec.validate(panel.d)
        if i not in spec.additional:
            raise ValueError(f"asset {label!r} is not in the additional set")
        X = panel.values[:, list(spec.benchmark)]
        fit = ols_with_intercept(panel.values[:, i], X, i, label)
        return spanning_statistic(fit, panel.T, label)
    fit = fit_exclusion_regression(panel, i)
    return _with_stat(spanning_statistic(fit, panel.T, label), spec.statistic_kind, panel.T)


def variant_estimate(
    panel: ReturnPanel,
    spec: VariantSpec = VariantSpec(),
    p: float = 0.05,
    block_len: int | None = None,
    B: int = DEFAULT_B,
    seed=DEFAULT_SEED,
    threads: int = 1,
    check_singular: bool = True,
) -> MssEstimate:
    spec.validate(panel.d)
    if check_singular:
        require_nonsingular(panel)
    plan = BlockPlan(panel.T, block_len or default_block_len(panel.T))
    if spec.kind is Variant.NONREDUNDANT:
        candidates = spec.additional
        layout = RegressionLayout.benchmark(spec.benchmark, spec.additional)
    else:
        candidates = tuple(range(panel.d))
        layout = RegressionLayout.exclusion(panel.d)
    stats = [variant_statistic(panel, spec, i) for i in candidates]
    draws = bootstrap_statistics(panel, plan, B, seed, kind=spec.statistic_kind, layout=layout, threads=threads)
    est = stepdown_estimate(stats, draws, p, adjust_empty=_ADJUST_EMPTY.get(spec.kind, False))
    est.variant = spec.kind.value
    return est


def estimate_mss(
    panel: ReturnPanel,
    p: float = 0.05,
    block_len: int | None = None,
    B: int = DEFAULT_B,
    seed=DEFAULT_SEED,
    threads: int = 1,
) -> MssEstimate:
    """Bootstrap step-down estimate of the minimum spanning set."""
    return variant_estimate(panel, VariantSpec(Variant.MSS), p, block_len, B, seed, threads)


def spec_from_labels(panel: ReturnPanel, benchmark: Sequence[str], additional: Sequence[str]) -> VariantSpec:
    K = tuple(panel.column(a) for a in benchmark)
    N = tuple(panel.column(a) for a in additional)
    spec = VariantSpec(Variant.NONREDUNDANT, K, N)
    spec.validate(panel.d)
    return spec
