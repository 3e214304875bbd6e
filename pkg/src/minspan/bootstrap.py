"""Moving-blocks bootstrap of the spanning statistics.

A bootstrap sample is ``m = T // ell`` blocks of ``ell`` consecutive rows,
with block starts drawn uniformly with replacement from the
``q = T - ell + 1`` possible positions. Each sample's Gram matrix is the
sum of precomputed block Gram matrices, so every exclusion regression on
it costs one small Cholesky factorisation.

Seeding: the root seed yields one stream that draws the whole ``B x m``
start matrix before any work is dispatched, and redraws of degenerate
replications come from streams keyed by ``(b, attempt)``. Results are
therefore independent of the thread count.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import kernels
from .errors import EstimationError
from .panel import ReturnPanel

MAX_REDRAWS = 100
DEFAULT_B = 1000
DEFAULT_SEED = 20240101

#: statistic kinds: two-sided max, alpha only, beta-sum only, signed alpha
KINDS = ("max", "alpha", "beta", "alpha_signed")


@dataclass(frozen=True)
class BlockPlan:
    T: int
    block_len: int

    def __post_init__(self):
        if not 1 <= self.block_len <= self.T:
            raise ValueError(f"block length must lie in [1, T={self.T}], got {self.block_len}")

    @property
    def q(self) -> int:
        return self.T - self.block_len + 1

    @property
    def m(self) -> int:
        return self.T // self.block_len

    @property
    def t_b(self) -> int:
        return self.m * self.block_len


@dataclass(frozen=True)
class RegressionLayout:
    """Which regressions a bootstrap replication runs.

    ``colsets`` holds ``(cols, targets)`` pairs over the columns of
    ``Z = [1, R]`` (column 0 is the constant); ``assets`` lists the 0-based
    asset index behind each output column, in order.
    """

    colsets: tuple[tuple[tuple[int, ...], tuple[int, ...]], ...]
    assets: tuple[int, ...]

    @classmethod
    def exclusion(cls, d: int) -> "RegressionLayout":
        cols = tuple(range(d + 1))
        return cls(((cols, tuple(range(1, d + 1))),), tuple(range(d)))

    @classmethod
    def benchmark(cls, benchmark: Sequence[int], additional: Sequence[int]) -> "RegressionLayout":
        base = [0] + [k + 1 for k in benchmark]
        colsets = tuple((tuple(base + [i + 1]), (len(base),)) for i in additional)
        return cls(colsets, tuple(additional))


@dataclass
class BootstrapDraws:
    m_boot: np.ndarray
    block_plan: BlockPlan
    seed: int | None
    redraw_count: int = 0
    assets: tuple[int, ...] = ()
    kind: str = "max"
    centers: np.ndarray | None = field(default=None, repr=False)

    @property
    def B(self) -> int:
        return self.m_boot.shape[0]


def default_block_len(T: int) -> int:
    """``floor(1.2 * T**0.25)``, at least 1."""
    if T < 1:
        raise ValueError("T must be positive")
    # integer search avoids rounding trouble when 1.2 T^(1/4) is an integer
    ell = int(np.floor(1.2 * T ** 0.25))
    while ell > 0 and (5 * ell) ** 4 > T * 6 ** 4:
        ell -= 1
    while (5 * (ell + 1)) ** 4 <= T * 6 ** 4:
        ell += 1
    return max(1, ell)


def _seed_sequence(seed) -> np.random.SeedSequence:
    if isinstance(seed, np.random.SeedSequence):
        return seed
    return np.random.SeedSequence(seed)


def child_seed(seed, *key: int) -> np.random.SeedSequence:
    """Sub-stream of ``seed`` addressed by an integer key path."""
    ss = _seed_sequence(seed)
    return np.random.SeedSequence(ss.entropy, spawn_key=tuple(ss.spawn_key) + tuple(key))


def rng_from(seed, *key: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(child_seed(seed, *key)))


def block_indices(plan: BlockPlan, starts: np.ndarray) -> np.ndarray:
    """Expand block starts (last axis) into row indices of length ``m * ell``."""
    starts = np.asarray(starts)
    idx = starts[..., :, None] + np.arange(plan.block_len)
    return idx.reshape(*starts.shape[:-1], -1)


def draw_block_starts(plan: BlockPlan, rng: np.random.Generator, size=None) -> np.ndarray:
    shape = (plan.m,) if size is None else (size, plan.m)
    return rng.integers(0, plan.q, size=shape, dtype=np.int64)


def resample_indices(plan: BlockPlan, rng: np.random.Generator) -> np.ndarray:
    """0-based row indices of one moving-blocks bootstrap sample."""
    return block_indices(plan, draw_block_starts(plan, rng))


def block_expectation(values: np.ndarray, plan: BlockPlan) -> np.ndarray:
    """Exact bootstrap expectation of the within-block mean of ``values``.

    Enumerates all ``q`` equally likely blocks. ``values[t]`` may be an
    array of any shape.
    """
    values = np.asarray(values, dtype=float)
    if values.shape[0] != plan.T:
        raise ValueError("values must have one entry per period")
    idx = block_indices(plan, np.arange(plan.q)[:, None])
    return values[idx].mean(axis=1).mean(axis=0)


def design_matrix(panel: ReturnPanel) -> np.ndarray:
    return np.column_stack([np.ones(panel.T), panel.values])


def _statistic(moments: np.ndarray, centers: np.ndarray, kind: str, T: int) -> np.ndarray:
    rt = np.sqrt(T)
    s1 = np.sqrt(moments[..., 2])
    s2 = np.sqrt(moments[..., 3])
    da = moments[..., 0] - centers[:, 0]
    db = moments[..., 1] - centers[:, 1]
    if kind == "max":
        return np.maximum(rt * np.abs(da) / s1, rt * np.abs(db) / s2)
    if kind == "alpha":
        return rt * np.abs(da) / s1
    if kind == "beta":
        return rt * np.abs(db) / s2
    if kind == "alpha_signed":
        return rt * da / s1
    raise ValueError(f"unknown statistic kind {kind!r}")


def full_sample_moments(panel: ReturnPanel, layout: RegressionLayout) -> np.ndarray:
    """Regression moments on the original sample via the bootstrap kernel path.

    Returns ``(n_assets, 5)``. Used for recentring, so that a bootstrap
    sample equal to the original reproduces the centre exactly.
    """
    H = kernels.block_grams(design_matrix(panel), panel.T)
    outs, ok = kernels.bootstrap_moments(H, np.zeros((1, 1), dtype=np.int64), 1.0 / panel.T, layout.colsets)
    if not ok[0]:
        raise EstimationError("original-sample regressions are singular or exact")
    return np.concatenate([o[0] for o in outs], axis=0)


def bootstrap_statistics(
    panel: ReturnPanel,
    plan: BlockPlan,
    B: int = DEFAULT_B,
    seed=DEFAULT_SEED,
    *,
    kind: str = "max",
    layout: RegressionLayout | None = None,
    threads: int = 1,
) -> BootstrapDraws:
    """Bootstrap counterparts of the spanning statistics, one row per replication.

    Each replication reruns the regressions in ``layout`` (default: every
    exclusion regression) on a resampled panel of length ``T_B``, recentres
    at the original-sample estimates and scales by ``sqrt(T)``.
    """
    if B < 1:
        raise ValueError("B must be at least 1")
    if plan.T != panel.T:
        raise ValueError("block plan and panel disagree on T")
    if kind not in KINDS:
        raise ValueError(f"unknown statistic kind {kind!r}")
    layout = layout or RegressionLayout.exclusion(panel.d)
    centers = full_sample_moments(panel, layout)
    H = kernels.block_grams(design_matrix(panel), plan.block_len)
    scale = 1.0 / plan.t_b
    starts = draw_block_starts(plan, rng_from(seed, 0), B)
    outs, ok = kernels.bootstrap_moments(H, starts, scale, layout.colsets, threads=threads)
    moments = np.concatenate(outs, axis=1)

    redraws = 0
    for b in np.flatnonzero(~ok):
        for attempt in range(1, MAX_REDRAWS + 1):
            redraws += 1
            s = draw_block_starts(plan, rng_from(seed, 1, int(b), attempt), 1)
            o, k = kernels.bootstrap_moments(H, s, scale, layout.colsets)
            if k[0]:
                moments[b] = np.concatenate(o, axis=1)[0]
                break
        else:
            raise EstimationError(
                f"bootstrap replication {b} stayed degenerate after {MAX_REDRAWS} redraws; "
                "try a longer block length or more data"
            )

    stats = _statistic(moments, centers, kind, panel.T)
    ss = _seed_sequence(seed)
    root = ss.entropy if isinstance(ss.entropy, int) and not ss.spawn_key else None
    return BootstrapDraws(stats, plan, root, redraws, layout.assets, kind, centers)
