"""Monte Carlo experiments on VAR(1) + GARCH(1,1) returns.

The first ``K`` assets follow a stationary VAR(1) with GARCH shocks and form
the true minimum spanning set. The remaining ``N`` assets load on them with
weights ``1/K`` each (zero intercept, unit weight sum) plus their own GARCH
shock, which makes them redundant.
"""

from __future__ import annotations

import csv
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import IO, Iterable, Sequence

import numpy as np

from . import kernels
from .bootstrap import DEFAULT_SEED, BlockPlan, bootstrap_statistics, child_seed, default_block_len, rng_from
from .errors import MssError
from .panel import ReturnPanel
from .spanning import SpanningStat, spanning_statistics_all
from .stepdown import conditional_quantile, stepdown_estimate

logger = logging.getLogger(__name__)

GARCH_OMEGA = 0.1
GARCH_ARCH = 0.1
GARCH_BETA = 0.8
MAX_FAILURE_RATE = 0.01

ESTIMATORS = ("proposed", "infeasible")


@dataclass(frozen=True)
class SimConfig:
    K: int
    N: int
    T: int
    rho: float = 0.1
    mu_level: float = 0.0
    reps: int = 1000
    level: float = 0.05
    B: int = 1000
    seed: int = DEFAULT_SEED
    burn_in: int = 500
    block_len: int | None = None
    panel: str = ""

    def __post_init__(self):
        if self.K < 1 or self.N < 0:
            raise ValueError("need K >= 1 and N >= 0")
        if self.reps < 1:
            raise ValueError("reps must be at least 1")
        if self.d < 2 or self.T <= self.d + 1:
            raise ValueError(f"need d >= 2 and T > d + 1, got d={self.d}, T={self.T}")
        if not 0 < self.level < 1:
            raise ValueError("level must lie in (0, 1)")
        if self.burn_in < 0:
            raise ValueError("burn_in must be nonnegative")

    @property
    def d(self) -> int:
        return self.K + self.N

    @property
    def panel_id(self) -> str:
        return self.panel or f"K{self.K}N{self.N}"

    def effective_block_len(self) -> int:
        return self.block_len or default_block_len(self.T)


@dataclass
class SimResult:
    config: SimConfig
    p_contain: dict[str, float]
    p_exact: dict[str, float]
    n_ok: int
    failures: int
    adjusted: int = 0
    counts: dict[str, tuple[int, int]] = field(default_factory=dict)

    def rows(self) -> list[dict]:
        return [
            {
                "panel": self.config.panel_id,
                "K": self.config.K,
                "N": self.config.N,
                "T": self.config.T,
                "estimator": name,
                "p_contain": self.p_contain[name],
                "p_exact": self.p_exact[name],
                "reps": self.n_ok,
                "failures": self.failures,
            }
            for name in ESTIMATORS
        ]


def var_matrix(K: int, rho: float) -> np.ndarray:
    """Autoregressive matrix with entries ``rho ** (|i - j| + 1)``."""
    i = np.arange(K)
    return rho ** (np.abs(i[:, None] - i[None, :]) + 1.0)


def loading_matrix(K: int, N: int) -> np.ndarray:
    return np.full((N, K), 1.0 / K)


def simulate_var_garch(config: SimConfig, rng: np.random.Generator) -> ReturnPanel:
    phi = var_matrix(config.K, config.rho)
    radius = float(np.max(np.abs(np.linalg.eigvals(phi))))
    if radius >= 1:
        raise ValueError(f"VAR matrix is not stationary (spectral radius {radius:.3f})")
    n = config.burn_in + config.T
    v = rng.standard_normal((n, config.d))
    mu = np.full(config.K, config.mu_level)
    R = kernels.var_garch(
        v, phi, mu, loading_matrix(config.K, config.N), np.zeros(config.N), GARCH_OMEGA, GARCH_ARCH, GARCH_BETA
    )[config.burn_in:]
    labels = tuple(f"K{j + 1}" for j in range(config.K)) + tuple(f"N{j + 1}" for j in range(config.N))
    periods = tuple(f"t{t:05d}" for t in range(1, config.T + 1))
    return ReturnPanel(R, labels, periods)


def true_mss(config: SimConfig) -> set[int]:
    return set(range(config.K))


def oracle_cv(draws, true_set: Iterable[int], d: int, p: float) -> float:
    rest = [i for i in range(d) if i not in set(true_set)]
    if not rest:
        return 0.0
    return conditional_quantile(draws, rest, p)


def oracle_estimate(stats: Sequence[SpanningStat], draws, true_set: Iterable[int], p: float) -> set[int]:
    """Single-pass selection with the critical value taken over the true non-members."""
    cv = oracle_cv(draws, true_set, len(stats), p)
    return {s.asset_index for s in stats if s.m_stat > cv}


def one_replication(config: SimConfig, r: int):
    """Run replication ``r``; returns (proposed set, infeasible set, adjusted) or None on failure."""
    try:
        panel = simulate_var_garch(config, rng_from(config.seed, r, 0))
        stats = spanning_statistics_all(panel)
        plan = BlockPlan(config.T, config.effective_block_len())
        draws = bootstrap_statistics(panel, plan, config.B, child_seed(config.seed, r, 1))
        est = stepdown_estimate(stats, draws, config.level)
        orc = oracle_estimate(stats, draws, true_mss(config), config.level)
    except MssError as exc:
        logger.warning("replication %d failed: %s", r, exc)
        return None
    return set(est.selected), orc, est.adjusted


def _run_chunk(args):
    config, lo, hi = args
    return [one_replication(config, r) for r in range(lo, hi)]


def run_experiment(config: SimConfig, workers: int = 1) -> SimResult:
    """Empirical containment and exact-match frequencies for both estimators.

    Replications use their own seeded streams and are aggregated in index
    order, so the result does not depend on ``workers``.
    """
    if workers <= 1:
        outcomes = _run_chunk((config, 0, config.reps))
    else:
        edges = np.linspace(0, config.reps, min(workers * 4, config.reps) + 1).astype(int)
        chunks = [(config, int(lo), int(hi)) for lo, hi in zip(edges[:-1], edges[1:]) if hi > lo]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = [o for part in pool.map(_run_chunk, chunks) for o in part]
    failures = sum(o is None for o in outcomes)
    if failures and failures >= MAX_FAILURE_RATE * config.reps:
        raise MssError(f"{failures} of {config.reps} replications failed")
    ok = [o for o in outcomes if o is not None]
    truth = true_mss(config)
    counts = {}
    for k, name in enumerate(ESTIMATORS):
        contain = sum(truth <= o[k] for o in ok)
        exact = sum(truth == o[k] for o in ok)
        counts[name] = (contain, exact)
    n = len(ok)
    return SimResult(
        config=config,
        p_contain={k: c / n for k, (c, _) in counts.items()},
        p_exact={k: e / n for k, (_, e) in counts.items()},
        n_ok=n,
        failures=failures,
        adjusted=sum(o[2] for o in ok),
        counts=counts,
    )


# -- grid files and result tables ------------------------------------------

DESIGNS = {"A": (1, 7), "B": (3, 5), "C": (5, 3), "D": (7, 1)}
DESIGN_T = (120, 180, 240, 300)


def standard_grid(T_values: Sequence[int] = DESIGN_T, **overrides) -> list[SimConfig]:
    """The four (K, N) designs with K + N = 8 crossed with sample sizes."""
    return [
        SimConfig(K=K, N=N, T=T, panel=pid, **overrides)
        for pid, (K, N) in DESIGNS.items()
        for T in T_values
    ]


def read_grid(stream: IO[str], **overrides) -> list[SimConfig]:
    """One JSON object per line, each holding :class:`SimConfig` fields."""
    out = []
    for lineno, line in enumerate(stream, start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            fields = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ValueError(f"grid line {lineno}: {exc}") from None
        fields.update({k: v for k, v in overrides.items() if v is not None})
        out.append(SimConfig(**fields))
    return out


def write_grid(configs: Sequence[SimConfig], stream: IO[str]) -> None:
    for c in configs:
        stream.write(json.dumps(asdict(c), sort_keys=True) + "\n")


RESULT_COLUMNS = ["panel", "K", "N", "T", "estimator", "p_contain", "p_exact", "reps", "failures"]


def write_results(results: Sequence[SimResult], stream: IO[str]) -> None:
    writer = csv.DictWriter(stream, fieldnames=RESULT_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for res in results:
        for row in res.rows():
            row["p_contain"] = f"{row['p_contain']:.4f}"
            row["p_exact"] = f"{row['p_exact']:.4f}"
            writer.writerow(row)
