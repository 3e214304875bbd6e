"""Exclusion regressions, spanning statistics and the population MSS oracle.

Each asset ``i`` is regressed on a constant and the remaining assets. The
intercept and the deviation of the slope sum from one measure how far the
other assets are from spanning ``i``; the statistic ``M`` is the larger of
the two t-ratios.

Asset indices are 0-based throughout.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import IO, Sequence

import numpy as np
from scipy import linalg

from .errors import EstimationError, PanelError
from .panel import ReturnPanel, require_nonsingular

#: Condition number above which a regressor moment matrix counts as singular.
MAX_CONDITION = 1e12
#: Residual variance below this fraction of the dependent variance is an exact fit.
DEGENERATE_RTOL = 1e-12
#: Absolute threshold for "nonzero" in the population oracle.
SUPPORT_TOL = 1e-10


@dataclass(frozen=True)
class RegressionFit:
    asset_index: int
    alpha_hat: float
    beta_hat: np.ndarray
    residuals: np.ndarray
    sigma2_eps_hat: float
    q_inv: np.ndarray


@dataclass(frozen=True)
class SpanningStat:
    asset_index: int
    alpha_hat: float
    beta_sum_hat: float
    s1: float
    s2: float
    t_alpha: float
    t_beta: float
    m_stat: float
    label: str = ""

    @property
    def theta_hat(self) -> tuple[float, float]:
        return (self.alpha_hat, self.beta_sum_hat)


@dataclass(frozen=True)
class PopulationModel:
    mu: np.ndarray
    sigma: np.ndarray

    def __post_init__(self):
        mu = np.asarray(self.mu, dtype=float)
        sigma = np.asarray(self.sigma, dtype=float)
        d = mu.shape[0]
        if sigma.shape != (d, d):
            raise ValueError(f"sigma shape {sigma.shape} does not match mu length {d}")
        if not np.allclose(sigma, sigma.T, rtol=1e-12, atol=1e-12):
            raise ValueError("sigma is not symmetric")
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "sigma", sigma)

    @property
    def d(self) -> int:
        return self.mu.shape[0]


def ols_with_intercept(y: np.ndarray, X: np.ndarray, asset_index: int = -1, label=None) -> RegressionFit:
    """Least squares of ``y`` on ``[1, X]`` with divisor-T moments.

    ``q_inv`` is the inverse of ``T^-1 sum x~ x~'`` with the constant in
    position 0.
    """
    T = y.shape[0]
    Xt = np.column_stack([np.ones(T), X])
    Q = Xt.T @ Xt / T
    Q = (Q + Q.T) / 2
    if np.linalg.cond(Q) > MAX_CONDITION:
        raise EstimationError("regressor moment matrix is singular (condition number > 1e12)", label)
    try:
        factor = linalg.cho_factor(Q)
    except linalg.LinAlgError:
        raise EstimationError("regressor moment matrix is not positive definite", label) from None
    coef = linalg.cho_solve(factor, Xt.T @ y / T)
    resid = y - Xt @ coef
    sigma2 = float(resid @ resid / T)
    var_y = float(np.var(y))
    if var_y == 0 or sigma2 <= DEGENERATE_RTOL * var_y:
        raise EstimationError("degenerate residual variance (exact fit)", label)
    q_inv = linalg.cho_solve(factor, np.eye(Q.shape[0]))
    q_inv = (q_inv + q_inv.T) / 2
    return RegressionFit(asset_index, float(coef[0]), coef[1:], resid, sigma2, q_inv)


def fit_exclusion_regression(panel: ReturnPanel, i: int) -> RegressionFit:
    """Regress asset ``i`` on a constant and every other asset."""
    if not 0 <= i < panel.d:
        raise IndexError(f"asset index {i} out of range for d={panel.d}")
    x = panel.values
    others = [j for j in range(panel.d) if j != i]
    return ols_with_intercept(x[:, i], x[:, others], i, panel.asset_labels[i])


def spanning_statistic(fit: RegressionFit, T: int, label: str = "") -> SpanningStat:
    """t-ratios for ``alpha = 0`` and ``sum(beta) = 1`` and their maximum."""
    s1sq = fit.sigma2_eps_hat * fit.q_inv[0, 0]
    s2sq = fit.sigma2_eps_hat * fit.q_inv[1:, 1:].sum()
    if not (s1sq > 0 and s2sq > 0):
        raise EstimationError("non-positive standard error", label or None)
    s1, s2 = float(np.sqrt(s1sq)), float(np.sqrt(s2sq))
    bsum = float(fit.beta_hat.sum())
    rt = np.sqrt(T)
    t_alpha = float(rt * abs(fit.alpha_hat) / s1)
    t_beta = float(rt * abs(bsum - 1.0) / s2)
    return SpanningStat(
        fit.asset_index, fit.alpha_hat, bsum, s1, s2, t_alpha, t_beta, max(t_alpha, t_beta), label
    )


def spanning_statistics_all(panel: ReturnPanel, check_singular: bool = True) -> list[SpanningStat]:
    if check_singular:
        require_nonsingular(panel)
    out = []
    for i, label in enumerate(panel.asset_labels):
        fit = fit_exclusion_regression(panel, i)
        out.append(spanning_statistic(fit, panel.T, label))
    return out


def write_stats_csv(stats: Sequence[SpanningStat], stream: IO[str]) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["label", "alpha_hat", "beta_sum_hat", "s1", "s2", "t_alpha", "t_beta", "m_stat"])
    for s in stats:
        writer.writerow(
            [s.label, *(repr(float(v)) for v in (s.alpha_hat, s.beta_sum_hat, s.s1, s.s2, s.t_alpha, s.t_beta, s.m_stat))]
        )


# -- population side -------------------------------------------------------


def population_projection(model: PopulationModel, i: int) -> tuple[float, np.ndarray, float]:
    """Population intercept, slopes and residual variance of asset ``i`` on the rest.

    Returns ``(alpha_i, beta_i, sigma_tilde2_i)``.
    """
    others = [j for j in range(model.d) if j != i]
    S_mm = model.sigma[np.ix_(others, others)]
    gamma = model.sigma[i, others]
    beta = np.linalg.solve(S_mm, gamma)
    alpha = float(model.mu[i] - beta @ model.mu[others])
    resid_var = float(model.sigma[i, i] - gamma @ beta)
    return alpha, beta, resid_var


def portfolio_directions(model: PopulationModel) -> tuple[np.ndarray, np.ndarray]:
    """``Sigma^-1 mu`` (tangency direction) and ``Sigma^-1 1`` (GMV direction)."""
    try:
        factor = linalg.cho_factor(model.sigma)
    except linalg.LinAlgError:
        raise PanelError("population covariance is not positive definite") from None
    if np.linalg.cond(model.sigma) > MAX_CONDITION:
        raise PanelError("population covariance is singular")
    return linalg.cho_solve(factor, model.mu), linalg.cho_solve(factor, np.ones(model.d))


def population_mss(model: PopulationModel, tol: float = SUPPORT_TOL) -> set[int]:
    """Union of the supports of the tangency and GMV portfolio weights."""
    w_tan, w_gmv = portfolio_directions(model)
    return {i for i in range(model.d) if abs(w_tan[i]) > tol or abs(w_gmv[i]) > tol}


def population_mss_by_regression(model: PopulationModel, tol: float = SUPPORT_TOL) -> set[int]:
    """Assets whose exclusion regression has a nonzero intercept or slope-sum gap."""
    out = set()
    for i in range(model.d):
        alpha, beta, _ = population_projection(model, i)
        if max(abs(alpha), abs(beta.sum() - 1.0)) > tol:
            out.add(i)
    return out
