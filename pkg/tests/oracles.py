"""Independent reference computations shared by the tests."""

import numpy as np


def random_spd(rng, d, cond_max=1e4):
    while True:
        A = rng.standard_normal((d, d))
        S = A @ A.T / d + rng.uniform(0.05, 1.0) * np.eye(d)
        if np.linalg.cond(S) < cond_max:
            return S


def planted_model(rng, d):
    """Population (mu, Sigma) with chosen supports of Sigma^-1 mu and Sigma^-1 1.

    Returns ``(mu, sigma, support)`` where ``support`` is the union of the
    two planted supports.
    """
    while True:
        gmv = rng.random(d) < rng.uniform(0.2, 1.0)
        if not gmv.any():
            continue
        w = np.where(gmv, rng.standard_normal(d), 0.0)
        if abs(w.sum()) < 0.2:
            continue
        if w.sum() < 0:
            w = -w
        S0 = random_spd(rng, d)
        sigma = S0 - np.outer(S0 @ w, S0 @ w) / (w @ S0 @ w) + np.ones((d, d)) / w.sum()
        sigma = (sigma + sigma.T) / 2
        if np.linalg.cond(sigma) > 1e6:
            continue
        tan = rng.random(d) < rng.uniform(0.0, 1.0)
        w_tan = np.where(tan, rng.standard_normal(d), 0.0)
        mu = sigma @ w_tan
        return mu, sigma, set(np.flatnonzero(gmv | tan).tolist())


def normal_equations(y, X):
    """Solve [1, X]'[1, X] b = [1, X]'y by Gaussian elimination with partial pivoting."""
    T = len(y)
    Z = [[1.0] + [float(v) for v in row] for row in np.atleast_2d(X.reshape(T, -1))]
    p = len(Z[0])
    A = [[sum(Z[t][a] * Z[t][b] for t in range(T)) for b in range(p)] for a in range(p)]
    rhs = [sum(Z[t][a] * float(y[t]) for t in range(T)) for a in range(p)]
    for k in range(p):
        piv = max(range(k, p), key=lambda r: abs(A[r][k]))
        A[k], A[piv] = A[piv], A[k]
        rhs[k], rhs[piv] = rhs[piv], rhs[k]
        for r in range(k + 1, p):
            f = A[r][k] / A[k][k]
            for c in range(k, p):
                A[r][c] -= f * A[k][c]
            rhs[r] -= f * rhs[k]
    b = [0.0] * p
    for k in reversed(range(p)):
        b[k] = (rhs[k] - sum(A[k][c] * b[c] for c in range(k + 1, p))) / A[k][k]
    return np.array(b)


def stat_reference(R, i):
    """Straight-line evaluation of the exclusion-regression t-ratios for asset ``i``."""
    T, d = R.shape
    y = R[:, i]
    X = np.column_stack([np.ones(T), np.delete(R, i, axis=1)])
    coef, *_ = np.linalg.lstsq(X, y, rcond=None)
    e = y - X @ coef
    sig2 = e @ e / T
    Qi = np.linalg.inv(X.T @ X / T)
    s1 = np.sqrt(sig2 * Qi[0, 0])
    s2 = np.sqrt(sig2 * np.ones(d - 1) @ Qi[1:, 1:] @ np.ones(d - 1))
    ta = np.sqrt(T) * abs(coef[0]) / s1
    tb = np.sqrt(T) * abs(coef[1:].sum() - 1) / s2
    return coef, s1, s2, max(ta, tb)


def synthetic_case(rng, d=None, B=None):
    """Random spanning statistics and a draws matrix, with occasional ties."""
    from minspan.bootstrap import BlockPlan, BootstrapDraws
    from minspan.spanning import SpanningStat

    d = d or int(rng.integers(1, 9))
    B = B or int(rng.integers(20, 200))
    T = int(rng.integers(30, 500))
    scale = rng.uniform(0.5, 4.0)
    if rng.random() < 0.3:
        m_boot = rng.integers(0, 6, size=(B, d)).astype(float) * scale / 3
    else:
        m_boot = rng.exponential(scale, size=(B, d))
    stats = []
    for i in range(d):
        s1, s2 = rng.uniform(0.1, 2.0, size=2)
        a = rng.standard_normal() * s1 * rng.uniform(0, 8) / np.sqrt(T)
        b = 1 + rng.standard_normal() * s2 * rng.uniform(0, 8) / np.sqrt(T)
        ta = np.sqrt(T) * abs(a) / s1
        tb = np.sqrt(T) * abs(b - 1) / s2
        stats.append(SpanningStat(i, a, b, s1, s2, ta, tb, max(ta, tb), f"A{i}"))
    draws = BootstrapDraws(m_boot, BlockPlan(T, 1), None, assets=tuple(range(d)))
    return stats, draws, T


def stepdown_violations(stats, draws, T, p, rng):
    """Structural checks of one step-down run; returns a list of failure names."""
    from minspan.stepdown import conditional_quantile, stepdown_estimate

    d = len(stats)
    est = stepdown_estimate(stats, draws, p)
    bad = []
    sets = [set(t.selected) for t in est.trace]
    cvs = [t.cv for t in est.trace]
    if any(not a <= b for a, b in zip(sets, sets[1:])):
        bad.append("nested")
    if any(b > a for a, b in zip(cvs, cvs[1:])):
        bad.append("cv_monotone")
    if len(est.trace) > d:
        bad.append("iterations")
    m = np.array([s.m_stat for s in stats])
    if not est.adjusted:
        if set(est.selected) != set(np.flatnonzero(m > est.final_cv).tolist()):
            bad.append("selection")
        cv, rt = est.final_cv, np.sqrt(T)
        by_band = {s.asset_index for s in stats if abs(s.alpha_hat) > s.s1 * cv / rt}
        by_band |= {s.asset_index for s in stats if abs(s.beta_sum_hat - 1) > s.s2 * cv / rt}
        if set(est.selected) != by_band:
            bad.append("decomposition")
    else:
        if len(est.selected) != 1 or est.selected[0] != int(np.argmax(m)):
            bad.append("adjustment")
    if d >= 2:
        big = rng.permutation(d)[: int(rng.integers(1, d + 1))]
        small = big[: int(rng.integers(1, len(big) + 1))]
        if conditional_quantile(draws, small, p) > conditional_quantile(draws, big, p):
            bad.append("quantile_monotone")
    return bad
