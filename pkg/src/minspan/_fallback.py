"""Pure numpy implementations of the hot kernels.

These mirror ``_kernels.pyx`` operation for operation: every sum is
accumulated in the same order, so on IEEE hardware both backends return
bitwise-identical results. Loops run over the small matrix dimension and
vectorise over bootstrap replications.
"""

import numpy as np

#: Relative Cholesky pivot floor; below it a Gram matrix is treated as singular.
PIVOT_RTOL = 1e-12
#: Residual variance floor relative to the target's variance.
RESID_RTOL = 1e-12

N_MOMENTS = 5  # alpha, beta_sum, s1^2, s2^2, sigma2


def block_grams(Z, ell):
    """Uncentred Gram matrix of every length-``ell`` moving block of rows of ``Z``.

    Returns shape ``(T - ell + 1, p, p)``.
    """
    Z = np.ascontiguousarray(Z, dtype=np.float64)
    T, p = Z.shape
    q = T - ell + 1
    outer = Z[:, :, None] * Z[:, None, :]
    H = outer[0:q].copy()
    for k in range(1, ell):
        H += outer[k:k + q]
    return H


def accumulate_grams(H, starts, scale):
    """``scale * sum_j H[starts[b, j]]`` for each row ``b``, summed in ``j`` order."""
    starts = np.asarray(starts, dtype=np.int64)
    G = H[starts[:, 0]].copy()
    for j in range(1, starts.shape[1]):
        G += H[starts[:, j]]
    G *= scale
    return G


def exclusion_moments(G, cols, targets):
    """Regression moments read off the inverse of ``G[cols][:, cols]``.

    ``cols[0]`` must be the constant column. For each position ``c`` in
    ``targets`` the column ``cols[c]`` is regressed on the other columns in
    ``cols``. Output ``out[b, r]`` holds ``(alpha, beta_sum, s1^2, s2^2,
    sigma2)``; ``ok[b]`` is False when the sub-Gram is numerically singular
    or some target fits exactly.
    """
    cols = [int(c) for c in cols]
    targets = [int(c) for c in targets]
    B = G.shape[0]
    k = len(cols)
    ok = np.ones(B, dtype=bool)
    A = [[G[:, cols[a], cols[b]] for b in range(k)] for a in range(k)]

    L = [[None] * k for _ in range(k)]
    for j in range(k):
        s = A[j][j].copy()
        for l in range(j):
            s = s - L[j][l] * L[j][l]
        bad = ~(s > PIVOT_RTOL * A[j][j])
        ok &= ~bad
        s = np.where(bad, 1.0, s)
        L[j][j] = np.sqrt(s)
        for i in range(j + 1, k):
            t = A[i][j].copy()
            for l in range(j):
                t = t - L[i][l] * L[j][l]
            L[i][j] = t / L[j][j]

    Li = [[None] * k for _ in range(k)]
    for j in range(k):
        Li[j][j] = 1.0 / L[j][j]
        for i in range(j + 1, k):
            t = np.zeros(B)
            for l in range(j, i):
                t = t - L[i][l] * Li[l][j]
            Li[i][j] = t / L[i][i]

    S = [[None] * k for _ in range(k)]
    for a in range(k):
        for b in range(a, k):
            t = np.zeros(B)
            for l in range(b, k):
                t = t + Li[l][a] * Li[l][b]
            S[a][b] = t
            S[b][a] = t

    out = np.empty((B, len(targets), N_MOMENTS))
    for r, c in enumerate(targets):
        Scc = S[c][c]
        sigma2 = 1.0 / Scc
        alpha = -S[0][c] / Scc
        braw = np.zeros(B)
        for a in range(1, k):
            if a != c:
                braw = braw + S[a][c]
        usu = np.zeros(B)
        for a in range(1, k):
            if a == c:
                continue
            for b in range(1, k):
                if b != c:
                    usu = usu + S[a][b]
        q11 = S[0][0] - S[0][c] * S[0][c] / Scc
        q22 = usu - braw * braw / Scc
        var_c = A[c][c] - A[0][c] * A[0][c] / A[0][0]
        ok &= (sigma2 > RESID_RTOL * var_c) & (q11 > 0) & (q22 > 0)
        out[:, r, 0] = alpha
        out[:, r, 1] = -braw / Scc
        out[:, r, 2] = sigma2 * q11
        out[:, r, 3] = sigma2 * q22
        out[:, r, 4] = sigma2
    return out, ok


def var_garch(v, phi, mu, bmat, a, omega, arch, garch):
    """Run the VAR(1) + GARCH(1,1) recursion over standard normal shocks ``v``.

    ``v`` has shape ``(n, K + N)``; the first ``K`` columns drive the VAR
    block and the rest the loading block ``a + bmat @ R_K``. Starts from
    ``h = 1``, ``eta = 0`` and ``R_K = mu``.
    """
    v = np.ascontiguousarray(v, dtype=np.float64)
    n, d = v.shape
    K = phi.shape[0]
    N = d - K
    out = np.empty((n, d))
    h = np.ones(d)
    eta = np.zeros(d)
    prev = np.array(mu, dtype=np.float64)
    for t in range(n):
        h = omega + arch * eta * eta + garch * h
        eta = np.sqrt(h) * v[t]
        cur = mu.copy()
        for l in range(K):
            cur = cur + phi[:, l] * prev[l]
        cur = cur + eta[:K]
        out[t, :K] = cur
        if N:
            red = a.copy()
            for l in range(K):
                red = red + bmat[:, l] * cur[l]
            out[t, K:] = red + eta[K:]
        prev = cur
    return out
