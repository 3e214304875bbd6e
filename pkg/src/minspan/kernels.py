"""Backend selection for the hot kernels.

The compiled extension is used when it imports; otherwise the numpy
fallback. Set ``MINSPAN_BACKEND=python`` to force the fallback. Both
backends produce identical numbers, so the choice only affects speed.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import _fallback

_compiled = None
if os.environ.get("MINSPAN_BACKEND", "").lower() not in ("python", "numpy", "fallback"):
    try:
        from . import _kernels as _compiled
    except ImportError:  # extension not built
        _compiled = None

BACKEND = "cython" if _compiled is not None else "python"
_impl = _compiled if _compiled is not None else _fallback

N_MOMENTS = _fallback.N_MOMENTS


def get_backend(name: str | None = None):
    """Kernel module by name (``"cython"`` or ``"python"``); default is the active one."""
    if name is None:
        return _impl
    if name == "python":
        return _fallback
    if name == "cython":
        if _compiled is None:
            raise ImportError("compiled kernels are not available")
        return _compiled
    raise ValueError(f"unknown backend {name!r}")


def block_grams(Z, ell, backend=None):
    return get_backend(backend).block_grams(np.ascontiguousarray(Z, dtype=np.float64), int(ell))


def bootstrap_moments(H, starts, scale, colsets, threads=1, backend=None):
    """Accumulate bootstrap Gram matrices and run the requested regressions.

    ``colsets`` is a list of ``(cols, targets)`` pairs as taken by
    ``exclusion_moments``. Returns one ``(B, len(targets), 5)`` array per
    column set and a combined ``ok`` mask of shape ``(B,)``. Rows are
    independent, so splitting them over ``threads`` cannot change results.
    """
    impl = get_backend(backend)
    starts = np.ascontiguousarray(starts, dtype=np.int64)
    B = starts.shape[0]

    def run(lo, hi):
        G = impl.accumulate_grams(H, starts[lo:hi], float(scale))
        outs, ok = [], np.ones(hi - lo, dtype=bool)
        for cols, targets in colsets:
            o, k = impl.exclusion_moments(G, list(cols), list(targets))
            outs.append(o)
            ok &= k
        return outs, ok

    if threads <= 1 or B < 2 * threads:
        return run(0, B)
    edges = np.linspace(0, B, threads + 1).astype(int)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        parts = list(pool.map(lambda e: run(*e), zip(edges[:-1], edges[1:])))
    outs = [np.concatenate([p[0][s] for p in parts]) for s in range(len(colsets))]
    ok = np.concatenate([p[1] for p in parts])
    return outs, ok


def var_garch(v, phi, mu, bmat, a, omega, arch, garch, backend=None):
    return get_backend(backend).var_garch(
        np.ascontiguousarray(v, dtype=np.float64),
        np.ascontiguousarray(phi, dtype=np.float64),
        np.ascontiguousarray(mu, dtype=np.float64),
        np.ascontiguousarray(bmat, dtype=np.float64),
        np.ascontiguousarray(a, dtype=np.float64),
        float(omega),
        float(arch),
        float(garch),
    )
