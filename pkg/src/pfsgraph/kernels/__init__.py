"""Hot numeric kernels with a compiled core and a pure numpy fallback.

The compiled extension (Cython) is preferred; if it is missing, or if
``PFSGRAPH_PURE_KERNELS=1`` is set, the numpy implementation is used. Both
backends implement the same contracts and are compared by
``benchmarks/bench_kernels.py`` and the parity tests.
"""

from __future__ import annotations

import os

import numpy as np

from . import pure as _pure

if os.environ.get("PFSGRAPH_PURE_KERNELS", "") not in ("", "0"):
    _impl = _pure
    BACKEND = "pure"
else:
    try:
        from . import _ckernels as _impl  # type: ignore[attr-defined]

        BACKEND = "compiled"
    except ImportError:
        _impl = _pure
        BACKEND = "pure"


def get_backend(name: str):
    """Return a backend module by name ("pure" or "compiled")."""
    if name == "pure":
        return _pure
    if name == "compiled":
        from . import _ckernels  # raises ImportError when not built

        return _ckernels
    raise ValueError(f"unknown kernel backend {name!r}")


def lasso_path(x, y, lams, tol=1e-9, max_sweeps=2000, backend=None):
    """Cyclic coordinate descent over a decreasing penalty sequence.

    ``x`` must have standardized (or identically zero) columns and ``y`` must
    be centered. Returns (coefs[m, p], sweeps[m], converged[m]) where row i of
    ``coefs`` minimizes (1/2n)||y - x b||^2 + lams[i] ||b||_1, warm-started
    from row i-1.
    """
    impl = _impl if backend is None else get_backend(backend)
    x = np.asarray(x, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    lams = np.ascontiguousarray(lams, dtype=np.float64)
    if x.ndim != 2 or y.ndim != 1 or x.shape[0] != y.shape[0]:
        raise ValueError("x must be (n, p) and y must be (n,) with matching n")
    if np.any(lams < 0):
        raise ValueError("penalties must be nonnegative")
    xt = np.ascontiguousarray(x.T)  # column-contiguous layout for the sweeps
    return impl.lasso_path(xt, y, lams, float(tol), int(max_sweeps))


def boost_importance(x, y, n_rounds=100, learning_rate=0.1, max_depth=2, min_leaf=3, backend=None):
    """Impurity-decrease feature importances from least-squares boosting.

    Fits ``n_rounds`` depth-limited regression trees on residuals and sums the
    squared-error reduction of every split, per feature. Deterministic: no
    internal randomness, ties broken toward the lower feature index and the
    earlier split point.
    """
    impl = _impl if backend is None else get_backend(backend)
    x = np.ascontiguousarray(x, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    if x.ndim != 2 or y.ndim != 1 or x.shape[0] != y.shape[0]:
        raise ValueError("x must be (n, p) and y must be (n,) with matching n")
    order = np.ascontiguousarray(np.argsort(x, axis=0, kind="stable"), dtype=np.int64)
    resid0 = y - y.mean()  # centered here so both backends start from identical residuals
    return impl.boost_importance(
        x, resid0, order, int(n_rounds), float(learning_rate), int(max_depth), int(min_leaf)
    )
