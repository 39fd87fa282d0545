"""Timing comparison of the compiled and pure kernel backends.

Run as: python benchmarks/bench_kernels.py [--repeats N]
Exercises the two hot paths at the shapes the studies actually hit: the
penalty-path solver on half-samples and the boosted-tree importance fit.
"""

import argparse
import time

import numpy as np

from pfsgraph import kernels
from pfsgraph.data import standardize_columns


def _lasso_case(rng, n, p):
    x = standardize_columns(rng.standard_normal((n, p)))
    beta = np.zeros(p)
    beta[:4] = rng.normal(0, 1.5, 4)
    y = x @ beta + rng.standard_normal(n)
    y -= y.mean()
    lam_max = np.max(np.abs(x.T @ y) / n)
    lams = np.geomspace(lam_max, lam_max / 100, 25)
    return x, y, lams


def _time(fn, repeats):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    backends = ["pure"]
    try:
        kernels.get_backend("compiled")
        backends.append("compiled")
    except ImportError:
        print("compiled backend not built; timing pure only")

    rng = np.random.default_rng(0)
    cases = {
        "lasso_path 50x199 (half-sample, linear study)": _lasso_case(rng, 50, 199),
        "lasso_path 1500x164 (half-sample, ingest-scale)": _lasso_case(rng, 1500, 164),
    }
    rows = []
    for label, (x, y, lams) in cases.items():
        times = {}
        for b in backends:
            times[b] = _time(lambda: kernels.lasso_path(x, y, lams, tol=1e-5, backend=b), args.repeats)
        rows.append((label, times))

    xb = rng.standard_normal((50, 199))
    yb = np.exp(-xb[:, 0] ** 2 / 2) + np.exp(-xb[:, 1] ** 2 / 2) + 0.3 * rng.standard_normal(50)
    times = {}
    for b in backends:
        times[b] = _time(lambda: kernels.boost_importance(xb, yb, backend=b), args.repeats)
    rows.append(("boost_importance 50x199, 100 rounds", times))

    print(f"{'case':<48} " + " ".join(f"{b:>12}" for b in backends) + ("      speedup" if len(backends) == 2 else ""))
    for label, times in rows:
        cells = " ".join(f"{times[b] * 1e3:>10.1f}ms" for b in backends)
        extra = f"  {times['pure'] / times['compiled']:>9.1f}x" if len(times) == 2 else ""
        print(f"{label:<48} {cells}{extra}")


if __name__ == "__main__":
    main()
