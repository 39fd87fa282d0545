"""Pure numpy implementations of the hot kernels.

Reference semantics for the compiled extension: the tree kernel accumulates
sums in exactly the same order as the C loop (bincount for node totals,
cumulative sums in sorted order for split scans) so both backends pick
identical splits.
"""

from __future__ import annotations

import numpy as np


def _soft(z: float, lam: float) -> float:
    if z > lam:
        return z - lam
    if z < -lam:
        return z + lam
    return 0.0


def lasso_path(xt, y, lams, tol, max_sweeps):
    """Warm-started cyclic CD; xt is the (p, n) transposed design.

    Full sweeps alternate with restricted sweeps over the current support
    (coordinates with nonzero coefficients); convergence is only declared on a
    full sweep, so the optimum matches plain cyclic descent.
    """
    p, n = xt.shape
    m = lams.shape[0]
    col_nsq = np.einsum("ij,ij->i", xt, xt) / n

    beta = np.zeros(p)
    resid = y.copy()
    coefs = np.zeros((m, p))
    sweeps = np.zeros(m, dtype=np.int32)
    converged = np.zeros(m, dtype=bool)
    all_cols = np.arange(p)

    def sweep_over(cols, lam):
        delta_max = 0.0
        for k in cols:
            if col_nsq[k] <= 1e-12:
                continue
            bk = beta[k]
            z = xt[k] @ resid / n + col_nsq[k] * bk
            nb = _soft(z, lam) / col_nsq[k]
            if nb != bk:
                resid[:] += xt[k] * (bk - nb)
                beta[k] = nb
                delta_max = max(delta_max, abs(nb - bk))
        return delta_max

    for i in range(m):
        lam = lams[i]
        used = 0
        while used < max_sweeps:
            delta = sweep_over(all_cols, lam)
            used += 1
            if delta <= tol:
                converged[i] = True
                break
            while used < max_sweeps:
                support = np.nonzero(beta)[0]
                if support.size == 0:
                    break
                if sweep_over(support, lam) <= tol:
                    used += 1
                    break
                used += 1
        sweeps[i] = used
        coefs[i] = beta
    return coefs, sweeps, converged


def boost_importance(x, y, order, n_rounds, learning_rate, max_depth, min_leaf):
    n, p = x.shape
    n_nodes = 2 ** (max_depth + 1) - 1
    importance = np.zeros(p)
    resid = y.copy()  # caller centers y; boosting starts from the constant fit

    for _ in range(n_rounds):
        node_id = np.zeros(n, dtype=np.int64)
        for depth in range(max_depth):
            level = range(2**depth - 1, 2 ** (depth + 1) - 1)
            node_cnt = np.bincount(node_id, minlength=n_nodes)
            node_sum = np.bincount(node_id, weights=resid, minlength=n_nodes)
            splits = {}
            for nd in level:
                if node_cnt[nd] < 2 * min_leaf:
                    continue
                best = _best_split(x, resid, order, node_id, nd, node_cnt[nd], node_sum[nd], min_leaf)
                if best is not None:
                    splits[nd] = best
            if not splits:
                break
            for nd, (feat, thresh, gain) in splits.items():
                importance[feat] += gain
                in_node = node_id == nd
                go_left = in_node & (x[:, feat] <= thresh)
                node_id[go_left] = 2 * nd + 1
                node_id[in_node & ~go_left] = 2 * nd + 2
        leaf_cnt = np.bincount(node_id, minlength=n_nodes)
        leaf_sum = np.bincount(node_id, weights=resid, minlength=n_nodes)
        value = np.divide(leaf_sum, leaf_cnt, out=np.zeros(n_nodes), where=leaf_cnt > 0)
        resid -= learning_rate * value[node_id]
    return importance


def _best_split(x, resid, order, node_id, nd, cnt, total, min_leaf):
    """Best (feature, midpoint threshold, gain) for one node; None if no gain.

    Scans features in ascending index and split points in ascending value
    order, keeping a candidate only on strictly larger gain, which fixes the
    tie-breaking shared with the compiled kernel.
    """
    best = None
    best_gain = 0.0
    parent = total * total / cnt
    for f in range(x.shape[1]):
        idx = order[:, f]
        sel = idx[node_id[idx] == nd]
        vals = x[sel, f]
        if vals[0] == vals[-1]:
            continue
        csum = np.cumsum(resid[sel])
        t = np.arange(1, cnt)
        valid = (vals[1:] > vals[:-1]) & (t >= min_leaf) & (cnt - t >= min_leaf)
        if not np.any(valid):
            continue
        sl = csum[:-1]
        sr = total - sl
        gain = np.where(valid, sl * sl / t + sr * sr / (cnt - t) - parent, -np.inf)
        pos = int(np.argmax(gain))
        if gain[pos] > best_gain:
            best_gain = float(gain[pos])
            best = (f, (vals[pos] + vals[pos + 1]) / 2.0, best_gain)
    return best
