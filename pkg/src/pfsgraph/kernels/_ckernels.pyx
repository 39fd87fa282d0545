# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled twin of kernels/pure.py; identical contracts and tie-breaking."""

import numpy as np

cimport numpy as cnp

cnp.import_array()


cdef inline double _soft(double z, double lam) nogil:
    if z > lam:
        return z - lam
    if z < -lam:
        return z + lam
    return 0.0


cdef double _cd_sweep(const double[:, ::1] xt, double[::1] resid, double[::1] beta,
                      double[::1] col_nsq, Py_ssize_t[::1] cols, Py_ssize_t ncols,
                      double lam, Py_ssize_t n) nogil:
    cdef Py_ssize_t c, k, row
    cdef double acc, z, bk, nb, delta, delta_max = 0.0
    for c in range(ncols):
        k = cols[c]
        if col_nsq[k] <= 1e-12:
            continue
        bk = beta[k]
        acc = 0.0
        for row in range(n):
            acc += xt[k, row] * resid[row]
        z = acc / n + col_nsq[k] * bk
        nb = _soft(z, lam) / col_nsq[k]
        if nb != bk:
            delta = bk - nb
            for row in range(n):
                resid[row] += xt[k, row] * delta
            beta[k] = nb
            if delta < 0.0:
                delta = -delta
            if delta > delta_max:
                delta_max = delta
    return delta_max


def lasso_path(const double[:, ::1] xt, const double[::1] y, const double[::1] lams, double tol, int max_sweeps):
    """Warm-started cyclic CD on the (p, n) transposed design.

    Full sweeps alternate with restricted sweeps over the current support;
    convergence is only declared on a full sweep.
    """
    cdef Py_ssize_t p = xt.shape[0]
    cdef Py_ssize_t n = xt.shape[1]
    cdef Py_ssize_t m = lams.shape[0]

    coefs_arr = np.zeros((m, p))
    sweeps_arr = np.zeros(m, dtype=np.int32)
    conv_arr = np.zeros(m, dtype=np.uint8)
    beta_arr = np.zeros(p)
    resid_arr = np.array(y, dtype=np.float64)
    nsq_arr = np.zeros(p)
    cols_arr = np.arange(p, dtype=np.intp)
    support_arr = np.zeros(p, dtype=np.intp)

    cdef double[:, ::1] coefs = coefs_arr
    cdef int[::1] sweeps = sweeps_arr
    cdef unsigned char[::1] conv = conv_arr
    cdef double[::1] beta = beta_arr
    cdef double[::1] resid = resid_arr
    cdef double[::1] col_nsq = nsq_arr
    cdef Py_ssize_t[::1] all_cols = cols_arr
    cdef Py_ssize_t[::1] support = support_arr

    cdef Py_ssize_t i, k, row, nsup
    cdef int used
    cdef double acc, lam

    with nogil:
        for k in range(p):
            acc = 0.0
            for row in range(n):
                acc += xt[k, row] * xt[k, row]
            col_nsq[k] = acc / n

        for i in range(m):
            lam = lams[i]
            used = 0
            while used < max_sweeps:
                if _cd_sweep(xt, resid, beta, col_nsq, all_cols, p, lam, n) <= tol:
                    used += 1
                    conv[i] = 1
                    break
                used += 1
                while used < max_sweeps:
                    nsup = 0
                    for k in range(p):
                        if beta[k] != 0.0:
                            support[nsup] = k
                            nsup += 1
                    if nsup == 0:
                        break
                    if _cd_sweep(xt, resid, beta, col_nsq, support, nsup, lam, n) <= tol:
                        used += 1
                        break
                    used += 1
            sweeps[i] = used
            for k in range(p):
                coefs[i, k] = beta[k]

    return coefs_arr, sweeps_arr, conv_arr.astype(bool)


def boost_importance(const double[:, ::1] x, const double[::1] y, const cnp.int64_t[:, ::1] order,
                     int n_rounds, double learning_rate, int max_depth, int min_leaf):
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t p = x.shape[1]
    cdef int n_nodes = (1 << (max_depth + 1)) - 1

    importance_arr = np.zeros(p)
    cdef double[::1] importance = importance_arr

    resid_arr = np.array(y, dtype=np.float64)  # caller centers y
    cdef double[::1] resid = resid_arr

    node_id_arr = np.zeros(n, dtype=np.int64)
    cdef cnp.int64_t[::1] node_id = node_id_arr

    node_cnt_arr = np.zeros(n_nodes, dtype=np.int64)
    node_sum_arr = np.zeros(n_nodes)
    cnt_left_arr = np.zeros(n_nodes, dtype=np.int64)
    sum_left_arr = np.zeros(n_nodes)
    last_val_arr = np.zeros(n_nodes)
    best_gain_arr = np.zeros(n_nodes)
    best_feat_arr = np.zeros(n_nodes, dtype=np.int64)
    best_thresh_arr = np.zeros(n_nodes)
    value_arr = np.zeros(n_nodes)

    cdef cnp.int64_t[::1] node_cnt = node_cnt_arr
    cdef double[::1] node_sum = node_sum_arr
    cdef cnp.int64_t[::1] cnt_left = cnt_left_arr
    cdef double[::1] sum_left = sum_left_arr
    cdef double[::1] last_val = last_val_arr
    cdef double[::1] best_gain = best_gain_arr
    cdef cnp.int64_t[::1] best_feat = best_feat_arr
    cdef double[::1] best_thresh = best_thresh_arr
    cdef double[::1] value = value_arr

    cdef Py_ssize_t rnd, depth, f, pos, i, nd
    cdef int lo, hi, any_split
    cdef double v, sl, sr, gain, parent, total
    cdef cnp.int64_t cnt, t

    with nogil:
        for rnd in range(n_rounds):
            for i in range(n):
                node_id[i] = 0
            for depth in range(max_depth):
                lo = (1 << depth) - 1
                hi = (1 << (depth + 1)) - 1
                for nd in range(n_nodes):
                    node_cnt[nd] = 0
                    node_sum[nd] = 0.0
                    best_gain[nd] = 0.0
                    best_feat[nd] = -1
                for i in range(n):
                    nd = node_id[i]
                    node_cnt[nd] += 1
                    node_sum[nd] += resid[i]
                for f in range(p):
                    for nd in range(lo, hi):
                        cnt_left[nd] = 0
                        sum_left[nd] = 0.0
                    for pos in range(n):
                        i = order[pos, f]
                        nd = node_id[i]
                        if nd < lo or nd >= hi:
                            continue
                        cnt = node_cnt[nd]
                        if cnt < 2 * min_leaf:
                            continue
                        v = x[i, f]
                        t = cnt_left[nd]
                        if t > 0 and v > last_val[nd] and t >= min_leaf and cnt - t >= min_leaf:
                            total = node_sum[nd]
                            sl = sum_left[nd]
                            sr = total - sl
                            parent = total * total / cnt
                            gain = sl * sl / t + sr * sr / (cnt - t) - parent
                            if gain > best_gain[nd]:
                                best_gain[nd] = gain
                                best_feat[nd] = f
                                best_thresh[nd] = (last_val[nd] + v) / 2.0
                        sum_left[nd] += resid[i]
                        cnt_left[nd] += 1
                        last_val[nd] = v
                any_split = 0
                for nd in range(lo, hi):
                    if best_feat[nd] >= 0:
                        any_split = 1
                        importance[best_feat[nd]] += best_gain[nd]
                if any_split == 0:
                    break
                for i in range(n):
                    nd = node_id[i]
                    if lo <= nd < hi and best_feat[nd] >= 0:
                        if x[i, best_feat[nd]] <= best_thresh[nd]:
                            node_id[i] = 2 * nd + 1
                        else:
                            node_id[i] = 2 * nd + 2
            for nd in range(n_nodes):
                node_cnt[nd] = 0
                node_sum[nd] = 0.0
            for i in range(n):
                nd = node_id[i]
                node_cnt[nd] += 1
                node_sum[nd] += resid[i]
            for nd in range(n_nodes):
                if node_cnt[nd] > 0:
                    value[nd] = node_sum[nd] / node_cnt[nd]
                else:
                    value[nd] = 0.0
            for i in range(n):
                resid[i] -= learning_rate * value[node_id[i]]

    return importance_arr
