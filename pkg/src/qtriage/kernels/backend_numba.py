"""Numba-jitted implementations of the hot training kernels.

Same contracts as backend_numpy; loops are written out so nopython mode
compiles them. cache=True keeps compilation a one-time cost per machine.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def logreg_scores(indptr, indices, values, rows, W, b):
    n = rows.shape[0]
    n_labels = W.shape[0]
    out = np.empty((n, n_labels))
    for k in range(n):
        r = rows[k]
        for c in range(n_labels):
            acc = b[c]
            for p in range(indptr[r], indptr[r + 1]):
                acc += W[c, indices[p]] * values[p]
            out[k, c] = acc
    return out


@njit(cache=True)
def logreg_grad(indptr, indices, values, rows, G, n_cols):
    n, n_labels = G.shape
    out = np.zeros((n_labels, n_cols))
    for k in range(n):
        r = rows[k]
        for p in range(indptr[r], indptr[r + 1]):
            j = indices[p]
            v = values[p]
            for c in range(n_labels):
                out[c, j] += G[k, c] * v
    return out


@njit(cache=True)
def svm_epoch(indptr, indices, values, order, y_pm, w, bias, lam, t_start):
    t = t_start
    for k in range(order.shape[0]):
        r = order[k]
        eta = 1.0 / (lam * t)
        dot = 0.0
        for p in range(indptr[r], indptr[r + 1]):
            dot += w[indices[p]] * values[p]
        margin = y_pm[r] * (dot + bias)
        scale = 1.0 - eta * lam
        for j in range(w.shape[0]):
            w[j] *= scale
        if margin < 1.0:
            for p in range(indptr[r], indptr[r + 1]):
                w[indices[p]] += eta * y_pm[r] * values[p]
            bias += eta * y_pm[r]
        t += 1
    return bias, t


@njit(cache=True)
def best_split(col_indptr, col_rows, col_values, in_node, node_size,
               node_class_w, y, w, n_labels):
    n_features = col_indptr.shape[0] - 1
    node_total = 0.0
    for c in range(n_labels):
        node_total += node_class_w[c]
    best_feat = -1
    best_thr = 0.0
    best_imp = np.inf
    for j in range(n_features):
        lo = col_indptr[j]
        hi = col_indptr[j + 1]
        if lo == hi:
            continue
        m = 0
        for p in range(lo, hi):
            if in_node[col_rows[p]]:
                m += 1
        if m == 0:
            continue
        gvals = np.empty(m)
        gw = np.empty(m)
        gc = np.empty(m, dtype=np.int64)
        q = 0
        for p in range(lo, hi):
            r = col_rows[p]
            if in_node[r]:
                gvals[q] = col_values[p]
                gw[q] = w[r]
                gc[q] = y[r]
                q += 1
        # rows within a column are ascending, so stable sort by value gives
        # the canonical (value, row) order shared with the numpy path
        order = np.argsort(gvals, kind="mergesort")
        zero_cnt = node_size - m

        nz_w = np.zeros(n_labels)
        for k in range(m):
            nz_w[gc[order[k]]] += gw[order[k]]
        zero_w = np.empty(n_labels)
        for c in range(n_labels):
            zero_w[c] = node_class_w[c] - nz_w[c]

        acc = np.zeros(n_labels)
        left = np.empty(n_labels)
        if zero_cnt > 0:
            prev_val = 0.0
            i = 0
        else:
            prev_val = gvals[order[0]]
            i = 0
            while i < m and gvals[order[i]] == prev_val:
                acc[gc[order[i]]] += gw[order[i]]
                i += 1
        while i < m:
            cur_val = gvals[order[i]]
            thr = 0.5 * (prev_val + cur_val)
            wl = 0.0
            sl = 0.0
            for c in range(n_labels):
                if zero_cnt > 0:
                    left[c] = zero_w[c] + acc[c]
                else:
                    left[c] = acc[c]
                wl += left[c]
                sl += left[c] * left[c]
            wr = node_total - wl
            sr = 0.0
            for c in range(n_labels):
                rc = node_class_w[c] - left[c]
                sr += rc * rc
            imp = 0.0
            if wl > 0:
                imp += wl - sl / wl
            if wr > 0:
                imp += wr - sr / wr
            if imp < best_imp:
                best_imp = imp
                best_feat = j
                best_thr = thr
            while i < m and gvals[order[i]] == cur_val:
                acc[gc[order[i]]] += gw[order[i]]
                i += 1
            prev_val = cur_val
    return best_feat, best_thr, best_imp


@njit(cache=True)
def forest_votes(tfeat, tthr, tleft, tright, tleaf, tree_offsets, alphas,
                 indptr, indices, values, rows, n_cols, n_labels):
    n = rows.shape[0]
    votes = np.zeros((n, n_labels))
    n_trees = tree_offsets.shape[0] - 1
    for k in range(n):
        r = rows[k]
        lo = indptr[r]
        hi = indptr[r + 1]
        for t in range(n_trees):
            base = tree_offsets[t]
            node = 0
            while tfeat[base + node] >= 0:
                f = tfeat[base + node]
                # random access into the CSR row via binary search
                x = 0.0
                a = lo
                b = hi
                while a < b:
                    mid = (a + b) // 2
                    if indices[mid] < f:
                        a = mid + 1
                    else:
                        b = mid
                if a < hi and indices[a] == f:
                    x = values[a]
                if x > tthr[base + node]:
                    node = tright[base + node]
                else:
                    node = tleft[base + node]
            votes[k, tleaf[base + node]] += alphas[t]
    return votes
