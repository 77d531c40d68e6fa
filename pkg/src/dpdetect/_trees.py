"""Decision-tree growing and traversal kernels.

One tree is grown per call from pre-drawn randomness (feature draws and
threshold fractions indexed by node id), so the numba and numpy builds
of the same tree are identical: split quality is ranked by the
Gini-equivalent integer score sum(left_counts^2)/n_left +
sum(right_counts^2)/n_right, whose arithmetic is exact in both paths.

Node arrays: feature[i] < 0 marks a leaf; counts[i] holds the training
class histogram of the node.
"""
from __future__ import annotations

import numpy as np

from . import accel

_numba_grow = None
_numba_leaves = None


def max_node_count(n_samples: int) -> int:
    return 2 * n_samples + 1


# ---------------------------------------------------------------------------
# numpy implementation
# ---------------------------------------------------------------------------


def _grow_tree_numpy(
    X: np.ndarray,
    y: np.ndarray,
    n_classes: int,
    idx: np.ndarray,
    feat_raw: np.ndarray,
    unis: np.ndarray,
    m: int,
    min_samples_split: int,
    max_depth: int,
    is_extra: bool,
    feature: np.ndarray,
    threshold: np.ndarray,
    left: np.ndarray,
    right: np.ndarray,
    counts: np.ndarray,
) -> int:
    d = X.shape[1]
    node_count = 1
    stack = [(0, 0, idx.shape[0], 0)]
    while stack:
        node, start, end, depth = stack.pop()
        sub = idx[start:end]
        ysub = y[sub]
        node_counts = np.bincount(ysub, minlength=n_classes).astype(np.int64)
        counts[node] = node_counts
        n_node = end - start
        if (
            int(node_counts.max()) == n_node
            or n_node < min_samples_split
            or (max_depth >= 0 and depth >= max_depth)
        ):
            continue

        mm = min(m, d)
        arr = np.arange(d, dtype=np.int64)
        for c in range(mm):
            j = c + int(feat_raw[node, c]) % (d - c)
            arr[c], arr[j] = arr[j], arr[c]
        cand = np.sort(arr[:mm])

        best_score = -1.0
        best_f = -1
        best_thr = 0.0
        for ci in range(mm):
            f = int(cand[ci])
            col = X[sub, f]
            vmin = float(col.min())
            vmax = float(col.max())
            if vmin == vmax:
                continue
            if is_extra:
                thr = vmin + float(unis[node, ci]) * (vmax - vmin)
                if thr <= vmin or thr >= vmax:
                    continue
                mask = col < thr
                nl = int(mask.sum())
                nr = n_node - nl
                if nl == 0 or nr == 0:
                    continue
                cl = np.bincount(ysub[mask], minlength=n_classes).astype(np.int64)
                cr = node_counts - cl
                score = int((cl * cl).sum()) / nl + int((cr * cr).sum()) / nr
                if score > best_score:
                    best_score, best_f, best_thr = score, f, thr
            else:
                order = np.argsort(col, kind="mergesort")
                sv = col[order]
                sy = ysub[order]
                boundaries = np.nonzero(sv[:-1] < sv[1:])[0]
                if boundaries.shape[0] == 0:
                    continue
                onehot = np.zeros((n_node, n_classes), dtype=np.int64)
                onehot[np.arange(n_node), sy] = 1
                cum = np.cumsum(onehot, axis=0)[:-1]
                sl = (cum * cum).sum(axis=1)
                cr = node_counts[None, :] - cum
                sr = (cr * cr).sum(axis=1)
                nl = np.arange(1, n_node, dtype=np.int64)
                scores = sl / nl + sr / (n_node - nl)
                bi = boundaries[int(np.argmax(scores[boundaries]))]
                score = float(scores[bi])
                if score > best_score:
                    best_score = score
                    best_f = f
                    best_thr = (float(sv[bi]) + float(sv[bi + 1])) * 0.5

        if best_f < 0:
            continue
        col = X[sub, best_f]
        mask = col < best_thr
        nl = int(mask.sum())
        left_part = sub[mask].copy()  # sub aliases idx; copy before writing
        right_part = sub[~mask].copy()
        idx[start : start + nl] = left_part
        idx[start + nl : end] = right_part
        feature[node] = best_f
        threshold[node] = best_thr
        lid, rid = node_count, node_count + 1
        node_count += 2
        left[node] = lid
        right[node] = rid
        stack.append((rid, start + nl, end, depth + 1))
        stack.append((lid, start, start + nl, depth + 1))
    return node_count


def _leaf_ids_numpy(
    feature: np.ndarray,
    threshold: np.ndarray,
    left: np.ndarray,
    right: np.ndarray,
    X: np.ndarray,
) -> np.ndarray:
    n = X.shape[0]
    nodes = np.zeros(n, dtype=np.int32)
    active = feature[nodes] >= 0
    while active.any():
        cur = nodes[active]
        f = feature[cur]
        go_left = X[np.nonzero(active)[0], f] < threshold[cur]
        nodes[active] = np.where(go_left, left[cur], right[cur])
        active = feature[nodes] >= 0
    return nodes


# ---------------------------------------------------------------------------
# numba implementation
# ---------------------------------------------------------------------------


def _make_numba_kernels():
    from numba import njit

    @njit(cache=True)
    def grow_tree_nb(
        X, y, n_classes, idx, feat_raw, unis, m, min_samples_split, max_depth,
        is_extra, feature, threshold, left, right, counts,
    ):
        d = X.shape[1]
        n_total = idx.shape[0]
        node_count = 1
        cap = 2 * n_total + 2
        stack_node = np.empty(cap, np.int64)
        stack_start = np.empty(cap, np.int64)
        stack_end = np.empty(cap, np.int64)
        stack_depth = np.empty(cap, np.int64)
        sp = 0
        stack_node[0] = 0
        stack_start[0] = 0
        stack_end[0] = n_total
        stack_depth[0] = 0
        sp = 1

        arr = np.empty(d, np.int64)
        cl = np.zeros(n_classes, np.int64)
        left_buf = np.empty(n_total, np.int64)
        right_buf = np.empty(n_total, np.int64)

        while sp > 0:
            sp -= 1
            node = stack_node[sp]
            start = stack_start[sp]
            end = stack_end[sp]
            depth = stack_depth[sp]
            n_node = end - start

            for c in range(n_classes):
                counts[node, c] = 0
            for i in range(start, end):
                counts[node, y[idx[i]]] += 1
            maxc = np.int64(0)
            for c in range(n_classes):
                if counts[node, c] > maxc:
                    maxc = counts[node, c]
            if maxc == n_node or n_node < min_samples_split or (max_depth >= 0 and depth >= max_depth):
                continue

            mm = m if m < d else d
            for t in range(d):
                arr[t] = t
            for c in range(mm):
                j = c + feat_raw[node, c] % (d - c)
                tmp = arr[c]
                arr[c] = arr[j]
                arr[j] = tmp
            for a in range(1, mm):
                key = arr[a]
                b = a - 1
                while b >= 0 and arr[b] > key:
                    arr[b + 1] = arr[b]
                    b -= 1
                arr[b + 1] = key

            best_score = -1.0
            best_f = -1
            best_thr = 0.0
            for ci in range(mm):
                f = arr[ci]
                vmin = X[idx[start], f]
                vmax = vmin
                for i in range(start + 1, end):
                    v = X[idx[i], f]
                    if v < vmin:
                        vmin = v
                    elif v > vmax:
                        vmax = v
                if vmin == vmax:
                    continue
                if is_extra:
                    thr = vmin + unis[node, ci] * (vmax - vmin)
                    if thr <= vmin or thr >= vmax:
                        continue
                    nl = 0
                    for c in range(n_classes):
                        cl[c] = 0
                    for i in range(start, end):
                        if X[idx[i], f] < thr:
                            cl[y[idx[i]]] += 1
                            nl += 1
                    nr = n_node - nl
                    if nl == 0 or nr == 0:
                        continue
                    sl_sum = np.int64(0)
                    sr_sum = np.int64(0)
                    for c in range(n_classes):
                        lc = cl[c]
                        rc = counts[node, c] - lc
                        sl_sum += lc * lc
                        sr_sum += rc * rc
                    score = sl_sum / nl + sr_sum / nr
                    if score > best_score:
                        best_score = score
                        best_f = f
                        best_thr = thr
                else:
                    vals = np.empty(n_node, np.float64)
                    labs = np.empty(n_node, np.int32)
                    for i in range(n_node):
                        vals[i] = X[idx[start + i], f]
                        labs[i] = y[idx[start + i]]
                    order = np.argsort(vals)
                    for c in range(n_classes):
                        cl[c] = 0
                    sl_sum = np.int64(0)
                    sr_sum = np.int64(0)
                    for c in range(n_classes):
                        sr_sum += counts[node, c] * counts[node, c]
                    for i2 in range(n_node - 1):
                        lab = labs[order[i2]]
                        before = cl[lab]
                        cl[lab] = before + 1
                        sl_sum += 2 * before + 1
                        rc_before = counts[node, lab] - before
                        sr_sum += -2 * rc_before + 1
                        v_here = vals[order[i2]]
                        v_next = vals[order[i2 + 1]]
                        if v_here < v_next:
                            nl = i2 + 1
                            nr = n_node - nl
                            score = sl_sum / nl + sr_sum / nr
                            if score > best_score:
                                best_score = score
                                best_f = f
                                best_thr = (v_here + v_next) * 0.5

            if best_f < 0:
                continue
            nl = 0
            nr = 0
            for i in range(start, end):
                if X[idx[i], best_f] < best_thr:
                    left_buf[nl] = idx[i]
                    nl += 1
                else:
                    right_buf[nr] = idx[i]
                    nr += 1
            for i in range(nl):
                idx[start + i] = left_buf[i]
            for i in range(nr):
                idx[start + nl + i] = right_buf[i]
            feature[node] = best_f
            threshold[node] = best_thr
            lid = node_count
            rid = node_count + 1
            node_count += 2
            left[node] = lid
            right[node] = rid
            stack_node[sp] = rid
            stack_start[sp] = start + nl
            stack_end[sp] = end
            stack_depth[sp] = depth + 1
            sp += 1
            stack_node[sp] = lid
            stack_start[sp] = start
            stack_end[sp] = start + nl
            stack_depth[sp] = depth + 1
            sp += 1
        return node_count

    @njit(cache=True)
    def leaf_ids_nb(feature, threshold, left, right, X):
        n = X.shape[0]
        out = np.empty(n, np.int32)
        for i in range(n):
            node = 0
            while feature[node] >= 0:
                if X[i, feature[node]] < threshold[node]:
                    node = left[node]
                else:
                    node = right[node]
            out[i] = node
        return out

    return grow_tree_nb, leaf_ids_nb


# ---------------------------------------------------------------------------
# dispatch
# ---------------------------------------------------------------------------


def grow_tree(
    X: np.ndarray,
    y: np.ndarray,
    n_classes: int,
    sample_idx: np.ndarray,
    feat_raw: np.ndarray,
    unis: np.ndarray,
    m: int,
    min_samples_split: int,
    max_depth: int,
    is_extra: bool,
    use_numba: bool | None = None,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Grow one tree; returns trimmed (feature, threshold, left, right, counts)."""
    global _numba_grow, _numba_leaves
    cap = max_node_count(sample_idx.shape[0])
    feature = np.full(cap, -1, dtype=np.int32)
    threshold = np.zeros(cap, dtype=np.float64)
    left = np.full(cap, -1, dtype=np.int32)
    right = np.full(cap, -1, dtype=np.int32)
    counts = np.zeros((cap, n_classes), dtype=np.int64)
    idx = sample_idx.astype(np.int64).copy()
    if accel.resolve(use_numba):
        if _numba_grow is None:
            _numba_grow, _numba_leaves = _make_numba_kernels()
        node_count = _numba_grow(
            X, y, n_classes, idx, feat_raw, unis, m, min_samples_split,
            max_depth, is_extra, feature, threshold, left, right, counts,
        )
    else:
        node_count = _grow_tree_numpy(
            X, y, n_classes, idx, feat_raw, unis, m, min_samples_split,
            max_depth, is_extra, feature, threshold, left, right, counts,
        )
    n = int(node_count)
    return feature[:n], threshold[:n], left[:n], right[:n], counts[:n]


def leaf_ids(
    feature: np.ndarray,
    threshold: np.ndarray,
    left: np.ndarray,
    right: np.ndarray,
    X: np.ndarray,
    use_numba: bool | None = None,
) -> np.ndarray:
    global _numba_grow, _numba_leaves
    if accel.resolve(use_numba):
        if _numba_leaves is None:
            _numba_grow, _numba_leaves = _make_numba_kernels()
        return _numba_leaves(feature, threshold, left, right, X)
    return _leaf_ids_numpy(feature, threshold, left, right, X)
