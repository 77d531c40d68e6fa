"""CBOW negative-sampling training kernels.

Two interchangeable implementations of one epoch of sequential SGD:
``train_epoch_numba`` (explicit loops, @njit) and ``train_epoch_numpy``
(per-position vector ops).  Both consume identical pre-drawn negative
samples and update in the same target-then-negatives order, so a fixed
seed is reproducible within either backend.  The learning rate decays
linearly over the planned position count with a 1e-4 floor, as in the
original word2vec schedule.
"""
from __future__ import annotations

import numpy as np

from . import accel

_ALPHA_FLOOR = 1e-4


def build_stream(
    sentences: list[np.ndarray], window: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Flatten in-vocabulary sentences into (targets, ctx_flat, ctx_offsets).

    A position enters the stream only if at least one context token lies
    within ``window`` of it inside the same sentence.
    """
    targets: list[int] = []
    ctx_flat: list[int] = []
    offsets: list[int] = [0]
    for sent in sentences:
        n = len(sent)
        for i in range(n):
            lo = max(0, i - window)
            hi = min(n, i + window + 1)
            if hi - lo <= 1:
                continue
            targets.append(int(sent[i]))
            for j in range(lo, hi):
                if j != i:
                    ctx_flat.append(int(sent[j]))
            offsets.append(len(ctx_flat))
    return (
        np.asarray(targets, dtype=np.int32),
        np.asarray(ctx_flat, dtype=np.int32),
        np.asarray(offsets, dtype=np.int64),
    )


def _train_epoch_numpy(
    w_in: np.ndarray,
    w_out: np.ndarray,
    targets: np.ndarray,
    ctx_flat: np.ndarray,
    ctx_off: np.ndarray,
    negatives: np.ndarray,
    alpha0: float,
    t_start: int,
    t_total: int,
) -> float:
    loss = 0.0
    k = negatives.shape[1]
    alpha_floor = alpha0 * _ALPHA_FLOOR
    for p in range(targets.shape[0]):
        tgt = targets[p]
        ctx = ctx_flat[ctx_off[p] : ctx_off[p + 1]]
        alpha = alpha0 * (1.0 - (t_start + p) / t_total)
        if alpha < alpha_floor:
            alpha = alpha_floor
        l1 = w_in[ctx].sum(axis=0) / ctx.shape[0]
        err = np.zeros_like(l1)
        for s in range(k + 1):
            if s == 0:
                w, label = tgt, 1.0
            else:
                w = negatives[p, s - 1]
                if w == tgt:
                    continue
                label = 0.0
            dot = float(np.dot(l1, w_out[w]))
            if dot >= 0.0:
                e = np.exp(-dot)
                f = 1.0 / (1.0 + e)
                log_sig = -np.log1p(e)
            else:
                e = np.exp(dot)
                f = e / (1.0 + e)
                log_sig = dot - np.log1p(e)
            loss += -log_sig if label == 1.0 else dot - log_sig
            g = (label - f) * alpha
            err += g * w_out[w]
            w_out[w] += g * l1
        for row in ctx:
            w_in[row] += err
    return loss


def _make_numba_kernel():
    from numba import njit

    @njit(cache=True)
    def train_epoch_nb(w_in, w_out, targets, ctx_flat, ctx_off, negatives, alpha0, t_start, t_total):
        dim = w_in.shape[1]
        k = negatives.shape[1]
        alpha_floor = alpha0 * 1e-4
        loss = 0.0
        l1 = np.empty(dim, dtype=np.float64)
        err = np.empty(dim, dtype=np.float64)
        for p in range(targets.shape[0]):
            tgt = targets[p]
            c0 = ctx_off[p]
            c1 = ctx_off[p + 1]
            cnt = c1 - c0
            alpha = alpha0 * (1.0 - (t_start + p) / t_total)
            if alpha < alpha_floor:
                alpha = alpha_floor
            for d in range(dim):
                l1[d] = 0.0
            for ci in range(c0, c1):
                row = ctx_flat[ci]
                for d in range(dim):
                    l1[d] += w_in[row, d]
            inv = 1.0 / cnt
            for d in range(dim):
                l1[d] *= inv
                err[d] = 0.0
            for s in range(k + 1):
                if s == 0:
                    w = tgt
                    label = 1.0
                else:
                    w = negatives[p, s - 1]
                    if w == tgt:
                        continue
                    label = 0.0
                dot = 0.0
                for d in range(dim):
                    dot += l1[d] * w_out[w, d]
                if dot >= 0.0:
                    e = np.exp(-dot)
                    f = 1.0 / (1.0 + e)
                    log_sig = -np.log1p(e)
                else:
                    e = np.exp(dot)
                    f = e / (1.0 + e)
                    log_sig = dot - np.log1p(e)
                if label == 1.0:
                    loss += -log_sig
                else:
                    loss += dot - log_sig
                g = (label - f) * alpha
                for d in range(dim):
                    err[d] += g * w_out[w, d]
                for d in range(dim):
                    w_out[w, d] += g * l1[d]
            for ci in range(c0, c1):
                row = ctx_flat[ci]
                for d in range(dim):
                    w_in[row, d] += err[d]
        return loss

    return train_epoch_nb


_numba_kernel = None


def train_epoch(
    w_in: np.ndarray,
    w_out: np.ndarray,
    targets: np.ndarray,
    ctx_flat: np.ndarray,
    ctx_off: np.ndarray,
    negatives: np.ndarray,
    alpha0: float,
    t_start: int,
    t_total: int,
    use_numba: bool | None = None,
) -> float:
    """Run one epoch in place; returns the summed loss over positions."""
    global _numba_kernel
    if accel.resolve(use_numba):
        if _numba_kernel is None:
            _numba_kernel = _make_numba_kernel()
        return _numba_kernel(
            w_in, w_out, targets, ctx_flat, ctx_off, negatives, alpha0, t_start, t_total
        )
    return _train_epoch_numpy(
        w_in, w_out, targets, ctx_flat, ctx_off, negatives, alpha0, t_start, t_total
    )
