"""Pure-numpy reference implementations of the hot kernels.

Selected instead of the numba backend via ``MVGEO_BACKEND=numpy``; the two
backends implement the same arithmetic and are compared in the benchmark
and equivalence tests.
"""

from __future__ import annotations

import numpy as np
from scipy.ndimage import uniform_filter

NAME = "numpy"

_VAR_EPS = 1e-12


def bilinear_many(data: np.ndarray, us: np.ndarray, vs: np.ndarray):
    """Bilinear sampling of (H, W, C) data at N continuous coordinates.

    Returns (values (N, C), valid (N,), grads (N, C, 2)). Pixels outside the
    grid are treated as zeros; coordinates outside [0, W-1] x [0, H-1] are
    flagged invalid and return zero values and gradients.
    """
    h, w, c = data.shape
    us = np.asarray(us, dtype=np.float64)
    vs = np.asarray(vs, dtype=np.float64)
    u0 = np.floor(us).astype(np.int64)
    v0 = np.floor(vs).astype(np.int64)
    a = us - u0
    b = vs - v0

    def fetch(ui, vi):
        inside = (ui >= 0) & (ui < w) & (vi >= 0) & (vi < h)
        vals = data[np.clip(vi, 0, h - 1), np.clip(ui, 0, w - 1)]
        vals = np.where(inside[:, None], vals, 0.0)
        return vals

    f00 = fetch(u0, v0)
    f10 = fetch(u0 + 1, v0)
    f01 = fetch(u0, v0 + 1)
    f11 = fetch(u0 + 1, v0 + 1)

    wa = a[:, None]
    wb = b[:, None]
    values = ((1.0 - wa) * (1.0 - wb) * f00 + wa * (1.0 - wb) * f10
              + (1.0 - wa) * wb * f01 + wa * wb * f11)
    du = (1.0 - wb) * (f10 - f00) + wb * (f11 - f01)
    dv = (1.0 - wa) * (f01 - f00) + wa * (f11 - f10)
    grads = np.stack([du, dv], axis=-1)

    valid = (us >= 0) & (us <= w - 1) & (vs >= 0) & (vs <= h - 1)
    values[~valid] = 0.0
    grads[~valid] = 0.0
    return values, valid, grads


def zncc_scores(ref: np.ndarray, tgt: np.ndarray, patch_radius: int,
                search_radius: int):
    """Dense patch ZNCC over integer displacements.

    Returns (scores (H, W, S, S), valid (H, W, S, S)) with S = 2*search+1;
    scores[v, u, dy+s, dx+s] correlates the ref patch at (u, v) against the
    tgt patch at (u+dx, v+dy), averaged over channels. Cells whose patches
    leave the image are invalid. Degenerate (flat) patches score 0.
    """
    h, w, c = ref.shape
    s = search_radius
    size = 2 * s + 1
    p = 2 * patch_radius + 1
    scores = np.zeros((h, w, size, size))
    valid = np.zeros((h, w, size, size), dtype=bool)

    vv, uu = np.mgrid[0:h, 0:w]
    ref_ok = ((uu >= patch_radius) & (uu < w - patch_radius)
              & (vv >= patch_radius) & (vv < h - patch_radius))

    means_r = np.empty_like(ref)
    sq_r = np.empty_like(ref)
    for ch in range(c):
        means_r[..., ch] = uniform_filter(ref[..., ch], size=p, mode="constant")
        sq_r[..., ch] = uniform_filter(ref[..., ch] ** 2, size=p, mode="constant")
    var_r = sq_r - means_r ** 2

    means_t = np.empty_like(tgt)
    sq_t = np.empty_like(tgt)
    for ch in range(c):
        means_t[..., ch] = uniform_filter(tgt[..., ch], size=p, mode="constant")
        sq_t[..., ch] = uniform_filter(tgt[..., ch] ** 2, size=p, mode="constant")
    var_t = sq_t - means_t ** 2

    for dy in range(-s, s + 1):
        for dx in range(-s, s + 1):
            shifted = np.zeros_like(tgt)
            ys0, ys1 = max(0, -dy), min(h, h - dy)
            xs0, xs1 = max(0, -dx), min(w, w - dx)
            shifted[ys0:ys1, xs0:xs1] = tgt[ys0 + dy:ys1 + dy, xs0 + dx:xs1 + dx]
            cross = np.empty_like(ref)
            for ch in range(c):
                cross[..., ch] = uniform_filter(ref[..., ch] * shifted[..., ch],
                                                size=p, mode="constant")
            mt = np.zeros_like(means_t)
            vt = np.zeros_like(var_t)
            mt[ys0:ys1, xs0:xs1] = means_t[ys0 + dy:ys1 + dy, xs0 + dx:xs1 + dx]
            vt[ys0:ys1, xs0:xs1] = var_t[ys0 + dy:ys1 + dy, xs0 + dx:xs1 + dx]
            cov = cross - means_r * mt
            denom = var_r * vt
            ok = denom > _VAR_EPS
            zncc = np.where(ok, cov / np.sqrt(np.where(ok, denom, 1.0)), 0.0)
            score = zncc.mean(axis=-1)

            tgt_ok = ((uu + dx >= patch_radius) & (uu + dx < w - patch_radius)
                      & (vv + dy >= patch_radius) & (vv + dy < h - patch_radius))
            cell_ok = ref_ok & tgt_ok
            scores[:, :, dy + s, dx + s] = np.where(cell_ok, score, 0.0)
            valid[:, :, dy + s, dx + s] = cell_ok
    return scores, valid
