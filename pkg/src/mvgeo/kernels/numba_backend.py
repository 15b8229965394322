"""Numba-compiled implementations of the hot kernels.

Same contracts as numpy_backend; per-pixel work only, no cross-pixel
accumulation, so results do not depend on iteration order.
"""

from __future__ import annotations

import numpy as np
from numba import njit, prange

NAME = "numba"

_VAR_EPS = 1e-12


@njit(cache=True, parallel=True)
def _bilinear(data, us, vs, values, valid, grads):
    h, w, c = data.shape
    n = us.shape[0]
    for i in prange(n):
        u = us[i]
        v = vs[i]
        ok = (u >= 0.0) and (u <= w - 1.0) and (v >= 0.0) and (v <= h - 1.0)
        valid[i] = ok
        if not ok:
            continue
        u0 = int(np.floor(u))
        v0 = int(np.floor(v))
        a = u - u0
        b = v - v0
        for ch in range(c):
            f00 = data[v0, u0, ch] if (0 <= u0 < w and 0 <= v0 < h) else 0.0
            f10 = data[v0, u0 + 1, ch] if (0 <= u0 + 1 < w and 0 <= v0 < h) else 0.0
            f01 = data[v0 + 1, u0, ch] if (0 <= u0 < w and 0 <= v0 + 1 < h) else 0.0
            f11 = data[v0 + 1, u0 + 1, ch] if (0 <= u0 + 1 < w and 0 <= v0 + 1 < h) else 0.0
            values[i, ch] = ((1.0 - a) * (1.0 - b) * f00 + a * (1.0 - b) * f10
                             + (1.0 - a) * b * f01 + a * b * f11)
            grads[i, ch, 0] = (1.0 - b) * (f10 - f00) + b * (f11 - f01)
            grads[i, ch, 1] = (1.0 - a) * (f01 - f00) + a * (f11 - f10)


def bilinear_many(data: np.ndarray, us: np.ndarray, vs: np.ndarray):
    data = np.ascontiguousarray(data, dtype=np.float64)
    us = np.ascontiguousarray(us, dtype=np.float64)
    vs = np.ascontiguousarray(vs, dtype=np.float64)
    n, c = us.shape[0], data.shape[2]
    values = np.zeros((n, c))
    valid = np.zeros(n, dtype=np.bool_)
    grads = np.zeros((n, c, 2))
    _bilinear(data, us, vs, values, valid, grads)
    return values, valid, grads


@njit(cache=True, parallel=True)
def _zncc(ref, tgt, pr, sr, scores, valid):
    h, w, c = ref.shape
    npx = (2 * pr + 1) * (2 * pr + 1)
    for v in prange(h):
        for u in range(w):
            if u < pr or u >= w - pr or v < pr or v >= h - pr:
                continue
            for dy in range(-sr, sr + 1):
                for dx in range(-sr, sr + 1):
                    tu = u + dx
                    tv = v + dy
                    if tu < pr or tu >= w - pr or tv < pr or tv >= h - pr:
                        continue
                    total = 0.0
                    for ch in range(c):
                        sa = 0.0
                        sb = 0.0
                        saa = 0.0
                        sbb = 0.0
                        sab = 0.0
                        for py in range(-pr, pr + 1):
                            for px in range(-pr, pr + 1):
                                fa = ref[v + py, u + px, ch]
                                fb = tgt[tv + py, tu + px, ch]
                                sa += fa
                                sb += fb
                                saa += fa * fa
                                sbb += fb * fb
                                sab += fa * fb
                        ma = sa / npx
                        mb = sb / npx
                        var_a = saa / npx - ma * ma
                        var_b = sbb / npx - mb * mb
                        denom = var_a * var_b
                        if denom > _VAR_EPS:
                            total += (sab / npx - ma * mb) / np.sqrt(denom)
                    scores[v, u, dy + sr, dx + sr] = total / c
                    valid[v, u, dy + sr, dx + sr] = True


def zncc_scores(ref: np.ndarray, tgt: np.ndarray, patch_radius: int,
                search_radius: int):
    ref = np.ascontiguousarray(ref, dtype=np.float64)
    tgt = np.ascontiguousarray(tgt, dtype=np.float64)
    h, w = ref.shape[:2]
    size = 2 * search_radius + 1
    scores = np.zeros((h, w, size, size))
    valid = np.zeros((h, w, size, size), dtype=np.bool_)
    _zncc(ref, tgt, patch_radius, search_radius, scores, valid)
    return scores, valid
