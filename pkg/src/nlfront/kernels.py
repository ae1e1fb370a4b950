"""Compiled whole-grid stencil kernel.

Loops run over contiguous memory (x2 index innermost).  Non-finite values
are detected by the caller on the returned arrays.
"""
import numba as nb
import numpy as np


@nb.njit(fastmath=True, cache=True)
def euler_step(P, speed, h, kappa, delta, grad_mode, dt):
    """One explicit step from the ghost-padded array ``P`` (nx+2, ny+2).

    ``speed`` is the (nx, ny) first-order coefficient; ``grad_mode`` 1 pairs
    it with the x1 upwind gradient, 2 with the full upwind gradient, 0 skips
    it.  Returns ``(rhs, new)`` where ``new`` is ``u + dt*rhs`` clipped to
    the old 3x3 neighbourhood range, ghosts included.
    """
    nx = P.shape[0] - 2
    ny = P.shape[1] - 2
    rhs = np.empty((nx, ny))
    new = np.empty((nx, ny))
    d2 = delta * delta
    ih = 1.0 / h
    ih2 = 0.25 * ih * ih
    for i in range(1, nx + 1):
        for j in range(1, ny + 1):
            c = P[i, j]
            w = P[i - 1, j]
            e = P[i + 1, j]
            s = P[i, j - 1]
            n = P[i, j + 1]
            d1m = (c - w) * ih
            d1p = (e - c) * ih
            d2m = (c - s) * ih
            d2p = (n - c) * ih
            r = 0.0
            if grad_mode != 0:
                a = min(d1m, 0.0)
                b = max(d1p, 0.0)
                g = a * a + b * b
                if grad_mode == 2:
                    a = min(d2m, 0.0)
                    b = max(d2p, 0.0)
                    g += a * a + b * b
                r = speed[i - 1, j - 1] * np.sqrt(g)
            ne = P[i + 1, j + 1]
            se = P[i + 1, j - 1]
            nw = P[i - 1, j + 1]
            sw = P[i - 1, j - 1]
            if kappa != 0.0:
                p1 = 0.5 * (d1m + d1p)
                p2 = 0.5 * (d2m + d2p)
                u11 = (d1p - d1m) * ih
                u22 = (d2p - d2m) * ih
                u12 = (ne - se - nw + sw) * ih2
                q1 = p1 * p1
                q2 = p2 * p2
                r += kappa * (u11 * (q2 + 0.5 * d2) + u22 * (q1 + 0.5 * d2)
                              - 2.0 * u12 * p1 * p2) / (q1 + q2 + d2)
            rhs[i - 1, j - 1] = r
            lo = min(c, w, e, s, n, ne, se, nw, sw)
            hi = max(c, w, e, s, n, ne, se, nw, sw)
            v = c + dt * r
            if v < lo:
                v = lo
            elif v > hi:
                v = hi
            new[i - 1, j - 1] = v
    return rhs, new


@nb.njit(cache=True)
def row_self_measure(ut, order, w):
    """Weighted weak superlevel measure of every node's own value in its row.

    ``ut`` is row-major (ny, nx), ``order`` its per-row ascending argsort and
    ``w`` the (nx,) column weights.  Equal values share one measure.
    """
    ny, nx = ut.shape
    out = np.empty((ny, nx))
    for j in range(ny):
        acc = 0.0
        k = nx - 1
        while k >= 0:
            v = ut[j, order[j, k]]
            m = k
            while m >= 0 and ut[j, order[j, m]] == v:
                acc += w[order[j, m]]
                m -= 1
            for q in range(m + 1, k + 1):
                out[j, order[j, q]] = acc
            k = m
    return out
