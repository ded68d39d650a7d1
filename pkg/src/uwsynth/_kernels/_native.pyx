# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: fused per-pixel colour shift and particle stamping.

Semantics match `pyref` exactly (same interpolation formula, same stamp
order); only the evaluation strategy differs.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, floor

cnp.import_array()


def color_shift_apply(
    double[:, :, ::1] phi,
    double[:, ::1] d_horiz,
    double[:, ::1] beta_tables,
    double d_lo,
    double d_step,
    double[::1] t_vert,
    double[::1] background,
    double[:, :, ::1] out,
):
    cdef Py_ssize_t h = phi.shape[0]
    cdef Py_ssize_t w = phi.shape[1]
    cdef Py_ssize_t n = beta_tables.shape[1]
    cdef Py_ssize_t y, x, c, i
    cdef double d, pos, frac, lo, beta, t_h, u

    with nogil:
        for y in range(h):
            for x in range(w):
                d = d_horiz[y, x]
                pos = (d - d_lo) / d_step
                i = <Py_ssize_t>floor(pos)
                if i < 0:
                    i = 0
                elif i > n - 2:
                    i = n - 2
                frac = pos - i
                if frac < 0.0:
                    frac = 0.0
                elif frac > 1.0:
                    frac = 1.0
                for c in range(3):
                    lo = beta_tables[c, i]
                    beta = lo + frac * (beta_tables[c, i + 1] - lo)
                    t_h = exp(-beta * d)
                    u = t_vert[c] * (t_h * phi[y, x, c] + background[c] * (1.0 - t_h))
                    if u < 0.0:
                        u = 0.0
                    elif u > 1.0:
                        u = 1.0
                    out[y, x, c] = u


def accumulate_stamps(
    double[:, ::1] layer,
    double[:, ::1] patch,
    long long[::1] xs,
    long long[::1] ys,
):
    cdef Py_ssize_t h = layer.shape[0]
    cdef Py_ssize_t w = layer.shape[1]
    cdef Py_ssize_t kh = patch.shape[0]
    cdef Py_ssize_t kw = patch.shape[1]
    cdef Py_ssize_t ry = kh // 2
    cdef Py_ssize_t rx = kw // 2
    cdef Py_ssize_t k, x, y, y0, y1, x0, x1, yy, xx

    with nogil:
        for k in range(xs.shape[0]):
            x = <Py_ssize_t>xs[k]
            y = <Py_ssize_t>ys[k]
            y0 = y - ry if y - ry > 0 else 0
            y1 = y + ry + 1 if y + ry + 1 < h else h
            x0 = x - rx if x - rx > 0 else 0
            x1 = x + rx + 1 if x + rx + 1 < w else w
            if y0 >= y1 or x0 >= x1:
                continue
            for yy in range(y0, y1):
                for xx in range(x0, x1):
                    layer[yy, xx] += patch[yy - (y - ry), xx - (x - rx)]
