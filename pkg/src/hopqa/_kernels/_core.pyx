# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops for embedding training.

Same contracts as ``pure.py``; gathers and scatter-adds are fused into
single C passes so no (batch, dim) temporaries are allocated.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport sqrt

cnp.import_array()

NAME = "cython"


def batch_scores(
    double[:, ::1] ent_re, double[:, ::1] ent_im,
    double[:, ::1] rel_re, double[:, ::1] rel_im,
    long[::1] h, long[::1] r, long[::1] t,
):
    cdef Py_ssize_t n = h.shape[0]
    cdef Py_ssize_t d = ent_re.shape[1]
    cdef cnp.ndarray[double, ndim=1] out = np.empty(n, dtype=np.float64)
    cdef double[::1] out_v = out
    cdef Py_ssize_t i, k, hi, ri, ti
    cdef double acc, hre, him, rre, rim, tre, tim
    for i in range(n):
        hi = h[i]; ri = r[i]; ti = t[i]
        acc = 0.0
        for k in range(d):
            hre = ent_re[hi, k]; him = ent_im[hi, k]
            rre = rel_re[ri, k]; rim = rel_im[ri, k]
            tre = ent_re[ti, k]; tim = ent_im[ti, k]
            acc += hre * rre * tre + him * rre * tim + hre * rim * tim - him * rim * tre
        out_v[i] = acc
    return out


def accumulate_grads(
    double[:, ::1] ent_re, double[:, ::1] ent_im,
    double[:, ::1] rel_re, double[:, ::1] rel_im,
    long[::1] h, long[::1] r, long[::1] t, double[::1] coef,
    long[::1] h_slot, long[::1] r_slot, long[::1] t_slot,
    double[:, ::1] g_ent_re, double[:, ::1] g_ent_im,
    double[:, ::1] g_rel_re, double[:, ::1] g_rel_im,
):
    cdef Py_ssize_t n = h.shape[0]
    cdef Py_ssize_t d = ent_re.shape[1]
    cdef Py_ssize_t i, k, hi, ri, ti, hs, rs, ts
    cdef double c, hre, him, rre, rim, tre, tim
    for i in range(n):
        hi = h[i]; ri = r[i]; ti = t[i]
        hs = h_slot[i]; rs = r_slot[i]; ts = t_slot[i]
        c = coef[i]
        for k in range(d):
            hre = ent_re[hi, k]; him = ent_im[hi, k]
            rre = rel_re[ri, k]; rim = rel_im[ri, k]
            tre = ent_re[ti, k]; tim = ent_im[ti, k]
            g_ent_re[hs, k] += c * (rre * tre + rim * tim)
            g_ent_im[hs, k] += c * (rre * tim - rim * tre)
            g_rel_re[rs, k] += c * (hre * tre + him * tim)
            g_rel_im[rs, k] += c * (hre * tim - him * tre)
            g_ent_re[ts, k] += c * (hre * rre - him * rim)
            g_ent_im[ts, k] += c * (him * rre + hre * rim)


def adagrad_update(
    double[:, ::1] table, double[::1] accum,
    long[::1] rows, double[:, ::1] grads,
    double lr, double eps,
):
    cdef Py_ssize_t n = rows.shape[0]
    cdef Py_ssize_t d = table.shape[1]
    cdef Py_ssize_t i, k, row
    cdef double sq, denom
    for i in range(n):
        row = rows[i]
        sq = 0.0
        for k in range(d):
            sq += grads[i, k] * grads[i, k]
        accum[row] += sq / d
        denom = sqrt(accum[row]) + eps
        for k in range(d):
            table[row, k] -= lr * grads[i, k] / denom
