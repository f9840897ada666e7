# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels for the neural infill backend.

Must stay numerically identical to restyle._pykernels (the pure-numpy
reference); tests compare the two to machine precision.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, log

cnp.import_array()

IMPL = "cython"


cdef void _fill_blended(double[:, :] E, long[:] ids, double[:] weights,
                        long mask_id, double[:, :] x) nogil:
    cdef Py_ssize_t n = ids.shape[0]
    cdef Py_ssize_t d = E.shape[1]
    cdef Py_ssize_t j, k
    cdef double w
    for j in range(n):
        w = weights[j]
        for k in range(d):
            x[j, k] = (1.0 - w) * E[ids[j], k] + w * E[mask_id, k]


cdef int _context(double[:, :] E, double[:, :] x, long ctrl_id, int c,
                  Py_ssize_t i, Py_ssize_t n, double[:] h) nogil:
    cdef Py_ssize_t d = E.shape[1]
    cdef Py_ssize_t lo = i - c if i - c > 0 else 0
    cdef Py_ssize_t hi = i + c + 1 if i + c + 1 < n else n
    cdef int cnt = <int>(hi - lo - 1)
    cdef Py_ssize_t j, k
    for k in range(d):
        h[k] = 0.0
    if cnt > 0:
        for j in range(lo, hi):
            if j == i:
                continue
            for k in range(d):
                h[k] += x[j, k]
        for k in range(d):
            h[k] = h[k] / cnt + E[ctrl_id, k]
    else:
        for k in range(d):
            h[k] = E[ctrl_id, k]
    return cnt


def masked_logits(double[:, :] E, double[:, :] W, long[:] ids, double[:] weights,
                  long[:] masked, long ctrl_id, long mask_id, int c):
    cdef Py_ssize_t n = ids.shape[0]
    cdef Py_ssize_t d = E.shape[1]
    cdef Py_ssize_t V = W.shape[0]
    cdef Py_ssize_t m = masked.shape[0]
    out_arr = np.empty((m, V))
    h_arr = np.empty(d)
    x_arr = np.empty((n, d))
    cdef double[:, :] out = out_arr
    cdef double[:] h = h_arr
    cdef double[:, :] x = x_arr
    cdef Py_ssize_t k, v, t
    cdef double s
    _fill_blended(E, ids, weights, mask_id, x)
    for k in range(m):
        _context(E, x, ctrl_id, c, masked[k], n, h)
        for v in range(V):
            s = 0.0
            for t in range(d):
                s += W[v, t] * h[t]
            out[k, v] = s
    return out_arr


def forward_backward(double[:, :] E, double[:, :] W, long[:] ids, double[:] weights,
                     long[:] masked, long[:] targets, long ctrl_id, long mask_id, int c,
                     double[:, :] dE, double[:, :] dW):
    cdef Py_ssize_t n = ids.shape[0]
    cdef Py_ssize_t d = E.shape[1]
    cdef Py_ssize_t V = W.shape[0]
    cdef Py_ssize_t m = masked.shape[0]
    x_arr = np.empty((n, d))
    h_arr = np.empty(d)
    logits_arr = np.empty(V)
    dh_arr = np.empty(d)
    dx_arr = np.zeros((n, d))
    cdef double[:, :] x = x_arr
    cdef double[:] h = h_arr
    cdef double[:] logits = logits_arr
    cdef double[:] dh = dh_arr
    cdef double[:, :] dx = dx_arr
    cdef Py_ssize_t k, v, t, i, j, lo, hi
    cdef int cnt
    cdef double s, top, z, loss, g, w, share
    loss = 0.0
    _fill_blended(E, ids, weights, mask_id, x)
    for k in range(m):
        i = masked[k]
        cnt = _context(E, x, ctrl_id, c, i, n, h)
        top = -1e300
        for v in range(V):
            s = 0.0
            for t in range(d):
                s += W[v, t] * h[t]
            logits[v] = s
            if s > top:
                top = s
        z = 0.0
        for v in range(V):
            logits[v] = exp(logits[v] - top)
            z += logits[v]
        loss -= log(logits[targets[k]] / z) / m
        for t in range(d):
            dh[t] = 0.0
        for v in range(V):
            g = logits[v] / z
            if v == targets[k]:
                g -= 1.0
            g /= m
            for t in range(d):
                dW[v, t] += g * h[t]
                dh[t] += g * W[v, t]
        for t in range(d):
            dE[ctrl_id, t] += dh[t]
        if cnt > 0:
            lo = i - c if i - c > 0 else 0
            hi = i + c + 1 if i + c + 1 < n else n
            for j in range(lo, hi):
                if j == i:
                    continue
                for t in range(d):
                    dx[j, t] += dh[t] / cnt
    for j in range(n):
        w = weights[j]
        for t in range(d):
            dE[ids[j], t] += (1.0 - w) * dx[j, t]
            dE[mask_id, t] += w * dx[j, t]
    return loss
