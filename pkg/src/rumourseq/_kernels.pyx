# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops for chain inference and skip-gram training.

Every function here has a twin in ``_pure.py`` with the same signature and
the same floating-point evaluation order where practical.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, log, INFINITY

cnp.import_array()


cdef inline double _lse(double[::1] buf, Py_ssize_t k) noexcept nogil:
    cdef double m = -INFINITY
    cdef double s = 0.0
    cdef Py_ssize_t j
    for j in range(k):
        if buf[j] > m:
            m = buf[j]
    if m == -INFINITY:
        return -INFINITY
    for j in range(k):
        s += exp(buf[j] - m)
    return m + log(s)


def forward(const double[:, ::1] unary, const double[:, ::1] trans):
    """Log-space forward messages; ``alpha[i, y]`` scores prefixes ending in ``y``."""
    cdef Py_ssize_t n = unary.shape[0]
    cdef Py_ssize_t k = unary.shape[1]
    alpha_arr = np.empty((n, k), dtype=np.float64)
    cdef double[:, ::1] alpha = alpha_arr
    cdef double[::1] buf = np.empty(k, dtype=np.float64)
    cdef Py_ssize_t i, y, p
    with nogil:
        for y in range(k):
            alpha[0, y] = unary[0, y]
        for i in range(1, n):
            for y in range(k):
                for p in range(k):
                    buf[p] = alpha[i - 1, p] + trans[p, y]
                alpha[i, y] = _lse(buf, k) + unary[i, y]
    return alpha_arr


def backward(const double[:, ::1] unary, const double[:, ::1] trans):
    """Log-space backward messages; ``beta[n-1] = 0``."""
    cdef Py_ssize_t n = unary.shape[0]
    cdef Py_ssize_t k = unary.shape[1]
    beta_arr = np.empty((n, k), dtype=np.float64)
    cdef double[:, ::1] beta = beta_arr
    cdef double[::1] buf = np.empty(k, dtype=np.float64)
    cdef Py_ssize_t i, y, nx
    with nogil:
        for y in range(k):
            beta[n - 1, y] = 0.0
        for i in range(n - 2, -1, -1):
            for y in range(k):
                for nx in range(k):
                    buf[nx] = trans[y, nx] + unary[i + 1, nx] + beta[i + 1, nx]
                beta[i, y] = _lse(buf, k)
    return beta_arr


def viterbi_forward(const double[:, ::1] unary, const double[:, ::1] trans):
    """Max-product forward pass.

    Returns ``(delta, backptr)``. Ties between predecessors resolve to the
    lowest label index.
    """
    cdef Py_ssize_t n = unary.shape[0]
    cdef Py_ssize_t k = unary.shape[1]
    delta_arr = np.empty((n, k), dtype=np.float64)
    bp_arr = np.zeros((n, k), dtype=np.intp)
    cdef double[:, ::1] delta = delta_arr
    cdef Py_ssize_t[:, ::1] bp = bp_arr
    cdef Py_ssize_t i, y, p, best_p
    cdef double best, cand
    with nogil:
        for y in range(k):
            delta[0, y] = unary[0, y]
        for i in range(1, n):
            for y in range(k):
                best = delta[i - 1, 0] + trans[0, y]
                best_p = 0
                for p in range(1, k):
                    cand = delta[i - 1, p] + trans[p, y]
                    if cand > best:
                        best = cand
                        best_p = p
                delta[i, y] = best + unary[i, y]
                bp[i, y] = best_p
    return delta_arr, bp_arr


def sgns_update(
    double[:, ::1] w_in,
    double[:, ::1] w_out,
    const cnp.int64_t[::1] centers,
    const cnp.int64_t[::1] contexts,
    const cnp.int64_t[:, ::1] negatives,
    const double[::1] rates,
):
    """One pass of skip-gram negative-sampling SGD over the given pairs, in place."""
    cdef Py_ssize_t n_pairs = centers.shape[0]
    cdef Py_ssize_t n_neg = negatives.shape[1]
    cdef Py_ssize_t dim = w_in.shape[1]
    cdef double[::1] grad_in = np.zeros(dim, dtype=np.float64)
    cdef Py_ssize_t q, s, j, c, t
    cdef double f, g, lr, label
    with nogil:
        for q in range(n_pairs):
            c = centers[q]
            lr = rates[q]
            for j in range(dim):
                grad_in[j] = 0.0
            for s in range(n_neg + 1):
                if s == 0:
                    t = contexts[q]
                    label = 1.0
                else:
                    t = negatives[q, s - 1]
                    if t == contexts[q]:
                        continue
                    label = 0.0
                f = 0.0
                for j in range(dim):
                    f += w_in[c, j] * w_out[t, j]
                g = (label - 1.0 / (1.0 + exp(-f))) * lr
                for j in range(dim):
                    grad_in[j] += g * w_out[t, j]
                for j in range(dim):
                    w_out[t, j] += g * w_in[c, j]
            for j in range(dim):
                w_in[c, j] += grad_in[j]
