"""Reference implementations of the compiled kernels in plain Python/numpy.

Used when the extension is not built, and as the comparison side of the
kernel benchmark. Signatures and return values match ``_kernels.pyx``.
"""

import math

import numpy as np


def _lse(values):
    m = max(values)
    if m == -math.inf:
        return -math.inf
    return m + math.log(sum(math.exp(v - m) for v in values))


def forward(unary, trans):
    n, k = unary.shape
    alpha = np.empty((n, k), dtype=np.float64)
    alpha[0] = unary[0]
    for i in range(1, n):
        prev = alpha[i - 1]
        for y in range(k):
            alpha[i, y] = _lse([prev[p] + trans[p, y] for p in range(k)]) + unary[i, y]
    return alpha


def backward(unary, trans):
    n, k = unary.shape
    beta = np.empty((n, k), dtype=np.float64)
    beta[n - 1] = 0.0
    for i in range(n - 2, -1, -1):
        nxt = unary[i + 1] + beta[i + 1]
        for y in range(k):
            beta[i, y] = _lse([trans[y, q] + nxt[q] for q in range(k)])
    return beta


def viterbi_forward(unary, trans):
    n, k = unary.shape
    delta = np.empty((n, k), dtype=np.float64)
    bp = np.zeros((n, k), dtype=np.intp)
    delta[0] = unary[0]
    for i in range(1, n):
        for y in range(k):
            best = delta[i - 1, 0] + trans[0, y]
            best_p = 0
            for p in range(1, k):
                cand = delta[i - 1, p] + trans[p, y]
                if cand > best:
                    best, best_p = cand, p
            delta[i, y] = best + unary[i, y]
            bp[i, y] = best_p
    return delta, bp


def sgns_update(w_in, w_out, centers, contexts, negatives, rates):
    n_neg = negatives.shape[1]
    for q in range(centers.shape[0]):
        c = centers[q]
        lr = rates[q]
        h = w_in[c].copy()
        grad_in = np.zeros_like(h)
        for s in range(n_neg + 1):
            if s == 0:
                t, label = contexts[q], 1.0
            else:
                t = negatives[q, s - 1]
                if t == contexts[q]:
                    continue
                label = 0.0
            f = float(np.dot(h, w_out[t]))
            g = (label - 1.0 / (1.0 + math.exp(-f))) * lr
            grad_in += g * w_out[t]
            w_out[t] += g * h
        w_in[c] += grad_in
