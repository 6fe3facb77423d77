# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled pairwise-interaction aggregation.

Bit-identical twin of mvsde._core.pairwise_py.pair_aggregate: same per-pair
expression tree, same ascending-partner accumulation order per row, same
final division by N. Each unordered pair is evaluated once and mirrored by
negation, which IEEE-754 makes exact; the skipped diagonal contributes an
exact zero in the reference, so the sums agree bit for bit. Compile with
floating-point contraction disabled, otherwise fused multiply-adds break
the equality.
"""

import numpy as np

from libc.math cimport sqrt, pow


def pair_aggregate(double[:, ::1] X, double kf1, double kfq, double qf,
                   double cg, double tam, double te, double tame_g=1.0):
    """See pairwise_py.pair_aggregate for the reference semantics."""
    cdef Py_ssize_t n = X.shape[0]
    cdef Py_ssize_t d = X.shape[1]
    f_arr = np.zeros((n, d))
    g_arr = np.zeros((n, d))
    if kf1 == 0.0 and kfq == 0.0 and cg == 0.0:
        return f_arr, g_arr
    cdef double[:, ::1] F = f_arr
    cdef double[:, ::1] G = g_arr
    dx_arr = np.empty(d)
    cdef double[::1] dx = dx_arr
    cdef Py_ssize_t i, j, c
    cdef double r2, r, rq, rte, w, coeff, gw, v
    cdef double nd = <double> n
    with nogil:
        for i in range(n):
            for j in range(i + 1, n):
                r2 = 0.0
                for c in range(d):
                    v = X[i, c] - X[j, c]
                    dx[c] = v
                    r2 = r2 + v * v
                r = sqrt(r2)
                if qf == 2.0:
                    rq = r2
                elif qf == 0.0:
                    rq = 1.0
                else:
                    rq = pow(r, qf)
                if tam == 0.0:
                    w = 1.0
                else:
                    if te == 2.0:
                        rte = r2
                    elif te == 4.0:
                        rte = r2 * r2
                    elif te == 0.0:
                        rte = 1.0
                    else:
                        rte = pow(r, te)
                    w = 1.0 / (1.0 + tam * rte)
                coeff = (kf1 + kfq * rq) * w
                gw = cg * w if tame_g != 0.0 else cg
                for c in range(d):
                    v = coeff * dx[c]
                    F[i, c] = F[i, c] + v
                    F[j, c] = F[j, c] - v
                    v = gw * dx[c]
                    G[i, c] = G[i, c] + v
                    G[j, c] = G[j, c] - v
        for i in range(n):
            for c in range(d):
                F[i, c] = F[i, c] / nd
                G[i, c] = G[i, c] / nd
    return f_arr, g_arr
