"""Pure numpy pairwise-interaction aggregation (reference backend).

This module defines the semantics the compiled backend must reproduce
bit-for-bit. For particle states X (N x d) and a kernel pair

    f(x, y) = (kf1 + kfq * |x-y|^qf) * (x - y)
    g(x, y) = cg * diag(x - y)

optionally tamed by the weight w = 1 / (1 + tam * |x-y|^te), it returns

    F[i] = (1/N) * sum_j w_ij * (kf1 + kfq * r_ij^qf) * (x_i - x_j)
    G[i] = (1/N) * sum_j w_ij * cg * (x_i - x_j)

with the diagonal j = i included (its contribution is exactly zero).

Bit-compatibility contract (kept in sync with _pairwise.pyx):
  - squared radius r2 = sum_c dx_c^2 accumulated over components in
    ascending order (exact for d <= 7, where numpy's axis reduction is
    sequential);
  - exponent special cases: power 2 -> r2, power 4 -> r2*r2, power 0 -> 1,
    anything else -> libm pow(r, e);
  - tam == 0 short-circuits w to exactly 1.0 (avoids 0*inf at overflow);
  - per-row accumulation in ascending partner order, one scalar
    accumulator per component; division by N at the end;
  - all-zero kernel parameters return exact zeros.

The antisymmetric-pair trick used by the compiled twin (evaluate each pair
once, negate for the mirrored entry) produces identical bits because IEEE-754
negation is exact and every factor in the expression is symmetric in (i, j).
"""

import numpy as np


def pair_aggregate(X, kf1, kfq, qf, cg, tam, te, tame_g=1.0):
    """Tamed pairwise kernel sums for every particle.

    Parameters
    ----------
    X : (N, d) float64 array, C-contiguous
    kf1, kfq, qf : drift kernel coefficients and radial exponent
    cg : diagonal diffusion kernel coefficient
    tam : taming weight (0 disables taming exactly)
    te : taming radial exponent
    tame_g : nonzero to apply the taming weight to g as well as f

    Returns
    -------
    F, G : (N, d) float64 arrays
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    n, d = X.shape
    if kf1 == 0.0 and kfq == 0.0 and cg == 0.0:
        return np.zeros((n, d)), np.zeros((n, d))

    dx = X[:, None, :] - X[None, :, :]
    r2 = (dx * dx).sum(axis=-1)

    if qf == 2.0:
        rq = r2
    elif qf == 0.0:
        rq = np.ones_like(r2)
    else:
        rq = np.power(np.sqrt(r2), qf)

    if tam == 0.0:
        w = np.ones_like(r2)
    else:
        if te == 2.0:
            rte = r2
        elif te == 4.0:
            rte = r2 * r2
        elif te == 0.0:
            rte = np.ones_like(r2)
        else:
            rte = np.power(np.sqrt(r2), te)
        w = 1.0 / (1.0 + tam * rte)

    coeff = (kf1 + kfq * rq) * w
    kf = coeff[:, :, None] * dx
    if tame_g != 0.0:
        kg = (cg * w)[:, :, None] * dx
    else:
        kg = cg * dx

    # ascending-j fold: the fixed accumulation order shared with the
    # compiled backend
    f_acc = np.zeros((n, d))
    g_acc = np.zeros((n, d))
    for j in range(n):
        f_acc += kf[:, j, :]
        g_acc += kg[:, j, :]
    return f_acc / float(n), g_acc / float(n)


def pair_aggregate_naive(X, kf1, kfq, qf, cg, tam, te, tame_g=1.0):
    """Scalar double-loop reference, direct evaluation of every (i, j).

    Used by tests to pin the accumulation-order contract; O(N^2 d) Python,
    keep N small.
    """
    X = np.asarray(X, dtype=np.float64)
    n, d = X.shape
    f_out = np.zeros((n, d))
    g_out = np.zeros((n, d))
    for i in range(n):
        for j in range(n):
            r2 = 0.0
            dx = np.empty(d)
            for c in range(d):
                v = X[i, c] - X[j, c]
                dx[c] = v
                r2 = r2 + v * v
            r = np.sqrt(r2)
            if qf == 2.0:
                rq = r2
            elif qf == 0.0:
                rq = 1.0
            else:
                rq = r ** qf
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
                    rte = r ** te
                w = 1.0 / (1.0 + tam * rte)
            coeff = (kf1 + kfq * rq) * w
            gw = cg * w if tame_g != 0.0 else cg
            for c in range(d):
                f_out[i, c] = f_out[i, c] + coeff * dx[c]
                g_out[i, c] = g_out[i, c] + gw * dx[c]
    for i in range(n):
        for c in range(d):
            f_out[i, c] = f_out[i, c] / float(n)
            g_out[i, c] = g_out[i, c] / float(n)
    return f_out, g_out
