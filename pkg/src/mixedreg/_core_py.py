"""Pure-Python kernels; the reference the compiled ``_core`` must match.

Two hot loops live here:

* the grid pair search of the spectral initializer, which scores every
  ordered pair of grid points by ``sum_n min(r[n, i], r[n, j])``;
* the exhaustive label search behind the brute-force mixed solver. It walks
  label assignments in index order (row 0 is the most significant bit,
  label 0 = first group) and keeps, per group, a Givens-updated QR
  factorization whose accumulated residual sum of squares equals the
  least-squares residual of the rows assigned so far. Adding rows never
  shrinks that residual, so any prefix above tolerance prunes its subtree
  without changing which assignment is found first.
"""

from __future__ import annotations

import math

import numpy as np

BACKEND = "python"

# Components of an eliminated row below this fraction of its norm count as zero.
DROP_TOL = 1e-10

_CHUNK = 64


def grid_pair_losses(sqres):
    """Symmetric ``(g, g)`` matrix of pair losses from ``(n, g)`` squared residuals."""
    r = np.ascontiguousarray(sqres, dtype=float)
    g = r.shape[1]
    out = np.empty((g, g))
    for i0 in range(0, g, _CHUNK):
        i1 = min(g, i0 + _CHUNK)
        block = np.minimum(r[:, i0:i1, None], r[:, None, :]).sum(axis=0)
        out[i0:i1] = block
    return out


def grid_pair_search(sqres):
    """Lexicographically first ``(i, j)`` minimizing the pair loss, and that loss."""
    losses = grid_pair_losses(sqres)
    flat = int(np.argmin(losses))
    i, j = divmod(flat, losses.shape[1])
    return i, j, float(losses[i, j])


def _add_row(rmat, qty, row, target, k):
    """Fold one row into a group's triangular factor; return its residual increment."""
    w = list(row)
    t = target
    scale = math.sqrt(sum(v * v for v in w))
    drop = DROP_TOL * scale
    for j in range(k):
        wj = w[j]
        if abs(wj) <= drop:
            continue
        rj = rmat[j]
        rjj = rj[j]
        if rjj == 0.0:
            for l in range(j, k):
                rj[l] = w[l]
            qty[j] = t
            return 0.0
        rho = math.hypot(rjj, wj)
        c = rjj / rho
        s = wj / rho
        for l in range(j, k):
            a = rj[l]
            b = w[l]
            rj[l] = c * a + s * b
            w[l] = c * b - s * a
        q = qty[j]
        qty[j] = c * q + s * t
        t = c * t - s * q
    return t * t


def first_consistent_assignment(x, y, tol, start=0):
    """Index of the first assignment ``>= start`` whose two least-squares fits
    have total residual ``sqrt(rss1 + rss2) <= tol``; ``-1`` if none."""
    x = np.asarray(x, dtype=float)
    rows = [list(map(float, r)) for r in x]
    ys = [float(v) for v in np.asarray(y, dtype=float)]
    m = len(rows)
    k = x.shape[1] if x.ndim == 2 else 0
    tol2 = float(tol) * float(tol)
    start = int(start)
    if m == 0 or start >= (1 << m):
        return -1

    def fresh():
        return [[0.0] * k for _ in range(k)], [0.0] * k

    def dfs(depth, prefix, groups, rss):
        if depth == m:
            return prefix
        span = m - depth - 1
        for label in (0, 1):
            child = (prefix << 1) | label
            if ((child + 1) << span) - 1 < start:
                continue
            rmat, qty = groups[label]
            rmat = [r[:] for r in rmat]
            qty = qty[:]
            inc = _add_row(rmat, qty, rows[depth], ys[depth], k)
            new_rss = list(rss)
            new_rss[label] += inc
            if new_rss[0] + new_rss[1] > tol2:
                continue
            new_groups = list(groups)
            new_groups[label] = (rmat, qty)
            found = dfs(depth + 1, child, new_groups, new_rss)
            if found >= 0:
                return found
        return -1

    return dfs(0, 0, [fresh(), fresh()], [0.0, 0.0])
