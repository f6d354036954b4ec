# cython: language_level=3
"""Compiled versions of the kernels in ``_core_py``; same signatures and results."""

import numpy as np

from libc.math cimport fabs, hypot, sqrt
from libc.string cimport memcpy

BACKEND = "cython"

cdef double DROP_TOL = 1e-10


def grid_pair_losses(sqres):
    cdef const double[:, ::1] r = np.ascontiguousarray(sqres, dtype=np.float64)
    cdef Py_ssize_t n = r.shape[0], g = r.shape[1]
    out = np.empty((g, g), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef Py_ssize_t i, j, t
    cdef double acc, a, b
    with nogil:
        for i in range(g):
            for j in range(i, g):
                acc = 0.0
                for t in range(n):
                    a = r[t, i]
                    b = r[t, j]
                    acc += a if a < b else b
                o[i, j] = acc
                o[j, i] = acc
    return out


def grid_pair_search(sqres):
    cdef const double[:, ::1] r = np.ascontiguousarray(sqres, dtype=np.float64)
    cdef Py_ssize_t n = r.shape[0], g = r.shape[1]
    cdef Py_ssize_t i, j, t, bi = 0, bj = 0
    cdef double acc, a, b, best = np.inf
    with nogil:
        for i in range(g):
            for j in range(i, g):
                acc = 0.0
                for t in range(n):
                    a = r[t, i]
                    b = r[t, j]
                    acc += a if a < b else b
                if acc < best:
                    best = acc
                    bi = i
                    bj = j
    return int(bi), int(bj), float(best)


cdef double _add_row(double* rmat, double* qty, const double* row, double target,
                     double* work, Py_ssize_t k) nogil:
    cdef Py_ssize_t j, l
    cdef double t = target, scale = 0.0, drop, wj, rjj, rho, c, s, a, b, q
    for l in range(k):
        work[l] = row[l]
        scale += row[l] * row[l]
    drop = DROP_TOL * sqrt(scale)
    for j in range(k):
        wj = work[j]
        if fabs(wj) <= drop:
            continue
        rjj = rmat[j * k + j]
        if rjj == 0.0:
            for l in range(j, k):
                rmat[j * k + l] = work[l]
            qty[j] = t
            return 0.0
        rho = hypot(rjj, wj)
        c = rjj / rho
        s = wj / rho
        for l in range(j, k):
            a = rmat[j * k + l]
            b = work[l]
            rmat[j * k + l] = c * a + s * b
            work[l] = c * b - s * a
        q = qty[j]
        qty[j] = c * q + s * t
        t = c * t - s * q
    return t * t


cdef long long _dfs(Py_ssize_t depth, long long prefix, Py_ssize_t m, Py_ssize_t k,
                    const double* rows, const double* ys, double tol2, long long start,
                    double* rstack, double* qstack, double* rss, double* work) nogil:
    # Layout per depth d: rstack[d][group][k*k], qstack[d][group][k], rss[d][group].
    cdef Py_ssize_t span, label, other
    cdef long long child, found
    cdef Py_ssize_t rsz = k * k
    cdef double* rcur
    cdef double* rnext
    cdef double* qcur
    cdef double* qnext
    cdef double inc
    if depth == m:
        return prefix
    span = m - depth - 1
    rcur = rstack + depth * 2 * rsz
    rnext = rstack + (depth + 1) * 2 * rsz
    qcur = qstack + depth * 2 * k
    qnext = qstack + (depth + 1) * 2 * k
    for label in range(2):
        child = (prefix << 1) | label
        if ((child + 1) << span) - 1 < start:
            continue
        other = 1 - label
        memcpy(rnext, rcur, 2 * rsz * sizeof(double))
        memcpy(qnext, qcur, 2 * k * sizeof(double))
        inc = _add_row(rnext + label * rsz, qnext + label * k, rows + depth * k, ys[depth],
                       work, k)
        rss[(depth + 1) * 2 + label] = rss[depth * 2 + label] + inc
        rss[(depth + 1) * 2 + other] = rss[depth * 2 + other]
        if rss[(depth + 1) * 2] + rss[(depth + 1) * 2 + 1] > tol2:
            continue
        found = _dfs(depth + 1, child, m, k, rows, ys, tol2, start, rstack, qstack, rss, work)
        if found >= 0:
            return found
    return -1


def first_consistent_assignment(x, y, double tol, long long start=0):
    cdef const double[:, ::1] xv = np.ascontiguousarray(np.atleast_2d(x), dtype=np.float64)
    cdef const double[::1] yv = np.ascontiguousarray(y, dtype=np.float64)
    cdef Py_ssize_t m = xv.shape[0], k = xv.shape[1]
    if m == 0 or m > 62 or start >= (<long long>1 << m):
        return -1
    rstack_a = np.zeros((m + 1) * 2 * max(k * k, 1), dtype=np.float64)
    qstack_a = np.zeros((m + 1) * 2 * max(k, 1), dtype=np.float64)
    rss_a = np.zeros((m + 1) * 2, dtype=np.float64)
    work_a = np.zeros(max(k, 1), dtype=np.float64)
    cdef double[::1] rstack = rstack_a
    cdef double[::1] qstack = qstack_a
    cdef double[::1] rss = rss_a
    cdef double[::1] work = work_a
    cdef long long found
    with nogil:
        found = _dfs(0, 0, m, k, &xv[0, 0], &yv[0], tol * tol, start,
                     &rstack[0], &qstack[0], &rss[0], &work[0])
    return int(found)
