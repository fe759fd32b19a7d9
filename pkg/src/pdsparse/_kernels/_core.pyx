# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels: cyclic Jacobi eigensolver and dense Cholesky.

The pure-numpy twin lives in `_pure`; both expose the same in-place
signatures and are interchangeable (selected in `_kernels.__init__`).
"""

from libc.math cimport fabs, sqrt


def jacobi_eigh(double[:, ::1] a, double[:, ::1] v, int max_sweeps, double off_tol):
    """Diagonalize symmetric `a` in place by cyclic Jacobi rotations.

    `v` must come in as the identity; on exit its columns are eigenvectors
    and diag(a) the eigenvalues (unsorted).  Returns the number of sweeps
    used, or -1 if the off-diagonal mass is still above `off_tol` after
    `max_sweeps` sweeps.  Threshold strategy: the first three sweeps skip
    pivots below 0.2*off_sum/n^2; later sweeps rotate everything, flushing
    pivots that are negligible against both neighboring diagonal entries.
    """
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t p, q, i, sweep
    cdef double off_sum, thresh, apq, app, aqq, theta, t, c, s, tmp, small

    if n == 1:
        return 0

    for sweep in range(max_sweeps):
        off_sum = 0.0
        for p in range(n - 1):
            for q in range(p + 1, n):
                off_sum += fabs(a[p, q])
        if off_sum <= off_tol:
            return sweep

        if sweep < 3:
            thresh = 0.2 * off_sum / (n * n)
        else:
            thresh = 0.0

        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if fabs(apq) <= thresh:
                    continue
                app = a[p, p]
                aqq = a[q, q]
                # once tiny against both diagonals the pivot is converged noise
                small = 1e-30 + 1e-18 * (fabs(app) + fabs(aqq))
                if sweep >= 4 and fabs(apq) <= small:
                    a[p, q] = 0.0
                    a[q, p] = 0.0
                    continue
                theta = 0.5 * (aqq - app) / apq
                if fabs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = 1.0 / (fabs(theta) + sqrt(theta * theta + 1.0))
                    if theta < 0.0:
                        t = -t
                c = 1.0 / sqrt(t * t + 1.0)
                s = t * c
                # A <- J^T A J, applied as column then row rotation
                for i in range(n):
                    tmp = a[i, p]
                    a[i, p] = c * tmp - s * a[i, q]
                    a[i, q] = s * tmp + c * a[i, q]
                for i in range(n):
                    tmp = a[p, i]
                    a[p, i] = c * tmp - s * a[q, i]
                    a[q, i] = s * tmp + c * a[q, i]
                a[p, q] = 0.0
                a[q, p] = 0.0
                for i in range(n):
                    tmp = v[i, p]
                    v[i, p] = c * tmp - s * v[i, q]
                    v[i, q] = s * tmp + c * v[i, q]

    off_sum = 0.0
    for p in range(n - 1):
        for q in range(p + 1, n):
            off_sum += fabs(a[p, q])
    if off_sum <= off_tol:
        return max_sweeps
    return -1


def cholesky_factor(double[:, ::1] a):
    """Overwrite the lower triangle of SPD `a` with its Cholesky factor.

    Returns 0 on success, or j+1 if the pivot at column j is not positive
    (matrix not positive definite to working precision).  The strict upper
    triangle is left untouched; consumers must ignore it.
    """
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t i, j, k
    cdef double acc

    for j in range(n):
        acc = a[j, j]
        for k in range(j):
            acc -= a[j, k] * a[j, k]
        if acc <= 0.0:
            return j + 1
        a[j, j] = sqrt(acc)
        for i in range(j + 1, n):
            acc = a[i, j]
            for k in range(j):
                acc -= a[i, k] * a[j, k]
            a[i, j] = acc / a[j, j]
    return 0


def cholesky_solve_tri(double[:, ::1] l, double[:, ::1] b):
    """Solve (L L^T) X = B in place on `b`, given the lower factor `l`."""
    cdef Py_ssize_t n = l.shape[0]
    cdef Py_ssize_t m = b.shape[1]
    cdef Py_ssize_t i, j, k
    cdef double acc

    for j in range(m):
        for i in range(n):
            acc = b[i, j]
            for k in range(i):
                acc -= l[i, k] * b[k, j]
            b[i, j] = acc / l[i, i]
        for i in range(n - 1, -1, -1):
            acc = b[i, j]
            for k in range(i + 1, n):
                acc -= l[k, i] * b[k, j]
            b[i, j] = acc / l[i, i]
