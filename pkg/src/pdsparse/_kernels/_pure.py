"""Pure-numpy twin of the compiled kernels in `_core.pyx`.

Same algorithms, same in-place signatures; rotations and column
eliminations are vectorized over rows instead of explicit C loops.
"""

import numpy as np


def jacobi_eigh(a, v, max_sweeps, off_tol):
    n = a.shape[0]
    if n == 1:
        return 0

    iu = np.triu_indices(n, 1)
    for sweep in range(max_sweeps):
        off_sum = float(np.sum(np.abs(a[iu])))
        if off_sum <= off_tol:
            return sweep

        thresh = 0.2 * off_sum / (n * n) if sweep < 3 else 0.0

        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= thresh:
                    continue
                app = a[p, p]
                aqq = a[q, q]
                small = 1e-30 + 1e-18 * (abs(app) + abs(aqq))
                if sweep >= 4 and abs(apq) <= small:
                    a[p, q] = 0.0
                    a[q, p] = 0.0
                    continue
                theta = 0.5 * (aqq - app) / apq
                if abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = 1.0 / (abs(theta) + np.sqrt(theta * theta + 1.0))
                    if theta < 0.0:
                        t = -t
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                col_p = a[:, p].copy()
                a[:, p] = c * col_p - s * a[:, q]
                a[:, q] = s * col_p + c * a[:, q]
                row_p = a[p, :].copy()
                a[p, :] = c * row_p - s * a[q, :]
                a[q, :] = s * row_p + c * a[q, :]
                a[p, q] = 0.0
                a[q, p] = 0.0
                vec_p = v[:, p].copy()
                v[:, p] = c * vec_p - s * v[:, q]
                v[:, q] = s * vec_p + c * v[:, q]

    if float(np.sum(np.abs(a[iu]))) <= off_tol:
        return max_sweeps
    return -1


def cholesky_factor(a):
    n = a.shape[0]
    for j in range(n):
        acc = a[j, j] - a[j, :j] @ a[j, :j]
        if acc <= 0.0:
            return j + 1
        a[j, j] = np.sqrt(acc)
        if j + 1 < n:
            a[j + 1 :, j] = (a[j + 1 :, j] - a[j + 1 :, :j] @ a[j, :j]) / a[j, j]
    return 0


def cholesky_solve_tri(l, b):
    n = l.shape[0]
    for i in range(n):
        b[i, :] -= l[i, :i] @ b[:i, :]
        b[i, :] /= l[i, i]
    for i in range(n - 1, -1, -1):
        b[i, :] -= l[i + 1 :, i] @ b[i + 1 :, :]
        b[i, :] /= l[i, i]
