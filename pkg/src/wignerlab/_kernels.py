"""Compiled inner loops for the eigensolver and the LU log-determinant.

The loops are written out explicitly (no BLAS calls) so that results are
bit-identical regardless of how many threads the process uses.
"""

import math

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def householder_tridiagonal(a):
    """Reduce a Hermitian matrix in place; return (diag, |subdiag|).

    ``a`` is overwritten. Works for float64 and complex128 input.
    """
    n = a.shape[0]
    diag = np.empty(n)
    off = np.zeros(max(n - 1, 0))
    v = np.empty(n, dtype=a.dtype)
    p = np.empty(n, dtype=a.dtype)
    for k in range(n - 2):
        m = n - k - 1
        # norm of the column below the subdiagonal, then of the whole tail
        tail = 0.0
        for i in range(k + 2, n):
            tail += abs(a[i, k]) ** 2
        x0 = a[k + 1, k]
        if tail == 0.0:
            off[k] = abs(x0)
            continue
        norm = math.sqrt(tail + abs(x0) ** 2)
        ax0 = abs(x0)
        if ax0 == 0.0:
            phase = a.dtype.type(1.0)
        else:
            phase = x0 / ax0
        alpha = -phase * norm
        v[0] = x0 - alpha
        for i in range(1, m):
            v[i] = a[k + 1 + i, k]
        vnorm = 0.0
        for i in range(m):
            vnorm += abs(v[i]) ** 2
        vnorm = math.sqrt(vnorm)
        for i in range(m):
            v[i] = v[i] / vnorm
        # p = A v on the trailing block
        for i in range(m):
            s = a.dtype.type(0.0)
            for j in range(m):
                s += a[k + 1 + i, k + 1 + j] * v[j]
            p[i] = s
        kk = 0.0
        for i in range(m):
            kk += (np.conj(v[i]) * p[i]).real
        for i in range(m):
            p[i] = 2.0 * p[i] - 2.0 * kk * v[i]
        for i in range(m):
            vi = v[i]
            pi = p[i]
            for j in range(m):
                a[k + 1 + i, k + 1 + j] -= vi * np.conj(p[j]) + pi * np.conj(v[j])
        a[k + 1, k] = alpha
        a[k, k + 1] = np.conj(alpha)
        for i in range(k + 2, n):
            a[i, k] = 0.0
            a[k, i] = 0.0
        off[k] = abs(alpha)
    if n >= 2:
        off[n - 2] = abs(a[n - 1, n - 2])
    for i in range(n):
        diag[i] = a[i, i].real
    return diag, off


@njit(cache=True, nogil=True)
def tridiagonal_ql(diag, off, max_sweeps):
    """Eigenvalues of a real symmetric tridiagonal matrix, implicit QL.

    Returns ``(eigs, ok)``; ``ok`` is False when more than ``max_sweeps``
    shifted sweeps were needed in total.
    """
    n = diag.shape[0]
    d = diag.copy()
    e = np.zeros(n)
    for i in range(n - 1):
        e[i] = off[i]
    eps = np.finfo(np.float64).eps
    sweeps = 0
    for l in range(n):
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= eps * dd:
                    break
                m += 1
            if m == l:
                break
            sweeps += 1
            if sweeps > max_sweeps:
                return np.sort(d), False
            # Wilkinson-type shift from the leading 2x2 block
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + math.copysign(r, g))
            s = 1.0
            c = 1.0
            p = 0.0
            i = m - 1
            early = False
            while i >= l:
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    early = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                i -= 1
            if early:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
    return np.sort(d), True


@njit(cache=True, nogil=True)
def lu_log_abs_det(a):
    """Sum of log|pivot| of LU with partial pivoting; ``a`` is overwritten.

    Ties in the pivot search go to the lowest row index. An exactly zero
    pivot column gives ``-inf``.
    """
    n = a.shape[0]
    total = 0.0
    for k in range(n):
        piv = k
        best = abs(a[k, k])
        for i in range(k + 1, n):
            v = abs(a[i, k])
            if v > best:
                best = v
                piv = i
        if best == 0.0:
            return -np.inf
        if piv != k:
            for j in range(k, n):
                t = a[k, j]
                a[k, j] = a[piv, j]
                a[piv, j] = t
        pk = a[k, k]
        total += math.log(best)
        for i in range(k + 1, n):
            f = a[i, k] / pk
            if f != 0.0:
                for j in range(k + 1, n):
                    a[i, j] -= f * a[k, j]
    return total
