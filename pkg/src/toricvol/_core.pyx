# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled divided-difference kernels; mirrors ``_core_py``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport exp, log, log10, fabs, pow

cnp.import_array()

cdef enum:
    MAXN = 32
    MAX_TAYLOR_TERMS = 90

cdef int EXP = 0
cdef int INVPOWER = 1
cdef int MONOMIAL = 2


cdef double _factorial(int n) nogil:
    cdef double c = 1.0
    cdef int j
    for j in range(2, n + 1):
        c *= j
    return c


cdef double _deriv(int kind, int param, int n_anti, double t, int q) nogil:
    cdef int o = n_anti - q
    cdef int k, d, j, qq, s
    cdef double c, harmonic, sign
    if kind == EXP:
        return exp(t)
    if kind == INVPOWER:
        k = param
        if o < 0:
            d = -o
            c = 1.0
            for j in range(d):
                c *= -(k + j)
            return c * pow(t, -k - d)
        if o < k:
            c = 1.0
            for j in range(1, o + 1):
                c *= j - k
            return pow(t, o - k) / c
        qq = o - k
        harmonic = 0.0
        for j in range(1, qq + 1):
            harmonic += 1.0 / j
        sign = -1.0 if (k - 1) % 2 else 1.0
        return (sign / _factorial(k - 1) * pow(t, qq) / _factorial(qq)
                * (log(t) - harmonic))
    s = param
    if o >= 0:
        c = 1.0
        for j in range(s + 1, s + o + 1):
            c *= j
        return pow(t, s + o) / c
    d = -o
    if d > s:
        return 0.0
    c = 1.0
    for j in range(s - d + 1, s + 1):
        c *= j
    return c * pow(t, s - d)


cdef bint _clustered(int kind, double lo, double hi) nogil:
    cdef double spread = hi - lo
    if kind == EXP:
        return spread <= 1.0
    if kind == INVPOWER:
        return spread <= 0.25 * lo
    return spread <= 0.5 * (1.0 + max(fabs(lo), fabs(hi)))


cdef double _taylor(int kind, int param, int n_anti, double* x, int i, int j) nogil:
    cdef int q = j - i
    cdef double c = 0.0
    cdef double z[MAXN]
    cdef double hrow[MAXN]
    cdef int k, s, small = 0
    cdef double inv_fact, total, term, prev
    for k in range(i, j + 1):
        c += x[k]
    c /= q + 1
    for k in range(q + 1):
        z[k] = x[i + k] - c
        hrow[k] = 1.0
    inv_fact = 1.0 / _factorial(q)
    total = _deriv(kind, param, n_anti, c, q) * inv_fact
    for s in range(1, MAX_TAYLOR_TERMS):
        if kind == MONOMIAL and q + s - n_anti > param:
            break
        prev = 0.0
        for k in range(q + 1):
            prev = prev + z[k] * hrow[k]
            hrow[k] = prev
        inv_fact /= q + s
        term = _deriv(kind, param, n_anti, c, q + s) * inv_fact * hrow[q]
        total += term
        if fabs(term) <= 1e-18 * fabs(total):
            small += 1
            if small >= 2:
                break
        else:
            small = 0
    return total


cdef void _sort(double* x, int n) nogil:
    cdef int i, j
    cdef double v
    for i in range(1, n):
        v = x[i]
        j = i - 1
        while j >= 0 and x[j] > v:
            x[j + 1] = x[j]
            j -= 1
        x[j + 1] = v


cdef double _divdiff(int kind, int param, double* x, int n, double* lost) nogil:
    # x is sorted in place
    cdef double row[MAXN]
    cdef int n_anti = n - 1
    cdef int q, i, j
    cdef double a, b, diff, scale, loss
    _sort(x, n)
    for i in range(n):
        row[i] = _deriv(kind, param, n_anti, x[i], 0)
    for q in range(1, n):
        for i in range(n - q):
            j = i + q
            if _clustered(kind, x[i], x[j]):
                row[i] = _taylor(kind, param, n_anti, x, i, j)
            else:
                a = row[i + 1]
                b = row[i]
                diff = a - b
                scale = max(fabs(a), fabs(b))
                if scale > 0.0:
                    loss = log10(scale / max(fabs(diff), 1e-300))
                    if loss > lost[0]:
                        lost[0] = loss
                row[i] = diff / (x[j] - x[i])
    return row[0]


def divdiff(int kind, int param, nodes):
    """Divided difference ``[x_0..x_r]G`` with ``G`` the r-fold antiderivative.

    Returns ``(value, digits_lost)``.
    """
    cdef double x[MAXN]
    cdef double lost = 0.0
    cdef int n = len(nodes)
    cdef int i
    if n > MAXN:
        raise ValueError("at most %d nodes supported" % MAXN)
    for i in range(n):
        x[i] = float(nodes[i])
    if kind == INVPOWER:
        for i in range(n):
            if x[i] <= 0.0:
                raise ValueError("inverse-power kernel needs positive nodes, got %r" % x[i])
    value = _divdiff(kind, param, x, n, &lost)
    return value, lost


def simplex_moments(verts_in, weights_in, grad_in, double const, int kind,
                    int param, int order):
    """Sum over simplices of the barycentric moments of ``g(<grad, y> + const)``."""
    cdef cnp.ndarray[cnp.float64_t, ndim=3] verts = np.ascontiguousarray(verts_in, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] weights = np.ascontiguousarray(weights_in, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] grad = np.ascontiguousarray(grad_in, dtype=np.float64)
    cdef int n_simp = verts.shape[0]
    cdef int n_vert = verts.shape[1]
    cdef int m = verts.shape[2]
    cdef int r = n_vert - 1
    cdef double rfact = _factorial(r)
    cdef double nodes[MAXN]
    cdef double work[MAXN]
    cdef double hom[MAXN][MAXN]
    cdef double lost = 0.0
    cdef double fac, val, total0 = 0.0
    cdef int s, j, a, b, i, k
    if n_vert + 2 > MAXN or m + 1 > MAXN:
        raise ValueError("simplex too large for the compiled kernel")
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out1 = np.zeros(m + 1)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out2 = np.zeros((m + 1, m + 1))
    for s in range(n_simp):
        for j in range(n_vert):
            val = const
            for i in range(m):
                val += grad[i] * verts[s, j, i]
                hom[j][i] = verts[s, j, i]
            hom[j][m] = 1.0
            nodes[j] = val
            if kind == INVPOWER and val <= 0.0:
                raise ValueError("inverse-power kernel needs positive nodes, got %r" % val)
        fac = rfact * weights[s]
        if order == 0:
            for j in range(n_vert):
                work[j] = nodes[j]
            total0 += fac * _divdiff(kind, param, work, n_vert, &lost)
        elif order == 1:
            for j in range(n_vert):
                for k in range(n_vert):
                    work[k] = nodes[k]
                work[n_vert] = nodes[j]
                val = fac * _divdiff(kind, param, work, n_vert + 1, &lost)
                for i in range(m + 1):
                    out1[i] += val * hom[j][i]
        else:
            for a in range(n_vert):
                for b in range(a, n_vert):
                    for k in range(n_vert):
                        work[k] = nodes[k]
                    work[n_vert] = nodes[a]
                    work[n_vert + 1] = nodes[b]
                    val = fac * _divdiff(kind, param, work, n_vert + 2, &lost)
                    if a == b:
                        for i in range(m + 1):
                            for k in range(m + 1):
                                out2[i, k] += 2.0 * val * hom[a][i] * hom[a][k]
                    else:
                        for i in range(m + 1):
                            for k in range(m + 1):
                                out2[i, k] += val * (hom[a][i] * hom[b][k] + hom[b][i] * hom[a][k])
    if order == 0:
        return total0
    if order == 1:
        return out1
    return out2
