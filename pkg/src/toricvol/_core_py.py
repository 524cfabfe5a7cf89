"""Pure-Python divided-difference kernels.

Reference implementation of the hot loops; ``_core.pyx`` mirrors it line for
line.  Kernel kinds are encoded as integers so both backends share one ABI:

    0  exp(t)
    1  t**(-k)        (param = k >= 1)
    2  t**s           (param = s >= 0)
"""
import math

import numpy as np

EXP = 0
INVPOWER = 1
MONOMIAL = 2

MAX_TAYLOR_TERMS = 90
_TINY = 1e-300


def deriv(kind, param, n_anti, t, q):
    """Value at ``t`` of the ``q``-th derivative of the ``n_anti``-fold
    antiderivative of the kernel."""
    o = n_anti - q
    if kind == EXP:
        return math.exp(t)
    if kind == INVPOWER:
        k = param
        if o < 0:
            d = -o
            c = 1.0
            for j in range(d):
                c *= -(k + j)
            return c * t ** (-k - d)
        if o < k:
            c = 1.0
            for j in range(1, o + 1):
                c *= j - k
            return t ** (o - k) / c
        # logarithmic branch: (k-1)-fold gives (-1)^(k-1)/(k-1)! / t
        qq = o - k
        harmonic = 0.0
        for j in range(1, qq + 1):
            harmonic += 1.0 / j
        sign = -1.0 if (k - 1) % 2 else 1.0
        return (sign / math.factorial(k - 1) * t ** qq / math.factorial(qq)
                * (math.log(t) - harmonic))
    # monomial
    s = param
    if o >= 0:
        c = 1.0
        for j in range(s + 1, s + o + 1):
            c *= j
        return t ** (s + o) / c
    d = -o
    if d > s:
        return 0.0
    c = 1.0
    for j in range(s - d + 1, s + 1):
        c *= j
    return c * t ** (s - d)


def _clustered(kind, lo, hi):
    spread = hi - lo
    if kind == EXP:
        return spread <= 1.0
    if kind == INVPOWER:
        return spread <= 0.25 * lo
    return spread <= 0.5 * (1.0 + max(abs(lo), abs(hi)))


def _taylor(kind, param, n_anti, x, i, j):
    # [x_i..x_j]G = sum_s G^(q+s)(c)/(q+s)! * h_s(x_i - c, ..., x_j - c)
    q = j - i
    c = 0.0
    for k in range(i, j + 1):
        c += x[k]
    c /= q + 1
    z = [x[k] - c for k in range(i, j + 1)]
    # hrow[k] = h_s(z_0..z_k) for the current s
    hrow = [1.0] * (q + 1)
    inv_fact = 1.0 / math.factorial(q)
    total = deriv(kind, param, n_anti, c, q) * inv_fact
    small = 0
    for s in range(1, MAX_TAYLOR_TERMS):
        if kind == MONOMIAL and q + s - n_anti > param:
            break
        prev = 0.0
        for k in range(q + 1):
            prev = prev + z[k] * hrow[k]
            hrow[k] = prev
        inv_fact /= q + s
        term = deriv(kind, param, n_anti, c, q + s) * inv_fact * hrow[q]
        total += term
        if abs(term) <= 1e-18 * abs(total):
            small += 1
            if small >= 2:
                break
        else:
            small = 0
    return total


def divdiff(kind, param, nodes):
    """Divided difference ``[x_0..x_r]G`` with ``G`` the r-fold antiderivative.

    Returns ``(value, digits_lost)`` where ``digits_lost`` is the worst
    cancellation seen in the recurrence.
    """
    x = sorted(float(v) for v in nodes)
    n = len(x)
    n_anti = n - 1
    if kind == INVPOWER and x[0] <= 0.0:
        raise ValueError("inverse-power kernel needs positive nodes, got %r" % x[0])
    row = [deriv(kind, param, n_anti, t, 0) for t in x]
    lost = 0.0
    for q in range(1, n):
        new = []
        for i in range(n - q):
            j = i + q
            if _clustered(kind, x[i], x[j]):
                new.append(_taylor(kind, param, n_anti, x, i, j))
            else:
                a, b = row[i + 1], row[i]
                diff = a - b
                scale = max(abs(a), abs(b))
                if scale > 0.0:
                    lost = max(lost, math.log10(scale / max(abs(diff), _TINY)))
                new.append(diff / (x[j] - x[i]))
        row = new
    return row[0], lost


def simplex_moments(verts, weights, grad, const, kind, param, order):
    """Sum over simplices of the barycentric moments of ``g(<grad, y> + const)``.

    ``verts`` has shape (S, r+1, m).  Order 0 returns the integral, order 1 the
    vector of integrals of (y, 1), order 2 the matrix of integrals of
    (y, 1)(y, 1)^T.
    """
    verts = np.asarray(verts, dtype=float)
    weights = np.asarray(weights, dtype=float)
    grad = np.asarray(grad, dtype=float)
    n_simp, n_vert, m = verts.shape
    r = n_vert - 1
    rfact = math.factorial(r)
    if order == 0:
        out = 0.0
    elif order == 1:
        out = np.zeros(m + 1)
    else:
        out = np.zeros((m + 1, m + 1))
    for s in range(n_simp):
        vs = verts[s]
        nodes = [float(np.dot(grad, vs[j])) + const for j in range(n_vert)]
        fac = rfact * weights[s]
        if order == 0:
            out += fac * divdiff(kind, param, nodes)[0]
            continue
        hom = np.ones((n_vert, m + 1))
        hom[:, :m] = vs
        if order == 1:
            for j in range(n_vert):
                mj = fac * divdiff(kind, param, nodes + [nodes[j]])[0]
                out += mj * hom[j]
            continue
        for a in range(n_vert):
            for b in range(a, n_vert):
                mab = fac * divdiff(kind, param, nodes + [nodes[a], nodes[b]])[0]
                if a == b:
                    out += 2.0 * mab * np.outer(hom[a], hom[a])
                else:
                    out += mab * (np.outer(hom[a], hom[b]) + np.outer(hom[b], hom[a]))
    return out
