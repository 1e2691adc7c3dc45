"""Compiled inner loops.

Points are carried as a scaled pair (m1, m2) * 2**e with a shared
exponent, max(|re|, |im|) of the mantissas in [0.5, 1).  Map data is passed
as (coeffs[m, dmax+1], degrees[m], avals[m]) in application order.
"""
import math

import numpy as np
from numba import njit, prange

LOG2 = math.log(2.0)


@njit(cache=True)
def renorm(x1, x2, e):
    big = max(abs(x1.real), abs(x1.imag), abs(x2.real), abs(x2.imag))
    if big == 0.0:
        return 0j, 0j, 0
    if not math.isfinite(big):
        return x1, x2, e
    _, k = math.frexp(big)
    s = math.ldexp(1.0, -k)
    return x1 * s, x2 * s, e + k


@njit(cache=True)
def pow2(k):
    if k < -1074:
        return 0.0
    if k > 1023:
        return math.inf
    return math.ldexp(1.0, k)


@njit(cache=True)
def _horner_scaled(m1, e, coeffs, deg, S):
    # sum_j c_j m1^j 2^(j e - S), evaluated as Horner in m1 with scaled coefficients
    acc = coeffs[deg] * pow2(deg * e - S)
    for j in range(deg - 1, -1, -1):
        acc = acc * m1 + coeffs[j] * pow2(j * e - S)
    return acc


@njit(cache=True)
def _dhorner_scaled(m1, e, coeffs, deg, S):
    # sum_j j c_j m1^(j-1) 2^((j-1) e - S)
    acc = deg * coeffs[deg] * pow2((deg - 1) * e - S)
    for j in range(deg - 1, 0, -1):
        acc = acc * m1 + j * coeffs[j] * pow2((j - 1) * e - S)
    return acc


@njit(cache=True)
def step(m1, m2, e, coeffs, degrees, avals):
    """One application of the full map on a scaled pair."""
    for i in range(degrees.shape[0]):
        deg = degrees[i]
        S = deg * e if e > 0 else 0
        x1 = _horner_scaled(m1, e, coeffs[i], deg, S) + avals[i] * m2 * pow2(e - S)
        x2 = m1 * pow2(e - S)
        m1, m2, e = renorm(x1, x2, S)
    return m1, m2, e


@njit(cache=True)
def step_tangent(m1, m2, e, u1, u2, g, coeffs, degrees, avals):
    """Map and its derivative applied to a tangent vector (u1, u2) * 2**g."""
    for i in range(degrees.shape[0]):
        deg = degrees[i]
        s = (deg - 1) * e if e > 0 else 0
        dp = _dhorner_scaled(m1, e, coeffs[i], deg, s)
        w = pow2(-s)
        y1 = dp * u1 + avals[i] * u2 * w
        y2 = u1 * w
        u1, u2, g = renorm(y1, y2, g + s)
        S = deg * e if e > 0 else 0
        x1 = _horner_scaled(m1, e, coeffs[i], deg, S) + avals[i] * m2 * pow2(e - S)
        x2 = m1 * pow2(e - S)
        m1, m2, e = renorm(x1, x2, S)
    return m1, m2, e, u1, u2, g


@njit(cache=True)
def log_sup(m1, m2, e):
    big = max(abs(m1), abs(m2))
    if big == 0.0:
        return -math.inf
    return math.log(big) + e * LOG2


@njit(cache=True)
def green_point(z1, z2, coeffs, degrees, avals, radius, d, kappa, weights, lam, tol, nmax):
    """Certified G+ at one point.

    Returns (value, error_bound, iterations, escaped_at).  escaped_at is -1
    when the certificate never fired.
    """
    m1, m2, e = renorm(z1 + 0j, z2 + 0j, 0)
    dinv = 1.0
    logR = math.log(radius)
    for n in range(nmax + 1):
        a1 = abs(m1)
        if a1 >= abs(m2) and a1 > 0.0 and math.log(a1) + e * LOG2 >= logR:
            n0 = n
            while True:
                l1 = math.log(abs(m1)) + e * LOG2
                B = 0.0
                for i in range(weights.shape[0]):
                    eps = weights[i, 1] * math.exp(-l1)
                    B += weights[i, 0] * (-math.log1p(-eps))
                bound = dinv * B / (d - 0.5)
                val = dinv * (l1 + kappa)
                if bound <= tol or n >= nmax:
                    return max(val, 0.0), bound, n, n0
                m1, m2, e = step(m1, m2, e, coeffs, degrees, avals)
                dinv /= d
                n += 1
        ls = log_sup(m1, m2, e)
        ub = dinv * (max(ls, 0.0) + lam)
        if ub <= tol or n == nmax:
            return 0.0, ub, n, -1
        m1, m2, e = step(m1, m2, e, coeffs, degrees, avals)
        dinv /= d
    return 0.0, math.inf, nmax, -1


@njit(parallel=True, cache=True)
def green_many(z1, z2, coeffs, degrees, avals, radius, d, kappa, weights, lam, tol, nmax):
    n = z1.shape[0]
    val = np.empty(n)
    bnd = np.empty(n)
    its = np.empty(n, dtype=np.int64)
    esc = np.empty(n, dtype=np.int64)
    for k in prange(n):
        v, b, it, es = green_point(z1[k], z2[k], coeffs, degrees, avals, radius, d,
                                   kappa, weights, lam, tol, nmax)
        val[k] = v
        bnd[k] = b
        its[k] = it
        esc[k] = es
    return val, bnd, its, esc


@njit(parallel=True, cache=True)
def green_many_maps(z1, z2, coeffs, degrees, avals, radius, d, kappa, weights, lam, tol, nmax):
    """As green_many with per-point map data (leading axis indexes points)."""
    n = z1.shape[0]
    val = np.empty(n)
    bnd = np.empty(n)
    its = np.empty(n, dtype=np.int64)
    esc = np.empty(n, dtype=np.int64)
    for k in prange(n):
        v, b, it, es = green_point(z1[k], z2[k], coeffs[k], degrees, avals[k], radius[k], d,
                                   kappa[k], weights[k], lam[k], tol, nmax)
        val[k] = v
        bnd[k] = b
        its[k] = it
        esc[k] = es
    return val, bnd, its, esc


@njit(cache=True)
def escape_index(z1, z2, coeffs, degrees, avals, radius, budget):
    """First iterate at which the escape certificate holds, or -1."""
    m1, m2, e = renorm(z1 + 0j, z2 + 0j, 0)
    logR = math.log(radius)
    for n in range(budget + 1):
        a1 = abs(m1)
        if a1 >= abs(m2) and a1 > 0.0 and math.log(a1) + e * LOG2 >= logR:
            return n
        if n < budget:
            m1, m2, e = step(m1, m2, e, coeffs, degrees, avals)
    return -1


@njit(parallel=True, cache=True)
def escape_many(z1, z2, coeffs, degrees, avals, radius, budget):
    n = z1.shape[0]
    out = np.empty(n, dtype=np.int64)
    for k in prange(n):
        out[k] = escape_index(z1[k], z2[k], coeffs, degrees, avals, radius, budget)
    return out


@njit(parallel=True, cache=True)
def escape_many_maps(z1, z2, coeffs, degrees, avals, radius, budget):
    n = z1.shape[0]
    out = np.empty(n, dtype=np.int64)
    for k in prange(n):
        out[k] = escape_index(z1[k], z2[k], coeffs[k], degrees, avals[k], radius[k], budget)
    return out


@njit(cache=True)
def poly2_log_abs(m1, m2, e, P, D):
    """log|P(w)| for w = (m1, m2) * 2**e; P[i, j] multiplies w1^i w2^j."""
    S = D * e if e > 0 else 0
    acc = 0j
    for i in range(P.shape[0]):
        for j in range(P.shape[1]):
            c = P[i, j]
            if c != 0:
                acc += c * (m1 ** i) * (m2 ** j) * pow2((i + j) * e - S)
    if acc == 0:
        return -math.inf
    return math.log(abs(acc)) + S * LOG2


@njit(parallel=True, cache=True)
def pullback_logs(z1, z2, coeffs, degrees, avals, P, D, nmax):
    """out[k, n] = log|P(f^n(z_k))| for n = 0..nmax."""
    npt = z1.shape[0]
    out = np.empty((npt, nmax + 1))
    for k in prange(npt):
        m1, m2, e = renorm(z1[k] + 0j, z2[k] + 0j, 0)
        for n in range(nmax + 1):
            out[k, n] = poly2_log_abs(m1, m2, e, P, D)
            if n < nmax:
                m1, m2, e = step(m1, m2, e, coeffs, degrees, avals)
    return out


@njit(cache=True)
def _lmax_herm(a, b, d):
    # largest eigenvalue of [[a, b], [conj(b), d]] with a, d real
    h = 0.5 * (a - d)
    return 0.5 * (a + d) + math.sqrt(h * h + abs(b) ** 2)


@njit(cache=True)
def _matmul2(a11, a12, a21, a22, b11, b12, b21, b22):
    return (a11 * b11 + a12 * b21, a11 * b12 + a12 * b22,
            a21 * b11 + a22 * b21, a21 * b12 + a22 * b22)


@njit(cache=True)
def _renorm4(a11, a12, a21, a22, g):
    big = max(abs(a11), abs(a12), abs(a21), abs(a22))
    if big == 0.0 or not math.isfinite(big):
        return a11, a12, a21, a22, g
    _, k = math.frexp(big)
    s = math.ldexp(1.0, -k)
    return a11 * s, a12 * s, a21 * s, a22 * s, g + k


@njit(cache=True)
def log_norm_fs(z1, z2, m1, m2, e, a11, a12, a21, a22, g):
    """log of the Fubini-Study operator norm of A * 2**g from T_z to T_w, w = (m1, m2) 2**e."""
    # Q = H(z)^(-1/2)
    nz2 = abs(z1) ** 2 + abs(z2) ** 2
    s = math.sqrt(1.0 + nz2)
    if nz2 > 0:
        nz = math.sqrt(nz2)
        u1 = z1 / nz
        u2 = z2 / nz
        c = s - 1.0
        q11 = s * (1.0 + c * abs(u1) ** 2)
        q12 = s * c * u1 * u2.conjugate()
        q21 = s * c * u2 * u1.conjugate()
        q22 = s * (1.0 + c * abs(u2) ** 2)
    else:
        q11, q12, q21, q22 = 1.0 + 0j, 0j, 0j, 1.0 + 0j
    # scaled H(w) = 4^-e' * Hs with e' = max(e, 0)
    ee = e if e > 0 else 0
    W1 = m1 * pow2(e - ee)
    W2 = m2 * pow2(e - ee)
    t = pow2(-2 * ee)
    nw = abs(W1) ** 2 + abs(W2) ** 2
    den = (t + nw) ** 2
    h11 = ((t + nw) - abs(W1) ** 2) / den
    h22 = ((t + nw) - abs(W2) ** 2) / den
    h12 = -(W1 * W2.conjugate()) / den
    # B = A Q ; N = B^* H B
    b11, b12, b21, b22 = _matmul2(a11, a12, a21, a22, q11, q12, q21, q22)
    # H B
    c11 = h11 * b11 + h12 * b21
    c12 = h11 * b12 + h12 * b22
    c21 = h12.conjugate() * b11 + h22 * b21
    c22 = h12.conjugate() * b12 + h22 * b22
    n11 = (b11.conjugate() * c11 + b21.conjugate() * c21).real
    n22 = (b12.conjugate() * c12 + b22.conjugate() * c22).real
    n12 = b11.conjugate() * c12 + b21.conjugate() * c22
    lm = _lmax_herm(n11, n12, n22)
    if lm <= 0.0:
        return -math.inf
    return (g - ee) * LOG2 + 0.5 * math.log(lm)


@njit(cache=True)
def log_norm_euclid(a11, a12, a21, a22, g):
    n11 = abs(a11) ** 2 + abs(a21) ** 2
    n22 = abs(a12) ** 2 + abs(a22) ** 2
    n12 = a11.conjugate() * a12 + a21.conjugate() * a22
    lm = _lmax_herm(n11, n12, n22)
    if lm <= 0.0:
        return -math.inf
    return g * LOG2 + 0.5 * math.log(lm)


@njit(parallel=True, cache=True)
def log_jac_norms(z1, z2, coeffs, degrees, avals, depths, fs):
    """out[k, i] = log ||D f^depths[i] (z_k)|| (Fubini-Study if fs else Euclidean)."""
    npt = z1.shape[0]
    nd = depths.shape[0]
    out = np.empty((npt, nd))
    nmax = depths[nd - 1]
    for k in prange(npt):
        x1 = z1[k] + 0j
        x2 = z2[k] + 0j
        m1, m2, e = renorm(x1, x2, 0)
        a11, a12, a21, a22, g = 1.0 + 0j, 0j, 0j, 1.0 + 0j, 0
        idx = 0
        for n in range(1, nmax + 1):
            for i in range(degrees.shape[0]):
                deg = degrees[i]
                s = (deg - 1) * e if e > 0 else 0
                dp = _dhorner_scaled(m1, e, coeffs[i], deg, s)
                w = pow2(-s)
                # Df = 2^s [[dp, a w], [w, 0]]
                a11, a12, a21, a22 = _matmul2(dp, avals[i] * w, w + 0j, 0j, a11, a12, a21, a22)
                a11, a12, a21, a22, g = _renorm4(a11, a12, a21, a22, g + s)
                S = deg * e if e > 0 else 0
                y1 = _horner_scaled(m1, e, coeffs[i], deg, S) + avals[i] * m2 * pow2(e - S)
                y2 = m1 * pow2(e - S)
                m1, m2, e = renorm(y1, y2, S)
            while idx < nd and depths[idx] == n:
                if fs:
                    out[k, idx] = log_norm_fs(x1, x2, m1, m2, e, a11, a12, a21, a22, g)
                else:
                    out[k, idx] = log_norm_euclid(a11, a12, a21, a22, g)
                idx += 1
    return out


@njit(parallel=True, cache=True)
def iterate_with_tangent(s1, s2, t1, t2, counts, coeffs, degrees, avals):
    """Apply the map counts[k] times to (s_k, t_k); returns scaled results.

    Output columns: m1, m2 (complex), e (int), u1, u2 (complex), g (int).
    """
    npt = s1.shape[0]
    M = np.empty((npt, 4), dtype=np.complex128)
    E = np.empty((npt, 2), dtype=np.int64)
    for k in prange(npt):
        m1, m2, e = renorm(s1[k] + 0j, s2[k] + 0j, 0)
        u1, u2, g = renorm(t1[k] + 0j, t2[k] + 0j, 0)
        for _ in range(counts[k]):
            m1, m2, e, u1, u2, g = step_tangent(m1, m2, e, u1, u2, g, coeffs, degrees, avals)
        M[k, 0] = m1
        M[k, 1] = m2
        M[k, 2] = u1
        M[k, 3] = u2
        E[k, 0] = e
        E[k, 1] = g
    return M, E
