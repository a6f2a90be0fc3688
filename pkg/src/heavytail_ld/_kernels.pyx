# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels; mirrors ``_kernels_py`` function for function."""

import numpy as np
cimport numpy as cnp
from libc.math cimport (sin, cos, log, log1p, expm1, exp, atan2, fabs,
                        sqrt, hypot, M_PI)

cnp.import_array()

cdef double EULER_GAMMA = 0.57721566490153286061
cdef double HALF_PI = 0.5 * M_PI
cdef double GEO_THRESHOLD = 1e-8

GEOMETRIC_THRESHOLD = GEO_THRESHOLD


cdef inline void _sici1(double x, double* si, double* ci) noexcept nogil:
    cdef double x2, term, cterm, s_acc, c_acc
    cdef double br, bi, cr, ci_, dr, di, hr, hi, a, den, tr, ti, delr, deli
    cdef int k, i
    if x <= 2.0:
        x2 = x * x
        term = x
        s_acc = x
        cterm = 1.0
        c_acc = 0.0
        for k in range(1, 16):
            term = -term * x2 / ((2 * k) * (2 * k + 1))
            s_acc += term / (2 * k + 1)
            cterm = -cterm * x2 / ((2 * k - 1) * (2 * k))
            c_acc += cterm / (2 * k)
        si[0] = s_acc
        ci[0] = EULER_GAMMA + log(x) + c_acc
        return
    # Lentz continued fraction for E1(ix)
    br = 1.0
    bi = x
    cr = 1e300
    ci_ = 0.0
    den = br * br + bi * bi
    dr = br / den
    di = -bi / den
    hr = dr
    hi = di
    for i in range(2, 200):
        a = -<double>((i - 1) * (i - 1))
        br += 2.0
        # d = 1 / (a d + b)
        tr = a * dr + br
        ti = a * di + bi
        den = tr * tr + ti * ti
        dr = tr / den
        di = -ti / den
        # c = b + a / c
        den = cr * cr + ci_ * ci_
        tr = br + a * cr / den
        ti = bi - a * ci_ / den
        cr = tr
        ci_ = ti
        delr = cr * dr - ci_ * di
        deli = cr * di + ci_ * dr
        tr = hr * delr - hi * deli
        ti = hr * deli + hi * delr
        hr = tr
        hi = ti
        if fabs(delr - 1.0) + fabs(deli) < 1e-16:
            break
    tr = cos(x)
    ti = -sin(x)
    a = hr * tr - hi * ti
    hi = hr * ti + hi * tr
    hr = a
    ci[0] = -hr
    si[0] = HALF_PI + hi


def sici(x):
    x = np.ascontiguousarray(x, dtype=np.float64)
    if np.any(x <= 0):
        raise ValueError("sici requires x > 0")
    shape = x.shape
    cdef double[::1] xv = x.reshape(-1)
    cdef Py_ssize_t m = xv.shape[0], j
    si = np.empty(m)
    ci = np.empty(m)
    cdef double[::1] sv = si
    cdef double[::1] cv = ci
    with nogil:
        for j in range(m):
            _sici1(xv[j], &sv[j], &cv[j])
    return si.reshape(shape), ci.reshape(shape)


cdef inline void _psi1(double t, double c, double si, double ci,
                       double complex* psi_m1, double complex* dpsi) noexcept nogil:
    cdef double rest = HALF_PI - si
    cdef double s2 = sin(0.5 * t)
    psi_m1[0] = (-2.0 * s2 * s2 - t * rest) + 1j * (c * (sin(t) - t * ci))
    dpsi[0] = -rest - 1j * (c * ci)


cdef inline void _theta1(double t, double c, double si, double ci,
                         double complex* theta, double complex* dtheta) noexcept nogil:
    cdef double s2 = sin(0.5 * t)
    cdef double omc = 2.0 * s2 * s2 / t
    cdef double sinc = sin(t) / t
    theta[0] = c * (sinc - ci) + 1j * ((HALF_PI - si) + omc)
    dtheta[0] = -c * sinc / t - 1j * (omc / t)


def psi_nodes(t, double c):
    t = np.ascontiguousarray(t, dtype=np.float64)
    shape = t.shape
    cdef double[::1] tv = t.reshape(-1)
    cdef Py_ssize_t m = tv.shape[0], j
    a = np.empty(m, dtype=np.complex128)
    b = np.empty(m, dtype=np.complex128)
    cdef double complex[::1] av = a
    cdef double complex[::1] bv = b
    cdef double si, ci
    with nogil:
        for j in range(m):
            _sici1(tv[j], &si, &ci)
            _psi1(tv[j], c, si, ci, &av[j], &bv[j])
    return a.reshape(shape), b.reshape(shape)


def theta_nodes(t, double c):
    t = np.ascontiguousarray(t, dtype=np.float64)
    shape = t.shape
    cdef double[::1] tv = t.reshape(-1)
    cdef Py_ssize_t m = tv.shape[0], j
    a = np.empty(m, dtype=np.complex128)
    b = np.empty(m, dtype=np.complex128)
    cdef double complex[::1] av = a
    cdef double complex[::1] bv = b
    cdef double si, ci
    with nogil:
        for j in range(m):
            _sici1(tv[j], &si, &ci)
            _theta1(tv[j], c, si, ci, &av[j], &bv[j])
    return a.reshape(shape), b.reshape(shape)


cdef inline double complex _clog1p(double complex w) noexcept nogil:
    cdef double wr = w.real, wi = w.imag
    return 0.5 * log1p(2.0 * wr + wr * wr + wi * wi) + 1j * atan2(wi, 1.0 + wr)


cdef inline double complex _cexpm1(double complex x) noexcept nogil:
    cdef double a = x.real, b = x.imag
    cdef double s = sin(0.5 * b)
    return (expm1(a) * cos(b) - 2.0 * s * s) + 1j * (exp(a) * sin(b))


cdef inline double _cabs(double complex z) noexcept nogil:
    return hypot(z.real, z.imag)


cdef inline double complex _expm1_minus_x(double complex x) noexcept nogil:
    cdef double complex term, acc
    cdef int j
    if _cabs(x) < 0.5:
        term = x * x / 2.0
        acc = term
        for j in range(3, 22):
            term = term * x / j
            acc = acc + term
        return acc
    return _cexpm1(x) - x


cdef inline double complex _log1p_minus_w(double complex w, double complex L) noexcept nogil:
    cdef double complex power, acc
    cdef int j
    if _cabs(w) < 0.1:
        power = w * w
        acc = -power / 2.0
        for j in range(3, 18):
            power = power * w
            if j % 2:
                acc = acc + power / j
            else:
                acc = acc - power / j
        return acc
    return L - w


cdef inline void _geo1(double complex w, double complex dpsi, long n,
                       double complex* F, double complex* dF) noexcept nogil:
    cdef double complex L, Fg, zn1, f_acc, s_acc
    cdef long k
    if n <= 1:
        F[0] = 0.0
        dF[0] = 0.0
        return
    L = _clog1p(w)
    if _cabs(w) > GEO_THRESHOLD:
        Fg = (_expm1_minus_x(n * L) + n * _log1p_minus_w(w, L)) / w
        zn1 = _cexpm1((n - 1) * L)
        F[0] = Fg
        dF[0] = dpsi * ((n * zn1 - Fg) / w)
        return
    f_acc = 0.0
    s_acc = 0.0
    for k in range(1, n):
        f_acc = f_acc + _cexpm1(k * L)
        s_acc = s_acc + k * (1.0 + _cexpm1((k - 1) * L))
    F[0] = f_acc
    dF[0] = dpsi * s_acc


def geometric_sums(w, dpsi, long n):
    w = np.ascontiguousarray(w, dtype=np.complex128)
    shape = w.shape
    dpsi = np.ascontiguousarray(dpsi, dtype=np.complex128).reshape(-1)
    cdef double complex[::1] wv = w.reshape(-1)
    cdef double complex[::1] dv = dpsi
    cdef Py_ssize_t m = wv.shape[0], j
    F = np.empty(m, dtype=np.complex128)
    dF = np.empty(m, dtype=np.complex128)
    cdef double complex[::1] Fv = F
    cdef double complex[::1] dFv = dF
    with nogil:
        for j in range(m):
            _geo1(wv[j], dv[j], n, &Fv[j], &dFv[j])
    return F.reshape(shape), dF.reshape(shape)


def charfn_nodes(t, double c, long n):
    t = np.ascontiguousarray(t, dtype=np.float64)
    shape = t.shape
    cdef double[::1] tv = t.reshape(-1)
    cdef Py_ssize_t m = tv.shape[0], j
    out = [np.empty(m, dtype=np.complex128) for _ in range(6)]
    cdef double complex[::1] o0 = out[0]
    cdef double complex[::1] o1 = out[1]
    cdef double complex[::1] o2 = out[2]
    cdef double complex[::1] o3 = out[3]
    cdef double complex[::1] o4 = out[4]
    cdef double complex[::1] o5 = out[5]
    cdef double si, ci
    with nogil:
        for j in range(m):
            _sici1(tv[j], &si, &ci)
            _psi1(tv[j], c, si, ci, &o0[j], &o1[j])
            _theta1(tv[j], c, si, ci, &o2[j], &o3[j])
            _geo1(o0[j], o1[j], n, &o4[j], &o5[j])
    return tuple(a.reshape(shape) for a in out)


cdef inline double _quantile1(double u, double p) noexcept nogil:
    cdef double q = 1.0 - p
    if u < q:
        return -q / u
    return p / (1.0 - u)


cdef inline double _upper_tail1(double x, double p) noexcept nogil:
    if x >= 1.0:
        return p / x
    if x < -1.0:
        return 1.0 + (1.0 - p) / x
    return p


def canonical_quantile(u, double p):
    u = np.ascontiguousarray(u, dtype=np.float64)
    shape = u.shape
    cdef double[::1] uv = u.reshape(-1)
    out = np.empty(uv.shape[0])
    cdef double[::1] ov = out
    cdef Py_ssize_t j
    with nogil:
        for j in range(uv.shape[0]):
            ov[j] = _quantile1(uv[j], p)
    return out.reshape(shape)


def canonical_upper_tail(x, double p):
    x = np.ascontiguousarray(x, dtype=np.float64)
    shape = x.shape
    cdef double[::1] xv = x.reshape(-1)
    out = np.empty(xv.shape[0])
    cdef double[::1] ov = out
    cdef Py_ssize_t j
    with nogil:
        for j in range(xv.shape[0]):
            ov[j] = _upper_tail1(xv[j], p)
    return out.reshape(shape)


def mc_naive_chunk(u, double N, double p):
    cdef double[:, ::1] uv = np.ascontiguousarray(u, dtype=np.float64)
    cdef Py_ssize_t T = uv.shape[0], n = uv.shape[1], i, j
    cdef long count = 0
    cdef double s
    with nogil:
        for i in range(T):
            s = 0.0
            for j in range(n):
                s += _quantile1(uv[i, j], p)
            if s > N:
                count += 1
    return int(count)


def mc_bigjump_chunk(u, double N, long n, double p):
    cdef double[:, ::1] uv = np.ascontiguousarray(u, dtype=np.float64)
    cdef Py_ssize_t T = uv.shape[0], m = uv.shape[1], i, j
    cdef double s, mx, x, v, acc = 0.0, acc2 = 0.0
    with nogil:
        for i in range(T):
            s = 0.0
            mx = -1e308
            for j in range(m):
                x = _quantile1(uv[i, j], p)
                s += x
                if x > mx:
                    mx = x
            x = N - s
            if mx > x:
                x = mx
            v = n * _upper_tail1(x, p)
            acc += v
            acc2 += v * v
    return acc, acc2
