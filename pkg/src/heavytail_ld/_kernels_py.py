"""Pure numpy implementations of the hot kernels.

The compiled module ``_kernels`` exposes the same functions with the same
signatures; ``_backend`` picks one at import time.
"""

import math

import numpy as np

EULER_GAMMA = 0.57721566490153286061
HALF_PI = 0.5 * math.pi

_SERIES_CUTOFF = 2.0
_N_SERIES = 16
_CF_MAXIT = 200
_CF_EPS = 1e-16

# F / F' switch to direct summation below this |Psi - 1|
GEOMETRIC_THRESHOLD = 1e-8


def sici(x):
    """Sine and cosine integrals for positive ``x`` (vectorised).

    Power series for x <= 2, continued fraction for E1(ix) above.
    """
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise ValueError("sici requires x > 0")
    si = np.empty_like(x)
    ci = np.empty_like(x)

    small = x <= _SERIES_CUTOFF
    if np.any(small):
        xs = x[small]
        x2 = xs * xs
        # Si: sum (-1)^k x^(2k+1) / ((2k+1)(2k+1)!)
        term = xs.copy()
        s_acc = xs.copy()
        c_acc = np.zeros_like(xs)
        cterm = np.ones_like(xs)
        for k in range(1, _N_SERIES):
            term = -term * x2 / ((2 * k) * (2 * k + 1))
            s_acc += term / (2 * k + 1)
            cterm = -cterm * x2 / ((2 * k - 1) * (2 * k))
            c_acc += cterm / (2 * k)
        si[small] = s_acc
        ci[small] = EULER_GAMMA + np.log(xs) + c_acc

    big = ~small
    if np.any(big):
        xb = x[big]
        tiny = 1e-300
        b = 1.0 + 1j * xb
        c = np.full(xb.shape, 1.0 / tiny, dtype=complex)
        d = 1.0 / b
        h = d.copy()
        done = np.zeros(xb.shape, dtype=bool)
        for i in range(2, _CF_MAXIT):
            a = -float((i - 1) * (i - 1))
            b = b + 2.0
            d = 1.0 / (a * d + b)
            c = b + a / c
            delta = c * d
            h = np.where(done, h, h * delta)
            done |= np.abs(delta - 1.0) < _CF_EPS
            if done.all():
                break
        h = h * (np.cos(xb) - 1j * np.sin(xb))
        ci[big] = -h.real
        si[big] = HALF_PI + h.imag
    return si, ci


def psi_nodes(t, c):
    """Psi(t) - 1 and Psi'(t) of the canonical law at t > 0 (skew ``c = p - q``)."""
    t = np.asarray(t, dtype=float)
    si, ci = sici(t)
    rest = HALF_PI - si
    s2 = np.sin(0.5 * t)
    sin_t = np.sin(t)
    re = -2.0 * s2 * s2 - t * rest
    im = c * (sin_t - t * ci)
    psi_m1 = re + 1j * im
    dpsi = -rest - 1j * (c * ci)
    return psi_m1, dpsi


def theta_nodes(t, c):
    """Theta = (Psi - 1)/(it) and Theta' at t > 0, from cancelled closed forms."""
    t = np.asarray(t, dtype=float)
    si, ci = sici(t)
    s2 = np.sin(0.5 * t)
    one_minus_cos_over_t = 2.0 * s2 * s2 / t
    sinc = np.sin(t) / t
    theta = c * (sinc - ci) + 1j * ((HALF_PI - si) + one_minus_cos_over_t)
    dtheta = -c * sinc / t - 1j * (one_minus_cos_over_t / t)
    return theta, dtheta


def _clog1p(w):
    re = 0.5 * np.log1p(2.0 * w.real + w.real * w.real + w.imag * w.imag)
    im = np.arctan2(w.imag, 1.0 + w.real)
    return re + 1j * im


def _cexpm1(x):
    a = x.real
    b = x.imag
    s = np.sin(0.5 * b)
    return (np.expm1(a) * np.cos(b) - 2.0 * s * s) + 1j * (np.exp(a) * np.sin(b))


def _expm1_minus_x(x):
    out = _cexpm1(x) - x
    small = np.abs(x) < 0.5
    if np.any(small):
        xs = x[small]
        term = xs * xs / 2.0
        acc = term.copy()
        for j in range(3, 22):
            term = term * xs / j
            acc += term
        out[small] = acc
    return out


def _log1p_minus_w(w, L):
    out = L - w
    small = np.abs(w) < 0.1
    if np.any(small):
        ws = w[small]
        power = ws * ws
        acc = -power / 2.0
        for j in range(3, 18):
            power = power * ws
            acc += (power / j) if j % 2 else (-power / j)
        out[small] = acc
    return out


def geometric_sums(w, dpsi, n):
    """F = sum_{k=1}^{n-1} (Psi^k - 1) and F' = Psi' sum_j j Psi^(j-1).

    ``w`` is Psi - 1 (supplied directly so no digits are lost forming it).
    """
    w = np.asarray(w, dtype=complex)
    dpsi = np.asarray(dpsi, dtype=complex)
    F = np.zeros(w.shape, dtype=complex)
    S1 = np.zeros(w.shape, dtype=complex)
    if n <= 1:
        return F, S1 * dpsi
    L = _clog1p(w)
    geo = np.abs(w) > GEOMETRIC_THRESHOLD
    if np.any(geo):
        wg = w[geo]
        Lg = L[geo]
        Fg = (_expm1_minus_x(n * Lg) + n * _log1p_minus_w(wg, Lg)) / wg
        zn1 = _cexpm1((n - 1) * Lg)
        F[geo] = Fg
        S1[geo] = (n * zn1 - Fg) / wg
    direct = ~geo
    if np.any(direct):
        Ld = L[direct]
        f_acc = np.zeros(Ld.shape, dtype=complex)
        s_acc = np.zeros(Ld.shape, dtype=complex)
        for k in range(1, n):
            f_acc += _cexpm1(k * Ld)
            # j Psi^(j-1) with j = k: k (1 + expm1((k-1)L))
            s_acc += k * (1.0 + _cexpm1((k - 1) * Ld))
        F[direct] = f_acc
        S1[direct] = s_acc
    return F, dpsi * S1


def charfn_nodes(t, c, n):
    """All node quantities needed by the inversion integrals, at t > 0.

    Returns (Psi - 1, Psi', Theta, Theta', F, F').
    """
    t = np.asarray(t, dtype=float)
    psi_m1, dpsi = psi_nodes(t, c)
    theta, dtheta = theta_nodes(t, c)
    F, dF = geometric_sums(psi_m1, dpsi, n)
    return psi_m1, dpsi, theta, dtheta, F, dF


def canonical_quantile(u, p):
    u = np.asarray(u, dtype=float)
    q = 1.0 - p
    with np.errstate(divide="ignore"):
        return np.where(u < q, -q / u, p / (1.0 - u))


def canonical_upper_tail(x, p):
    """P(X > x) for every real x."""
    x = np.asarray(x, dtype=float)
    q = 1.0 - p
    out = np.full(x.shape, p)
    hi = x >= 1.0
    lo = x < -1.0
    out[hi] = p / x[hi]
    out[lo] = 1.0 + q / x[lo]
    return out


def mc_naive_chunk(u, N, p):
    """Number of rows of ``u`` (uniforms, shape (trials, n)) whose sum exceeds N."""
    x = canonical_quantile(u, p)
    return int(np.count_nonzero(x.sum(axis=1) > N))


def mc_bigjump_chunk(u, N, n, p):
    """Sum and sum of squares of n * P(X > max(N - S, M)) over rows of ``u``.

    ``u`` has shape (trials, n - 1).
    """
    x = canonical_quantile(u, p)
    s = x.sum(axis=1)
    m = x.max(axis=1)
    vals = n * canonical_upper_tail(np.maximum(N - s, m), p)
    return float(vals.sum()), float((vals * vals).sum())
