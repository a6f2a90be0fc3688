"""Characteristic function of the canonical law and the quantities built on it.

For t > 0 and c = p - q,

    Psi(t)  = [cos t - t (pi/2 - Si t)] + i c [sin t - t Ci t]
    Psi'(t) = -(pi/2 - Si t) - i c Ci t
    Psi''(t) = (sin t - i c cos t) / t

and negative t follows from Psi(-t) = conj Psi(t).  Theta = (Psi - 1)/(it)
is evaluated from the simplified form

    Theta(t) = c (sin t / t - Ci t) + i [(pi/2 - Si t) + (1 - cos t)/t]

so nothing is divided by a cancelling difference.
"""

from dataclasses import dataclass
import math
import warnings

import numpy as np
from scipy import integrate

from . import _backend
from .model import DomainError, density

EULER_GAMMA = 0.57721566490153286061
HALF_PI = 0.5 * math.pi


@dataclass(frozen=True)
class CharFnJet:
    value: complex
    d1: complex
    d2: complex
    singular: bool = False


@dataclass(frozen=True)
class ExpansionCoeffs:
    c: float
    C0: float
    C: float
    Cprime: complex
    C2: complex
    residual_bound: float
    fitted: dict


class ExpansionMismatch(RuntimeError):
    """Regression and closed-form expansion constants disagree."""


def sin_cos_integrals(x):
    """(Si(x), Ci(x)) for x > 0; scalar in, scalar out."""
    arr = np.asarray(x, dtype=float)
    if np.any(arr <= 0):
        raise DomainError("sine/cosine integrals need x > 0")
    si, ci = _backend.kernels.sici(np.atleast_1d(arr))
    if arr.ndim == 0:
        return float(si[0]), float(ci[0])
    return si.reshape(arr.shape), ci.reshape(arr.shape)


def _split(t):
    t = np.atleast_1d(np.asarray(t, dtype=float))
    return t, np.abs(t), t < 0


def psi_minus_one(model, t):
    """Psi(t) - 1 without forming Psi first (vectorised, t may be 0)."""
    model.require_canonical("closed-form Psi")
    t, at, neg = _split(t)
    out = np.zeros(t.shape, dtype=complex)
    nz = at > 0
    w, _ = _backend.kernels.psi_nodes(at[nz], model.skew)
    out[nz] = np.where(neg[nz], np.conj(w), w)
    return out


def psi_values(model, t):
    """Vectorised (Psi, Psi', Psi'') at nonzero t."""
    model.require_canonical("closed-form Psi")
    t, at, neg = _split(t)
    if np.any(at == 0):
        raise DomainError("Psi' and Psi'' are singular at t = 0")
    c = model.skew
    w, d1 = _backend.kernels.psi_nodes(at, c)
    d2 = (np.sin(at) - 1j * c * np.cos(at)) / at
    value = 1.0 + w
    return (np.where(neg, np.conj(value), value),
            np.where(neg, -np.conj(d1), d1),
            np.where(neg, np.conj(d2), d2))


def psi_exact(model, t):
    """Jet of Psi at a single point; derivatives are flagged singular at 0."""
    if t == 0:
        return CharFnJet(1.0 + 0j, complex("nan"), complex("nan"), singular=True)
    v, d1, d2 = psi_values(model, t)
    return CharFnJet(complex(v[0]), complex(d1[0]), complex(d2[0]))


def _theta_dd_pos(t, c):
    # (t cos t - 2 sin t)/t^3 and (t sin t - 2(1 - cos t))/t^3; the second
    # cancels to O(t) so both use their series for t <= 1.
    A = np.empty_like(t)
    B = np.empty_like(t)
    small = t <= 1.0
    ts = t[small]
    if ts.size:
        t2 = ts * ts
        a_acc = np.zeros_like(ts)
        b_acc = np.zeros_like(ts)
        for k in range(1, 14):
            a_acc += (-1) ** k * (2 * k - 1) / math.factorial(2 * k + 1) * t2 ** (k - 1)
            b_acc += (-1) ** k * 2 * k / math.factorial(2 * k + 2) * ts ** (2 * k - 1)
        A[small] = -1.0 / t2 + a_acc
        B[small] = b_acc
    tb = t[~small]
    if tb.size:
        A[~small] = (tb * np.cos(tb) - 2.0 * np.sin(tb)) / tb**3
        B[~small] = (tb * np.sin(tb) - 2.0 * (1.0 - np.cos(tb))) / tb**3
    return -c * A - 1j * B


def theta_values(model, t):
    """Vectorised (Theta, Theta', Theta'') at nonzero t."""
    model.require_canonical("closed-form Theta")
    t, at, neg = _split(t)
    if np.any(at == 0):
        raise DomainError("Theta is singular at t = 0")
    c = model.skew
    th, d1 = _backend.kernels.theta_nodes(at, c)
    d2 = _theta_dd_pos(at, c)
    return (np.where(neg, np.conj(th), th),
            np.where(neg, -np.conj(d1), d1),
            np.where(neg, np.conj(d2), d2))


def theta_jet(model, t):
    if t == 0:
        raise DomainError("Theta is singular at t = 0")
    v, d1, d2 = theta_values(model, t)
    return CharFnJet(complex(v[0]), complex(d1[0]), complex(d2[0]))


def F_values(model, t, n):
    """Vectorised F(t, n) = sum_{k<n} (Psi^k - 1) and its t-derivative."""
    if n < 1:
        raise DomainError("n must be a positive integer")
    t, at, neg = _split(t)
    F = np.zeros(t.shape, dtype=complex)
    dF = np.zeros(t.shape, dtype=complex)
    nz = at > 0
    w, d1 = _backend.kernels.psi_nodes(at[nz], model.skew)
    f, df = _backend.kernels.geometric_sums(w, d1, n)
    F[nz] = np.where(neg[nz], np.conj(f), f)
    dF[nz] = np.where(neg[nz], -np.conj(df), df)
    # at t = 0, F' = Psi'(0) n(n-1)/2 is infinite when c != 0
    if np.any(~nz) and n > 1 and model.skew != 0:
        dF[~nz] = complex("nan")
    return F, dF


def F_jet(model, t, n):
    F, dF = F_values(model, t, n)
    return complex(F[0]), complex(dF[0])


def decomposition_residual(z, n):
    """|z^n - n z - [(z - 1) sum_{k<n}(z^k - 1) - (n - 1)]|."""
    z = complex(z)
    if abs(z) > 1.0 + 1e-15:
        raise DomainError("decomposition_residual needs |z| <= 1")
    powers = z ** np.arange(1, n)
    rhs = (z - 1.0) * np.sum(powers - 1.0) - (n - 1)
    return abs(z**n - n * z - rhs)


def expansion_coeffs(model, t_min=1e-8, t_max=1e-2, num=200, tol=1e-6):
    """Small-t constants c, C0, C by formula and by regression on exact Psi.

    Raises ExpansionMismatch if the two routes differ by more than ``tol``.
    """
    model.require_canonical("expansion_coeffs")
    c = model.skew
    C0 = c * (1.0 - EULER_GAMMA)
    C = -HALF_PI
    t = np.logspace(math.log10(t_min), math.log10(t_max), num)
    w = psi_minus_one(model, t)
    lt = np.log(t)

    # rows scaled by 1/t; t^2 (real) and t^3 (imag) soak up the remainder
    re_design = np.column_stack([1.0 / t, np.ones_like(t), t])
    re_coef, *_ = np.linalg.lstsq(re_design, w.real / t, rcond=None)
    im_design = np.column_stack([1.0 / t, lt, np.ones_like(t), t * t])
    im_coef, *_ = np.linalg.lstsq(im_design, w.imag / t, rcond=None)
    fitted = {"c": -im_coef[1], "C0": im_coef[2], "C": re_coef[1],
              "intercept": complex(re_coef[0], im_coef[0])}
    for key, exact in (("c", c), ("C0", C0), ("C", C)):
        if abs(fitted[key] - exact) > tol:
            raise ExpansionMismatch(f"{key}: regression {fitted[key]!r} vs formula {exact!r}")

    expansion = -1j * c * t * lt + 1j * C0 * t + C * t
    residual_bound = float(np.max(np.abs(w - expansion) / (t * t * np.abs(lt))))

    # Psi' + i c log t -> C' and Theta + c log t -> C2, read off at the grid's low end
    _, d1, _ = psi_values(model, t[:5])
    th, _, _ = theta_values(model, t[:5])
    Cprime = complex(np.mean(d1 + 1j * c * lt[:5]))
    C2 = complex(np.mean(th + c * lt[:5]))
    return ExpansionCoeffs(c=c, C0=C0, C=C, Cprime=Cprime, C2=C2,
                           residual_bound=residual_bound, fitted=fitted)


def psi_by_quadrature(model, t, epsabs=1e-14):
    """Psi(t) from the density by Fourier-weighted quadrature (any TailModel).

    The tails use QUADPACK's QAWF routine on [x0, inf); the interior slab is
    done in closed form.
    """
    if t == 0:
        return 1.0 + 0j
    at = abs(t)
    x0 = model.x0
    slab = model.interior_mass / (2.0 * x0)
    value = 2.0 * slab * math.sin(at * x0) / at + 0j

    def right(x):
        return density(model, x)

    def left(x):
        return density(model, -x)

    with warnings.catch_warnings():
        # QAWF reports its cycle limit even when the achieved error is tiny
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        for f, sign in ((right, 1.0), (left, -1.0)):
            re, _ = integrate.quad(f, x0, np.inf, weight="cos", wvar=at,
                                   epsabs=epsabs, limlst=200)
            im, _ = integrate.quad(f, x0, np.inf, weight="sin", wvar=at,
                                   epsabs=epsabs, limlst=200)
            value += re + 1j * sign * im
    return value if t > 0 else value.conjugate()
