"""Compactly supported smoothing window psi_Y and the law of Y behind it.

psi_Y is the k-fold self-convolution of the triangle of half-width
h = epsilon/k, normalised to 1 at t = 0.  A triangle is the convolution of two
boxes of width h, so psi_Y(t) = B(t/h + k) / B(k) with B the cardinal B-spline
of order 2k: a piecewise polynomial of degree 2k - 1, C^(2k-2), supported on
(-epsilon, epsilon).  In x-space this is a power of the Fejer kernel,

    density(x) = h sinc(h x / 2)^(2k) / (2 pi B(k)),

so Y has moments of every order below 2k - 1.
"""

from dataclasses import dataclass, field
from fractions import Fraction
import math
import warnings

import numpy as np
from scipy import integrate

from .charfn import CharFnJet
from .model import DomainError


def _bspline_pieces(order):
    """Coefficients c[j, r] with B(j + u) = sum_r c[j, r] u^r on piece j."""
    deg = order - 1
    norm = Fraction(1, math.factorial(deg))
    coef = [[Fraction(0)] * order for _ in range(order)]
    for j in range(order):
        for i in range(j + 1):
            a = (-1) ** i * math.comb(order, i) * norm
            shift = j - i
            for r in range(deg + 1):
                coef[j][r] += a * math.comb(deg, r) * Fraction(shift) ** (deg - r)
    return coef


@dataclass(frozen=True)
class SmootherSpec:
    epsilon: float = 0.5
    k: int = 4
    a: float = 3.5
    _coef: np.ndarray = field(init=False, repr=False, compare=False)
    _center: float = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not 0.0 < self.epsilon < 1.0:
            raise DomainError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if int(self.k) != self.k or self.k < 2:
            raise DomainError(f"k must be an integer >= 2, got {self.k}")
        if not self.a > 2.0:
            raise DomainError(f"moment order a must exceed 2, got {self.a}")
        if not 2 * self.k - 1 > self.a:
            raise DomainError(f"Y has moments only below {2 * self.k - 1}; a={self.a} too large")
        exact = _bspline_pieces(2 * self.k)
        center = exact[self.k][0]  # B(k)
        object.__setattr__(self, "_coef", np.array([[float(c) for c in row] for row in exact]))
        object.__setattr__(self, "_center", float(center))

    @property
    def h(self):
        return self.epsilon / self.k

    @property
    def order(self):
        return 2 * self.k

    @property
    def tail_constant(self):
        """K with P(|Y| > z) <= K z^(1 - 2k) for all z > 0."""
        m = self.order
        return 2.0 * self.h * (2.0 / self.h) ** m / ((m - 1) * 2.0 * math.pi * self._center)


def smoother_values(spec, t):
    """Vectorised (psi_Y, psi_Y', psi_Y'')."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    at = np.abs(t)
    sign = np.where(t < 0, -1.0, 1.0)
    m = spec.order
    x = at / spec.h + spec.k
    inside = x < m
    # at a breakpoint take the piece on the larger-|t| side
    j = np.clip(np.floor(x), spec.k, m - 1).astype(int)
    u = x - j
    coef = spec._coef[j]
    v = np.zeros_like(u)
    d1 = np.zeros_like(u)
    d2 = np.zeros_like(u)
    for r in range(m - 1, -1, -1):
        d2 = d2 * u + d1 * 2.0
        d1 = d1 * u + v
        v = v * u + coef[:, r]
    c = spec._center
    val = np.where(inside, v / c, 0.0)
    der1 = np.where(inside, d1 / (c * spec.h), 0.0) * sign
    der2 = np.where(inside, d2 / (c * spec.h**2), 0.0)
    return val, der1, der2


def smoother_jet(spec, t):
    v, d1, d2 = smoother_values(spec, t)
    return CharFnJet(float(v[0]), float(d1[0]), float(d2[0]))


def smoother_density(spec, x):
    x = np.asarray(x, dtype=float)
    h = spec.h
    s = np.sinc(h * x / (2.0 * math.pi))  # numpy sinc is sin(pi y)/(pi y)
    out = h * s ** spec.order / (2.0 * math.pi * spec._center)
    return out if out.ndim else float(out)


def smoother_tail_budget(spec, z):
    """Rigorous bound on P(|Y| > z), from |sin| <= 1 in the density; capped at 1."""
    if z <= 0:
        raise DomainError("z must be positive")
    return min(1.0, spec.tail_constant * z ** (1 - spec.order))


def smoother_tail_prob(spec, z):
    """P(|Y| > z), computed by expanding sin^(2k) into cosines.

    Each cosine term integrates against x^(-2k) on [z, inf) with QUADPACK's
    Fourier routine, so the result keeps its relative accuracy for large z.
    """
    if z <= 0:
        raise DomainError("z must be positive")
    k, m, h = spec.k, spec.order, spec.h
    total = math.comb(m, k) * z ** (1 - m) / (m - 1)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        for j in range(1, k + 1):
            val, _ = integrate.quad(lambda x: x ** (-m), z, np.inf, weight="cos",
                                    wvar=j * h, epsabs=1e-14 * z ** (1 - m),
                                    limlst=200)
            total += 2.0 * (-1) ** j * math.comb(m, k - j) * val
    total *= 4.0 ** (-k)
    prob = 2.0 * h * (2.0 / h) ** m * total / (2.0 * math.pi * spec._center)
    return min(1.0, max(prob, 0.0))


def sample_y(spec, size, rng, grid_max=None, num=200_001):
    """Draw Y by inverting its CDF tabulated on a symmetric grid."""
    if grid_max is None:
        grid_max = 400.0 / spec.h
    xs = np.linspace(0.0, grid_max, num)
    dens = smoother_density(spec, xs)
    # upper half CDF by cumulative trapezoid, anchored at 1/2
    cum = np.concatenate([[0.0], np.cumsum(0.5 * (dens[1:] + dens[:-1]) * np.diff(xs))])
    upper = 0.5 + cum * (0.5 - smoother_tail_prob(spec, grid_max) / 2.0) / cum[-1]
    u = rng.random(size)
    flip = u < 0.5
    v = np.where(flip, 1.0 - u, u)
    y = np.interp(v, upper, xs)
    return np.where(flip, -y, y)
