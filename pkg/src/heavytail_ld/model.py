"""The law of X1: two-sided 1/x tails with an optional 1/x^2 correction.

For ``x > x0`` the upper tail is ``p/x + c1_plus/x**2`` and the lower tail
``P(X < -x)`` is ``q/x + c1_minus/x**2``.  Whatever mass the tails leave over
sits uniformly on ``[-x0, x0]``.  With ``x0 = 1`` and no correction terms
(the canonical model) there is no interior mass at all, ``a_n = n`` and
``b_n = (p - q) n log n`` exactly.
"""

from dataclasses import dataclass
import math

import numpy as np

TINY_PROBABILITY = 1e-300


class DomainError(ValueError):
    """An argument lies outside the domain of an operation."""


class UnderflowError(ArithmeticError):
    """A tail probability dropped below double-precision resolution."""


@dataclass(frozen=True)
class TailModel:
    p: float
    x0: float = 1.0
    c1_plus: float = 0.0
    c1_minus: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.p < 1.0:
            raise DomainError(f"p must lie in (0, 1), got {self.p}")
        if self.x0 < 1.0:
            raise DomainError(f"x0 must be >= 1, got {self.x0}")
        for side, (w, c) in {"upper": (self.p, self.c1_plus),
                             "lower": (self.q, self.c1_minus)}.items():
            # w/x^2 + 2c/x^3 >= 0 for all x > x0
            if c < 0 and self.x0 < -2.0 * c / w:
                raise DomainError(f"{side} density negative just above x0={self.x0}")
        if self.interior_mass < -1e-15:
            raise DomainError("tails carry more than unit mass")

    @property
    def q(self):
        return 1.0 - self.p

    @property
    def skew(self):
        """p - q, the coefficient of the log term in the characteristic function."""
        return self.p - self.q

    @property
    def canonical(self):
        return self.x0 == 1.0 and self.c1_plus == 0.0 and self.c1_minus == 0.0

    @property
    def symmetric(self):
        return self.p == 0.5 and self.c1_plus == self.c1_minus

    @property
    def interior_mass(self):
        x0 = self.x0
        return 1.0 - 1.0 / x0 - (self.c1_plus + self.c1_minus) / (x0 * x0)

    def require_canonical(self, what):
        if not self.canonical:
            raise DomainError(f"{what} is only available for the canonical model")


@dataclass(frozen=True)
class NormingSequences:
    a_n: float
    b_n: float


def _checked(prob):
    if 0.0 < prob < TINY_PROBABILITY:
        raise UnderflowError(f"tail probability {prob!r} below {TINY_PROBABILITY}")
    return prob


def tail_prob(model, side, x):
    """P(X > x) (side="upper") or P(X < -x) (side="lower"), for x >= x0."""
    if x < model.x0:
        raise DomainError(f"tail_prob needs x >= x0={model.x0}, got {x}")
    if side == "upper":
        w, c = model.p, model.c1_plus
    elif side == "lower":
        w, c = model.q, model.c1_minus
    else:
        raise ValueError(f"side must be 'upper' or 'lower', got {side!r}")
    return _checked(w / x + c / (x * x))


def upper_tail(model, x):
    """P(X > x) for any real x (vectorised)."""
    x = np.asarray(x, dtype=float)
    x0 = model.x0
    slab = model.interior_mass / (2.0 * x0)
    right_mass = model.p / x0 + model.c1_plus / (x0 * x0)
    left_mass = model.q / x0 + model.c1_minus / (x0 * x0)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        hi = model.p / x + model.c1_plus / (x * x)
        lo = 1.0 - (model.q / -x + model.c1_minus / (x * x))
    mid = right_mass + slab * (x0 - x)
    out = np.where(x >= x0, hi, np.where(x <= -x0, lo, mid))
    return out if out.ndim else float(out)


def cdf(model, x):
    x = np.asarray(x, dtype=float)
    x0 = model.x0
    slab = model.interior_mass / (2.0 * x0)
    left_mass = model.q / x0 + model.c1_minus / (x0 * x0)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        lo = model.q / -x + model.c1_minus / (x * x)
        hi = 1.0 - (model.p / x + model.c1_plus / (x * x))
    mid = left_mass + slab * (x + x0)
    out = np.where(x <= -x0, lo, np.where(x >= x0, hi, mid))
    return out if out.ndim else float(out)


def density(model, x):
    """Density of X (vectorised); the interior slab is uniform on [-x0, x0]."""
    x = np.asarray(x, dtype=float)
    ax = np.abs(x)
    x0 = model.x0
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        right = model.p / (x * x) + 2.0 * model.c1_plus / (ax * x * x)
        left = model.q / (x * x) + 2.0 * model.c1_minus / (ax * x * x)
    slab = model.interior_mass / (2.0 * x0)
    out = np.where(x > x0, right, np.where(x < -x0, left, slab))
    return out if out.ndim else float(out)


def quantile(model, u):
    """Inverse CDF of the canonical model."""
    model.require_canonical("quantile")
    u = np.asarray(u, dtype=float)
    if np.any((u <= 0.0) | (u >= 1.0)):
        raise DomainError("quantile needs u in (0, 1)")
    q = model.q
    out = np.where(u < q, -q / u, model.p / (1.0 - u))
    return out if out.ndim else float(out)


def truncated_mean(model, a):
    """E[X 1{|X| <= a}] in closed form; the symmetric slab contributes nothing."""
    if a < model.x0:
        raise DomainError(f"truncated_mean needs a >= x0={model.x0}, got {a}")
    x0 = model.x0
    log_part = model.skew * math.log(a / x0)
    corr = 2.0 * (model.c1_plus - model.c1_minus) * (1.0 / x0 - 1.0 / a)
    return log_part + corr


def norming(model, n):
    """Scaling a_n = n and centring b_n = n E[X 1{|X| <= n}]."""
    if n < 1:
        raise DomainError("n must be a positive integer")
    b = n * truncated_mean(model, n) if n >= model.x0 else 0.0
    return NormingSequences(a_n=float(n), b_n=b)
