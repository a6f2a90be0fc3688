"""Samplers and tail estimators for S_n, plus a two-fold convolution oracle.

Random numbers come from numpy's Philox counter-based generator.  Trials are
cut into fixed-size chunks and chunk ``j`` of cell ``c`` always draws from the
stream keyed by ``(seed, c, j)``, so results do not depend on how chunks are
spread over workers; partial sums are reduced in chunk order.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
import math
import warnings

import numpy as np

from . import _backend
from .model import DomainError, density, upper_tail
from .quadrature import adaptive_integral

RNG_NAME = "numpy.random.Philox-4x64-10"
CHUNK_NUMBERS = 1 << 20  # uniforms per chunk
TINY_UNIFORM = 2.0 ** -54


class CostGateError(RuntimeError):
    """A naive run would see too few hits to mean anything."""


@dataclass(frozen=True)
class EstimatorResult:
    estimate: float
    std_error: float
    trials: int
    seed: int
    rng: str = RNG_NAME

    def as_dict(self):
        return {"estimate": self.estimate, "std_error": self.std_error,
                "trials": self.trials, "seed": self.seed,
                "rng": self.rng, "numpy": np.__version__}


def rng_identity():
    return f"{RNG_NAME} (numpy {np.__version__})"


def stream(seed, cell, chunk):
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, cell, chunk])))


def _uniforms(gen, shape):
    u = gen.random(shape)
    u[u == 0.0] = TINY_UNIFORM  # the quantile is unbounded at 0
    return u


def sample_x(model, rng, size=None):
    """Exact draws of X1; the perturbed family goes through rejection."""
    if model.canonical:
        u = _uniforms(rng, 1 if size is None else size)
        x = _backend.kernels.canonical_quantile(u, model.p)
    else:
        x = _sample_perturbed(model, rng, 1 if size is None else size)
    return float(x[0]) if size is None else x


def _sample_perturbed(model, rng, size):
    count = int(np.prod(size))
    x0 = model.x0
    right = model.p / x0 + model.c1_plus / x0**2
    left = model.q / x0 + model.c1_minus / x0**2
    out = np.empty(count)
    which = rng.random(count)
    up = which < right
    down = (which >= right) & (which < right + left)
    mid = ~(up | down)
    out[mid] = rng.uniform(-x0, x0, mid.sum())
    out[up] = _pareto_tail(rng, up.sum(), x0, model.p, model.c1_plus)
    out[down] = -_pareto_tail(rng, down.sum(), x0, model.q, model.c1_minus)
    return out.reshape(size)


def _pareto_tail(rng, count, x0, w, c):
    # target w/x^2 + 2c/x^3 on x > x0, envelope (w + 2 max(c, 0)/x0)/x^2
    env = w + 2.0 * max(c, 0.0) / x0
    got = np.empty(0)
    while got.size < count:
        m = 2 * (count - got.size) + 16
        x = x0 / (1.0 - rng.random(m))
        accept = rng.random(m) * env < w + 2.0 * c / x
        got = np.concatenate([got, x[accept]])
    return got[:count]


def _chunks(trials, width):
    rows = max(1, CHUNK_NUMBERS // max(width, 1))
    return [(j, min(rows, trials - j * rows)) for j in range(-(-trials // rows))]


def _run_chunks(fn, trials, width, workers):
    plan = _chunks(trials, width)
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(fn, plan))
    else:
        parts = [fn(p) for p in plan]
    return parts  # in chunk order


def naive_tail_estimate(model, n, N, trials, seed, cell=0, workers=1, force=False):
    """Fraction of trials with X1 + ... + Xn > N."""
    if trials < 1:
        raise DomainError("trials must be at least 1")
    if not force and N > n:
        expected = trials * min(1.0, n * upper_tail(model, N))
        if expected < 10:
            raise CostGateError(f"about {expected:.3g} expected hits; pass force=True to run anyway")

    def run(part):
        j, rows = part
        gen = stream(seed, cell, j)
        if model.canonical:
            return _backend.kernels.mc_naive_chunk(_uniforms(gen, (rows, n)), float(N), model.p)
        x = _sample_perturbed(model, gen, (rows, n))
        return int(np.count_nonzero(x.sum(axis=1) > N))

    hits = sum(_run_chunks(run, trials, n, workers))
    est = hits / trials
    var = est * (1.0 - est) * trials / (trials - 1) if trials > 1 else 0.0
    return EstimatorResult(est, math.sqrt(var / trials), trials, seed)


def bigjump_tail_estimate(model, n, N, trials, seed, cell=0, workers=1):
    """Conditional estimator n P(X > max(N - S_{n-1}, M_{n-1})).

    The distinguished coordinate is the largest one; the law is atomless, so
    ties have probability zero.
    """
    if n < 2:
        raise DomainError("bigjump estimator needs n >= 2")
    if trials < 2:
        raise DomainError("trials must be at least 2")
    if model.q > 0.9:
        warnings.warn("left-skewed model: big-jump variance reduction is weak", RuntimeWarning)

    def run(part):
        j, rows = part
        gen = stream(seed, cell, j)
        if model.canonical:
            return _backend.kernels.mc_bigjump_chunk(
                _uniforms(gen, (rows, n - 1)), float(N), n, model.p)
        x = _sample_perturbed(model, gen, (rows, n - 1))
        v = n * upper_tail(model, np.maximum(N - x.sum(axis=1), x.max(axis=1)))
        return float(v.sum()), float((v * v).sum())

    parts = _run_chunks(run, trials, n - 1, workers)
    s = sum(p[0] for p in parts)
    s2 = sum(p[1] for p in parts)
    est = s / trials
    var = max(s2 - trials * est * est, 0.0) / (trials - 1)
    se = math.sqrt(var / trials)
    if est > 1.0 + 3.0 * se:
        raise ArithmeticError(f"big-jump mean {est} exceeds 1 by more than 3 standard errors")
    return EstimatorResult(est, se, trials, seed)


def conv2_oracle(model, N, tol=1e-10):
    """P(X1 + X2 > N) = int density(y) P(X > N - y) dy by adaptive quadrature."""
    model.require_canonical("conv2_oracle")

    def f(y):
        return density(model, y) * upper_tail(model, N - y)

    cuts = sorted({N - 1.0, N + 1.0})
    total = 0.0
    # density vanishes on (-1, 1); split the rest at the kinks of the tail
    for lo, hi in ((-np.inf, -1.0), (1.0, np.inf)):
        pts = [c for c in cuts if lo < c < hi]
        total += adaptive_integral(f, lo, hi, tol=tol / 2, points=pts).value
    return float(total)


def mirrored_conv2(model, N, tol=1e-10):
    """P(X1 + X2 < -N) by the mirrored integral (used for the p = q symmetry check)."""
    model.require_canonical("mirrored_conv2")

    def lower(x):
        return 1.0 - upper_tail(model, x)  # P(X < x); the law is atomless

    def f(y):
        return density(model, y) * lower(-N - y)

    cuts = sorted({-N - 1.0, -N + 1.0})
    total = 0.0
    for lo, hi in ((-np.inf, -1.0), (1.0, np.inf)):
        pts = [c for c in cuts if lo < c < hi]
        total += adaptive_integral(f, lo, hi, tol=tol / 2, points=pts).value
    return float(total)
