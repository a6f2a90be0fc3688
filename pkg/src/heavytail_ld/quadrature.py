"""Oscillatory and singular integration kernels.

Everything is built on one vectorised 7/15-point Gauss-Kronrod rule.  The
integrand callbacks take a 1-D array of abscissae and return either an array
of the same length or a stacked ``(q, len)`` array; the latter lets several
integrals share one set of (expensive) integrand evaluations.
"""

from dataclasses import dataclass, field
import math

import numpy as np

from .model import DomainError

_XK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
])
_WK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

# full 15-point rule on [-1, 1]
NODES = np.concatenate([-_XK[:-1], _XK[::-1]])
KRONROD = np.concatenate([_WK[:-1], _WK[::-1]])
GAUSS = np.zeros(15)
GAUSS[[1, 3, 5, 9, 11, 13]] = np.concatenate([_WG[:-1], _WG[-2::-1]])
GAUSS[7] = _WG[-1]

_EPS = np.finfo(float).eps


class QuadratureError(ArithmeticError):
    """Integration failed: nonfinite integrand or subdivision limit reached."""


class NonConvergenceError(QuadratureError):
    """Block contributions do not decay as the pairing argument requires."""


@dataclass
class QuadResult:
    value: complex
    abs_error_estimate: float
    periods_used: int = 0
    block_scaled: np.ndarray = field(default=None, repr=False)
    decay_ok: bool = True

    def __post_init__(self):
        if not np.all(np.isfinite(self.value)):
            raise QuadratureError("integral is not finite")
        if np.any(np.asarray(self.abs_error_estimate) < 0):
            raise ValueError("negative error estimate")


@dataclass(frozen=True)
class OscillandSpec:
    """Integrand e^(-itM) t^(-1) (log t)^r psi_Y(t) Psi(t)^m on [pi/M, epsilon].

    ``smoother=None`` means psi_Y == 1 on the domain, in which case ``epsilon``
    must be given; ``m > 0`` needs a canonical ``model``.
    """
    M: float
    r: int = 0
    m: int = 0
    smoother: object = None
    model: object = None
    epsilon: float = None

    def __post_init__(self):
        if not self.M > 0:
            raise DomainError("M must be positive")
        if self.r < 0 or self.m < 0:
            raise DomainError("r and m must be nonnegative")
        if self.m > 0 and self.model is None:
            raise DomainError("m > 0 needs a model")
        if self.upper <= math.pi / self.M:
            raise DomainError(f"empty domain: pi/M={math.pi / self.M} >= epsilon={self.upper}")

    @property
    def upper(self):
        if self.epsilon is not None:
            return self.epsilon
        if self.smoother is None:
            raise DomainError("epsilon is required when no smoother is given")
        return self.smoother.epsilon


def _as_rows(vals, npts):
    vals = np.asarray(vals)
    if vals.ndim == 1:
        vals = vals[None, :]
    if vals.shape[-1] != npts:
        raise ValueError("integrand returned the wrong number of values")
    if not np.all(np.isfinite(vals)):
        raise QuadratureError("integrand is not finite at a quadrature node")
    return vals


def gk15(f, a, b):
    """Apply the rule on every interval [a[i], b[i]].

    Returns ``(value, error)`` of shape ``(q, len(a))``; the error follows
    QUADPACK's heuristic, applied to the modulus of complex integrands.
    """
    return _gk_eval(f, a, b)[:2]


def _gk_eval(f, a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    half = 0.5 * (b - a)
    mid = 0.5 * (b + a)
    x = (mid[:, None] + half[:, None] * NODES).ravel()
    vals = _as_rows(f(x), x.size).reshape(-1, a.size, 15)
    return _gk_combine(vals, half)


def _gk_combine(vals, half):
    kron = vals @ KRONROD * half
    gauss = vals @ GAUSS * half
    mean = kron / (2.0 * half)
    resabs = np.abs(vals) @ KRONROD * np.abs(half)
    resasc = np.abs(vals - mean[..., None]) @ KRONROD * np.abs(half)
    err = np.abs(kron - gauss)
    with np.errstate(divide="ignore", invalid="ignore"):
        scaled = resasc * np.minimum(1.0, (200.0 * err / resasc) ** 1.5)
    err = np.where((resasc > 0) & (err > 0), scaled, err)
    floor = 50.0 * _EPS * resabs
    return kron, np.maximum(err, floor), floor


def _smooth_ends(f, lo, hi):
    # x = lo + (hi - lo)(3u^2 - 2u^3): the Jacobian vanishes at both ends,
    # which flattens logarithmic and inverse-root endpoint singularities
    width = hi - lo

    def g(u):
        x = lo + width * u * u * (3.0 - 2.0 * u)
        jac = 6.0 * width * u * (1.0 - u)
        return _as_rows(f(x), u.size) * jac

    return g


def _map_infinite(f, lo, hi):
    if np.isneginf(lo) and np.isposinf(hi):
        def g(s):
            x = s / (1.0 - s * s)
            return _as_rows(f(x), s.size) * (1.0 + s * s) / (1.0 - s * s) ** 2
        return g, -1.0, 1.0
    if np.isposinf(hi):
        def g(s):
            x = lo + s / (1.0 - s)
            return _as_rows(f(x), s.size) / (1.0 - s) ** 2
        return g, 0.0, 1.0
    if np.isneginf(lo):
        def g(s):
            x = hi - s / (1.0 - s)
            return _as_rows(f(x), s.size) / (1.0 - s) ** 2
        return g, 0.0, 1.0
    return f, lo, hi


def adaptive_vector(f, lo, hi, tol=1e-10, rel_tol=0.0, max_intervals=4000,
                    smooth_ends=True):
    """Globally adaptive bisection for a scalar- or vector-valued integrand.

    Returns ``(values, errors, intervals)`` with one entry per component.
    """
    if not lo < hi:
        raise DomainError(f"need lo < hi, got [{lo}, {hi}]")
    g, a, b = _map_infinite(f, lo, hi)
    if smooth_ends and np.isfinite(lo) and np.isfinite(hi):
        g, a, b = _smooth_ends(f, lo, hi), 0.0, 1.0
    left = np.array([a])
    right = np.array([b])
    val, err, floor = _gk_eval(g, left, right)
    while True:
        total = val.sum(axis=1)
        total_err = err.sum(axis=1)
        # never ask for more than rounding allows
        target = np.maximum(np.maximum(tol, rel_tol * np.abs(total)), 2.0 * floor.sum(axis=1))
        if np.all(total_err <= target):
            return total, total_err, left.size
        if left.size >= max_intervals:
            raise QuadratureError(
                f"subdivision limit reached: error {total_err.max():.3g} > {target.min():.3g}")
        # split the worst intervals until they hold half the excess error
        score = (err / target[:, None]).max(axis=0)
        order = np.argsort(score)[::-1]
        excess = np.cumsum(score[order])
        need = 0.5 * (score.sum() - 1.0)
        count = int(np.searchsorted(excess, need)) + 1
        pick = order[:max(1, min(count, max_intervals - left.size))]
        if np.any(right[pick] - left[pick] <= 4 * _EPS * np.maximum(1.0, np.abs(left[pick]))):
            raise QuadratureError("maximum bisection depth exceeded")
        midp = 0.5 * (left[pick] + right[pick])
        new_left = np.concatenate([left[pick], midp])
        new_right = np.concatenate([midp, right[pick]])
        nv, ne, nf = _gk_eval(g, new_left, new_right)
        keep = np.ones(left.size, dtype=bool)
        keep[pick] = False
        left = np.concatenate([left[keep], new_left])
        right = np.concatenate([right[keep], new_right])
        val = np.concatenate([val[:, keep], nv], axis=1)
        err = np.concatenate([err[:, keep], ne], axis=1)
        floor = np.concatenate([floor[:, keep], nf], axis=1)


def _scalar(values):
    v = complex(values)
    return v.real if v.imag == 0.0 else v


def adaptive_integral(f, lo, hi, tol=1e-10, points=(), max_intervals=4000):
    """Integrate a vectorised scalar ``f`` over [lo, hi] (either end may be infinite).

    ``points`` are interior breakpoints (kinks, jumps) to split at first.
    """
    edges = [lo] + sorted(p for p in points if lo < p < hi) + [hi]
    total = 0.0
    total_err = 0.0
    pieces = len(edges) - 1
    for a, b in zip(edges[:-1], edges[1:]):
        v, e, _ = adaptive_vector(f, a, b, tol=tol / pieces, max_intervals=max_intervals)
        total += v[0]
        total_err += e[0]
    return QuadResult(_scalar(total), float(total_err))


def inner_window_vector(f, M, tol=1e-13, rel_tol=0.0, s_max=60.0):
    """Integral over [0, pi/M] via t = (pi/M) e^(-s); vector-valued ``f``."""
    h = math.pi / M

    def g(s):
        t = h * np.exp(-s)
        return _as_rows(f(t), s.size) * t

    return adaptive_vector(g, 0.0, s_max, tol=tol, rel_tol=rel_tol, smooth_ends=False)


def inner_window_integral(f, M, tol=1e-13):
    """Integral of ``f`` over [-pi/M, pi/M], absorbing a log|t| singularity at 0."""
    if not M > 0:
        raise DomainError("M must be positive")

    def both(t):
        return _as_rows(f(t), t.size) + _as_rows(f(-t), t.size)

    v, e, _ = inner_window_vector(both, M, tol=tol)
    return QuadResult(_scalar(v[0]), float(e[0]))


def paired_blocks(amp, M, t_hi, tol=1e-9, rel_tol=0.0, chunk=2048, max_refine=5):
    """W = int_{pi/M}^{t_hi} e^(-itM) amp(t) dt by period pairing in sigma = tM.

    Blocks J_k cover sigma in [(2k-1)pi, (2k+1)pi]; the second half-period is
    folded onto the first, so each block integrates
    e^(-iu) [amp((2k pi + u)/M) - amp((2k pi + u + pi)/M)] over u in [-pi, 0].
    The phase is taken from the local offset u, never from sigma itself.
    The error target per component is max(tol, rel_tol sum_k |J_k|).
    Returns ``(W, err, J)`` with J the per-block contributions, all stacked
    over the components of ``amp``.
    """
    sigma_hi = t_hi * M
    if sigma_hi <= math.pi:
        raise DomainError("empty oscillatory domain")
    K = int((sigma_hi - math.pi) // (2.0 * math.pi))
    phase = np.exp(-1j * math.pi * (0.5 * NODES - 0.5))  # e^(-iu) at u = pi(x - 1)/2
    q = _as_rows(amp(np.array([math.pi / M])), 1).shape[0]
    J = np.zeros((q, K), dtype=complex)
    E = np.zeros((q, K))
    floor = np.zeros((q, K))
    for start in range(0, K, chunk):
        ks = np.arange(start + 1, min(start + chunk, K) + 1, dtype=float)
        sl = slice(start, start + ks.size)
        J[:, sl], E[:, sl], floor[:, sl] = _block_chunk(amp, M, ks, 1, phase)
    target = np.maximum(tol, rel_tol * np.abs(J).sum(axis=1))
    block_tol = (target / max(K, 1))[:, None]
    # refining cannot beat the rounding floor, so leave those blocks alone
    bad = np.flatnonzero(np.any(E > np.maximum(block_tol, 2.0 * floor), axis=0))
    level = 1
    while bad.size and level <= max_refine:
        for start in range(0, bad.size, max(1, chunk >> level)):
            idx = bad[start:start + max(1, chunk >> level)]
            J[:, idx], E[:, idx], floor[:, idx] = _block_chunk(amp, M, idx + 1.0, 2 ** level, None)
        bad = bad[np.any(E[:, bad] > np.maximum(block_tol, 2.0 * floor[:, bad]), axis=0)]
        level += 1
    W = J.sum(axis=1)
    err = E.sum(axis=1)
    # trailing partial block: sigma = (2K+1)pi + v, e^(-i sigma) = -e^(-iv)
    s0 = (2 * K + 1) * math.pi
    if sigma_hi - s0 > 0:
        def tail(v):
            return _as_rows(amp((s0 + v) / M), v.size) * (-np.exp(-1j * v)) / M
        tv, te, _ = adaptive_vector(tail, 0.0, sigma_hi - s0, tol=0.1 * target,
                                    rel_tol=rel_tol, smooth_ends=False)
        W = W + tv
        err = err + te
    return W, err, J


def _block_chunk(amp, M, ks, panels, phase):
    # panels of [-pi, 0]; u and the folded partner u + pi share one amp() call
    edges = np.linspace(-math.pi, 0.0, panels + 1)
    half = 0.5 * (edges[1] - edges[0])
    u = (0.5 * (edges[:-1] + edges[1:])[:, None] + half * NODES).ravel()
    if phase is None:
        ph = np.exp(-1j * u)
    else:
        ph = phase
    base = 2.0 * math.pi * ks
    s1 = (base[:, None] + u).ravel()
    x = np.concatenate([s1, s1 + math.pi]) / M
    vals = _as_rows(amp(x), x.size)
    n = s1.size
    diff = (vals[:, :n] - vals[:, n:]).reshape(vals.shape[0], ks.size, panels, 15)
    diff = diff * ph.reshape(panels, 15) / M
    val, err, floor = _gk_combine(diff, np.full((ks.size, panels), half))
    # the fold cancels to relative size pi/sigma, so rounding is measured on
    # the raw amplitudes rather than on their difference
    raw = (np.abs(vals[:, :n]) + np.abs(vals[:, n:])).reshape(diff.shape)
    floor = np.maximum(floor, 50.0 * _EPS * (raw @ KRONROD) * half / M)
    return val.sum(axis=2), np.maximum(err, floor).sum(axis=2), floor.sum(axis=2)


def decay_profile(J):
    """k^2 |J_k| and whether it stays within 3x its maximum over the first 10 blocks."""
    J = np.atleast_2d(J)
    if J.shape[1] == 0:
        return np.zeros(0), True
    k = np.arange(1, J.shape[1] + 1, dtype=float)
    scaled = np.abs(J).max(axis=0) * k * k
    ok = bool(np.all(scaled <= 3.0 * scaled[:10].max() + 1e-300))
    return scaled, ok


def oscillatory_log_integral(spec, tol=1e-9, check_decay=True):
    """int_{pi/M}^{epsilon} e^(-itM) t^(-1) (log t)^r psi_Y(t) Psi(t)^m dt."""
    from .charfn import psi_minus_one
    from .smoother import smoother_values

    def amp(t):
        out = np.log(t) ** spec.r / t + 0j
        if spec.smoother is not None:
            out = out * smoother_values(spec.smoother, t)[0]
        if spec.m:
            out = out * (1.0 + psi_minus_one(spec.model, t)) ** spec.m
        return out

    W, err, J = paired_blocks(amp, spec.M, spec.upper, tol=tol)
    scaled, ok = decay_profile(J)
    if check_decay and not ok:
        raise NonConvergenceError("block contributions fail the 1/k^2 decay check")
    partial = 1 if spec.upper * spec.M > (2 * J.shape[1] + 1) * math.pi else 0
    return QuadResult(complex(W[0]), float(err[0]), J.shape[1] + partial, scaled, ok)
