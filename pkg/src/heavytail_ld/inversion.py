"""Smoothed Fourier inversion of P(S_n + Y > N).

With Theta = (Psi - 1)/(it) and F(t, n) = sum_{k<n} (Psi^k - 1), the identity
Psi^n - 1 = n (Psi - 1) + (Psi - 1) F gives, for any threshold M,

    P(S_n + Y > M) = n J(M) + P(Y > M) + I(M)
    J(M) = (1/2pi) int e^(-itM) psi_Y Theta dt      = P(X1 + Y > M) - P(Y > M)
    I(M) = (1/2pi) int e^(-itM) psi_Y Theta F dt

over t in (-epsilon, epsilon).  Neither integrand has the 1/(it) pole; only a
logarithmic singularity at 0 is left.  Integrating I(M) by parts once splits
it as I1 + I2 + I3, the terms carrying psi_Y', Theta' and F' respectively.

Every integrand G obeys G(-t) = conj G(t) (derivatives pick up a sign), so
only t > 0 is integrated.  The inner window (0, pi/M] uses a logarithmic
substitution and the rest is done by period pairing.
"""

from dataclasses import dataclass, asdict
import math

import numpy as np

from . import _backend
from .charfn import psi_minus_one
from .model import DomainError, TailModel, norming, tail_prob
from .quadrature import inner_window_vector, paired_blocks
from .smoother import (SmootherSpec, smoother_tail_budget, smoother_tail_prob,
                       smoother_values)

FAR_MODES = ("exact", "budgeted")


class BudgetViolation(ArithmeticError):
    """The smoothing budget z_N < 0.1 N, tail bound < 0.1 y_N does not hold."""


class DecompositionMismatch(ArithmeticError):
    """I1 + I2 + I3 disagrees with I beyond the quadrature error."""


@dataclass(frozen=True)
class ToleranceBudget:
    z_N: float
    y_N: float
    a: float
    tail_bound: float

    @classmethod
    def for_threshold(cls, N, spec):
        z = N ** (2.0 / spec.a)
        return cls(z_N=z, y_N=N ** -(2.0 - 2.0 / spec.a), a=spec.a,
                   tail_bound=smoother_tail_budget(spec, z))

    def shift_ok(self, N):
        return self.z_N < 0.1 * N

    @property
    def tail_ok(self):
        return self.tail_bound < 0.1 * self.y_N

    def check(self, N):
        if not self.shift_ok(N):
            raise BudgetViolation(f"z_N={self.z_N:.4g} is not below 0.1 N")
        if not self.tail_ok:
            raise BudgetViolation(
                f"smoother tail bound {self.tail_bound:.3g} is not below 0.1 y_N={0.1 * self.y_N:.3g}")


@dataclass(frozen=True)
class InversionConfig:
    n: int
    N: float
    g: float = None
    spec: SmootherSpec = SmootherSpec()
    model: TailModel = TailModel(0.7)
    far_mode: str = "budgeted"
    range_ratio_max: float = 0.2

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise DomainError(f"n must be a positive integer, got {self.n}")
        if self.g is None:
            object.__setattr__(self, "g", float(self.N) ** 2)
        if self.far_mode not in FAR_MODES:
            raise DomainError(f"far_mode must be one of {FAR_MODES}")
        if self.g < self.N ** 2 * (1.0 - 1e-12):
            raise DomainError(f"g={self.g} is below N^2={self.N ** 2}")
        self.model.require_canonical("inversion")
        b_n = norming(self.model, self.n).b_n
        if not self.N > b_n:
            raise DomainError(f"N={self.N} does not exceed b_n={b_n:.4g}")
        if math.pi / self.N >= self.spec.epsilon:
            raise DomainError("pi/N must lie below epsilon")

    @property
    def in_range(self):
        return self.n * math.log(self.N) ** 2 < self.range_ratio_max * self.N

    @property
    def budget(self):
        return ToleranceBudget.for_threshold(self.N, self.spec)


@dataclass(frozen=True)
class EndpointIntegrals:
    """J, I and I1..I3 at one threshold M, each with an error estimate."""
    M: float
    J: float
    I: float
    I1: float
    I2: float
    I3: float
    J_err: float
    I_err: float
    I1_err: float
    I2_err: float
    I3_err: float
    blocks: int

    @property
    def closure_residual(self):
        return abs(self.I1 + self.I2 + self.I3 - self.I)

    @property
    def closure_error(self):
        return self.I_err + self.I1_err + self.I2_err + self.I3_err


@dataclass
class ExperimentPoint:
    n: int
    N: float
    g: float
    P_X1: float
    P_Sn_inv: float
    P_Sn_inv_err: float
    delta: float
    delta_err: float
    z_N: float
    y_N: float
    n_yN: float
    ratio_log: float
    ratio_plain: float
    ratio_budget: float
    I1_ratio: float
    I2_ratio: float
    I3_ratio: float
    I_near: float
    closure_residual: float
    closure_error: float
    in_range: bool
    budget_ok: bool
    far_mode: str
    P_Sn_mc: float = float("nan")
    P_Sn_mc_err: float = float("nan")
    discordant: bool = False
    error: str = ""

    def as_dict(self):
        return asdict(self)


def check_modulus(model, spec, num=1000):
    """|Psi| < 1 on (0, epsilon], which the geometric sums rely on."""
    t = np.linspace(spec.epsilon / num, spec.epsilon, num)
    mod = np.abs(1.0 + psi_minus_one(model, t))
    if not np.all(mod < 1.0):
        raise DomainError(f"|Psi| reaches {mod.max()} on (0, {spec.epsilon}]")
    return float(mod.max())


def _amplitudes(t, c, n, spec):
    """Rows psi Theta, psi Theta F, psi' Theta F, psi Theta' F, psi Theta F' at t > 0."""
    _, _, th, dth, F, dF = _backend.kernels.charfn_nodes(t, c, n)
    psi, dpsi, _ = smoother_values(spec, t)
    pth = psi * th
    return np.stack([pth, pth * F, dpsi * th * F, psi * dth * F, pth * dF])


def endpoint_integrals(cfg, M, tol=1e-300, rel_tol=1e-12):
    """All five integrals at threshold M from one shared set of nodes."""
    c, n, spec = cfg.model.skew, int(cfg.n), cfg.spec

    def amp(t):
        return _amplitudes(t, c, n, spec)

    def inner(t):
        return amp(t) * np.exp(-1j * (t * M))

    iv, ie, _ = inner_window_vector(inner, M, tol=tol, rel_tol=rel_tol)
    ov, oe, J = paired_blocks(amp, M, spec.epsilon, tol=tol, rel_tol=rel_tol)
    W = iv + ov
    err = ie + oe
    # G(-t) = conj G(t) folds to 2 Re W; derivative rows fold to 2i Im W
    J_, I_ = W[0].real / math.pi, W[1].real / math.pi
    parts = W[2:].imag / (math.pi * M)
    return EndpointIntegrals(
        M=M, J=float(J_), I=float(I_), I1=float(parts[0]), I2=float(parts[1]),
        I3=float(parts[2]), J_err=float(err[0] / math.pi), I_err=float(err[1] / math.pi),
        I1_err=float(err[2] / (math.pi * M)), I2_err=float(err[3] / (math.pi * M)),
        I3_err=float(err[4] / (math.pi * M)), blocks=J.shape[1])


def far_charge(cfg):
    """Bound on P(S_n + Y > N + g): P(S_n > x) <= n^2 p / x for x >= n, plus the Y tail."""
    x = cfg.N + cfg.g
    n = cfg.n
    return 2.0 * n * n * cfg.model.p / x + smoother_tail_prob(cfg.spec, 0.5 * x)


def smoothing_budget(cfg):
    """Allowance for reading P(S_n + Y > N) as P(S_n > N).

    For any shift z, |P(S_n + Y > N) - P(S_n > N)| <= P(|S_n - N| <= z) + P(|Y| > z)
    and the window term is 2 z n p / N^2 (1 + o(1)) <= 2 n z / N^2.  At z = z_N this
    is 2 n y_N plus the Y tail; the bound is taken at the best z in [z_N, N/10].
    n^2/N^2 covers the truncation allowance of the inversion formula.
    """
    b = cfg.budget
    n, N = cfg.n, cfg.N
    zs = np.geomspace(b.z_N, max(b.z_N, 0.1 * N), 41)
    bound = min(2.0 * n * z / N**2 + smoother_tail_prob(cfg.spec, z) for z in zs)
    return bound + n * n / N**2


class _Evaluation:
    """Endpoint integrals of one config, computed once and shared."""

    def __init__(self, cfg, rel_tol):
        self.cfg = cfg
        self.rel_tol = rel_tol
        self._cache = {}

    def at(self, which):
        if which not in self._cache:
            M = self.cfg.N if which == "near" else self.cfg.N + self.cfg.g
            self._cache[which] = endpoint_integrals(self.cfg, M, rel_tol=self.rel_tol)
        return self._cache[which]


def _tail_y(spec, M):
    return 0.5 * smoother_tail_prob(spec, M)


def _prob_above(ev, kind, which):
    cfg = ev.cfg
    e = ev.at(which)
    y = _tail_y(cfg.spec, e.M)
    if kind == "X1":
        return e.J + y, e.J_err
    return cfg.n * e.J + y + e.I, cfg.n * e.J_err + e.I_err


def smoothed_interval_prob(cfg, kind="Sn", rel_tol=1e-12, enforce_budget=False, _ev=None):
    """(probability, error) for P(W + Y > N) - P(W + Y > N + g), W = X1 or S_n.

    In budgeted mode the N + g term is not integrated; its size is bounded and
    charged to the error instead.
    """
    if kind not in ("X1", "Sn"):
        raise ValueError("kind must be 'X1' or 'Sn'")
    if enforce_budget:
        cfg.budget.check(cfg.N)
    ev = _ev or _Evaluation(cfg, rel_tol)
    value, err = _prob_above(ev, kind, "near")
    if cfg.far_mode == "exact":
        far, far_err = _prob_above(ev, kind, "far")
        value -= far
        err += far_err
    else:
        err += far_charge(cfg) if kind == "Sn" else 2.0 * cfg.model.p / (cfg.N + cfg.g)
    return value, err


def integral_I(cfg, rel_tol=1e-12, _ev=None):
    """(I, error) with I = I(N) - I(N + g); budgeted mode keeps I(N) only."""
    ev = _ev or _Evaluation(cfg, rel_tol)
    near = ev.at("near")
    if cfg.far_mode == "exact":
        far = ev.at("far")
        return near.I - far.I, near.I_err + far.I_err
    return near.I, near.I_err + far_charge(cfg)


def I_decomposition(cfg, endpoint="near", rel_tol=1e-12, check=True, _ev=None):
    """(I1, I2, I3) at the near (N) or far (N + g) endpoint."""
    if endpoint not in ("near", "far"):
        raise ValueError("endpoint must be 'near' or 'far'")
    ev = _ev or _Evaluation(cfg, rel_tol)
    e = ev.at(endpoint)
    if check and e.closure_residual > 10.0 * e.closure_error:
        raise DecompositionMismatch(
            f"|I1+I2+I3-I| = {e.closure_residual:.3g} exceeds 10x error {e.closure_error:.3g}")
    return e.I1, e.I2, e.I3


def deviation_delta(cfg, rel_tol=1e-12, enforce_budget=False):
    """Delta = smoothed P(S_n > N) - n P(X1 > N), with its error bar and ratios."""
    check_modulus(cfg.model, cfg.spec)
    budget = cfg.budget
    budget_ok = budget.shift_ok(cfg.N) and budget.tail_ok
    if enforce_budget:
        budget.check(cfg.N)
    ev = _Evaluation(cfg, rel_tol)
    prob, quad_err = smoothed_interval_prob(cfg, "Sn", _ev=ev)
    near = ev.at("near")
    I_decomposition(cfg, _ev=ev)
    n, N = cfg.n, cfg.N
    px = tail_prob(cfg.model, "upper", N)
    delta = prob - n * px
    err = quad_err + smoothing_budget(cfg)
    logN = math.log(N)
    scale = n * n / (N * N)
    return ExperimentPoint(
        n=n, N=N, g=cfg.g, P_X1=px, P_Sn_inv=prob, P_Sn_inv_err=err,
        delta=delta, delta_err=err, z_N=budget.z_N, y_N=budget.y_N, n_yN=n * budget.y_N,
        ratio_log=abs(delta) / (scale * logN ** 2), ratio_plain=abs(delta) / scale,
        ratio_budget=abs(delta) * N ** (2.0 - 2.0 / cfg.spec.a) / n,
        I1_ratio=abs(near.I1) / scale, I2_ratio=abs(near.I2) / (scale * logN),
        I3_ratio=abs(near.I3) / (scale * logN ** 2), I_near=near.I,
        closure_residual=near.closure_residual, closure_error=near.closure_error,
        in_range=cfg.in_range, budget_ok=budget_ok, far_mode=cfg.far_mode)
