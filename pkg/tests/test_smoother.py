import math

import numpy as np
import pytest
from scipy import integrate

from heavytail_ld.model import DomainError
from heavytail_ld.smoother import (SmootherSpec, sample_y, smoother_density, smoother_jet,
                                   smoother_tail_budget, smoother_tail_prob, smoother_values)

SPEC = SmootherSpec()


def _triangle_convolution(eps, k, num=4001):
    """psi_Y on a grid by repeated numerical convolution of triangles."""
    h = eps / k
    dt = h / (num // 2)
    x = np.arange(-(num // 2), num // 2 + 1) * dt
    tri = np.clip(1.0 - np.abs(x) / h, 0.0, None)
    out = tri
    for _ in range(k - 1):
        out = np.convolve(out, tri) * dt
    grid = (np.arange(out.size) - out.size // 2) * dt
    return grid, out / out[out.size // 2]


def test_normalisation_and_support():
    for spec in (SPEC, SmootherSpec(0.3, 2, 2.5), SmootherSpec(0.9, 6, 5.0)):
        v, _, _ = smoother_values(spec, np.array([0.0, spec.epsilon, -spec.epsilon,
                                                  1.01 * spec.epsilon, -3.0]))
        assert v[0] == 1.0
        assert np.all(v[1:] == 0.0)


def test_half_support_value_k2():
    # two triangles of half-width eps/2: B_4(3) / B_4(2) = (1/6) / (2/3)
    spec = SmootherSpec(0.5, 2, 2.5)
    assert smoother_jet(spec, 0.25).value == pytest.approx(0.25, rel=1e-14)


@pytest.mark.parametrize("k", [2, 3, 4])
def test_against_numerical_convolution(k):
    spec = SmootherSpec(0.5, k, 2.5)
    grid, ref = _triangle_convolution(0.5, k)
    v, _, _ = smoother_values(spec, grid)
    assert np.max(np.abs(v - ref)) < 1e-5


def test_real_even_bounded():
    half = np.linspace(0.0, 0.6, 1001)
    t = np.concatenate([-half[:0:-1], half])
    v, d1, d2 = smoother_values(SPEC, t)
    assert np.all(np.abs(v) <= 1.0)
    np.testing.assert_array_equal(v, v[::-1])
    np.testing.assert_array_equal(d1, -d1[::-1])


def test_derivatives_by_finite_differences():
    rng = np.random.default_rng(3)
    h = SPEC.h
    t = rng.uniform(-SPEC.epsilon, SPEC.epsilon, 500)
    t = t[np.abs(t / h - np.round(t / h)) > 1e-3]  # away from breakpoints
    d = 1e-6
    vp, d1p, _ = smoother_values(SPEC, t + d)
    vm, d1m, _ = smoother_values(SPEC, t - d)
    _, d1, d2 = smoother_values(SPEC, t)
    scale1 = np.abs(d1).max()
    scale2 = np.abs(d2).max()
    assert np.max(np.abs((vp - vm) / (2 * d) - d1)) < 1e-7 * scale1
    assert np.max(np.abs((d1p - d1m) / (2 * d) - d2)) < 1e-7 * scale2


def test_density_even_nonnegative_normalised():
    x = np.random.default_rng(4).uniform(-500, 500, 10_000)
    d = smoother_density(SPEC, x)
    assert np.all(d >= 0)
    np.testing.assert_array_equal(d, smoother_density(SPEC, -x))
    zero = 2 * math.pi / SPEC.h
    edges = np.arange(0.0, 200 * zero, zero)
    total = sum(integrate.quad(lambda y: smoother_density(SPEC, y), a, b, epsabs=1e-15)[0]
                for a, b in zip(edges[:-1], edges[1:]))
    total = 2 * (total + smoother_tail_prob(SPEC, edges[-1]) / 2)
    assert total == pytest.approx(1.0, abs=1e-8)


def test_density_tail_power():
    x = np.geomspace(1e2, 1e5, 500)
    scaled = x ** (2 * SPEC.k) * smoother_density(SPEC, x)
    assert scaled.max() < SPEC.tail_constant * SPEC.order


def test_fourier_transform_of_density():
    zero = 2 * math.pi / SPEC.h
    x = np.linspace(0, 60 * zero, 400_001)
    d = smoother_density(SPEC, x)
    for t in np.linspace(-0.55, 0.55, 100):
        val = 2 * np.trapezoid(d * np.cos(t * x), x)
        assert val == pytest.approx(smoother_jet(SPEC, t).value, abs=1e-5)


def test_tail_budget_is_bound_and_monotone():
    zs = np.geomspace(1.0, 1e6, 50)
    b = [smoother_tail_budget(SPEC, z) for z in zs]
    assert all(x >= y for x, y in zip(b, b[1:]))
    for z in (10.0, 100.0, 1000.0, 1e4):
        assert smoother_tail_prob(SPEC, z) <= smoother_tail_budget(SPEC, z)
    with pytest.raises(DomainError):
        smoother_tail_budget(SPEC, 0.0)


def test_tail_prob_against_quadrature():
    zero = 2 * math.pi / SPEC.h
    for z in (10.0, 3 * zero + 1.0):
        edges = np.concatenate([[z], np.arange(math.ceil(z / zero), 400) * zero])
        ref = 2 * sum(integrate.quad(lambda y: smoother_density(SPEC, y), a, b,
                                     epsabs=1e-17)[0] for a, b in zip(edges[:-1], edges[1:]))
        ref += smoother_tail_prob(SPEC, edges[-1])
        assert smoother_tail_prob(SPEC, z) == pytest.approx(ref, rel=1e-7)


def test_budget_against_sampled_y():
    rng = np.random.default_rng(11)
    y = sample_y(SPEC, 1_000_000, rng)
    for z in (10.0, 100.0, 1000.0):
        est = np.mean(np.abs(y) > z)
        assert est <= smoother_tail_budget(SPEC, z)
    # the sampler reproduces the exact tail at a moderate level
    p10 = smoother_tail_prob(SPEC, 10.0)
    se = math.sqrt(p10 * (1 - p10) / y.size)
    assert abs(np.mean(np.abs(y) > 10.0) - p10) < 4 * se


def test_spec_validation():
    for args in ((0.0, 4, 5.0), (1.0, 4, 5.0), (0.5, 1, 2.5), (0.5, 4, 2.0), (0.5, 3, 5.0)):
        with pytest.raises(DomainError):
            SmootherSpec(*args)
