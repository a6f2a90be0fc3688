import cmath
import math

from hypothesis import given, strategies as st
import numpy as np
import pytest

from heavytail_ld.charfn import (EULER_GAMMA, F_jet, F_values, decomposition_residual,
                                 expansion_coeffs, psi_by_quadrature, psi_exact, psi_minus_one,
                                 psi_values, sin_cos_integrals, theta_jet, theta_values)
from heavytail_ld.model import DomainError, TailModel

import oracles

P7 = TailModel(0.7)


def test_euler_gamma():
    assert EULER_GAMMA == oracles.EULER_GAMMA


def test_sici_frozen_values():
    si, ci = sin_cos_integrals(1.0)
    assert ci == pytest.approx(oracles.CI_1, rel=1e-14)
    si, ci = sin_cos_integrals(math.pi)
    assert si == pytest.approx(oracles.SI_PI, rel=1e-14)
    assert ci == pytest.approx(oracles.CI_PI, rel=1e-13)
    si, _ = sin_cos_integrals(1e6)
    assert abs(si - math.pi / 2) < 2e-6


def test_sici_against_mpmath():
    xs = np.concatenate([np.logspace(-8, 6, 300), [1.999, 2.0, 2.001, 4.0, 20.0]])
    si, ci = sin_cos_integrals(xs)
    for x, s, c in zip(xs, si, ci):
        rs, rc = oracles.sici_mp(x)
        assert s == pytest.approx(rs, rel=1e-12, abs=1e-300)
        # Ci has zeros; relative accuracy is asked away from them
        assert abs(c - rc) <= 1e-12 * max(abs(rc), 1e-3)


def test_sici_domain():
    with pytest.raises(DomainError):
        sin_cos_integrals(0.0)


def test_psi_at_zero_and_modulus():
    jet = psi_exact(P7, 0.0)
    assert jet.value == 1.0 and jet.singular
    t = np.linspace(-10, 10, 1000)
    t = t[t != 0]
    v, _, _ = psi_values(P7, t)
    assert np.all(np.abs(v) <= 1.0)


@pytest.mark.parametrize("p", [0.5, 0.7, 0.9])
def test_psi_against_mpmath(p):
    m = TailModel(p)
    for t in (-3.0, -0.01, 1e-7, 0.01, 0.3, 1.0, 7.5):
        assert psi_exact(m, t).value == pytest.approx(oracles.psi_mp(p, t), abs=1e-14)


def test_psi_conjugate_symmetry():
    t = np.random.default_rng(1).uniform(1e-6, 20, 1000)
    a, da, dda = psi_values(P7, t)
    b, db, ddb = psi_values(P7, -t)
    assert np.max(np.abs(b - np.conj(a))) <= 1e-15
    assert np.max(np.abs(db + np.conj(da))) <= 1e-15
    assert np.max(np.abs(ddb - np.conj(dda))) <= 1e-15


def test_psi_derivatives_by_finite_differences():
    t = np.logspace(-3, 0, 1000)
    d = 1e-6 * t
    v_p, d1_p, _ = psi_values(P7, t + d)
    v_m, d1_m, _ = psi_values(P7, t - d)
    _, d1, d2 = psi_values(P7, t)
    assert np.max(np.abs((v_p - v_m) / (2 * d) - d1) / np.abs(d1)) < 1e-6
    assert np.max(np.abs((d1_p - d1_m) / (2 * d) - d2) / np.abs(d2)) < 1e-6


def test_psi_density_quadrature_at_001():
    assert abs(psi_exact(P7, 0.01).value - psi_by_quadrature(P7, 0.01)) < 1e-8


def test_psi_quadrature_perturbed_family():
    m = TailModel(0.6, x0=2.0, c1_plus=0.3, c1_minus=0.1)
    assert psi_by_quadrature(m, 0.0) == 1.0
    assert psi_by_quadrature(m, -0.4) == pytest.approx(psi_by_quadrature(m, 0.4).conjugate())
    assert abs(psi_by_quadrature(m, 0.4)) < 1.0


def test_expansion_constants():
    sym = expansion_coeffs(TailModel(0.5))
    assert sym.c == 0.0
    co = expansion_coeffs(P7)
    assert co.c == pytest.approx(0.4)
    assert co.C == pytest.approx(-math.pi / 2)
    assert co.C < 0
    assert co.fitted["c"] == pytest.approx(0.4, abs=1e-6)
    assert co.fitted["C"] == pytest.approx(-1.5707963, abs=1e-6)


def test_theta_leading_terms():
    c = P7.skew
    for t in (1e-4, 1e-6, 1e-8):
        assert abs(theta_jet(P7, t).value.real + c * math.log(t)) < 2.0
    assert theta_jet(P7, 1e-6).d1.real * 1e-6 == pytest.approx(-c, abs=1e-3)


def test_theta_matches_definition():
    t = np.array([1e-3, 0.05, 0.4, 2.0, 9.0])
    th, _, _ = theta_values(P7, t)
    w = psi_minus_one(P7, t)
    np.testing.assert_allclose(th, w / (1j * t), rtol=1e-10)
    with pytest.raises(DomainError):
        theta_jet(P7, 0.0)


def test_theta_derivatives_by_finite_differences():
    t, d = 0.1, 1e-6
    jet = theta_jet(P7, t)
    fd1 = (theta_jet(P7, t + d).value - theta_jet(P7, t - d).value) / (2 * d)
    fd2 = (theta_jet(P7, t + d).d1 - theta_jet(P7, t - d).d1) / (2 * d)
    assert abs(fd1 - jet.d1) / abs(jet.d1) < 1e-4
    assert abs(fd2 - jet.d2) / abs(jet.d2) < 1e-4
    # second derivative through its series branch and the closed branch
    for t in (0.5, 1.0, 1.5):
        j = theta_jet(P7, t)
        fd = (theta_jet(P7, t + 1e-5).d1 - theta_jet(P7, t - 1e-5).d1) / 2e-5
        assert abs(fd - j.d2) / abs(j.d2) < 1e-6


def test_F_trivial_cases():
    t = np.linspace(-0.5, 0.5, 11)
    F, dF = F_values(P7, t, 1)
    assert np.all(F == 0) and np.all(dF == 0)
    for n in (2, 5, 40):
        assert F_jet(P7, 0.0, n)[0] == 0


@pytest.mark.parametrize("t", [0.05, -0.05, 1e-9, 3e-8, 0.45])
def test_F_against_direct_sum(t):
    F_ref, dF_ref = oracles.F_mp(0.7, abs(t), 40)
    if t < 0:
        F_ref, dF_ref = F_ref.conjugate(), -dF_ref.conjugate()
    F, dF = F_jet(P7, t, 40)
    assert abs(F - F_ref) <= 1e-12 * abs(F_ref)
    assert abs(dF - dF_ref) <= 1e-12 * abs(dF_ref)


def test_decomposition_residual_examples():
    assert decomposition_residual(1.0, 17) == 0.0
    assert decomposition_residual(0.0, 5) == 0.0
    with pytest.raises(DomainError):
        decomposition_residual(1.5, 3)


@given(st.floats(min_value=0, max_value=1), st.floats(min_value=0, max_value=2 * math.pi),
       st.integers(min_value=1, max_value=200))
def test_decomposition_identity(r, phi, n):
    assert decomposition_residual(cmath.rect(r, phi), n) < 1e-10 * n


def test_modulus_integral_scaling():
    # int_0^eps (log t)^2 |Psi|^n dt against (log n)^2 / n
    eps = 0.5
    ratios = []
    for n in 2 ** np.arange(4, 11):
        t = np.geomspace(1e-12, eps, 40001)
        f = np.log(t) ** 2 * np.abs(1 + psi_minus_one(P7, t)) ** n
        ratios.append(np.trapezoid(f, t) / (math.log(n) ** 2 / n))
    assert max(ratios) / min(ratios) < 10
