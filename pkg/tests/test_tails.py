import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, special

from firstkind.errors import DomainError
from firstkind.position import GaussianPacket
from firstkind.special import incomplete_gamma, incomplete_gamma_asymptotic
from firstkind.survival import SurvivalDistribution
from firstkind.tails import (full_moment, normalization_asymptotic, normalization_exact,
                             normalization_excess, normalization_excess_asymptotic,
                             renormalized_moment, tail_moment_asymptotic, tail_moment_exact,
                             tail_moments)


def density(x, a, l):
    return (1 + 2 * l * x / a ** 2) * np.exp(-x ** 2 / a ** 2) / (math.sqrt(math.pi) * a)


def quad_tail(n, a, l):
    x0 = -a * a / (2 * l)
    val, _ = integrate.quad(lambda x: x ** n * density(x, a, l), -np.inf, x0, epsabs=0, epsrel=1e-12, limit=200)
    return val


def test_incomplete_gamma_unit_order():
    for s in (0.1, 1.0, 5.0, 30.0):
        assert incomplete_gamma(1.0, s) == pytest.approx(math.exp(-s), rel=1e-14)


def test_incomplete_gamma_at_zero():
    for lam in (0.5, 1.5, 3.0):
        assert incomplete_gamma(lam, 0.0) == pytest.approx(math.gamma(lam), rel=1e-15)
        assert incomplete_gamma(lam, 1e-12) == pytest.approx(math.gamma(lam) - 1e-12 ** lam / lam, rel=1e-12)


def test_incomplete_gamma_against_quadrature():
    ref, _ = integrate.quad(lambda t: t ** 1.5 * math.exp(-t), 10, np.inf, epsabs=0, epsrel=1e-13)
    assert abs(incomplete_gamma(2.5, 10.0) / ref - 1) < 1e-11


@settings(max_examples=60, deadline=None)
@given(lam=st.floats(0.25, 6.0), sigma=st.floats(0.0, 80.0))
def test_incomplete_gamma_matches_scipy(lam, sigma):
    ref = special.gammaincc(lam, sigma) * special.gamma(lam)
    assert abs(incomplete_gamma(lam, sigma) - ref) <= 1e-13 * ref + 1e-300


def test_incomplete_gamma_domain():
    with pytest.raises(DomainError):
        incomplete_gamma(0.0, 1.0)
    with pytest.raises(DomainError):
        incomplete_gamma(1.0, -1.0)


def test_incomplete_gamma_asymptotic_converges():
    lam = 1.5
    errs = [abs(incomplete_gamma_asymptotic(lam, s) / incomplete_gamma(lam, s) - 1) for s in (10, 20, 40)]
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] < 1e-4


@pytest.mark.parametrize("n", [0, 1, 2])
@pytest.mark.parametrize("l", [0.5, 0.3, 0.2, 0.1])
def test_tail_moment_against_quadrature(n, l):
    a = 1.3
    ref = quad_tail(n, a, l)
    assert abs(tail_moment_exact(n, a, l) - ref) <= 1e-10 * abs(ref) + 1e-300


def test_tail_signs():
    # the density is negative on the tail and x < 0 there
    a, l = 1.0, 0.2
    assert tail_moment_exact(0, a, l) < 0
    assert tail_moment_exact(1, a, l) > 0
    assert tail_moment_exact(2, a, l) < 0
    for n in (0, 1, 2):
        assert np.sign(tail_moment_asymptotic(n, a, l)) == np.sign(tail_moment_exact(n, a, l))


@pytest.mark.parametrize("n", [0, 1, 2])
def test_tail_asymptotic_ratio_tends_to_one(n):
    a = 1.0
    ratios = []
    for sigma in (9, 16, 25, 36, 64):
        l = a / (2 * math.sqrt(sigma))
        ratios.append(tail_moment_asymptotic(n, a, l) / tail_moment_exact(n, a, l))
    dev = np.abs(np.array(ratios) - 1)
    assert np.all(np.diff(dev) < 0)
    assert dev[-1] < 0.05


def test_full_moments():
    a, l = 1.4, 0.3
    for n in (0, 1, 2):
        ref, _ = integrate.quad(lambda x: x ** n * density(x, a, l), -np.inf, np.inf, epsabs=1e-14)
        assert abs(full_moment(n, a, l) - ref) < 1e-12
    with pytest.raises(DomainError):
        full_moment(3, a, l)


def test_normalization_excess():
    a, l = 1.0, 0.1
    assert normalization_excess(a, l) > 0
    assert abs(normalization_exact(a, l) - 1 - normalization_excess(a, l)) < 1e-16
    ratio = normalization_excess_asymptotic(a, l) / normalization_excess(a, l)
    assert abs(ratio - 1) < 0.1
    assert normalization_asymptotic(a, l) > 1


def test_renormalized_moments_against_quadrature():
    a, l = 1.0, 0.25
    x0 = -a * a / (2 * l)
    q, _ = integrate.quad(lambda x: density(x, a, l), x0, np.inf, epsabs=0, epsrel=1e-13)
    assert abs(normalization_exact(a, l) - q) < 1e-13
    for n in (1, 2):
        m, _ = integrate.quad(lambda x: x ** n * density(x, a, l), x0, np.inf, epsabs=0, epsrel=1e-13)
        assert abs(renormalized_moment(n, a, l) - m / q) < 1e-12


def test_tail_requires_positive_drift():
    with pytest.raises(DomainError):
        tail_moment_exact(0, 1.0, 0.0)
    with pytest.raises(DomainError):
        tail_moment_exact(0, 0.0, 0.1)


def test_tail_moments_for_packet():
    pk = GaussianPacket(a=1.0, p0=1.0)
    exact, asym = tail_moments(pk, SurvivalDistribution.exponential(0.1), 2)
    assert exact == tail_moment_exact(2, 1.0, 0.1)
    assert asym == tail_moment_asymptotic(2, 1.0, 0.1)
    with pytest.raises(DomainError):
        tail_moments(pk, SurvivalDistribution.exponential(0.6), 0)
    with pytest.raises(DomainError):
        tail_moments(GaussianPacket(p0=0.0), SurvivalDistribution.exponential(0.1), 0)
    with pytest.raises(DomainError):
        tail_moments(pk, SurvivalDistribution.exponential(0.1), 3)
