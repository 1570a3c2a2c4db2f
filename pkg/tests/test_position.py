import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from firstkind.errors import DomainError, QuadratureError
from firstkind.position import (GaussianPacket, SampledDistribution, closed_form_product,
                                dimensionless_W, momentum_spread, packet_momentum_density,
                                packet_position_density_ideal, renormalize_positive,
                                second_derivative, survival_position_exact,
                                survival_position_first_order, survival_position_first_order_mixture,
                                survival_position_gaussian, uncertainty_product)
from firstkind.rhs_grid import CellGrid
from firstkind.survival import SurvivalDistribution

X = np.linspace(-8, 8, 4096)


def dist_for_eps0(eps0, pk, s=1.0):
    """Survival law giving the requested eps0 for a packet (drift l = s tau p0 / m)."""
    l = pk.a * math.sqrt(eps0 / 2)
    return SurvivalDistribution.gamma(l * pk.m / (s * pk.p0), s)


def test_packet_validation():
    with pytest.raises(DomainError):
        GaussianPacket(a=0.0)


def test_ideal_position_density():
    pk = GaussianPacket(p0=1.0)
    assert packet_position_density_ideal(pk, 0.0) == pytest.approx(1 / math.sqrt(math.pi), rel=1e-15)
    total, _ = integrate.quad(lambda x: packet_position_density_ideal(pk, x), -8, 8, epsabs=1e-14, epsrel=1e-13)
    assert abs(total - 1) < 1e-12


def test_ideal_packet_is_minimum_uncertainty():
    pk = GaussianPacket(a=1.7, p0=0.4, hbar=0.9)
    dist = SurvivalDistribution.exponential(0.0)
    dx, dp, prod = uncertainty_product(pk, dist)
    assert abs(prod - pk.hbar / 2) < 1e-12
    assert abs(dp - pk.hbar / (math.sqrt(2) * pk.a)) < 1e-12


def test_momentum_density():
    pk = GaussianPacket(a=0.8, p0=1.3)
    assert packet_momentum_density(pk, pk.p0) == pytest.approx(1 / (math.sqrt(math.pi) * pk.b), rel=1e-15)
    assert abs(momentum_spread(pk) - pk.hbar / (math.sqrt(2) * pk.a)) < 1e-12


def test_momentum_amplitude_is_fourier_transform():
    pk = GaussianPacket(a=1.3, p0=0.7, hbar=1.1)
    for p in (-0.5, 0.7, 1.9):
        f = lambda x, part: getattr(pk.psi(x) * np.exp(-1j * p * x / pk.hbar), part)
        re, _ = integrate.quad(f, -15, 15, args=("real",), epsabs=1e-13)
        im, _ = integrate.quad(f, -15, 15, args=("imag",), epsabs=1e-13)
        val = (re + 1j * im) / math.sqrt(2 * math.pi * pk.hbar)
        assert abs(val - pk.momentum_amplitude(p)) < 1e-10


def test_real_wavefunction_has_no_survival_term():
    dist = SurvivalDistribution.exponential(0.3)
    psi = lambda x: np.exp(0.4j) * np.exp(-x ** 2) * (1 + x)
    d2 = lambda x: np.exp(0.4j) * np.exp(-x ** 2) * (4 * x ** 3 + 4 * x ** 2 - 6 * x - 2)
    out = survival_position_first_order(psi, dist, 1.0, 1.0, X, d2)
    assert np.max(np.abs(out - np.abs(psi(X)) ** 2)) < 1e-15


def test_psi_xx_matches_finite_difference():
    pk = GaussianPacket(a=1.2, p0=0.9)
    x = np.linspace(-4, 4, 101)
    assert np.max(np.abs(second_derivative(pk.psi, x) - pk.psi_xx(x))) < 1e-7


def test_finite_difference_flags_unresolved_step():
    with pytest.raises(QuadratureError):
        second_derivative(lambda x: np.sin(1e4 * x), np.linspace(0, 1, 5), h=1e-4)


def test_gaussian_reduction_identity():
    pk = GaussianPacket(a=1.0, p0=2.0)
    dist = SurvivalDistribution.gamma(0.03, 2.0)
    exact = survival_position_first_order(pk.psi, dist, pk.m, pk.hbar, X, pk.psi_xx)
    assert np.max(np.abs(exact - survival_position_gaussian(pk, dist, X))) <= 1e-12
    numeric = survival_position_first_order(pk.psi, dist, pk.m, pk.hbar, X)
    assert np.max(np.abs(numeric - survival_position_gaussian(pk, dist, X))) <= 1e-8


def test_mixture_is_linear():
    dist = SurvivalDistribution.exponential(0.05)
    p1, p2 = GaussianPacket(a=1.0, p0=1.0), GaussianPacket(a=0.7, p0=-2.0)
    mix = survival_position_first_order_mixture([0.3, 0.7], [p1.psi, p2.psi], dist, 1.0, 1.0, X,
                                                [p1.psi_xx, p2.psi_xx])
    ref = 0.3 * survival_position_gaussian(p1, dist, X) + 0.7 * survival_position_gaussian(p2, dist, X)
    assert np.max(np.abs(mix - ref)) < 1e-12


def test_gaussian_density_properties():
    pk = GaussianPacket(a=1.0, p0=1.0)
    dist = dist_for_eps0(0.02, pk)
    l = pk.drift(dist)
    assert abs(l - 0.1) < 1e-15
    assert survival_position_gaussian(pk, dist, pk.root(dist)) == 0.0
    sd = SampledDistribution(X, survival_position_gaussian(pk, dist, X))
    assert abs(sd.moment(1) - l) < 1e-12
    assert abs(sd.integral() - 1) < 1e-12
    none = SurvivalDistribution.exponential(0.0)
    assert np.array_equal(survival_position_gaussian(pk, none, X), packet_position_density_ideal(pk, X))


def test_first_order_density_normalized():
    pk = GaussianPacket(a=0.9, p0=1.4)
    dist = SurvivalDistribution.gamma(0.02, 3.0)
    x = np.linspace(-8 * pk.a, 8 * pk.a, 4097)
    dens = survival_position_first_order(pk.psi, dist, pk.m, pk.hbar, x, pk.psi_xx)
    assert abs(SampledDistribution(x, dens).integral() - 1) < 1e-10


def test_exact_density_tau_zero_is_ideal():
    pk = GaussianPacket(a=1.0, p0=1.0)
    grid = CellGrid.covering("momentum", pk.b / 10, pk.p0, 8 * pk.b)
    out = survival_position_exact(pk, SurvivalDistribution.exponential(0.0), grid, X)
    assert np.max(np.abs(out - packet_position_density_ideal(pk, X))) < 1e-12


def test_exact_density_normalized_and_second_order_close():
    pk = GaussianPacket(a=1.0, p0=2.0)
    grid = CellGrid.covering("momentum", pk.b / 10, pk.p0, 8 * pk.b)
    gaps = []
    for tau in (0.01, 0.005, 0.0025):
        dist = SurvivalDistribution.exponential(tau)
        out = survival_position_exact(pk, dist, grid, X)
        assert abs(SampledDistribution(X, out).integral() - 1) < 1e-6
        gaps.append(np.max(np.abs(out - survival_position_gaussian(pk, dist, X))))
    ratios = np.array(gaps[:-1]) / np.array(gaps[1:])
    assert np.all((ratios > 3.5) & (ratios < 4.5))


def test_exact_density_small_eps0_scaling():
    pk = GaussianPacket(a=1.0, p0=1.0)
    grid = CellGrid.covering("momentum", pk.b / 10, pk.p0, 8 * pk.b)
    d1 = dist_for_eps0(2e-4, pk)
    d2 = SurvivalDistribution.gamma(d1.tau / 2, d1.s)
    g1 = np.max(np.abs(survival_position_exact(pk, d1, grid, X) - survival_position_gaussian(pk, d1, X)))
    g2 = np.max(np.abs(survival_position_exact(pk, d2, grid, X) - survival_position_gaussian(pk, d2, X)))
    assert 3.5 < g1 / g2 < 4.5


def test_exact_density_cell_kets_agree_near_centre():
    pk = GaussianPacket(a=1.0, p0=1.0)
    grid = CellGrid.covering("momentum", pk.b / 20, pk.p0, 8 * pk.b)
    dist = SurvivalDistribution.exponential(0.05)
    x = np.linspace(-3, 3, 301)
    a = survival_position_exact(pk, dist, grid, x)
    b = survival_position_exact(pk, dist, grid, x, method="cells")
    assert np.max(np.abs(a - b)) < 1e-3


def test_exact_density_requires_coverage():
    pk = GaussianPacket(a=1.0, p0=1.0)
    with pytest.raises(DomainError):
        survival_position_exact(pk, SurvivalDistribution.exponential(0.1),
                                CellGrid.covering("momentum", 0.1, pk.p0, 2 * pk.b), X)
    with pytest.raises(DomainError):
        survival_position_exact(pk, SurvivalDistribution.exponential(0.1), CellGrid("position", 0.1), X)


def test_renormalize_positive_density_unchanged():
    sd = SampledDistribution(X, packet_position_density_ideal(GaussianPacket(), X))
    out, q = renormalize_positive(sd)
    assert abs(q - 1) < 1e-12
    assert np.allclose(out.density, sd.density / q, rtol=0, atol=0)


def test_renormalize_q_matches_tail_series():
    pk = GaussianPacket(a=1.0, p0=1.0)
    dist = dist_for_eps0(0.02, pk)
    x0 = pk.root(dist)
    f = lambda x: float(survival_position_gaussian(pk, dist, x))
    q, _ = integrate.quad(f, x0, 12, epsabs=1e-16, epsrel=1e-13, limit=200)
    neg, _ = integrate.quad(f, -np.inf, x0, epsabs=0, epsrel=1e-10, limit=200)
    l, a = pk.drift(dist), pk.a
    leading = 2 / math.sqrt(math.pi) * (l / a) ** 3 * math.exp(-a * a / (4 * l * l))
    assert abs(-neg / leading - 1) < 0.1
    assert abs(q - 1 - (-neg)) < 1e-14


def test_renormalize_floor_small_eps0():
    pk = GaussianPacket(p0=1.0)
    for eps0 in (0.005, 0.01):
        dist = dist_for_eps0(eps0, pk)
        x = np.linspace(pk.root(dist), 8, 4097)
        _, q = renormalize_positive(SampledDistribution(x, survival_position_gaussian(pk, dist, x)), pk.root(dist))
        assert abs(q - 1) < 1e-12


def test_renormalize_rejects_nonpositive_mass():
    sd = SampledDistribution(np.linspace(0, 1, 11), -np.ones(11))
    with pytest.raises(DomainError):
        renormalize_positive(sd)


def test_renormalized_density_nonnegative_and_normalized():
    pk = GaussianPacket(p0=1.0)
    dist = dist_for_eps0(0.2, pk)
    sd = SampledDistribution(X, survival_position_gaussian(pk, dist, X))
    assert sd.density.min() < 0
    out, q = renormalize_positive(sd, pk.root(dist))
    assert out.density.min() >= 0 and q > 1
    assert abs(out.integral() - 1) < 1e-6


def test_sampled_distribution_requires_uniform_grid():
    with pytest.raises(DomainError):
        SampledDistribution(np.array([0.0, 1.0, 3.0]), np.ones(3))


def test_uncertainty_product_eps0_002():
    pk = GaussianPacket(p0=1.0)
    dist = dist_for_eps0(0.02, pk)
    dx, dp, prod = uncertainty_product(pk, dist)
    assert abs(prod - 0.5 * math.sqrt(0.98)) < 1e-8
    assert abs(dx - math.sqrt(0.5 - 0.01)) < 1e-8
    raw = uncertainty_product(pk, dist, use_renormalized=False)[2]
    assert abs(raw - prod) < 1e-8


def test_uncertainty_product_mean_matches_leading_correction():
    pk = GaussianPacket(p0=1.0)
    dist = dist_for_eps0(0.05, pk)
    l, a = pk.drift(dist), pk.a
    x0 = pk.root(dist)
    x = np.linspace(x0, 8, 8193)
    out, q = renormalize_positive(SampledDistribution(x, survival_position_gaussian(pk, dist, x)), x0)
    sigma = a * a / (4 * l * l)
    tail1 = a / (4 * math.sqrt(math.pi)) * (a / (2 * l)) ** -2 * math.exp(-sigma)
    # <x>_r = (l - <x>_0) / Q with <x>_0 given by its leading large-sigma term
    assert abs(out.mean() - (l - tail1) / q) < 0.2 * tail1


def test_uncertainty_product_domain_and_warning():
    pk = GaussianPacket(p0=1.0)
    with pytest.raises(DomainError):
        uncertainty_product(pk, SurvivalDistribution.exponential(0.8))
    with pytest.warns(UserWarning):
        uncertainty_product(pk, dist_for_eps0(0.2, pk))


def test_uncertainty_product_mirror_symmetric():
    dist = dist_for_eps0(0.02, GaussianPacket(p0=1.0))
    a = uncertainty_product(GaussianPacket(p0=1.0), dist)
    b = uncertainty_product(GaussianPacket(p0=-1.0), dist)
    assert np.allclose(a, b, rtol=0, atol=1e-15)


@settings(max_examples=30, deadline=None)
@given(eps0=st.floats(1e-4, 0.09), a=st.floats(0.5, 2.0))
def test_sub_heisenberg_product(eps0, a):
    pk = GaussianPacket(a=a, p0=1.0)
    dist = dist_for_eps0(eps0, pk)
    prod = uncertainty_product(pk, dist)[2]
    assert prod < pk.hbar / 2
    if eps0 < 0.04:
        assert abs(prod / closed_form_product(pk, dist) - 1) < 1e-4


def test_dimensionless_W():
    xi = np.linspace(-3, 3, 601)
    assert np.allclose(dimensionless_W(0.0, xi), np.exp(-xi ** 2) / math.sqrt(math.pi), rtol=0, atol=1e-16)
    for e in (0.0, 0.1, 0.2, 0.7):
        assert dimensionless_W(e, 0.0) == pytest.approx(1 / math.sqrt(math.pi), rel=1e-15)
    assert abs(dimensionless_W(0.2, -1 / math.sqrt(0.4))) < 1e-16
    with pytest.raises(DomainError):
        dimensionless_W(-0.1, xi)


def test_dimensionless_W_matches_scaled_density():
    pk = GaussianPacket(a=1.7, p0=0.8)
    dist = dist_for_eps0(0.1, pk)
    xi = np.linspace(-3, 3, 61)
    ref = pk.a * survival_position_gaussian(pk, dist, pk.a * xi)
    assert np.max(np.abs(dimensionless_W(pk.eps0(dist), xi) - ref)) < 1e-14
