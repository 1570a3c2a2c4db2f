import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from firstkind.errors import DimensionMismatch, DomainError
from firstkind.position import GaussianPacket, packet_momentum_density
from firstkind.rhs_grid import (CellGrid, cell_amplitude, cell_amplitudes, completeness_residual,
                                discrete_expectation, gaussian_test_state_norm, gram_deviation,
                                gram_matrix)

PK = GaussianPacket(a=1.0, p0=1.0)


def test_grid_validation():
    with pytest.raises(ValueError):
        CellGrid("energy", 0.1)
    with pytest.raises(DomainError):
        CellGrid("momentum", 0.0)
    with pytest.raises(DomainError):
        CellGrid("momentum", 0.1, dims=2)


def test_half_open_cells():
    g = CellGrid.symmetric("momentum", 0.5, 3)
    assert g.locate(0.25) == g.locate(0.5)       # 0.25 is the lower edge of cell n = 1
    assert g.locate(0.2499999) == g.locate(0.0)
    assert g.locate(10.0) is None


def test_covering_grid_contains_interval():
    g = CellGrid.covering("momentum", 0.1, 1.0, 6.0)
    lo, hi = g.bounds()
    assert lo.min() <= -5.0 and hi.max() >= 7.0


def test_constant_integrand():
    g = CellGrid.symmetric("momentum", 0.3, 2)
    assert abs(cell_amplitude(lambda p: np.full_like(p, 2.0), g, 1) - 2.0 * math.sqrt(0.3)) < 1e-14
    g3 = CellGrid.symmetric("position", 0.3, 1, dims=3)
    val = cell_amplitude(lambda x: np.full(x.shape[:-1], 2.0), g3, (0, 1, -1))
    assert abs(val - 2.0 * 0.3 ** 1.5) < 1e-14


def test_support_outside_cell():
    g = CellGrid.symmetric("momentum", 0.1, 5)
    assert cell_amplitude(lambda p: np.where(np.abs(p) > 0.2, 1.0, 0.0), g, 0) == 0


def test_gaussian_amplitude_matches_adaptive_quadrature():
    g = CellGrid.covering("momentum", PK.b / 10, PK.p0, 6 * PK.b)
    amps = cell_amplitudes(PK.momentum_amplitude, g)
    lo, hi = g.bounds()
    for k in (0, len(g) // 3, len(g) // 2, len(g) - 1):
        ref, _ = integrate.quad(PK.momentum_amplitude, lo[k, 0], hi[k, 0], epsabs=1e-15, epsrel=1e-14)
        assert abs(amps.values[k] - ref / math.sqrt(g.eps)) < 1e-10


def test_cell_index_out_of_range():
    with pytest.raises(IndexError):
        cell_amplitude(PK.momentum_amplitude, CellGrid.symmetric("momentum", 0.1, 2), 3)


def test_gram_identity_for_grids():
    assert gram_deviation(CellGrid.symmetric("momentum", 0.1, 20)) == 0.0
    assert gram_deviation(CellGrid.symmetric("position", 0.7, 2, dims=3)) == 0.0
    assert len(CellGrid.symmetric("position", 0.7, 2, dims=3)) == 125


def test_gram_detects_overlap():
    lower = np.array([[0.0], [0.5]])
    upper = np.array([[1.0], [1.5]])
    assert abs(gram_matrix((lower, upper))[0, 1] - 0.5) < 1e-15
    assert gram_deviation((lower, upper)) > 0


def test_completeness_of_indicator():
    g = CellGrid.symmetric("momentum", 0.2, 3)
    psi = lambda p: np.where((p >= 0.1) & (p < 0.3), 1 / math.sqrt(0.2), 0.0)
    assert abs(completeness_residual(psi, g)) < 1e-12


def test_completeness_monotone_and_small():
    res = []
    for k in range(1, 6):
        eps = PK.b / 2 ** k
        res.append(completeness_residual(PK.momentum_amplitude, CellGrid.covering("momentum", eps, PK.p0, 6 * PK.b)))
    assert all(r1 < r0 for r0, r1 in zip(res, res[1:]))
    at_tenth = completeness_residual(PK.momentum_amplitude, CellGrid.covering("momentum", PK.b / 10, PK.p0, 6 * PK.b))
    assert 0 < at_tenth < 1e-3


def test_discrete_expectation_symmetric_packet():
    pk = GaussianPacket(a=1.0, p0=0.0)
    g = CellGrid.symmetric("momentum", 0.05, 160)
    assert abs(discrete_expectation(cell_amplitudes(pk.momentum_amplitude, g), "P")[0]) < 1e-12


def test_discrete_expectation_converges():
    for eps in (0.2, 0.1, 0.05):
        g = CellGrid.covering("momentum", eps, PK.p0, 8 * PK.b)
        assert abs(discrete_expectation(cell_amplitudes(PK.momentum_amplitude, g), "P")[0] - PK.p0) < eps


def test_discrete_expectation_single_cell():
    g = CellGrid.symmetric("position", 0.2, 3)
    psi = lambda x: np.where((x >= 0.1) & (x < 0.3), 1 / math.sqrt(0.2), 0.0)
    assert abs(discrete_expectation(cell_amplitudes(psi, g), "X")[0] - 0.2) < 1e-15


def test_discrete_expectation_kind_checked():
    g = CellGrid.symmetric("momentum", 0.2, 3)
    with pytest.raises(DimensionMismatch):
        discrete_expectation(cell_amplitudes(PK.momentum_amplitude, g), "X")


def test_momentum_density_from_cells():
    for eps in (0.1, 0.05):
        g = CellGrid.covering("momentum", eps * PK.b, PK.p0, 3 * PK.b)
        amps = cell_amplitudes(PK.momentum_amplitude, g)
        dens = packet_momentum_density(PK, g.centers())
        rel = np.abs(np.abs(amps.values) ** 2 / g.eps - dens) / dens
        assert rel.max() < 2 * eps


def test_gaussian_test_state():
    scales = []
    for eps in (0.4, 0.2, 0.1, 0.05):
        n, s = gaussian_test_state_norm(eps, np.zeros(3))
        assert abs(n - 1) < 1e-10
        assert abs(s / (2 ** 1.5 * math.pi ** 0.75 * eps ** 1.5) - 1) < 1e-10
        scales.append(s)
    ratios = np.array(scales[1:]) / np.array(scales[:-1])
    assert np.allclose(ratios, 2 ** -1.5, rtol=1e-2)
    eps = 0.3
    peak = (math.pi ** -0.25 * eps ** -0.5) ** 3
    assert abs(peak - math.pi ** -0.75 * eps ** -1.5) < 1e-12


@settings(max_examples=25, deadline=None)
@given(a=st.floats(0.3, 3.0), p0=st.floats(-2.0, 2.0), k=st.integers(2, 20))
def test_bessel_inequality(a, p0, k):
    pk = GaussianPacket(a=a, p0=p0)
    g = CellGrid.covering("momentum", pk.b / k, p0, 4 * pk.b)
    assert cell_amplitudes(pk.momentum_amplitude, g).captured_norm <= 1 + 1e-9
