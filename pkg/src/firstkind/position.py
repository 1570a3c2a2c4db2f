"""Survival effect on a 1D position measurement.

Averaging over the device's engagement delay leaves the momentum
distribution untouched but shifts and skews the position distribution. To
first order in ``tau`` the density becomes
``|psi|**2 + (hbar s tau / m) Im[psi d2(psi*)/dx2]``, which for the
minimum-uncertainty Gaussian is ``(1 + 2 l x / a**2)`` times the ideal
density, with drift ``l = s tau p0 / m``. The linear factor goes negative
left of ``x0 = -a**2 / (2 l)``; `renormalize_positive` clips it there.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import integrate
from scipy.special import erfc

from .errors import DimensionMismatch, DomainError, QuadratureError
from .rhs_grid import CellGrid, cell_amplitudes
from .survival import SurvivalDistribution, q_factor

SQRT_PI = math.sqrt(math.pi)
EPS0_WARN = 0.1
X_EXTENT = 8.0
N_SAMPLES = 4096
FD_STEP = 1e-4


@dataclass(frozen=True)
class GaussianPacket:
    """Minimum-uncertainty packet ``pi**-1/4 a**-1/2 exp(i p0 x / hbar - x**2 / 2a**2)``."""

    a: float = 1.0
    p0: float = 0.0
    hbar: float = 1.0
    m: float = 1.0

    def __post_init__(self):
        for name in ("a", "hbar", "m"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be positive")

    @property
    def b(self) -> float:
        return self.hbar / self.a

    def psi(self, x):
        x = np.asarray(x, dtype=float)
        return (math.pi ** -0.25 / math.sqrt(self.a)
                * np.exp(1j * self.p0 * x / self.hbar - x * x / (2 * self.a ** 2)))

    def psi_xx(self, x):
        x = np.asarray(x, dtype=float)
        k = 1j * self.p0 / self.hbar - x / self.a ** 2
        return self.psi(x) * (k * k - 1.0 / self.a ** 2)

    def momentum_amplitude(self, p):
        """Momentum-space wavefunction; real because the packet is centred at x = 0."""
        p = np.asarray(p, dtype=float)
        return math.pi ** -0.25 / math.sqrt(self.b) * np.exp(-(p - self.p0) ** 2 / (2 * self.b ** 2))

    def drift(self, dist: SurvivalDistribution) -> float:
        """Mean position shift ``l = s tau p0 / m``."""
        return dist.s * dist.tau * self.p0 / self.m

    def eps0(self, dist: SurvivalDistribution) -> float:
        return 2.0 * self.drift(dist) ** 2 / self.a ** 2

    def root(self, dist: SurvivalDistribution) -> float:
        """Zero ``x0 = -a**2 / 2l`` of the first-order density (infinite when ``l = 0``)."""
        l = self.drift(dist)
        return -math.copysign(math.inf, l) if l == 0 else -self.a ** 2 / (2 * l)

    def sigma(self, dist: SurvivalDistribution) -> float:
        l = self.drift(dist)
        return math.inf if l == 0 else self.a ** 2 / (4 * l * l)


@dataclass(frozen=True)
class SampledDistribution:
    """Density sampled on a uniform grid; integrals use composite Simpson."""

    x: np.ndarray
    density: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        d = np.asarray(self.density, dtype=float)
        if x.shape != d.shape or x.ndim != 1 or x.size < 3:
            raise DimensionMismatch("need matching 1D arrays with at least 3 samples")
        steps = np.diff(x)
        if np.max(np.abs(steps - steps[0])) > 1e-9 * abs(steps[0]):
            raise DomainError("sample grid must be uniform")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "density", d)

    @property
    def h(self) -> float:
        return float(self.x[1] - self.x[0])

    def integral(self, values=None) -> float:
        return float(integrate.simpson(self.density if values is None else values, x=self.x))

    def moment(self, n: int) -> float:
        return self.integral(self.density * self.x ** n)

    def mean(self) -> float:
        return self.moment(1) / self.integral()

    def std(self) -> float:
        norm = self.integral()
        mu = self.moment(1) / norm
        return math.sqrt(self.moment(2) / norm - mu * mu)


def packet_position_density_ideal(pk: GaussianPacket, x):
    x = np.asarray(x, dtype=float)
    return np.exp(-x * x / pk.a ** 2) / (SQRT_PI * pk.a)


def packet_momentum_density(pk: GaussianPacket, p):
    """Momentum distribution; the same for ideal and non-ideal measurements."""
    p = np.asarray(p, dtype=float)
    return np.exp(-(p - pk.p0) ** 2 / pk.b ** 2) / (SQRT_PI * pk.b)


def second_derivative(psi: Callable, x, h: float = FD_STEP, rtol: float = 1e-4) -> np.ndarray:
    """Centred second difference at steps ``h`` and ``2h``, Richardson-combined.

    Raises `QuadratureError` when the two step sizes disagree beyond
    ``rtol`` of the larger magnitude, which signals a too-coarse or
    too-fine step for the function's scale.
    """
    x = np.asarray(x, dtype=float)
    f0 = np.asarray(psi(x), dtype=complex)

    def d2(step):
        return (np.asarray(psi(x + step)) - 2 * f0 + np.asarray(psi(x - step))) / step ** 2

    d_h, d_2h = d2(h), d2(2 * h)
    scale = max(np.max(np.abs(d_h), initial=0.0), np.max(np.abs(f0), initial=0.0))
    if np.max(np.abs(d_h - d_2h), initial=0.0) > rtol * max(scale, 1e-300):
        raise QuadratureError("finite-difference second derivative is not converged")
    return (4 * d_h - d_2h) / 3


def survival_position_first_order(psi: Callable, dist: SurvivalDistribution, m: float,
                                  hbar: float, x, d2psi: Callable | None = None,
                                  h: float = FD_STEP):
    """First-order position density of a pure state.

    ``psi`` is the position wavefunction; ``d2psi`` its analytic second
    derivative, replaced by Richardson-checked finite differences when
    omitted. The result can dip below zero where ``|psi|**2`` is tiny.
    """
    x = np.asarray(x, dtype=float)
    f = np.asarray(psi(x), dtype=complex)
    f_xx = np.asarray(d2psi(x), dtype=complex) if d2psi is not None else second_derivative(psi, x, h)
    return np.abs(f) ** 2 + (hbar * dist.s * dist.tau / m) * np.imag(f * np.conj(f_xx))


def survival_position_first_order_mixture(weights: Sequence[float], psis: Sequence[Callable],
                                          dist: SurvivalDistribution, m: float, hbar: float, x,
                                          d2psis: Sequence[Callable | None] | None = None,
                                          h: float = FD_STEP):
    """Mixed-state version: the weighted sum of the pure-state densities."""
    if len(weights) != len(psis):
        raise DimensionMismatch("one weight per wavefunction")
    d2psis = [None] * len(psis) if d2psis is None else d2psis
    return sum(w * survival_position_first_order(f, dist, m, hbar, x, d2, h)
               for w, f, d2 in zip(weights, psis, d2psis))


def survival_position_gaussian(pk: GaussianPacket, dist: SurvivalDistribution, x):
    x = np.asarray(x, dtype=float)
    l = pk.drift(dist)
    return (1.0 + 2.0 * l * x / pk.a ** 2) * packet_position_density_ideal(pk, x)


def dimensionless_W(eps0: float, xi):
    """``a P(a xi)`` for the first-order Gaussian density, ``eps0 = 2 l**2 / a**2``."""
    if eps0 < 0:
        raise DomainError("eps0 must be non-negative")
    xi = np.asarray(xi, dtype=float)
    return (1.0 + math.sqrt(2.0 * eps0) * xi) * np.exp(-xi * xi) / SQRT_PI


def _grid_tail_mass(pk: GaussianPacket, grid: CellGrid) -> float:
    lower, upper = grid.bounds()
    lo, hi = float(lower.min()), float(upper.max())
    return 0.5 * erfc((pk.p0 - lo) / pk.b) + 0.5 * erfc((hi - pk.p0) / pk.b)


def survival_position_exact(pk: GaussianPacket, dist: SurvivalDistribution, grid: CellGrid, x,
                            method: str = "midpoint", tail_tol: float = 1e-10):
    """Position density of the survival-averaged packet without expanding in ``tau``.

    Double sum over momentum cells of
    ``rho(p', p'') q(w' - w'') <x|p'><p''|x>`` with ``w = p**2 / (2 m hbar)``.
    ``method='midpoint'`` samples the momentum wavefunction at cell centres
    (plane-wave kets, spectrally accurate for the Gaussian);
    ``method='cells'`` uses the exact cell amplitudes and cell kets, whose
    position profile carries a ``sinc(eps x / 2 hbar)`` envelope.
    """
    if grid.kind != "momentum" or grid.dims != 1:
        raise DomainError("need a 1D momentum grid")
    if _grid_tail_mass(pk, grid) > tail_tol:
        raise DomainError("momentum grid does not cover the packet")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    p = grid.centers()
    eps = grid.eps
    hb = pk.hbar
    if method == "midpoint":
        coef = pk.momentum_amplitude(p) * eps / math.sqrt(2 * math.pi * hb)
        envelope = np.ones_like(x)
    elif method == "cells":
        coef = cell_amplitudes(pk.momentum_amplitude, grid).values * math.sqrt(eps / (2 * math.pi * hb))
        envelope = np.sinc(eps * x / (2 * math.pi * hb))
    else:
        raise ValueError(f"unknown method {method!r}")
    omega = p * p / (2 * pk.m * hb)
    q = q_factor(dist, np.subtract.outer(omega, omega)) if dist.tau > 0 else np.ones((p.size, p.size))
    f = coef[None, :] * np.exp(1j * np.outer(x, p) / hb) * envelope[:, None]
    vals = np.sum(f * (f.conj() @ q.T), axis=1)
    if np.max(np.abs(vals.imag)) > 1e-10 * max(1.0, np.max(np.abs(vals.real))):
        raise QuadratureError("exact position density has a non-negligible imaginary part")
    return vals.real


def renormalize_positive(sd: SampledDistribution, x0: float | None = None):
    """Clip a density to its positive region and rescale it to unit mass.

    With ``x0`` the kept region is ``x >= x0``; without it, the samples
    where the density is positive. Returns ``(clipped, Q)`` with ``Q`` the
    mass of the kept region before rescaling.
    """
    if x0 is None:
        keep = sd.density > 0
    else:
        keep = sd.x >= x0 - 1e-12 * abs(sd.h)
    kept = np.where(keep, sd.density, 0.0)
    q = sd.integral(kept)
    if not q > 0:
        raise DomainError(f"positive-region mass Q = {q!r} is not positive")
    return SampledDistribution(sd.x, kept / q), q


def sample_grid(pk: GaussianPacket, start: float | None = None, n: int = N_SAMPLES,
                extent: float = X_EXTENT) -> np.ndarray:
    lo = -extent * pk.a if start is None else max(start, -extent * pk.a)
    return np.linspace(lo, extent * pk.a, n)


def momentum_spread(pk: GaussianPacket, n: int = N_SAMPLES, extent: float = X_EXTENT) -> float:
    p = np.linspace(pk.p0 - extent * pk.b, pk.p0 + extent * pk.b, n + 1)
    return SampledDistribution(p, packet_momentum_density(pk, p)).std()


def uncertainty_product(pk: GaussianPacket, dist: SurvivalDistribution,
                        use_renormalized: bool = True, n: int = N_SAMPLES + 1,
                        extent: float = X_EXTENT) -> tuple[float, float, float]:
    """Numerical ``(dx, dp, dx * dp)`` for the first-order Gaussian position density.

    Moments come from Simpson integration of the raw density on
    ``[-extent a, extent a]`` or, with ``use_renormalized``, of the clipped
    density on ``[x0, extent a]`` (so the clip point is a grid node).
    """
    l = pk.drift(dist)
    if l * l >= pk.a ** 2 / 2:
        raise DomainError("drift too large: l**2 must stay below a**2 / 2")
    if pk.eps0(dist) > EPS0_WARN:
        warnings.warn(f"eps0 = {pk.eps0(dist):.3g} is outside the small-drift regime", stacklevel=2)
    if l < 0:
        # mirror image: dx and dp are invariant under x -> -x, p0 -> -p0
        pk = GaussianPacket(pk.a, -pk.p0, pk.hbar, pk.m)
    x0 = pk.root(dist)
    start = x0 if use_renormalized and l != 0 else None
    x = sample_grid(pk, start, n, extent)
    sd = SampledDistribution(x, survival_position_gaussian(pk, dist, x))
    if use_renormalized and l != 0:
        sd, _ = renormalize_positive(sd, x0)
    dx = sd.std()
    dp = momentum_spread(pk, n, extent)
    return dx, dp, dx * dp


def closed_form_product(pk: GaussianPacket, dist: SurvivalDistribution) -> float:
    """``(hbar / 2) sqrt(1 - 2 l**2 / a**2)``."""
    return 0.5 * pk.hbar * math.sqrt(1.0 - pk.eps0(dist))
