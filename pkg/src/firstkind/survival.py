"""Non-ideal measurements: survival-time averaging of the measured state.

The device engages at a random delay ``t`` after the nominal start, with
density ``P(t)`` from the Gamma family (exponential when ``s = 1``). The
measured state is the ``P``-weighted time average of the freely evolving
density matrix. In the Hamiltonian eigenbasis this multiplies ``rho_nm`` by
the characteristic function ``q(w) = (1 + i w tau)**(-s)``, ``w = w_n - w_m``.

Three routes are provided: closed form, midpoint time quadrature (built
on matrix exponentials, independent of the eigen-decomposition) and the
first-order commutator expansion.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import linalg
from scipy.special import gammaln

from .core import DEFAULT_TOL, SpectralObservable, _check_hamiltonian, measurement_probabilities
from .errors import ConvergenceError, DimensionMismatch, DomainError

CUTOFF_FACTOR = 40.0
FIRST_ORDER_WARN = 0.1
_CHUNK = 2048


@dataclass(frozen=True)
class SurvivalDistribution:
    """Gamma waiting-time law with mean scale ``tau`` and shape ``s``.

    ``tau0`` is the characteristic duration of the measuring process; it
    only enters the quadrature cutoff and the small-parameter diagnostic
    ``tau / tau0``.
    """

    kind: str = "gamma"
    tau: float = 1.0
    s: float = 1.0
    tau0: float = math.inf

    def __post_init__(self):
        if self.kind not in ("exponential", "gamma"):
            raise ValueError(f"unknown survival distribution {self.kind!r}")
        if self.kind == "exponential" and self.s != 1.0:
            raise DomainError("the exponential law has shape s = 1")
        if not self.tau >= 0:
            raise DomainError("tau must be non-negative")
        if not self.s >= 1:
            raise DomainError("shape s must be >= 1")
        if not self.tau0 > 0:
            raise DomainError("tau0 must be positive")

    @classmethod
    def exponential(cls, tau: float, tau0: float = math.inf) -> "SurvivalDistribution":
        return cls("exponential", tau, 1.0, tau0)

    @classmethod
    def gamma(cls, tau: float, s: float, tau0: float = math.inf) -> "SurvivalDistribution":
        return cls("gamma", tau, s, tau0)

    @property
    def rate(self) -> float:
        return math.inf if self.tau == 0 else 1.0 / self.tau

    @property
    def eps_hat(self) -> float:
        return self.tau / self.tau0

    @property
    def mean(self) -> float:
        return self.s * self.tau

    def cutoff(self) -> float:
        return max(self.tau0 if math.isfinite(self.tau0) else 0.0, CUTOFF_FACTOR * self.s * self.tau)


def survival_density(dist: SurvivalDistribution, t):
    """``gamma**s t**(s-1) exp(-gamma t) / Gamma(s)``; vectorized over ``t``."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise DomainError("survival density is defined for t >= 0")
    if dist.tau == 0:
        raise DomainError("tau = 0 is the ideal (delta) limit and has no density")
    g = dist.rate
    with np.errstate(divide="ignore"):
        logt = np.where(t > 0, np.log(np.where(t > 0, t, 1.0)), -np.inf)
    if dist.s == 1.0:
        out = g * np.exp(-g * t)
    else:
        out = g * np.exp((dist.s - 1.0) * (math.log(g) + logt) - g * t - gammaln(dist.s))
    return out if out.ndim else float(out)


def q_factor(dist: SurvivalDistribution, omega):
    """Characteristic function ``(1 + i omega tau)**(-s)`` (principal branch).

    ``1 + i omega tau`` has real part 1, so the principal branch is smooth
    and ``q(0) = 1``.
    """
    z = 1.0 + 1j * np.asarray(omega, dtype=float) * dist.tau
    out = np.power(z, -dist.s)
    return out if out.ndim else complex(out)


def _eigen(h_q, hbar, tol):
    h = _check_hamiltonian(h_q, tol)
    energies, vecs = np.linalg.eigh(h)
    return energies / hbar, vecs


def _prep(rho, h_q):
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != np.shape(h_q):
        raise DimensionMismatch(f"rho {rho.shape} and H {np.shape(h_q)} differ in shape")
    return rho


def reduced_density_closed(rho, h_q, dist: SurvivalDistribution, hbar: float = 1.0,
                           tol: float = DEFAULT_TOL) -> np.ndarray:
    """Survival-averaged state via ``rho_nm -> rho_nm q(w_n - w_m)`` in the energy basis."""
    rho = _prep(rho, h_q)
    omega, vecs = _eigen(h_q, hbar, tol)
    rho_e = vecs.conj().T @ rho @ vecs
    q = q_factor(dist, np.subtract.outer(omega, omega))
    return vecs @ (rho_e * q) @ vecs.conj().T


def _midpoint_sum(rho, h, dist, hbar, n, cutoff):
    delta = cutoff / n
    t = (np.arange(1, n + 1) - 0.5) * delta
    w = survival_density(dist, t) * delta
    w /= w.sum()  # discrete weights sum to one so stationary states are reproduced exactly
    out = np.zeros_like(rho)
    for start in range(0, n, _CHUNK):
        tt = t[start:start + _CHUNK]
        u = linalg.expm((-1j / hbar) * tt[:, None, None] * h[None, :, :])
        out += np.tensordot(w[start:start + _CHUNK], u @ rho @ np.swapaxes(u.conj(), 1, 2), axes=1)
    return out


def reduced_density_quadrature(rho, h_q, dist: SurvivalDistribution, hbar: float = 1.0,
                               n: int = 10_000, richardson: bool = True,
                               refine_tol: float = 1e-4, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Time-domain survival average ``sum_i P(t_i) Delta U(t_i) rho U(t_i)^dag``.

    Nodes are the midpoints ``t_i = (i - 1/2) Delta`` on ``[0, T]`` with
    ``T = max(tau0, 40 s tau)`` and ``Delta = T / n``; the weights
    ``P(t_i) Delta`` are rescaled to sum to one. Each propagator is an
    independent matrix exponential. With ``richardson`` the ``n`` and
    ``n/2`` sums are combined as ``(4 S_n - S_{n/2}) / 3`` which cancels the
    ``Delta**2`` midpoint error; the two sums differing by more than
    ``refine_tol`` means ``n`` is too small and raises `ConvergenceError`.
    """
    if n < 100:
        raise DomainError("use at least 100 quadrature nodes")
    rho = _prep(rho, h_q)
    h = _check_hamiltonian(h_q, tol)
    if dist.tau == 0:
        return rho.copy()
    cutoff = dist.cutoff()
    fine = _midpoint_sum(rho, h, dist, hbar, n, cutoff)
    coarse = _midpoint_sum(rho, h, dist, hbar, n // 2, cutoff)
    gap = float(np.max(np.abs(fine - coarse)))
    if gap > refine_tol:
        raise ConvergenceError(f"midpoint sums at n={n} and n={n // 2} differ by {gap:.3e}")
    if not richardson:
        return fine
    return (4.0 * fine - coarse) / 3.0


def reduced_density_first_order(rho, h_q, dist: SurvivalDistribution, hbar: float = 1.0,
                                tol: float = DEFAULT_TOL) -> np.ndarray:
    """First-order form ``rho - (i s tau / hbar) [H, rho]``; traceless correction."""
    rho = _prep(rho, h_q)
    h = _check_hamiltonian(h_q, tol)
    if dist.eps_hat > FIRST_ORDER_WARN:
        warnings.warn(f"tau/tau0 = {dist.eps_hat:.3g} is not small; first-order form is unreliable",
                      stacklevel=2)
    return rho - (1j * dist.s * dist.tau / hbar) * (h @ rho - rho @ h)


def nonideal_probability(rho, h_q, dist: SurvivalDistribution, obs: SpectralObservable,
                         hbar: float = 1.0, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Outcome probabilities measured on the survival-averaged state."""
    rho_r = reduced_density_closed(rho, h_q, dist, hbar, tol)
    return measurement_probabilities(0.5 * (rho_r + rho_r.conj().T), obs, tol)
