"""Finite-dimensional scattering with a damping parameter ``nu``.

Free eigenstates ``H0 |Phi_l> = E_l |Phi_l>`` are mapped to scattered
states by the damped resolvent

    Psi_l^(+-) = +-i hbar nu (E_l - H +- i hbar nu)**-1 Phi_l,

which is the closed form of the Abel-damped time integral. In finite
dimension these are exact for every ``nu > 0``; the wave operators become
isometries only when the level shifts caused by ``H_I`` are negligible
against ``hbar nu`` (no quasi-bound states at that resolution).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from .core import DEFAULT_TOL, is_hermitian
from .errors import ConvergenceError, DimensionMismatch, DomainError, InvalidStateError, SingularSolveError

DEFAULT_NU_FRACTION = 1e-3
RANGE_WEIGHT_THRESHOLD = 0.5


@dataclass(frozen=True)
class ScatteringModel:
    h0: np.ndarray
    hi: np.ndarray
    nu: float
    hbar: float = 1.0
    energies: np.ndarray = field(init=False, repr=False)
    phi: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        h0 = np.asarray(self.h0, dtype=complex)
        hi = np.asarray(self.hi, dtype=complex)
        if h0.ndim != 2 or h0.shape[0] != h0.shape[1] or hi.shape != h0.shape:
            raise DimensionMismatch("H0 and H_I must be square matrices of the same size")
        for name, m in (("H0", h0), ("H_I", hi)):
            if not is_hermitian(m, DEFAULT_TOL * max(1.0, np.max(np.abs(m), initial=0.0))):
                raise InvalidStateError(f"{name} is not Hermitian")
        if not self.nu > 0:
            raise DomainError("damping nu must be positive")
        if not self.hbar > 0:
            raise DomainError("hbar must be positive")
        h0 = 0.5 * (h0 + h0.conj().T)
        hi = 0.5 * (hi + hi.conj().T)
        e, v = np.linalg.eigh(h0)
        object.__setattr__(self, "h0", h0)
        object.__setattr__(self, "hi", hi)
        object.__setattr__(self, "energies", e)
        object.__setattr__(self, "phi", v)

    @property
    def dim(self) -> int:
        return self.h0.shape[0]

    @property
    def h(self) -> np.ndarray:
        return self.h0 + self.hi

    def with_nu(self, nu: float) -> "ScatteringModel":
        return ScatteringModel(self.h0, self.hi, nu, self.hbar)


def default_nu(h0, hi, hbar: float = 1.0) -> float:
    """``1e-3`` times the spectral spread of ``H0 + H_I`` over ``hbar`` (spread 1 if degenerate)."""
    e = np.linalg.eigvalsh(np.asarray(h0, dtype=complex) + np.asarray(hi, dtype=complex))
    spread = float(e[-1] - e[0]) or 1.0
    return DEFAULT_NU_FRACTION * spread / hbar


def _check_lam(model: ScatteringModel, lam: int) -> int:
    if not -model.dim <= lam < model.dim:
        raise IndexError(f"level {lam} out of range for dimension {model.dim}")
    return lam % model.dim


def scattered_state(model: ScatteringModel, lam: int, sign: int = +1) -> np.ndarray:
    """``Psi_lam`` for incoming (``sign=+1``) or outgoing (``sign=-1``) boundary conditions."""
    lam = _check_lam(model, lam)
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    z = model.energies[lam] + sign * 1j * model.hbar * model.nu
    a = z * np.eye(model.dim) - model.h
    rhs = sign * 1j * model.hbar * model.nu * model.phi[:, lam]
    try:
        lu = linalg.lu_factor(a, check_finite=True)
    except (linalg.LinAlgError, ValueError) as exc:
        raise SingularSolveError(str(exc)) from exc
    if np.min(np.abs(np.diag(lu[0]))) == 0:
        raise SingularSolveError("resolvent is singular")
    return linalg.lu_solve(lu, rhs)


def lippmann_schwinger_iterate(model: ScatteringModel, lam: int, max_iter: int = 200,
                               tol: float = 1e-13, full_output: bool = False):
    """Fixed-point iteration ``Psi = Phi + (E - H0 + i hbar nu)**-1 H_I Psi``.

    Works in the ``H0`` eigenbasis where the free resolvent is diagonal.
    Stops when successive iterates differ by at most ``tol``; three
    consecutive increases of that difference raise `ConvergenceError`.
    With ``full_output`` returns ``(psi, iterations, residuals)``.
    """
    lam = _check_lam(model, lam)
    g0 = 1.0 / (model.energies[lam] - model.energies + 1j * model.hbar * model.nu)
    k = g0[:, None] * (model.phi.conj().T @ model.hi @ model.phi)
    start = np.zeros(model.dim, dtype=complex)
    start[lam] = 1.0
    psi = start.copy()
    residuals = []
    growth = 0
    for it in range(1, max_iter + 1):
        nxt = start + k @ psi
        res = float(np.linalg.norm(nxt - psi))
        if residuals and res > residuals[-1]:
            growth += 1
            if growth >= 3:
                raise ConvergenceError(f"Born series diverges (residual {res:.3e} after {it} iterations)")
        else:
            growth = 0
        residuals.append(res)
        psi = nxt
        if res <= tol:
            out = model.phi @ psi
            return (out, it, residuals) if full_output else out
    raise ConvergenceError(f"no convergence in {max_iter} iterations (residual {residuals[-1]:.3e})")


def _wave_operator(model: ScatteringModel, sign: int) -> np.ndarray:
    # all columns at once through the spectral decomposition of H
    e, w = np.linalg.eigh(model.h)
    inh = sign * 1j * model.hbar * model.nu
    factor = inh / (model.energies[None, :] - e[:, None] + inh)
    psi = w @ (factor * (w.conj().T @ model.phi))
    return psi @ model.phi.conj().T


def wave_operators_and_s_matrix(model: ScatteringModel) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``(Omega+, Omega-, S)`` with ``Omega |Phi_l> = Psi_l`` and ``S = Omega-^dag Omega+``."""
    op = _wave_operator(model, +1)
    om = _wave_operator(model, -1)
    return op, om, om.conj().T @ op


def _defect(m: np.ndarray) -> float:
    return float(np.linalg.norm(m - np.eye(m.shape[0]), 2))


def unitarity_defects(model: ScatteringModel) -> dict:
    """Spectral-norm defects of the isometry and unitarity relations."""
    op, om, s = wave_operators_and_s_matrix(model)
    return {
        "isometry_plus": _defect(op.conj().T @ op),
        "isometry_minus": _defect(om.conj().T @ om),
        "s_dagger_s": _defect(s.conj().T @ s),
        "s_s_dagger": _defect(s @ s.conj().T),
    }


def range_weights(model: ScatteringModel) -> tuple[np.ndarray, np.ndarray]:
    """Eigenpairs of ``H`` with the weight ``||Omega+^dag w_k||**2`` of each eigenvector.

    A weight near 1 means the eigenvector lies in the range of the wave
    operator; a weight near 0 marks a bound state at resolution ``nu``.
    Returns ``(weights, eigenvectors)``.
    """
    e, w = np.linalg.eigh(model.h)
    inh = 1j * model.hbar * model.nu
    factor = inh / (model.energies[None, :] - e[:, None] + inh)
    overlap = w.conj().T @ model.phi
    return np.sum(np.abs(factor * overlap) ** 2, axis=1), w


def bound_state_projector(model: ScatteringModel, threshold: float = RANGE_WEIGHT_THRESHOLD) -> np.ndarray:
    """Estimate of ``R``: projector onto the eigenvectors of ``H`` whose range weight is below ``threshold``."""
    weights, w = range_weights(model)
    b = w[:, weights < threshold]
    return b @ b.conj().T


def is_bound_state_free(model: ScatteringModel, tol: float = 1e-6) -> bool:
    """True when every eigenvector of ``H`` lies in the range of ``Omega+`` within ``tol``."""
    weights, _ = range_weights(model)
    return bool(np.all(weights >= 1.0 - tol))


def completeness_defect(model: ScatteringModel, threshold: float = RANGE_WEIGHT_THRESHOLD) -> float:
    """``|| Omega+ Omega+^dag - (I - R) ||`` with the estimated bound-state projector ``R``."""
    op = _wave_operator(model, +1)
    r = bound_state_projector(model, threshold)
    return _defect(op @ op.conj().T + r)


def _propagator(h: np.ndarray, t: float, hbar: float) -> np.ndarray:
    return linalg.expm((-1j * t / hbar) * h)


def conditional_propagator(model: ScatteringModel, t_prime: float, t0: float) -> np.ndarray:
    """``U0(t') Omega-^dag U(t0) Omega+``; reduces to ``U0(t') S`` at ``t0 = 0``."""
    if t_prime < 0 or t0 < 0:
        raise DomainError("times must be non-negative")
    op, om, _ = wave_operators_and_s_matrix(model)
    return _propagator(model.h0, t_prime, model.hbar) @ om.conj().T @ _propagator(model.h, t0, model.hbar) @ op


def transition_amplitudes(model: ScatteringModel, lam: int, t: float) -> tuple[np.ndarray, float]:
    """``f_mu(t) = <Phi_mu| exp(i (E_mu - H) t / hbar) |Psi_lam>`` and ``N = ||Psi_lam||**2``.

    ``sum_mu |f_mu(t)|**2 = N`` for every ``t``.
    """
    psi = scattered_state(model, lam)
    evolved = _propagator(model.h, t, model.hbar) @ psi
    f = np.exp(1j * model.energies * t / model.hbar) * (model.phi.conj().T @ evolved)
    return f, float(np.vdot(psi, psi).real)


def t_matrix_column(model: ScatteringModel, lam: int) -> np.ndarray:
    """``T_mu,lam = <Phi_mu| H_I |Psi_lam>``."""
    return model.phi.conj().T @ (model.hi @ scattered_state(model, lam))


def normalization_from_t_matrix(model: ScatteringModel, lam: int) -> float:
    """``N = 1 + Im T_lam,lam / (hbar nu)``."""
    lam = _check_lam(model, lam)
    return 1.0 + t_matrix_column(model, lam)[lam].imag / (model.hbar * model.nu)


@dataclass(frozen=True)
class BandFamily:
    """Quasi-continuum family: uniform band of free levels with one level coupled to all others.

    The free spectrum is ``levels`` equally spaced energies on
    ``[-half_width, half_width]``; the central level couples to every
    other level with strength ``coupling * eps**1.5``, so the diagonal
    T-matrix element scales as ``eps**3``.
    """

    levels: int = 801
    half_width: float = 1.0
    coupling: float = 0.005
    hbar: float = 1.0

    def __post_init__(self):
        if self.levels < 3 or self.levels % 2 == 0:
            raise DomainError("use an odd number of at least 3 levels")

    @property
    def center(self) -> int:
        return self.levels // 2

    def model(self, eps: float, nu: float) -> ScatteringModel:
        if eps < 0:
            raise DomainError("eps must be non-negative")
        h0 = np.diag(np.linspace(-self.half_width, self.half_width, self.levels)).astype(complex)
        hi = np.zeros_like(h0)
        g = self.coupling * eps ** 1.5
        hi[self.center, :] = g
        hi[:, self.center] = g
        hi[self.center, self.center] = 0.0
        return ScatteringModel(h0, hi, nu, self.hbar)


def double_limit_probe(family: BandFamily, eps_list, nu_list) -> list[dict]:
    """Table of ``N`` for the central level over every ``(eps, nu)`` pair."""
    rows = []
    for eps in eps_list:
        for nu in nu_list:
            model = family.model(eps, nu)
            _, n = transition_amplitudes(model, family.center, 0.0)
            rows.append({"eps": float(eps), "nu": float(nu), "eps3_over_nu": float(eps) ** 3 / float(nu),
                         "N": n, "deviation": abs(n - 1.0)})
    return rows
