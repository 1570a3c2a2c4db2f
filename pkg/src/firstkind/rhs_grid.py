"""Cell discretization of momentum or position space.

A cell state ``|p, eps>`` is the uniform smear of the singular kets over a
cube of edge ``eps``, normalized to one. Its overlap with a wavefunction is
``eps**(-d/2)`` times the integral of the wavefunction over the cell. The
singular kets themselves are never materialized.

Cells are half-open, ``[eps*(n - 1/2), eps*(n + 1/2))`` on every axis, so
every point belongs to exactly one cell.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy import integrate

from .errors import DimensionMismatch, DomainError, QuadratureError

Wavefunction = Callable[[np.ndarray], np.ndarray]

GL_ORDER = 8
MAX_SPLIT_DEPTH = 6


@dataclass(frozen=True)
class CellGrid:
    """Rectangular block of cubic cells with integer indices ``n_lo..n_hi`` per axis."""

    kind: str
    eps: float
    dims: int = 1
    n_lo: int = -10
    n_hi: int = 10

    def __post_init__(self):
        if self.kind not in ("momentum", "position"):
            raise ValueError(f"kind must be 'momentum' or 'position', got {self.kind!r}")
        if not self.eps > 0:
            raise DomainError("cell size must be positive")
        if self.dims not in (1, 3):
            raise DomainError("only 1D and 3D grids are supported")
        if self.n_hi < self.n_lo:
            raise DomainError("empty index range")

    @classmethod
    def symmetric(cls, kind: str, eps: float, n: int, dims: int = 1) -> "CellGrid":
        return cls(kind, eps, dims, -n, n)

    @classmethod
    def covering(cls, kind: str, eps: float, center: float, halfwidth: float) -> "CellGrid":
        """Smallest 1D grid whose cells cover ``[center - halfwidth, center + halfwidth]``."""
        lo = math.floor((center - halfwidth) / eps + 0.5)
        hi = math.floor((center + halfwidth) / eps + 0.5)
        return cls(kind, eps, 1, lo, hi)

    @property
    def n_per_axis(self) -> int:
        return self.n_hi - self.n_lo + 1

    def __len__(self) -> int:
        return self.n_per_axis ** self.dims

    def indices(self) -> np.ndarray:
        """Integer cell indices, shape ``(len, dims)``, last axis fastest."""
        axis = np.arange(self.n_lo, self.n_hi + 1)
        mesh = np.meshgrid(*([axis] * self.dims), indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)

    def centers(self) -> np.ndarray:
        c = self.eps * self.indices().astype(float)
        return c[:, 0] if self.dims == 1 else c

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        n = self.indices().astype(float)
        return self.eps * (n - 0.5), self.eps * (n + 0.5)

    def locate(self, point) -> int | None:
        """Flat index of the cell containing ``point`` (half-open rule), or None."""
        n = np.floor(np.atleast_1d(np.asarray(point, dtype=float)) / self.eps + 0.5).astype(int)
        if n.size != self.dims or np.any(n < self.n_lo) or np.any(n > self.n_hi):
            return None
        flat = 0
        for k in n:
            flat = flat * self.n_per_axis + int(k - self.n_lo)
        return flat


@dataclass(frozen=True)
class CellAmplitudes:
    grid: CellGrid
    values: np.ndarray

    @property
    def captured_norm(self) -> float:
        return float(np.sum(np.abs(self.values) ** 2))


@lru_cache(maxsize=16)
def _gl_rule(order: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(order)
    return 0.5 * x, 0.5 * w   # mapped to [-1/2, 1/2]


def _cell_integrals(psi: Wavefunction, lower: np.ndarray, upper: np.ndarray,
                    order: int) -> np.ndarray:
    """Tensor-product Gauss-Legendre integral of ``psi`` over each box."""
    x, w = _gl_rule(order)
    ncell, d = lower.shape
    mid = 0.5 * (lower + upper)
    width = upper - lower
    mesh = np.meshgrid(*([np.arange(order)] * d), indexing="ij")
    idx = np.stack([m.ravel() for m in mesh], axis=1)          # (order**d, d)
    pts = mid[:, None, :] + width[:, None, :] * x[idx][None, :, :]
    wts = np.prod(w[idx], axis=1)[None, :] * np.prod(width, axis=1)[:, None]
    arg = pts[..., 0] if d == 1 else pts
    vals = np.asarray(psi(arg), dtype=complex).reshape(ncell, -1)
    return np.sum(vals * wts, axis=1)


def _split_integrals(psi: Wavefunction, lower: np.ndarray, upper: np.ndarray,
                     order: int, parts: int) -> np.ndarray:
    """Same integrals with every box cut into ``parts`` pieces per axis."""
    ncell, d = lower.shape
    mesh = np.meshgrid(*([np.arange(parts)] * d), indexing="ij")
    offs = np.stack([m.ravel() for m in mesh], axis=1)          # (parts**d, d)
    step = (upper - lower) / parts
    lo = (lower[:, None, :] + offs[None, :, :] * step[:, None, :]).reshape(-1, d)
    hi = lo + np.repeat(step, offs.shape[0], axis=0)
    return _cell_integrals(psi, lo, hi, order).reshape(ncell, -1).sum(axis=1)


def _integrate_cells(psi: Wavefunction, lower: np.ndarray, upper: np.ndarray,
                     order: int, rtol: float, atol: float) -> np.ndarray:
    """Cell integrals accepted when one level of panel halving agrees."""
    coarse = _cell_integrals(psi, lower, upper, order)
    parts = 2
    for _ in range(MAX_SPLIT_DEPTH):
        fine = _split_integrals(psi, lower, upper, order, parts)
        err = np.abs(fine - coarse)
        if np.all(err <= atol + rtol * np.abs(fine)):
            return fine
        coarse, parts = fine, parts * 2
    raise QuadratureError(f"cell quadrature did not converge (max error {err.max():.3e})")


def cell_amplitudes(psi: Wavefunction, grid: CellGrid, order: int = GL_ORDER,
                    rtol: float = 1e-12, atol: float = 1e-15) -> CellAmplitudes:
    """Overlaps ``<cell|psi> = eps**(-d/2) * integral of psi over the cell`` for every cell.

    ``psi`` must accept an array of points: shape ``(..., )`` in 1D and
    ``(..., 3)`` in 3D.
    """
    lower, upper = grid.bounds()
    ints = _integrate_cells(psi, lower, upper, order, rtol, atol * grid.eps ** (grid.dims / 2))
    return CellAmplitudes(grid, ints * grid.eps ** (-grid.dims / 2))


def cell_amplitude(psi: Wavefunction, grid: CellGrid, cell, order: int = GL_ORDER,
                   rtol: float = 1e-12, atol: float = 1e-15) -> complex:
    """Overlap of ``psi`` with one cell state; ``cell`` is an integer index tuple (or int in 1D)."""
    n = np.atleast_1d(np.asarray(cell, dtype=int))
    if n.size != grid.dims or np.any(n < grid.n_lo) or np.any(n > grid.n_hi):
        raise IndexError(f"cell {tuple(n)} is outside the grid")
    lower = grid.eps * (n[None, :] - 0.5)
    upper = grid.eps * (n[None, :] + 0.5)
    val = _integrate_cells(psi, lower, upper, order, rtol, atol * grid.eps ** (grid.dims / 2))
    return complex(val[0] * grid.eps ** (-grid.dims / 2))


def gram_matrix(cells) -> np.ndarray:
    """Overlap matrix of normalized box-indicator states.

    ``cells`` is a `CellGrid` or a pair ``(lower, upper)`` of box corners;
    the overlap of two boxes is their intersection volume over the
    geometric mean of their volumes.
    """
    lower, upper = cells.bounds() if isinstance(cells, CellGrid) else cells
    lower = np.asarray(lower, dtype=float).reshape(len(lower), -1)
    upper = np.asarray(upper, dtype=float).reshape(len(upper), -1)
    lo = np.maximum(lower[:, None, :], lower[None, :, :])
    hi = np.minimum(upper[:, None, :], upper[None, :, :])
    inter = np.prod(np.clip(hi - lo, 0.0, None), axis=2)
    vol = np.prod(upper - lower, axis=1)
    return inter / np.sqrt(np.outer(vol, vol))


def gram_deviation(cells) -> float:
    g = gram_matrix(cells)
    return float(np.max(np.abs(g - np.eye(g.shape[0]))))


def completeness_residual(psi: Wavefunction, grid: CellGrid, **kw) -> float:
    """``1 - sum |<cell|psi>|**2`` for a unit-norm ``psi``."""
    return 1.0 - cell_amplitudes(psi, grid, **kw).captured_norm


def discrete_expectation(amps: CellAmplitudes, which: str) -> np.ndarray:
    """Mean of the discrete momentum (``'P'``) or position (``'X'``) operator.

    Weighted by the captured probabilities and renormalized by the captured
    norm; returns a vector of length ``dims``.
    """
    want = {"P": "momentum", "X": "position"}.get(which)
    if want is None:
        raise ValueError("which must be 'P' or 'X'")
    if amps.grid.kind != want:
        raise DimensionMismatch(f"{which} expectation needs a {want} grid, got {amps.grid.kind}")
    prob = np.abs(amps.values) ** 2
    total = prob.sum()
    if total <= 0:
        raise DomainError("state has no weight on the grid")
    centers = amps.grid.centers().reshape(len(amps.grid), amps.grid.dims)
    return (prob @ centers) / total


def gaussian_test_state_norm(eps: float, p) -> tuple[float, float]:
    """Norm and smearing scale of the Gaussian test function centred at ``p``.

    The test function is ``pi**(-d/4) eps**(-d/2) exp(-|p - p'|**2 / (2 eps**2))``.
    Returns ``(norm, scale)`` with ``norm`` its squared L2 norm and
    ``scale`` its integral, both by adaptive quadrature. The scale should
    follow ``2**(d/2) pi**(d/4) eps**(d/2)``.
    """
    if not eps > 0:
        raise DomainError("eps must be positive")
    p = np.atleast_1d(np.asarray(p, dtype=float))
    norm, scale = 1.0, 1.0
    for pk in p:
        f = lambda q, pk=pk: math.pi ** -0.25 * eps ** -0.5 * math.exp(-(pk - q) ** 2 / (2 * eps * eps))
        lo, hi = pk - 40 * eps, pk + 40 * eps
        n2, e2 = integrate.quad(lambda q: f(q) ** 2, lo, hi, points=[pk], epsabs=1e-15, epsrel=1e-13, limit=200)
        n1, e1 = integrate.quad(f, lo, hi, points=[pk], epsabs=1e-15, epsrel=1e-13, limit=200)
        if e2 > 1e-10 or e1 > 1e-10 * max(1.0, abs(n1)):
            raise QuadratureError("test-function quadrature did not converge")
        norm *= n2
        scale *= n1
    return norm, scale
