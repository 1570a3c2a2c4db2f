"""Finite-dimensional first-kind measurement algebra.

Observables are stored in spectral form: distinct eigenvalues with an
orthonormal block of eigenvectors per eigenvalue. Density matrices,
Hamiltonians and propagators are plain complex ``numpy`` arrays.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DimensionMismatch, InvalidStateError, ZeroProbabilityError

DEFAULT_TOL = 1e-10


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex, copy=True)
    a.setflags(write=False)
    return a


def is_hermitian(m: np.ndarray, tol: float = DEFAULT_TOL) -> bool:
    m = np.asarray(m)
    return m.ndim == 2 and m.shape[0] == m.shape[1] and np.max(np.abs(m - m.conj().T), initial=0.0) <= tol


def is_unitary(u: np.ndarray, tol: float = DEFAULT_TOL) -> bool:
    u = np.asarray(u)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        return False
    eye = np.eye(u.shape[0])
    return (np.max(np.abs(u.conj().T @ u - eye), initial=0.0) <= tol
            and np.max(np.abs(u @ u.conj().T - eye), initial=0.0) <= tol)


def check_density(rho: np.ndarray, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Validate a density matrix and return it as a complex array.

    Raises `InvalidStateError` if ``rho`` is not square, not Hermitian,
    not unit trace or has an eigenvalue below ``-tol``.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise InvalidStateError(f"density matrix must be square, got shape {rho.shape}")
    if not is_hermitian(rho, tol):
        raise InvalidStateError("density matrix is not Hermitian within tolerance")
    tr = np.trace(rho).real
    if abs(tr - 1.0) > tol:
        raise InvalidStateError(f"density matrix trace is {tr!r}, expected 1")
    lo = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))[0]
    if lo < -tol:
        raise InvalidStateError(f"density matrix has negative eigenvalue {lo!r}")
    return rho


def _check_hamiltonian(h: np.ndarray, tol: float) -> np.ndarray:
    h = np.asarray(h, dtype=complex)
    if not is_hermitian(h, tol):
        raise InvalidStateError("Hamiltonian is not Hermitian within tolerance")
    return 0.5 * (h + h.conj().T)


def modified_gram_schmidt(vectors: np.ndarray, tol: float = 1e-8) -> np.ndarray:
    """Orthonormalize the columns of ``vectors`` in order.

    A column whose residual norm drops below ``tol`` is linearly dependent
    on its predecessors and raises `InvalidStateError`.
    """
    q = np.array(vectors, dtype=complex, copy=True)
    for j in range(q.shape[1]):
        for i in range(j):
            q[:, j] -= np.vdot(q[:, i], q[:, j]) * q[:, i]
        nrm = np.linalg.norm(q[:, j])
        if nrm < tol:
            raise InvalidStateError(f"eigenvector {j} is linearly dependent on earlier ones")
        q[:, j] /= nrm
    return q


@dataclass(frozen=True)
class SpectralObservable:
    """Observable as distinct eigenvalues plus orthonormal eigenvector blocks.

    ``blocks[alpha]`` is a ``(dim, g_alpha)`` array whose columns span the
    eigenspace of ``eigenvalues[alpha]``. All columns are re-orthonormalized
    jointly (modified Gram-Schmidt, block order) at construction, and the
    degeneracies must add up to the Hilbert-space dimension.
    """

    eigenvalues: np.ndarray
    blocks: tuple

    def __post_init__(self):
        lam = np.asarray(self.eigenvalues, dtype=float).ravel()
        blocks = [np.atleast_2d(np.asarray(b, dtype=complex)) for b in self.blocks]
        if len(blocks) != lam.size:
            raise DimensionMismatch("one eigenvector block per eigenvalue is required")
        if lam.size == 0:
            raise DimensionMismatch("observable needs at least one eigenvalue")
        if np.unique(lam).size != lam.size:
            raise InvalidStateError("eigenvalues must be pairwise distinct")
        dim = blocks[0].shape[0]
        if any(b.shape[0] != dim for b in blocks):
            raise DimensionMismatch("all eigenvectors must have the same length")
        sizes = [b.shape[1] for b in blocks]
        if sum(sizes) != dim:
            raise DimensionMismatch(f"degeneracies sum to {sum(sizes)}, dimension is {dim}")
        q = modified_gram_schmidt(np.hstack(blocks))
        cuts = np.cumsum(sizes)[:-1]
        lam_frozen = lam.copy()
        lam_frozen.setflags(write=False)
        object.__setattr__(self, "eigenvalues", lam_frozen)
        object.__setattr__(self, "blocks", tuple(_frozen(b) for b in np.hsplit(q, cuts)))

    @classmethod
    def from_matrix(cls, a: np.ndarray, tol: float = 1e-8) -> "SpectralObservable":
        """Group the eigenvalues of a Hermitian matrix into degenerate blocks."""
        a = _check_hamiltonian(a, tol)
        w, v = np.linalg.eigh(a)
        groups = [[0]]
        for k in range(1, w.size):
            if w[k] - w[groups[-1][0]] <= tol:
                groups[-1].append(k)
            else:
                groups.append([k])
        lam = [float(np.mean(w[g])) for g in groups]
        return cls(np.array(lam), tuple(v[:, g] for g in groups))

    @property
    def dim(self) -> int:
        return self.blocks[0].shape[0]

    @property
    def degeneracies(self) -> tuple[int, ...]:
        return tuple(b.shape[1] for b in self.blocks)

    def __len__(self) -> int:
        return len(self.blocks)

    def matrix(self) -> np.ndarray:
        return sum(lam * build_projector(self, k) for k, lam in enumerate(self.eigenvalues))


@dataclass(frozen=True)
class DegenerateRotation:
    """Per-block unitaries relating the two eigenbases of each eigenspace.

    The rotated vectors are ``u~_s = sum_n mats[alpha][s, n] u_n``.
    """

    mats: tuple
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        mats = tuple(_frozen(np.atleast_2d(m)) for m in self.mats)
        for k, m in enumerate(mats):
            if not is_unitary(m, self.tol):
                raise InvalidStateError(f"rotation block {k} is not unitary")
        object.__setattr__(self, "mats", mats)

    @classmethod
    def identity(cls, obs: SpectralObservable) -> "DegenerateRotation":
        return cls(tuple(np.eye(g) for g in obs.degeneracies))

    def rotated_block(self, obs: SpectralObservable, alpha: int) -> np.ndarray:
        _check_rotation(obs, self)
        return obs.blocks[alpha] @ self.mats[alpha].T


def _check_index(obs: SpectralObservable, alpha: int) -> int:
    if not isinstance(alpha, (int, np.integer)) or not 0 <= alpha < len(obs):
        raise IndexError(f"block index {alpha} out of range for {len(obs)} eigenvalues")
    return int(alpha)


def _check_rotation(obs: SpectralObservable, rot: DegenerateRotation) -> None:
    if tuple(m.shape[0] for m in rot.mats) != obs.degeneracies:
        raise DimensionMismatch("rotation block sizes do not match the degeneracies")


def _check_dims(obs: SpectralObservable, *mats: np.ndarray) -> None:
    for m in mats:
        if m is not None and np.shape(m) != (obs.dim, obs.dim):
            raise DimensionMismatch(f"expected {obs.dim}x{obs.dim} matrix, got {np.shape(m)}")


def build_projector(obs: SpectralObservable, alpha: int) -> np.ndarray:
    """Orthogonal projector onto the eigenspace of ``obs.eigenvalues[alpha]``."""
    u = obs.blocks[_check_index(obs, alpha)]
    return u @ u.conj().T


def measurement_probabilities(rho: np.ndarray, obs: SpectralObservable,
                              tol: float = DEFAULT_TOL) -> np.ndarray:
    """Outcome probabilities ``Tr(rho P_alpha)`` for every eigenvalue.

    Values in ``(-tol, 0)`` are rounding noise and clamp to zero; anything
    more negative means ``rho`` is not a state and raises.
    """
    _check_dims(obs, rho)
    rho = check_density(rho, tol)
    probs = np.array([np.einsum("is,ij,js->", u.conj(), rho, u).real for u in obs.blocks])
    if np.any(probs < -tol):
        raise InvalidStateError(f"negative outcome probability {probs.min()!r}")
    return np.clip(probs, 0.0, None)


def detection_operator(obs: SpectralObservable, rot: DegenerateRotation, alpha: int) -> np.ndarray:
    """Operator ``M_alpha = sum_s |u~_s><u_s|`` carrying the eigenspace into its rotated basis."""
    alpha = _check_index(obs, alpha)
    _check_rotation(obs, rot)
    return rot.rotated_block(obs, alpha) @ obs.blocks[alpha].conj().T


def post_measurement_state(rho: np.ndarray, obs: SpectralObservable, rot: DegenerateRotation,
                           alpha: int, u_q: np.ndarray | None = None,
                           tol: float = DEFAULT_TOL) -> tuple[float, np.ndarray]:
    """Probability of outcome ``alpha`` and the conditional state after it.

    Returns ``(P_alpha, rho_alpha)`` where
    ``rho_alpha = U M rho M^dag U^dag / P_alpha``; ``u_q`` defaults to the
    identity (state read off immediately after the measurement).
    """
    _check_dims(obs, rho, u_q)
    rho = check_density(rho, tol)
    m = detection_operator(obs, rot, alpha)
    if u_q is not None:
        m = np.asarray(u_q, dtype=complex) @ m
    sigma = m @ rho @ m.conj().T
    p = float(np.trace(sigma).real)
    if p <= tol:
        raise ZeroProbabilityError(f"outcome {alpha} has zero probability ({p!r})")
    return p, sigma / p


def ensemble_after_measurement(rho: np.ndarray, obs: SpectralObservable, rot: DegenerateRotation,
                               u_q: np.ndarray | None = None, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Full-ensemble state: sum over outcomes of ``P_alpha rho_alpha``."""
    _check_dims(obs, rho, u_q)
    rho = check_density(rho, tol)
    out = np.zeros_like(rho)
    for alpha in range(len(obs)):
        m = detection_operator(obs, rot, alpha)
        if u_q is not None:
            m = np.asarray(u_q, dtype=complex) @ m
        out += m @ rho @ m.conj().T
    return out


def are_compatible(a: SpectralObservable, b: SpectralObservable, tol: float = DEFAULT_TOL) -> bool:
    if a.dim != b.dim:
        raise DimensionMismatch("observables act on spaces of different dimension")
    ma, mb = a.matrix(), b.matrix()
    return float(np.max(np.abs(ma @ mb - mb @ ma))) <= tol


def evolve_density(rho: np.ndarray, h_q: np.ndarray, dt: float, hbar: float = 1.0,
                   tol: float = DEFAULT_TOL) -> np.ndarray:
    """Free evolution of ``rho`` over ``dt``, done in the eigenbasis of ``h_q``."""
    h_q = _check_hamiltonian(h_q, tol)
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != h_q.shape:
        raise DimensionMismatch(f"rho {rho.shape} and H {h_q.shape} differ in shape")
    energies, vecs = np.linalg.eigh(h_q)
    omega = energies / hbar
    rho_e = vecs.conj().T @ rho @ vecs
    phase = np.exp(-1j * np.subtract.outer(omega, omega) * dt)
    return vecs @ (rho_e * phase) @ vecs.conj().T


# random instances used by tests, scripts and the CLI fixtures

def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_density(dim: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    rank = dim if rank is None else rank
    g = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_hermitian(dim: int, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return scale * 0.5 * (g + g.conj().T)


def random_observable(degeneracies: Sequence[int], rng: np.random.Generator,
                      basis: np.ndarray | None = None) -> SpectralObservable:
    """Observable with the given degeneracies and distinct random eigenvalues.

    ``basis`` (a unitary) fixes the eigenvectors; two observables built on
    the same basis commute.
    """
    dim = int(sum(degeneracies))
    u = random_unitary(dim, rng) if basis is None else np.asarray(basis)
    lam = np.sort(rng.uniform(-2.0, 2.0, len(degeneracies)))
    while np.min(np.diff(lam), initial=1.0) < 1e-3:
        lam = np.sort(rng.uniform(-2.0, 2.0, len(degeneracies)))
    cuts = np.cumsum(degeneracies)[:-1]
    return SpectralObservable(lam, tuple(np.hsplit(u, cuts)))


def random_rotation(obs: SpectralObservable, rng: np.random.Generator) -> DegenerateRotation:
    return DegenerateRotation(tuple(random_unitary(g, rng) for g in obs.degeneracies))
