"""Measurement in a basis of superpositions inside each degenerate eigenspace.

A `VBasis` picks one unit vector ``v_alpha = sum_s c_alpha^s u_alpha^s`` in
every eigenspace of a degenerate observable. States prepared inside the
span of these vectors are measured without destroying the superposition.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (DEFAULT_TOL, DegenerateRotation, SpectralObservable, _check_index,
                   _check_rotation, check_density)
from .errors import DimensionMismatch, InvalidStateError

NORMALIZE_SLACK = 1e-6


@dataclass(frozen=True)
class VBasis:
    parent: SpectralObservable
    coefficients: tuple

    def __post_init__(self):
        if len(self.coefficients) != len(self.parent):
            raise DimensionMismatch("one coefficient vector per eigenvalue is required")
        fixed = []
        for alpha, (c, g) in enumerate(zip(self.coefficients, self.parent.degeneracies)):
            c = np.asarray(c, dtype=complex).ravel()
            if c.size != g:
                raise DimensionMismatch(f"coefficients for block {alpha} need length {g}")
            nrm = np.linalg.norm(c)
            if abs(nrm - 1.0) > NORMALIZE_SLACK:
                raise InvalidStateError(f"coefficients for block {alpha} have norm {nrm!r}")
            c = c / nrm
            c.setflags(write=False)
            fixed.append(c)
        object.__setattr__(self, "coefficients", tuple(fixed))

    @property
    def size(self) -> int:
        return len(self.coefficients)

    def vectors(self) -> np.ndarray:
        """Columns ``v_alpha``; orthonormal because the eigenspaces are."""
        return np.column_stack([u @ c for u, c in zip(self.parent.blocks, self.coefficients)])

    def rotated_vectors(self, rot: DegenerateRotation) -> np.ndarray:
        """Columns ``v~_alpha = sum_s c^s u~^s`` for the rotated eigenbases."""
        _check_rotation(self.parent, rot)
        return np.column_stack([rot.rotated_block(self.parent, a) @ c
                                for a, c in enumerate(self.coefficients)])


@dataclass(frozen=True)
class VState:
    """Mixture of pure states ``chi_k = sum_alpha B[k, alpha] v_alpha`` with weights ``pi_k``."""

    weights: np.ndarray
    amplitudes: np.ndarray
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float).ravel()
        b = np.atleast_2d(np.asarray(self.amplitudes, dtype=complex))
        if b.shape[0] != w.size:
            raise DimensionMismatch("one amplitude row per weight is required")
        if np.any(w <= 0) or abs(w.sum() - 1.0) > self.tol:
            raise InvalidStateError("weights must be positive and sum to one")
        rows = np.sum(np.abs(b) ** 2, axis=1)
        if np.max(np.abs(rows - 1.0)) > self.tol:
            raise InvalidStateError("each amplitude row must have unit norm")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "amplitudes", b)

    def coherence_matrix(self) -> np.ndarray:
        """``w[alpha, beta] = sum_k pi_k B[k, alpha] conj(B[k, beta])``."""
        return self.amplitudes.T @ (self.weights[:, None] * self.amplitudes.conj())


def v_density(vs: VState, vb: VBasis) -> np.ndarray:
    if vs.amplitudes.shape[1] != vb.size:
        raise DimensionMismatch("amplitude rows must have one entry per basis vector")
    v = vb.vectors()
    return v @ vs.coherence_matrix() @ v.conj().T


def v_probabilities(rho_v: np.ndarray, vb: VBasis, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Outcome probabilities ``<v_alpha|rho_v|v_alpha>``.

    ``rho_v`` must live in the span of the basis, otherwise the
    probabilities would not add up to one.
    """
    if np.shape(rho_v) != (vb.parent.dim, vb.parent.dim):
        raise DimensionMismatch("rho_v does not match the observable dimension")
    rho_v = check_density(rho_v, tol)
    v = vb.vectors()
    probs = np.einsum("ia,ij,ja->a", v.conj(), rho_v, v).real
    if abs(probs.sum() - 1.0) > tol:
        raise InvalidStateError("rho_v has weight outside the span of the v-basis")
    return np.clip(probs, 0.0, None)


def v_post_state(vb: VBasis, rot: DegenerateRotation, alpha: int,
                 u_q: np.ndarray | None = None) -> np.ndarray:
    """Pure conditional state ``|v~_alpha><v~_alpha|`` (optionally propagated by ``u_q``)."""
    alpha = _check_index(vb.parent, alpha)
    v = vb.rotated_vectors(rot)[:, alpha]
    if u_q is not None:
        v = np.asarray(u_q, dtype=complex) @ v
    return np.outer(v, v.conj())


def tilde_observable(vb: VBasis) -> SpectralObservable:
    """Observable whose eigenvectors are the ``v_alpha``.

    The orthogonal complement of the v-span (when non-empty) becomes one
    extra block with an eigenvalue larger than every parent eigenvalue, so
    the result is a complete observable; its outcome probability is zero
    for any state inside the span.
    """
    v = vb.vectors()
    lam = list(vb.parent.eigenvalues)
    blocks = [v[:, [a]] for a in range(vb.size)]
    dim = vb.parent.dim
    if vb.size < dim:
        # complement from the SVD of the projector onto the v-span
        u, _, _ = np.linalg.svd(np.eye(dim) - v @ v.conj().T)
        blocks.append(u[:, : dim - vb.size])
        lam.append(max(lam) + 1.0)
    return SpectralObservable(np.array(lam), tuple(blocks))
