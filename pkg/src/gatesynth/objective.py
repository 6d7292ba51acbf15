"""Objective construction and gate fidelity metrics.

Bridges the symbolic side (a truncated generator polynomial in the controls)
and a concrete target unitary: the target's principal logarithm is subtracted
from the generator and the squared Frobenius norm closed into a real
polynomial objective whose zeros are exact generator matches.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from gatesynth.polymat import Polynomial, PolyMatrix, frobenius_sq

UNITARITY_TOL = 1e-10
BRANCH_MARGIN = 1e-9
EIG_CLUSTER_TOL = 1e-8


class BranchAmbiguityError(ValueError):
    """An eigenphase sits on the logarithm branch cut."""


def _check_unitary(u: np.ndarray, tol: float = UNITARITY_TOL) -> np.ndarray:
    u = np.asarray(u, dtype=complex)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise ValueError("expected a square matrix")
    defect = np.linalg.norm(u.conj().T @ u - np.eye(u.shape[0]))
    if defect > tol:
        raise ValueError(f"matrix is not unitary: defect {defect:.3e}")
    return u


def principal_log(u: np.ndarray, branch_margin: float = BRANCH_MARGIN) -> np.ndarray:
    """Anti-Hermitian principal logarithm of a unitary.

    Eigenphases are taken in (-pi, pi]; any phase within ``branch_margin`` of
    the cut at pi raises :class:`BranchAmbiguityError`.  Eigenvectors of
    near-degenerate eigenvalue clusters are re-orthonormalized so the result
    is anti-Hermitian up to roundoff, then symmetrized exactly.
    """
    u = _check_unitary(u)
    d = u.shape[0]
    w, v = np.linalg.eig(u)
    theta = np.angle(w)
    if np.any(np.abs(theta) > np.pi - branch_margin):
        worst = float(np.abs(theta).max())
        raise BranchAmbiguityError(
            f"eigenphase magnitude {worst:.12f} within {branch_margin:g} of the "
            "branch cut at pi"
        )
    # orthonormalize within clusters of nearby eigenvalues; a plain eig of a
    # normal matrix can return skewed bases for degenerate eigenspaces
    order = np.argsort(theta)
    theta = theta[order]
    v = v[:, order]
    start = 0
    while start < d:
        stop = start + 1
        while stop < d and abs(theta[stop] - theta[stop - 1]) < EIG_CLUSTER_TOL:
            stop += 1
        if stop - start > 1:
            q, _ = np.linalg.qr(v[:, start:stop])
            v[:, start:stop] = q
        else:
            v[:, start] /= np.linalg.norm(v[:, start])
        start = stop
    omega = (v * (1j * theta)[None, :]) @ v.conj().T
    return 0.5 * (omega - omega.conj().T)


@dataclass(frozen=True, eq=False)
class TargetGate:
    """A target unitary together with its principal generator."""

    unitary: np.ndarray
    generator: np.ndarray = field(default=None)

    def __post_init__(self):
        u = _check_unitary(np.array(self.unitary, dtype=complex))
        gen = self.generator
        if gen is None:
            gen = principal_log(u)
        else:
            gen = np.array(gen, dtype=complex)
            from gatesynth.numerics import expm_antihermitian

            defect = np.linalg.norm(expm_antihermitian(gen) - u)
            if defect > UNITARITY_TOL:
                raise ValueError(
                    f"generator does not exponentiate to the unitary: {defect:.3e}"
                )
            if np.linalg.norm(gen, 2) >= np.pi:
                raise ValueError("generator spectral norm must stay below pi")
        u.setflags(write=False)
        gen.setflags(write=False)
        object.__setattr__(self, "unitary", u)
        object.__setattr__(self, "generator", gen)

    @property
    def dim(self) -> int:
        return self.unitary.shape[0]

    @property
    def generator_norm(self) -> float:
        return float(np.linalg.norm(self.generator, 2))


def build_objective(g: PolyMatrix, omega: np.ndarray) -> Polynomial:
    """Real polynomial ||G(x) - omega||_F^2 over the control variables."""
    if g.ring.times != 0:
        raise ValueError("generator must live in a time-free ring")
    omega = np.asarray(omega, dtype=complex)
    if omega.shape != (g.dim, g.dim):
        raise ValueError(
            f"target shape {omega.shape} does not match generator dim {g.dim}"
        )
    diff = g - PolyMatrix.constant(g.ring, omega)
    return frobenius_sq(diff)


def infidelity(u: np.ndarray, v: np.ndarray) -> float:
    """Phase-insensitive gate infidelity 1 - |Tr(V†U)|/d, clipped to [0, 1]."""
    u = np.asarray(u, dtype=complex)
    v = np.asarray(v, dtype=complex)
    if u.shape != v.shape or u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise ValueError(f"shape mismatch: {u.shape} vs {v.shape}")
    d = u.shape[0]
    overlap = abs(np.trace(v.conj().T @ u)) / d
    return float(min(max(1.0 - overlap, 0.0), 1.0))
