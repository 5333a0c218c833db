"""Dense complex linear algebra kernel.

Conventions used throughout the package:

* basis index of ``|a>|b>`` is ``a * dim(b) + b`` (``np.kron`` order, the
  front register is the most significant one);
* eigenphases live in ``[0, 2*pi)``;
* every dense matrix is capped at ``MAX_DIM`` rows.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Hashable, Sequence

import numpy as np
import scipy.linalg

from .errors import ContractViolation, SizeCapError

TWO_PI = 2.0 * np.pi
MAX_DIM = 1024
UNITARY_TOL = 1e-10
CLUSTER_TOL = 1e-8


def is_power_of_two(k: int) -> bool:
    return k >= 1 and (k & (k - 1)) == 0


def _check_square(a: np.ndarray, what: str = "matrix") -> None:
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"{what} must be square, got shape {a.shape}")


def _check_pow2(a: np.ndarray, what: str = "matrix") -> None:
    _check_square(a, what)
    if not is_power_of_two(a.shape[0]):
        raise ValueError(f"{what} dimension {a.shape[0]} is not a power of two")


def check_finite(a: np.ndarray) -> None:
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has NaN or Inf entries")


def tensor(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product ``a ⊗ b`` with ``a`` on the front register."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    _check_pow2(a, "left factor")
    _check_pow2(b, "right factor")
    dim = a.shape[0] * b.shape[0]
    if dim > MAX_DIM:
        raise SizeCapError(f"tensor product of dimension {dim} exceeds {MAX_DIM}")
    return np.kron(a, b)


def lift(u: np.ndarray, target_dim: int) -> np.ndarray:
    """Return ``u ⊗ I`` acting on a register of dimension ``target_dim``.

    The lifted operator acts on the leading qubits; ``target_dim`` must be
    ``u.shape[0]`` times a power of two.
    """
    u = np.asarray(u, dtype=complex)
    _check_pow2(u)
    dim = u.shape[0]
    if target_dim % dim or not is_power_of_two(target_dim // dim):
        raise ValueError(f"cannot lift dimension {dim} to {target_dim}")
    if target_dim > MAX_DIM:
        raise SizeCapError(f"lift target {target_dim} exceeds {MAX_DIM}")
    if target_dim == dim:
        return u
    return np.kron(u, np.eye(target_dim // dim))


def op_norm(a: np.ndarray) -> float:
    """Largest singular value (spectral norm)."""
    a = np.asarray(a)
    if a.size == 0:
        return 0.0
    return float(np.linalg.norm(a, 2))


def unitarity_defect(u: np.ndarray) -> float:
    """Max-abs entry of ``u u^† - I``."""
    u = np.asarray(u)
    return float(np.max(np.abs(u @ u.conj().T - np.eye(u.shape[0]))))


def is_unitary(u: np.ndarray, tol: float = UNITARY_TOL) -> bool:
    u = np.asarray(u)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        return False
    return unitarity_defect(u) <= tol


def canonical_phase(theta):
    """Reduce phases into ``[0, 2*pi)``.

    ``np.mod`` can round a tiny negative input up to exactly ``2*pi``; such
    values are folded back to 0.
    """
    t = np.mod(np.asarray(theta, dtype=float), TWO_PI)
    t = np.where(t >= TWO_PI, 0.0, t)
    return float(t) if t.ndim == 0 else t


def phase_distance(a, b):
    """Distance between phases on the circle."""
    d = np.abs(np.mod(np.asarray(a) - np.asarray(b), TWO_PI))
    return np.minimum(d, TWO_PI - d)


def cluster_phases(phases: np.ndarray, tol: float = CLUSTER_TOL) -> list[np.ndarray]:
    """Group indices whose phases agree to ``tol`` on the circle.

    Groups are chained (single linkage) in sorted order, and the group that
    touches ``2*pi`` is merged with the one at ``0``.
    """
    phases = np.asarray(phases, dtype=float)
    if phases.size == 0:
        return []
    order = np.argsort(phases, kind="stable")
    groups: list[list[int]] = [[int(order[0])]]
    for prev, cur in zip(order[:-1], order[1:]):
        if phases[cur] - phases[prev] <= tol:
            groups[-1].append(int(cur))
        else:
            groups.append([int(cur)])
    if len(groups) > 1:
        first, last = groups[0], groups[-1]
        if phases[first[0]] + TWO_PI - phases[last[-1]] <= tol:
            groups[0] = last + first
            groups.pop()
    return [np.array(g, dtype=int) for g in groups]


@dataclass(frozen=True)
class EigenSystem:
    """Eigenphases and orthonormal eigenvectors (as columns) of a unitary.

    ``labels``, when present, name each eigenvector; oracle constructors use
    ``(x, i)`` style tuples.
    """

    phases: np.ndarray
    vectors: np.ndarray
    labels: tuple[Hashable, ...] | None = field(default=None)

    def __post_init__(self):
        phases = canonical_phase(np.asarray(self.phases, dtype=float).ravel())
        vectors = np.asarray(self.vectors, dtype=complex)
        if vectors.ndim != 2 or vectors.shape[1] != phases.size:
            raise ValueError("need one eigenvector column per phase")
        object.__setattr__(self, "phases", np.atleast_1d(phases))
        object.__setattr__(self, "vectors", vectors)
        if self.labels is not None:
            labels = tuple(self.labels)
            if len(labels) != phases.size:
                raise ValueError("need one label per eigenvector")
            object.__setattr__(self, "labels", labels)

    @property
    def dim(self) -> int:
        return self.vectors.shape[0]

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.exp(1j * self.phases)

    def index(self, label: Hashable) -> int:
        if self.labels is None:
            raise KeyError("eigensystem carries no labels")
        return self.labels.index(label)

    def phase_map(self) -> dict:
        labels = self.labels if self.labels is not None else range(self.phases.size)
        return {lab: float(p) for lab, p in zip(labels, self.phases)}

    def residual(self, u: np.ndarray) -> float:
        """max_j || U v_j - e^{i θ_j} v_j ||."""
        diff = u @ self.vectors - self.vectors * self.eigenvalues
        return float(np.max(np.linalg.norm(diff, axis=0))) if diff.size else 0.0

    def orthonormality_defect(self) -> float:
        g = self.vectors.conj().T @ self.vectors
        return float(np.max(np.abs(g - np.eye(g.shape[0])))) if g.size else 0.0

    def reconstruct(self) -> np.ndarray:
        v = self.vectors
        return (v * self.eigenvalues) @ v.conj().T

    def clusters(self, tol: float = CLUSTER_TOL) -> list[np.ndarray]:
        return cluster_phases(self.phases, tol)

    def lifted(self, target_dim: int) -> "EigenSystem":
        """Eigensystem of ``U ⊗ I``; label ``l`` becomes ``l + (k,)``."""
        factor = target_dim // self.dim
        if factor * self.dim != target_dim or not is_power_of_two(factor):
            raise ValueError(f"cannot lift dimension {self.dim} to {target_dim}")
        if factor == 1:
            return self
        vectors = np.kron(self.vectors, np.eye(factor))
        phases = np.repeat(self.phases, factor)
        labels = None
        if self.labels is not None:
            labels = tuple(
                (*(lab if isinstance(lab, tuple) else (lab,)), k)
                for lab in self.labels
                for k in range(factor)
            )
        return EigenSystem(phases, vectors, labels)


def schur_eig(u: np.ndarray, tol: float = CLUSTER_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Eigenphases and orthonormal eigenvectors of a (nearly) normal matrix.

    The complex Schur factor of a normal matrix is diagonal, so its unitary
    factor already provides an orthonormal eigenbasis, also inside
    degenerate clusters. Columns are returned sorted by phase and each
    cluster is re-orthonormalised.
    """
    t, z = scipy.linalg.schur(np.asarray(u, dtype=complex), output="complex")
    phases = canonical_phase(np.angle(np.diag(t)))
    order = np.argsort(phases, kind="stable")
    phases, z = phases[order], z[:, order]
    for group in cluster_phases(phases, tol):
        if group.size > 1:
            q, _ = np.linalg.qr(z[:, group])
            z[:, group] = q
    return phases, z


def eig_unitary(u: np.ndarray, labels: Sequence[Hashable] | None = None) -> EigenSystem:
    """Full eigensystem of a unitary matrix.

    Raises
    ------
    ContractViolation
        If ``u`` is not unitary to within ``UNITARY_TOL``.
    """
    u = np.asarray(u, dtype=complex)
    _check_square(u)
    check_finite(u)
    if not is_unitary(u):
        raise ContractViolation(
            f"eig_unitary needs a unitary input (defect {unitarity_defect(u):.3e})"
        )
    phases, vectors = schur_eig(u)
    return EigenSystem(phases, vectors, labels)


def basis_permutation_matrix(perm: Sequence[int]) -> np.ndarray:
    """Unitary sending ``|i>`` to ``|perm[i]>``."""
    perm = np.asarray(perm, dtype=int)
    dim = perm.size
    if dim > MAX_DIM:
        raise SizeCapError(f"dimension {dim} exceeds {MAX_DIM}")
    if sorted(perm.tolist()) != list(range(dim)):
        raise ValueError("not a permutation of the basis")
    p = np.zeros((dim, dim), dtype=complex)
    p[perm, np.arange(dim)] = 1.0
    return p


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary from the QR decomposition of a Gaussian matrix."""
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def unitary_log(u: np.ndarray) -> np.ndarray:
    """Hermitian ``H`` with ``exp(iH) = u`` and spectrum in ``(-pi, pi]``."""
    phases, z = schur_eig(u)
    phases = np.where(phases > np.pi, phases - TWO_PI, phases)
    h = (z * phases) @ z.conj().T
    return (h + h.conj().T) / 2
