"""Lower-bound evaluators for query circuits.

All projections are taken in a reference eigenbasis: the analytic
eigensystem of the target query at ``f1``, lifted to the circuit system.
The evaluators certify lower bounds on the operator-norm error of a given
circuit; they never claim tightness.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Hashable, Sequence

import numpy as np

from ._parallel import parallel_map
from .circuits import CircuitSpec, _apply_front, apply_circuit, circuit_error
from .errors import PreconditionError
from .linalg import EigenSystem
from .oracles import FunctionTable, Oracle, make_oracle
from .trig import TrigPoly

SUP_SAMPLES = 4096
SUP_TOL = 1e-9


@dataclass(frozen=True)
class FunctionPair:
    f1: FunctionTable
    f2: FunctionTable

    def __post_init__(self):
        if (self.f1.n, self.f1.m) != (self.f2.n, self.f2.m):
            raise ValueError("pair members must share (n, m)")

    def to_json(self) -> dict:
        return {"f1": self.f1.to_json(), "f2": self.f2.to_json()}


@dataclass(frozen=True)
class BoundReport:
    """A certified lower bound ``bound`` on a circuit's approximation error."""

    bound: float
    witness_label: Hashable | None
    n_queries: int
    per_f_errors: tuple[tuple[tuple[int, ...], float], ...] = ()
    witness_pair: FunctionPair | None = None
    analytic_N_min: int | None = None
    terms: dict = field(default_factory=dict)

    @property
    def max_error(self) -> float:
        return max((e for _, e in self.per_f_errors), default=float("nan"))

    @property
    def sound(self) -> bool:
        """Whether the bound stays below the measured error (when known)."""
        if not self.per_f_errors:
            return True
        return self.max_error >= self.bound - 1e-7

    def to_json(self) -> dict:
        return {
            "bound": self.bound,
            "witness_label": list(self.witness_label) if isinstance(self.witness_label, tuple) else self.witness_label,
            "n_queries": self.n_queries,
            "analytic_N_min": self.analytic_N_min,
            "per_f_errors": [{"f": list(fv), "error": e} for fv, e in self.per_f_errors],
            "witness_pair": self.witness_pair.to_json() if self.witness_pair else None,
        }


def reference_eigensystem(q2: Oracle, f: FunctionTable, dim: int) -> EigenSystem:
    """Analytic eigensystem of ``Q2_f`` lifted to ``dim``."""
    return q2.eigensystem(f).lifted(dim)


def projection_coefficients(
    c: CircuitSpec, q1: Oracle | str, f: FunctionTable, reference_eig: EigenSystem
) -> np.ndarray:
    """``P[j, k] = <psi_j | C_f | psi_k>`` in the reference eigenbasis.

    Column ``k`` holds the components of the circuit's image of the ``k``-th
    reference eigenvector.
    """
    if reference_eig.dim != c.dim:
        if c.dim % reference_eig.dim:
            raise ValueError(
                f"reference dimension {reference_eig.dim} does not divide 2^{c.M}"
            )
        reference_eig = reference_eig.lifted(c.dim)
    v = reference_eig.vectors
    return v.conj().T @ apply_circuit(c, q1, f, v)


def lemma1_bound(c: CircuitSpec, q1: Oracle | str, q2: Oracle | str, f: FunctionTable) -> BoundReport:
    """``max_j |exp(i theta_j(f)) - P_jj|`` over the target's eigenvectors at ``f``."""
    q1, q2 = make_oracle(q1), make_oracle(q2)
    ref = reference_eigensystem(q2, f, c.dim)
    diag = np.diag(projection_coefficients(c, q1, f, ref))
    gaps = np.abs(ref.eigenvalues - diag)
    j = int(np.argmax(gaps))
    err = circuit_error(c, q1, q2, f)
    return BoundReport(
        bound=float(gaps[j]),
        witness_label=ref.labels[j] if ref.labels else j,
        n_queries=c.query_count,
        per_f_errors=((f.values, err),),
    )


def _target_diagonal(q2: Oracle, ref: EigenSystem, f2: FunctionTable, dim: int) -> np.ndarray:
    """Diagonal of ``Q2_{f2}`` in the reference basis.

    For simple oracles the eigenvectors do not move with ``f`` and the
    diagonal is read from the analytic phases at ``f2``.
    """
    if q2.is_simple and q2.has_analytic_eigensystem():
        other = q2.eigensystem(f2).lifted(dim).phase_map()
        if ref.labels is not None and all(lab in other for lab in ref.labels):
            return np.exp(1j * np.array([other[lab] for lab in ref.labels]))
    v = ref.vectors
    return np.einsum("ij,ij->j", v.conj(), _apply_front(q2.query(f2), v))


def mainthm_bound(
    c: CircuitSpec, q1: Oracle | str, q2: Oracle | str, pair: FunctionPair
) -> BoundReport:
    """Pairwise lower bound: at ``f1`` or ``f2`` the error is at least this large.

    Per eigenvector ``psi`` of ``Q2_{f1}``:
    ``1/2 | |e^{i theta(f1)} - <psi|Q2_{f2}|psi>| - |<psi|C_{f1}|psi> - <psi|C_{f2}|psi>| |``.
    """
    q1, q2 = make_oracle(q1), make_oracle(q2)
    f1, f2 = pair.f1, pair.f2
    ref = reference_eigensystem(q2, f1, c.dim)
    t1 = np.diag(projection_coefficients(c, q1, f1, ref))
    t2 = np.diag(projection_coefficients(c, q1, f2, ref))
    target_gap = np.abs(ref.eigenvalues - _target_diagonal(q2, ref, f2, c.dim))
    circuit_gap = np.abs(t1 - t2)
    values = 0.5 * np.abs(target_gap - circuit_gap)
    j = int(np.argmax(values))
    errors = tuple((f.values, circuit_error(c, q1, q2, f)) for f in (f1, f2))
    return BoundReport(
        bound=float(values[j]),
        witness_label=ref.labels[j] if ref.labels else j,
        n_queries=c.query_count,
        per_f_errors=errors,
        witness_pair=pair,
        terms={"target_gap": float(target_gap[j]), "circuit_gap": float(circuit_gap[j])},
    )


def mainthm_sweep(
    c: CircuitSpec, q1: Oracle | str, q2: Oracle | str, pairs: Sequence[FunctionPair]
) -> BoundReport:
    """Largest pairwise bound over ``pairs`` (first maximiser wins ties)."""
    pairs = list(pairs)
    if not pairs:
        raise ValueError("need at least one pair")
    reports = parallel_map(lambda p: mainthm_bound(c, q1, q2, p), pairs)
    return max(reports, key=lambda r: r.bound)


def sup_norm(t: TrigPoly, samples: int = SUP_SAMPLES) -> float:
    thetas = np.linspace(-np.pi, np.pi, samples, endpoint=False)
    return float(np.max(np.abs(t.sample(thetas))))


def bernstein_ratio(t: TrigPoly, theta1: float, theta2: float) -> float:
    """Difference quotient ``|t(a) - t(b)| / |a - b|`` of a bounded polynomial.

    Bernstein's inequality bounds it by ``t.degree()`` when ``sup |t| <= 1``.

    Raises
    ------
    ValueError
        If the two points coincide.
    PreconditionError
        If ``t`` exceeds 1 in modulus on the sampling grid.
    """
    if theta1 == theta2:
        raise ValueError("points must differ")
    sup = sup_norm(t)
    if sup > 1 + SUP_TOL:
        raise PreconditionError(f"sup |t| = {sup:.12g} exceeds 1")
    diff = t.sample(np.array([theta1, theta2]))
    return float(abs(diff[0] - diff[1]) / abs(theta1 - theta2))


def glp_lower_bound(m: int, delta: float, B: float, C: float) -> int:
    """Queries needed to approximate the standard oracle to ``delta``.

    ``ceil(2^{m+1} (1 - delta) / (B C))``, never below one.
    """
    if not 0 <= delta < 1:
        raise ValueError("delta must lie in [0, 1)")
    if B <= 0 or C <= 0:
        raise ValueError("B and C must be positive")
    raw = 2 ** (m + 1) * (1 - delta) / (B * C)
    return max(1, math.ceil(round(raw, 12)))


def glp_min_error(m: int, N: int, B: float, C: float) -> float:
    """Smallest error an ``N``-query circuit can reach against the adversary pair."""
    if N < 0:
        raise ValueError("N must be non-negative")
    return max(0.0, 1.0 - B * C * N / 2 ** (m + 1))


def adversary_pair(n: int, m: int) -> FunctionPair:
    """``f1(0) = 2^{m-1}``, ``f2(0) = 2^{m-1} + 1 (mod 2^m)``, zero elsewhere."""
    if m < 1 or n < 1:
        raise ValueError("need n >= 1 and m >= 1")
    size = 2**m
    rest = (0,) * (2**n - 1)
    return FunctionPair(
        FunctionTable(n, m, (size // 2,) + rest),
        FunctionTable(n, m, ((size // 2 + 1) % size,) + rest),
    )


def eigenvalue_gap(m: int, n: int = 1) -> float:
    """``|e^{i theta(f1)} - e^{i theta(f2)}|`` at the standard eigenvector ``(0, 2^{m-1})``."""
    pair = adversary_pair(n, m)
    label = (0, 2 ** (m - 1))
    std = make_oracle("std")
    a, b = (std.phases(f)[label] for f in (pair.f1, pair.f2))
    return float(abs(np.exp(1j * a) - np.exp(1j * b)))
