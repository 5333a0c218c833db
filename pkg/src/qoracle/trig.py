"""Sparse multivariate trigonometric polynomials and symbolic state propagation.

A :class:`TrigPoly` is ``sum_j c_j exp(i <n_j, phi>)`` with integer
frequency vectors ``n_j``; its degree is the largest L1 norm of a stored
frequency vector.

A :class:`SymbolicState` tracks a circuit state in the eigenbasis of a
query, one polynomial per basis vector, with one phase variable per
eigenvector of the (unlifted) query. Queries shift frequencies, constant
unitaries mix coefficients, and the degree law ``deg <= #queries`` can be
read off exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from types import MappingProxyType
from typing import Mapping, Sequence

import numpy as np

from .errors import ContractViolation
from .linalg import EigenSystem

PRUNE_TOL = 1e-12
MAX_TERMS = 10**6


class TrigPoly:
    """Immutable sparse trigonometric polynomial in ``D`` phase variables."""

    __slots__ = ("D", "_terms")

    def __init__(self, D: int, terms: Mapping[Sequence[int], complex] | None = None):
        if D < 0:
            raise ValueError("variable count must be non-negative")
        clean: dict[tuple[int, ...], complex] = {}
        for freq, c in (terms or {}).items():
            key = tuple(int(v) for v in freq)
            if len(key) != D:
                raise ValueError(f"frequency {key} does not have {D} components")
            clean[key] = clean.get(key, 0j) + complex(c)
        clean = {k: c for k, c in clean.items() if abs(c) >= PRUNE_TOL}
        if len(clean) > MAX_TERMS:
            raise ContractViolation(f"{len(clean)} terms exceed the {MAX_TERMS} term guard")
        object.__setattr__(self, "D", D)
        object.__setattr__(self, "_terms", clean)

    def __setattr__(self, name, value):
        raise AttributeError("TrigPoly is immutable")

    @property
    def terms(self) -> Mapping[tuple[int, ...], complex]:
        return MappingProxyType(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    def __repr__(self) -> str:
        body = " + ".join(f"({c:.4g})e^(i{k})" for k, c in sorted(self._terms.items()))
        return f"TrigPoly(D={self.D}, {body or '0'})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, TrigPoly) or other.D != self.D:
            return NotImplemented
        return self._terms.keys() == other._terms.keys() and all(
            abs(self._terms[k] - other._terms[k]) < PRUNE_TOL for k in self._terms
        )

    __hash__ = None

    @classmethod
    def constant(cls, D: int, c: complex = 1.0) -> "TrigPoly":
        return cls(D, {(0,) * D: c})

    @classmethod
    def monomial(cls, D: int, freq: Sequence[int], c: complex = 1.0) -> "TrigPoly":
        return cls(D, {tuple(freq): c})

    def degree(self) -> int:
        return max((sum(abs(v) for v in k) for k in self._terms), default=0)

    def _check(self, other: "TrigPoly") -> None:
        if other.D != self.D:
            raise ValueError(f"variable counts differ: {self.D} vs {other.D}")

    def __add__(self, other: "TrigPoly") -> "TrigPoly":
        self._check(other)
        merged = dict(self._terms)
        for k, c in other._terms.items():
            merged[k] = merged.get(k, 0j) + c
        return TrigPoly(self.D, merged)

    def __neg__(self) -> "TrigPoly":
        return self.scale(-1.0)

    def __sub__(self, other: "TrigPoly") -> "TrigPoly":
        return self + (-other)

    def scale(self, c: complex) -> "TrigPoly":
        return TrigPoly(self.D, {k: c * v for k, v in self._terms.items()})

    def __mul__(self, c):
        if isinstance(c, TrigPoly):
            raise TypeError("only scalar and monomial multiplication are supported")
        return self.scale(c)

    __rmul__ = __mul__

    def mul_monomial(self, var: int, shift: int) -> "TrigPoly":
        """Multiply by ``exp(i * shift * phi_var)``."""
        if not 0 <= var < self.D:
            raise ValueError(f"variable {var} outside [0, {self.D})")
        out = {}
        for k, c in self._terms.items():
            key = list(k)
            key[var] += shift
            out[tuple(key)] = c
        return TrigPoly(self.D, out)

    def evaluate(self, phases: Sequence[float]) -> complex:
        phases = np.asarray(phases, dtype=float)
        if phases.shape != (self.D,):
            raise ValueError(f"need {self.D} phases, got shape {phases.shape}")
        if not self._terms:
            return 0j
        freqs = np.array(list(self._terms), dtype=float).reshape(len(self._terms), self.D)
        coeffs = np.array(list(self._terms.values()))
        return complex(np.sum(coeffs * np.exp(1j * (freqs @ phases))))

    __call__ = evaluate

    def sample(self, thetas: np.ndarray) -> np.ndarray:
        """Vectorised evaluation of a one-variable polynomial."""
        if self.D != 1:
            raise ValueError("sample() is for single-variable polynomials")
        thetas = np.asarray(thetas, dtype=float)
        out = np.zeros(thetas.shape, dtype=complex)
        for (k,), c in self._terms.items():
            out += c * np.exp(1j * k * thetas)
        return out

    def to_json(self) -> dict:
        return {
            "D": self.D,
            "terms": [
                {"freq": list(k), "c": [c.real, c.imag]}
                for k, c in sorted(self._terms.items())
            ],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "TrigPoly":
        terms = {}
        for t in obj["terms"]:
            c = t["c"]
            terms[tuple(t["freq"])] = complex(c[0], c[1]) if isinstance(c, list) else complex(c)
        return cls(int(obj["D"]), terms)


def tp_add(a: TrigPoly, b: TrigPoly) -> TrigPoly:
    return a + b


def tp_mul_monomial(a: TrigPoly, var: int, shift: int) -> TrigPoly:
    return a.mul_monomial(var, shift)


def tp_evaluate(a: TrigPoly, phases: Sequence[float]) -> complex:
    return a.evaluate(phases)


# ---------------------------------------------------------------------------
# symbolic states


@dataclass(frozen=True)
class SymbolicState:
    """Coefficients of a state in an eigenbasis, as trigonometric polynomials.

    Storage is a shared term table: ``freqs[t]`` is a frequency vector and
    ``coeffs[j, t]`` its coefficient in the polynomial of basis vector ``j``.
    ``var_map[j]`` is the phase variable carried by basis vector ``j``.
    """

    labels: tuple
    var_map: np.ndarray
    D: int
    freqs: np.ndarray
    coeffs: np.ndarray

    @property
    def dim(self) -> int:
        return self.coeffs.shape[0]

    @property
    def term_count(self) -> int:
        return self.freqs.shape[0]

    def degree(self) -> int:
        live = np.any(np.abs(self.coeffs) >= PRUNE_TOL, axis=0)
        if not np.any(live):
            return 0
        return int(np.max(np.abs(self.freqs[live]).sum(axis=1)))

    def coeff(self, j: int) -> TrigPoly:
        row = self.coeffs[j]
        keep = np.abs(row) >= PRUNE_TOL
        return TrigPoly(self.D, {tuple(k): c for k, c in zip(self.freqs[keep].tolist(), row[keep])})

    @property
    def polys(self) -> list[TrigPoly]:
        return [self.coeff(j) for j in range(self.dim)]

    def evaluate(self, phases: Sequence[float]) -> np.ndarray:
        phases = np.asarray(phases, dtype=float)
        if phases.shape != (self.D,):
            raise ValueError(f"need {self.D} phases, got shape {phases.shape}")
        return self.coeffs @ np.exp(1j * (self.freqs @ phases))


def _pruned(state: SymbolicState, freqs: np.ndarray, coeffs: np.ndarray) -> SymbolicState:
    live = np.any(np.abs(coeffs) >= PRUNE_TOL, axis=0)
    freqs, coeffs = freqs[live], coeffs[:, live]
    if coeffs.size > MAX_TERMS * max(1, state.dim) or freqs.shape[0] > MAX_TERMS:
        raise ContractViolation(f"{freqs.shape[0]} terms exceed the {MAX_TERMS} term guard")
    return SymbolicState(state.labels, state.var_map, state.D, freqs, coeffs)


def symbolic_init(
    state: np.ndarray, eig: EigenSystem, var_map: Sequence[int] | None = None, D: int | None = None
) -> SymbolicState:
    """Constant polynomials ``<v_j | state>``.

    By default every eigenvector is its own variable. For a lifted query pass
    ``var_map`` (basis index -> variable) and the variable count ``D``.
    """
    state = np.asarray(state, dtype=complex)
    if state.shape != (eig.dim,):
        raise ValueError(f"state of shape {state.shape} does not match dimension {eig.dim}")
    amps = eig.vectors.conj().T @ state
    if var_map is None:
        var_map = np.arange(eig.dim)
        D = eig.dim
    var_map = np.asarray(var_map, dtype=int)
    if D is None:
        D = int(var_map.max()) + 1
    labels = eig.labels if eig.labels is not None else tuple(range(eig.dim))
    s = SymbolicState(labels, var_map, D, np.zeros((1, D), dtype=int), amps.reshape(-1, 1))
    return _pruned(s, s.freqs, s.coeffs)


def symbolic_apply_query(s: SymbolicState, power: int) -> SymbolicState:
    """Multiply coefficient ``j`` by ``exp(±i phi_{var_map[j]})``."""
    if power not in (1, -1):
        raise ValueError("query power must be +1 or -1")
    rows, cols = np.nonzero(np.abs(s.coeffs) >= PRUNE_TOL)
    if rows.size == 0:
        return s
    shifted = s.freqs[cols].copy()
    shifted[np.arange(rows.size), s.var_map[rows]] += power
    freqs, inv = np.unique(shifted, axis=0, return_inverse=True)
    coeffs = np.zeros((s.dim, freqs.shape[0]), dtype=complex)
    # one row never sends two of its terms to the same frequency
    coeffs[rows, inv.ravel()] = s.coeffs[rows, cols]
    return _pruned(s, freqs, coeffs)


def symbolic_apply_constant(s: SymbolicState, u_in_basis: np.ndarray) -> SymbolicState:
    """Apply an ``f``-independent unitary written in the same eigenbasis."""
    u = np.asarray(u_in_basis, dtype=complex)
    if u.shape != (s.dim, s.dim):
        raise ValueError(f"matrix of shape {u.shape} does not act on dimension {s.dim}")
    return _pruned(s, s.freqs, u @ s.coeffs)


def lifted_var_map(eig: EigenSystem, target_dim: int) -> tuple[EigenSystem, np.ndarray, int]:
    """Eigensystem of ``Q ⊗ I`` with each lifted vector tied to its source variable."""
    factor = target_dim // eig.dim
    lifted = eig.lifted(target_dim)
    return lifted, np.repeat(np.arange(eig.dim), factor), eig.dim
