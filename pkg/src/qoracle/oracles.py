"""Function tables and the concrete oracle families.

Four families are provided, each as an :class:`Oracle` subclass with a
dense query constructor and an analytic eigensystem:

========  ===========================  ======================================
id        query at ``f``               analytic eigenvectors
========  ===========================  ======================================
``std``   |x>|y> -> |x>|y + f(x)>      |x> ⊗ |psi_s>  (Fourier states)
``cp``    |x> -> e^{2πi d f(x)/2^m}|x> computational basis
``min``   |x> -> |f(x)> (permutations) orbit-wise Fourier states
``glp``   banded local phase           computational basis
========  ===========================  ======================================

The addition in the standard oracle is modulo ``2**m``, not bitwise XOR.
The two agree only for ``m == 1``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Hashable, Iterator

import numpy as np

from .errors import BandConditionError, NotAPermutationError, SizeCapError
from .linalg import (
    MAX_DIM,
    TWO_PI,
    EigenSystem,
    canonical_phase,
    eig_unitary,
    is_power_of_two,
)


@dataclass(frozen=True)
class FunctionTable:
    """A function ``{0..2^n-1} -> {0..2^m-1}`` stored as its value table."""

    n: int
    m: int
    values: tuple[int, ...]

    def __post_init__(self):
        values = tuple(int(v) for v in self.values)
        object.__setattr__(self, "values", values)
        if self.n < 0 or self.m < 0:
            raise ValueError("n and m must be non-negative")
        if len(values) != 2**self.n:
            raise ValueError(f"table needs {2**self.n} entries, got {len(values)}")
        top = 2**self.m
        if any(v < 0 or v >= top for v in values):
            raise ValueError(f"table entries must lie in [0, {top})")

    def __call__(self, x: int) -> int:
        return self.values[x]

    def __iter__(self) -> Iterator[int]:
        return iter(self.values)

    def __len__(self) -> int:
        return len(self.values)

    @property
    def is_permutation(self) -> bool:
        return self.n == self.m and len(set(self.values)) == len(self.values)

    def inverse(self) -> "FunctionTable":
        if not self.is_permutation:
            raise NotAPermutationError(f"{self.values} is not a permutation")
        inv = [0] * len(self.values)
        for x, y in enumerate(self.values):
            inv[y] = x
        return FunctionTable(self.n, self.m, tuple(inv))

    def iterate(self, x: int, k: int) -> int:
        for _ in range(k):
            x = self.values[x]
        return x

    def to_json(self) -> dict:
        return {"n": self.n, "m": self.m, "table": list(self.values)}

    @classmethod
    def from_json(cls, obj: dict) -> "FunctionTable":
        try:
            return cls(int(obj["n"]), int(obj["m"]), tuple(obj["table"]))
        except KeyError as exc:
            raise ValueError(f"function table JSON is missing {exc}") from None

    @classmethod
    def constant(cls, n: int, m: int, value: int = 0) -> "FunctionTable":
        return cls(n, m, (value,) * 2**n)

    @classmethod
    def identity(cls, n: int) -> "FunctionTable":
        return cls(n, n, tuple(range(2**n)))

    @classmethod
    def random(cls, n: int, m: int, rng: np.random.Generator) -> "FunctionTable":
        return cls(n, m, tuple(rng.integers(0, 2**m, size=2**n).tolist()))

    @classmethod
    def random_permutation(cls, n: int, rng: np.random.Generator) -> "FunctionTable":
        return cls(n, n, tuple(rng.permutation(2**n).tolist()))


# ---------------------------------------------------------------------------
# orbits


@dataclass(frozen=True)
class Orbit:
    members: tuple[int, ...]

    @property
    def length(self) -> int:
        return len(self.members)

    @property
    def representative(self) -> int:
        return self.members[0]


@dataclass(frozen=True)
class OrbitDecomposition:
    orbits: tuple[Orbit, ...]

    @property
    def orbit_count(self) -> int:
        return len(self.orbits)

    @property
    def lengths(self) -> tuple[int, ...]:
        return tuple(o.length for o in self.orbits)

    @property
    def max_length(self) -> int:
        return max(self.lengths, default=0)

    def locate(self, x: int) -> tuple[int, int]:
        """Return ``(l, s)`` with ``x = f^s(x_l)``."""
        for ell, orbit in enumerate(self.orbits):
            if x in orbit.members:
                return ell, orbit.members.index(x)
        raise KeyError(x)


def orbit_decomposition(f: FunctionTable) -> OrbitDecomposition:
    """Cycle decomposition of a permutation, representatives minimal.

    Scanning ``x`` upward and starting a new cycle at the first unseen
    point makes that point the smallest member of its cycle.
    """
    if not f.is_permutation:
        raise NotAPermutationError(f"{f.values} is not a permutation")
    seen = [False] * len(f)
    orbits = []
    for start in range(len(f)):
        if seen[start]:
            continue
        members = []
        x = start
        while not seen[x]:
            seen[x] = True
            members.append(x)
            x = f(x)
        orbits.append(Orbit(tuple(members)))
    return OrbitDecomposition(tuple(orbits))


# ---------------------------------------------------------------------------
# standard oracle


def fourier_state(m: int, s: int) -> np.ndarray:
    """``|psi_s> = 2^{-m/2} sum_k e^{-2πi s k / 2^m} |k>``."""
    size = 2**m
    if not 0 <= s < size:
        raise ValueError(f"s={s} outside [0, {size})")
    k = np.arange(size)
    return np.exp(-2j * np.pi * s * k / size) / np.sqrt(size)


def fourier_matrix(m: int) -> np.ndarray:
    """Columns are the states ``|psi_s>`` for ``s = 0 .. 2^m - 1``."""
    size = 2**m
    k = np.arange(size)
    return np.exp(-2j * np.pi * np.outer(k, k) / size) / np.sqrt(size)


def _check_dim(qubits: int) -> None:
    if 2**qubits > MAX_DIM:
        raise SizeCapError(f"{qubits} qubits exceed the {MAX_DIM}-dimension cap")


def build_standard(f: FunctionTable) -> np.ndarray:
    """Permutation matrix of ``|x>|y> -> |x>|y + f(x) mod 2^m>``."""
    _check_dim(f.n + f.m)
    size = 2**f.m
    dim = 2**f.n * size
    x, y = np.divmod(np.arange(dim), size)
    fx = np.asarray(f.values)[x]
    rows = x * size + (y + fx) % size
    q = np.zeros((dim, dim), dtype=complex)
    q[rows, np.arange(dim)] = 1.0
    return q


def standard_eigensystem(f: FunctionTable) -> EigenSystem:
    """Eigenvectors ``|x>|psi_s>`` with phases ``2π s f(x) / 2^m``."""
    _check_dim(f.n + f.m)
    size = 2**f.m
    vectors = np.kron(np.eye(2**f.n), fourier_matrix(f.m))
    fx = np.repeat(np.asarray(f.values), size)
    s = np.tile(np.arange(size), 2**f.n)
    phases = TWO_PI * ((s * fx) % size) / size
    labels = tuple((x, si) for x in range(2**f.n) for si in range(size))
    return EigenSystem(phases, vectors, labels)


# ---------------------------------------------------------------------------
# complex phase oracle


def complex_phase_phases(f: FunctionTable, d: int) -> np.ndarray:
    size = 2**f.m
    # exact integer reduction before scaling keeps d*f(x) = 2^m from drifting
    return TWO_PI * ((d * np.asarray(f.values, dtype=np.int64)) % size) / size


def build_complex_phase(f: FunctionTable, d: int = 1) -> np.ndarray:
    """Diagonal query ``|x> -> e^{2πi d f(x) / 2^m} |x>``.

    Any integer ``d`` is accepted; ``d`` and ``d + 2^m`` give the same query.
    """
    _check_dim(f.n)
    return np.diag(np.exp(1j * complex_phase_phases(f, d)))


def complex_phase_eigensystem(f: FunctionTable, d: int = 1) -> EigenSystem:
    dim = 2**f.n
    labels = tuple((x, 0) for x in range(dim))
    return EigenSystem(complex_phase_phases(f, d), np.eye(dim, dtype=complex), labels)


# ---------------------------------------------------------------------------
# minimal oracle


@dataclass(frozen=True)
class MinimalQuery:
    matrix: np.ndarray
    degenerate: bool


def minimal_query(f: FunctionTable) -> MinimalQuery:
    """Minimal-oracle query together with a flag for the identity fallback."""
    _check_dim(f.n)
    dim = 2**f.n
    if not f.is_permutation:
        return MinimalQuery(np.eye(dim, dtype=complex), True)
    q = np.zeros((dim, dim), dtype=complex)
    q[list(f.values), np.arange(dim)] = 1.0
    return MinimalQuery(q, False)


def build_minimal(f: FunctionTable) -> np.ndarray:
    """``|x> -> |f(x)>`` for permutations, the identity otherwise."""
    return minimal_query(f).matrix


def minimal_eigensystem(f: FunctionTable) -> EigenSystem:
    """Orbit-wise Fourier eigenvectors labelled ``(l, s)``, phase ``2π s / r_l``."""
    orbits = orbit_decomposition(f)
    dim = 2**f.n
    vectors = np.zeros((dim, dim), dtype=complex)
    phases, labels = [], []
    col = 0
    for ell, orbit in enumerate(orbits.orbits):
        r = orbit.length
        k = np.arange(r)
        for s in range(r):
            vectors[list(orbit.members), col] = np.exp(-2j * np.pi * s * k / r) / np.sqrt(r)
            phases.append(TWO_PI * s / r)
            labels.append((ell, s))
            col += 1
    return EigenSystem(np.array(phases), vectors, tuple(labels))


# ---------------------------------------------------------------------------
# generic local phase oracle

G_PRESETS: dict[str, tuple[Callable[[np.ndarray], np.ndarray], float]] = {
    "linear": (lambda t: TWO_PI * np.asarray(t), TWO_PI),
    "sine": (lambda t: np.sin(TWO_PI * np.asarray(t)), TWO_PI),
}


def cyclic_distance(x: int, y: int, size: int) -> int:
    d = abs(y - x)
    return min(d, size - d)


@dataclass(frozen=True)
class GenericLocalPhaseSpec:
    """Parameters of a generic local phase oracle.

    ``g`` is a preset name (``"linear"`` or ``"sine"``, with exact derivative
    bounds) or a callable, in which case ``B`` must be given. ``coeffs`` is
    the ``2^n x 2^n`` matrix ``c[x, y]``; it must vanish outside the cyclic
    band of half-width ``p_bound`` and be bounded by ``C`` in absolute value.
    """

    g: str | Callable
    coeffs: np.ndarray
    p_bound: int
    B: float | None = None
    C: float | None = None
    g_func: Callable = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        coeffs = np.asarray(self.coeffs, dtype=float)
        if coeffs.ndim != 2 or coeffs.shape[0] != coeffs.shape[1] or not is_power_of_two(coeffs.shape[0]):
            raise ValueError("coeffs must be a square matrix of power-of-two size")
        object.__setattr__(self, "coeffs", coeffs)
        if isinstance(self.g, str):
            if self.g not in G_PRESETS:
                raise ValueError(f"unknown g preset {self.g!r}; choose from {sorted(G_PRESETS)}")
            func, bound = G_PRESETS[self.g]
            if self.B is None:
                object.__setattr__(self, "B", bound)
        else:
            func = self.g
            if self.B is None:
                raise ValueError("a user-supplied g needs an explicit derivative bound B")
        object.__setattr__(self, "g_func", func)
        cmax = float(np.max(np.abs(coeffs))) if coeffs.size else 0.0
        if self.C is None:
            object.__setattr__(self, "C", cmax)
        elif cmax > self.C + 1e-12:
            raise ValueError(f"max |c| = {cmax} exceeds C = {self.C}")
        self.check_band()

    @property
    def n(self) -> int:
        return int(self.coeffs.shape[0]).bit_length() - 1

    def check_band(self) -> None:
        size = self.coeffs.shape[0]
        xs, ys = np.nonzero(self.coeffs)
        for x, y in zip(xs, ys):
            if cyclic_distance(int(x), int(y), size) > self.p_bound:
                raise BandConditionError(
                    f"c[{x},{y}] = {self.coeffs[x, y]} lies outside the band p={self.p_bound}"
                )

    def phases(self, f: FunctionTable) -> np.ndarray:
        if f.n != self.n:
            raise ValueError(f"spec is for n={self.n}, function has n={f.n}")
        gvals = np.asarray(self.g_func(np.asarray(f.values, dtype=float) / 2**f.m), dtype=float)
        return canonical_phase(self.coeffs @ gvals)

    def to_json(self) -> dict:
        if not isinstance(self.g, str):
            raise ValueError("only preset g functions serialise to JSON")
        return {
            "g": self.g,
            "B": float(self.B),
            "C": float(self.C),
            "p_bound": int(self.p_bound),
            "coeffs": self.coeffs.tolist(),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "GenericLocalPhaseSpec":
        return cls(
            g=obj["g"],
            coeffs=np.asarray(obj["coeffs"], dtype=float),
            p_bound=int(obj["p_bound"]),
            B=obj.get("B"),
            C=obj.get("C"),
        )

    @classmethod
    def diagonal(cls, n: int, g: str = "linear", c: float = 1.0) -> "GenericLocalPhaseSpec":
        """``c_{x,x} = c``, zero elsewhere (band width 0)."""
        return cls(g=g, coeffs=c * np.eye(2**n), p_bound=0, C=abs(c))


def build_generic_local_phase(spec: GenericLocalPhaseSpec, f: FunctionTable) -> np.ndarray:
    """Diagonal query ``|x> -> exp(i sum_y c[x,y] g(f(y)/2^m)) |x>``."""
    _check_dim(f.n)
    spec.check_band()
    return np.diag(np.exp(1j * spec.phases(f)))


# ---------------------------------------------------------------------------
# oracle objects


class Oracle:
    """An oracle family: a rule assigning a unitary query to each function.

    Subclasses provide :meth:`query` and, where known, an analytic
    :meth:`eigensystem` whose labels are tuples beginning with the front
    register index ``x`` (see :meth:`block_of`).
    """

    kind = "abstract"
    is_simple = False

    def qubits(self, n: int, m: int) -> int:
        raise NotImplementedError

    def query(self, f: FunctionTable) -> np.ndarray:
        raise NotImplementedError

    def eigensystem(self, f: FunctionTable) -> EigenSystem:
        return eig_unitary(self.query(f))

    def has_analytic_eigensystem(self) -> bool:
        return False

    def block_of(self, label: Hashable, f: FunctionTable) -> int:
        """Front-register index ``x`` of an eigenvector label."""
        return label[0] if isinstance(label, tuple) else int(label)

    def phases(self, f: FunctionTable) -> dict:
        return self.eigensystem(f).phase_map()

    def params(self) -> dict:
        return {}

    def describe(self) -> dict:
        return {"kind": self.kind, **self.params()}

    def __repr__(self) -> str:
        args = ", ".join(f"{k}={v!r}" for k, v in self.params().items())
        return f"{type(self).__name__}({args})"


class StandardOracle(Oracle):
    kind = "std"
    is_simple = True

    def qubits(self, n, m):
        return n + m

    def query(self, f):
        return build_standard(f)

    def eigensystem(self, f):
        return standard_eigensystem(f)

    def has_analytic_eigensystem(self):
        return True


class ComplexPhaseOracle(Oracle):
    kind = "cp"
    is_simple = True

    def __init__(self, d: int = 1):
        self.d = int(d)

    def qubits(self, n, m):
        return n

    def query(self, f):
        return build_complex_phase(f, self.d)

    def eigensystem(self, f):
        return complex_phase_eigensystem(f, self.d)

    def has_analytic_eigensystem(self):
        return True

    def params(self):
        return {"d": self.d}


class MinimalOracle(Oracle):
    kind = "min"

    def qubits(self, n, m):
        return n

    def query(self, f):
        return build_minimal(f)

    def eigensystem(self, f):
        if not f.is_permutation:
            dim = 2**f.n
            return EigenSystem(np.zeros(dim), np.eye(dim), tuple((x, 0) for x in range(dim)))
        return minimal_eigensystem(f)

    def has_analytic_eigensystem(self):
        return True

    def block_of(self, label, f):
        # (l, s) is identified with the point f^s(x_l) of the orbit
        if not f.is_permutation:
            return label[0]
        ell, s = label
        orbit = orbit_decomposition(f).orbits[ell]
        return orbit.members[s]


class GenericLocalPhaseOracle(Oracle):
    kind = "glp"

    def __init__(self, spec: GenericLocalPhaseSpec):
        self.spec = spec

    @property
    def is_simple(self):
        c = self.spec.coeffs
        return bool(np.all(c == np.diag(np.diag(c))))

    def qubits(self, n, m):
        return n

    def query(self, f):
        return build_generic_local_phase(self.spec, f)

    def eigensystem(self, f):
        dim = 2**f.n
        labels = tuple((x, 0) for x in range(dim))
        return EigenSystem(self.spec.phases(f), np.eye(dim, dtype=complex), labels)

    def has_analytic_eigensystem(self):
        return True

    def params(self):
        s = self.spec
        return {"g": s.g if isinstance(s.g, str) else "custom", "B": s.B, "C": s.C, "p_bound": s.p_bound}


class FixedOracle(Oracle):
    """Oracle whose query ignores ``f``; handy for synthetic tests."""

    kind = "fixed"

    def __init__(self, matrix: np.ndarray, front_bits: int):
        self.matrix = np.asarray(matrix, dtype=complex)
        self.front_bits = int(front_bits)

    def qubits(self, n, m):
        return int(self.matrix.shape[0]).bit_length() - 1

    def query(self, f):
        return self.matrix


class ConjugatedOracle(Oracle):
    """The family ``f -> S Q_f S^†`` for a fixed unitary ``S``."""

    kind = "conjugated"

    def __init__(self, base: Oracle, basis_change: np.ndarray):
        self.base = base
        self.basis_change = np.asarray(basis_change, dtype=complex)
        self.is_simple = base.is_simple

    def qubits(self, n, m):
        return self.base.qubits(n, m)

    def query(self, f):
        s = self.basis_change
        return s @ self.base.query(f) @ s.conj().T

    def eigensystem(self, f):
        es = self.base.eigensystem(f)
        return EigenSystem(es.phases, self.basis_change @ es.vectors, es.labels)

    def has_analytic_eigensystem(self):
        return self.base.has_analytic_eigensystem()

    def block_of(self, label, f):
        return self.base.block_of(label, f)


ORACLE_KINDS = ("std", "cp", "min", "glp")


def make_oracle(kind: str | Oracle, **params) -> Oracle:
    """Build an oracle from its short id (``std``, ``cp``, ``min``, ``glp``)."""
    if isinstance(kind, Oracle):
        return kind
    if kind == "std":
        return StandardOracle()
    if kind == "cp":
        return ComplexPhaseOracle(params.get("d", 1))
    if kind == "min":
        return MinimalOracle()
    if kind == "glp":
        spec = params.get("spec")
        if spec is None:
            raise ValueError("the glp oracle needs a GenericLocalPhaseSpec (spec=...)")
        if isinstance(spec, dict):
            spec = GenericLocalPhaseSpec.from_json(spec)
        return GenericLocalPhaseOracle(spec)
    raise ValueError(f"unknown oracle kind {kind!r}; expected one of {ORACLE_KINDS}")


def oracle_phases(kind: str | Oracle, f: FunctionTable, **params) -> dict:
    """Labelled eigenphases ``{label: theta}`` from the analytic eigensystem."""
    oracle = make_oracle(kind, **params)
    if not oracle.has_analytic_eigensystem():
        raise ValueError(f"oracle {oracle.kind!r} has no analytic eigensystem")
    return oracle.phases(f)

