"""Circuits with oracle queries and the constructive simulations.

Two circuit representations are used:

:class:`CircuitSpec`
    a dense alternating product ``U_{N+1} Q^{p_N} ... Q^{p_1} U_1`` on ``M``
    qubits (``2^M <= 1024``). Queries always act on the leading qubits.
    Constant gates may be stored in structured form (permutation, diagonal,
    leading-register factor) to keep 10-qubit products cheap.

:class:`RegisterCircuit`
    a register-level circuit for the bounded-orbit construction, simulated
    on sparse basis-state dictionaries. It handles register layouts far
    beyond the dense cap and converts to a :class:`CircuitSpec` when the
    layout fits.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import ContractViolation, NotAPermutationError, PreconditionError, SizeCapError
from .jsonio import complex_matrix_from_json, complex_matrix_to_json
from .linalg import (
    TWO_PI,
    canonical_phase,
    is_unitary,
    op_norm,
    unitarity_defect,
)
from .oracles import (
    FunctionTable,
    Oracle,
    build_minimal,
    make_oracle,
    minimal_eigensystem,
    orbit_decomposition,
)
from .trig import SymbolicState, lifted_var_map, symbolic_apply_constant, symbolic_apply_query, symbolic_init

EXACT_TOL = 1e-8
MAX_QUBITS = 10


# ---------------------------------------------------------------------------
# gates


class Constant:
    """An ``f``-independent unitary gate given as a dense matrix."""

    kind = "dense"

    def __init__(self, matrix: np.ndarray, label: str = "", check: bool = True):
        matrix = np.asarray(matrix, dtype=complex)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise ValueError("constant gate must be a square matrix")
        if check and not is_unitary(matrix):
            raise ContractViolation(
                f"constant gate is not unitary (defect {unitarity_defect(matrix):.2e})"
            )
        self._matrix = matrix
        self.label = label

    @property
    def dim(self) -> int:
        return self._matrix.shape[0]

    @property
    def matrix(self) -> np.ndarray:
        return self._matrix

    def apply(self, block: np.ndarray) -> np.ndarray:
        return self._matrix @ block

    def inverse(self) -> "Constant":
        return Constant(self._matrix.conj().T, _inv_label(self.label), check=False)

    def payload(self) -> dict:
        return {"matrix": complex_matrix_to_json(self._matrix)}

    def __repr__(self):
        return f"{type(self).__name__}(dim={self.dim}{', ' + self.label if self.label else ''})"


def _inv_label(label: str) -> str:
    if not label:
        return ""
    return label[:-3] if label.endswith("^-1") else label + "^-1"


class PermutationGate(Constant):
    """Basis permutation ``|i> -> |perm[i]>``."""

    kind = "permutation"

    def __init__(self, perm: Sequence[int], label: str = ""):
        perm = np.asarray(perm, dtype=np.int64)
        if not np.array_equal(np.sort(perm), np.arange(perm.size)):
            raise ContractViolation("permutation gate is not a bijection")
        self.perm = perm
        self.label = label

    @property
    def dim(self) -> int:
        return self.perm.size

    @property
    def matrix(self) -> np.ndarray:
        m = np.zeros((self.dim, self.dim), dtype=complex)
        m[self.perm, np.arange(self.dim)] = 1.0
        return m

    def apply(self, block):
        out = np.empty_like(block)
        out[self.perm] = block
        return out

    def inverse(self):
        inv = np.empty_like(self.perm)
        inv[self.perm] = np.arange(self.dim)
        return PermutationGate(inv, _inv_label(self.label))

    def then(self, other: "PermutationGate") -> "PermutationGate":
        """Gate equal to ``other`` applied after ``self``."""
        return PermutationGate(other.perm[self.perm], self.label or other.label)

    def payload(self):
        return {"permutation": self.perm.tolist()}


class DiagonalGate(Constant):
    """Diagonal gate ``|i> -> exp(i phases[i]) |i>``."""

    kind = "diagonal"

    def __init__(self, phases: Sequence[float], label: str = ""):
        self.phases = canonical_phase(np.asarray(phases, dtype=float))
        self.label = label

    @property
    def dim(self):
        return self.phases.size

    @property
    def matrix(self):
        return np.diag(np.exp(1j * self.phases))

    def apply(self, block):
        return np.exp(1j * self.phases)[:, None] * block

    def inverse(self):
        return DiagonalGate(-self.phases, _inv_label(self.label))

    def payload(self):
        return {"diagonal": self.phases.tolist()}


class FrontGate(Constant):
    """``U ⊗ I`` with ``U`` on the leading qubits of a ``dim``-dimensional system."""

    kind = "front"

    def __init__(self, u: np.ndarray, dim: int, label: str = "", check: bool = True):
        u = np.asarray(u, dtype=complex)
        if check and not is_unitary(u):
            raise ContractViolation("front gate factor is not unitary")
        if dim % u.shape[0]:
            raise ValueError("front factor does not divide the system dimension")
        self.u = u
        self._dim = dim
        self.label = label

    @property
    def dim(self):
        return self._dim

    @property
    def matrix(self):
        return np.kron(self.u, np.eye(self._dim // self.u.shape[0]))

    def apply(self, block):
        return _apply_front(self.u, block)

    def inverse(self):
        return FrontGate(self.u.conj().T, self._dim, _inv_label(self.label), check=False)

    def payload(self):
        return {"front": complex_matrix_to_json(self.u)}


def _apply_front(u: np.ndarray, block: np.ndarray) -> np.ndarray:
    d = u.shape[0]
    k = block.shape[1]
    rest = block.shape[0] // d
    out = np.tensordot(u, block.reshape(d, rest, k), axes=(1, 0))
    return out.reshape(block.shape)


@dataclass(frozen=True)
class Query:
    """One query (``power=+1``) or inverse query (``power=-1``)."""

    power: int = 1

    def __post_init__(self):
        if self.power not in (1, -1):
            raise ValueError("query power must be +1 or -1")

    def inverse(self) -> "Query":
        return Query(-self.power)


def _merge(a: Constant, b: Constant) -> Constant | None:
    """Single gate for ``b`` after ``a`` when the structure allows it."""
    if isinstance(a, PermutationGate) and isinstance(b, PermutationGate):
        return a.then(b)
    if isinstance(a, DiagonalGate) and isinstance(b, DiagonalGate):
        return DiagonalGate(a.phases + b.phases, b.label or a.label)
    if isinstance(a, FrontGate) and isinstance(b, FrontGate) and a.u.shape == b.u.shape:
        return FrontGate(b.u @ a.u, a.dim, b.label or a.label, check=False)
    if type(a) is Constant and type(b) is Constant:
        return Constant(b.matrix @ a.matrix, b.label or a.label, check=False)
    return None


# ---------------------------------------------------------------------------
# dense circuits


@dataclass(frozen=True)
class CircuitSpec:
    """Alternating sequence of constant gates and oracle queries.

    ``gates[0]`` acts first. ``oracle`` names the queried slot, ``target``
    the oracle the circuit is meant to reproduce and ``target_qubits`` how
    many leading qubits that target acts on (the rest are ancillas).
    """

    M: int
    gates: tuple = ()
    oracle: str | None = None
    target: str | None = None
    target_qubits: int | None = None
    w_as_constant: bool = False

    def __post_init__(self):
        gates = tuple(self.gates)
        object.__setattr__(self, "gates", gates)
        if self.M < 0 or self.M > MAX_QUBITS:
            raise SizeCapError(f"M={self.M} outside [0, {MAX_QUBITS}]")
        for g in gates:
            if isinstance(g, Query):
                continue
            if not isinstance(g, Constant):
                raise TypeError(f"unsupported gate {g!r}")
            if g.dim != self.dim:
                raise ValueError(f"gate of dimension {g.dim} in a {self.dim}-dimensional circuit")

    @property
    def dim(self) -> int:
        return 2**self.M

    @property
    def query_count(self) -> int:
        return sum(isinstance(g, Query) for g in self.gates)

    @property
    def powers(self) -> tuple[int, ...]:
        return tuple(g.power for g in self.gates if isinstance(g, Query))

    def constants(self) -> list[Constant]:
        return [g for g in self.gates if not isinstance(g, Query)]

    def inverse(self) -> "CircuitSpec":
        return self.replace(gates=tuple(g.inverse() for g in reversed(self.gates)))

    def replace(self, **changes) -> "CircuitSpec":
        fields_ = dict(
            M=self.M,
            gates=self.gates,
            oracle=self.oracle,
            target=self.target,
            target_qubits=self.target_qubits,
            w_as_constant=self.w_as_constant,
        )
        fields_.update(changes)
        return CircuitSpec(**fields_)

    def __add__(self, other: "CircuitSpec") -> "CircuitSpec":
        """``self`` followed by ``other``."""
        if other.M != self.M:
            raise ValueError("cannot concatenate circuits on different systems")
        if self.oracle and other.oracle and self.oracle != other.oracle:
            raise ValueError("cannot concatenate circuits querying different oracles")
        return self.replace(
            gates=self.gates + other.gates,
            oracle=self.oracle or other.oracle,
            w_as_constant=self.w_as_constant or other.w_as_constant,
        )

    def merged(self) -> "CircuitSpec":
        out: list = []
        for g in self.gates:
            if out and not isinstance(g, Query) and not isinstance(out[-1], Query):
                m = _merge(out[-1], g)
                if m is not None:
                    out[-1] = m
                    continue
            out.append(g)
        return self.replace(gates=tuple(out))

    @classmethod
    def from_constants(
        cls,
        constants: Sequence[np.ndarray],
        powers: Sequence[int],
        M: int | None = None,
        **meta,
    ) -> "CircuitSpec":
        """``U_1, Q^{p_1}, U_2, ..., Q^{p_N}, U_{N+1}`` from ``N+1`` matrices."""
        if len(constants) != len(powers) + 1:
            raise ValueError("need one more constant than queries")
        if M is None:
            M = int(np.asarray(constants[0]).shape[0]).bit_length() - 1
        gates: list = [Constant(constants[0])]
        for p, u in zip(powers, constants[1:]):
            gates += [Query(p), Constant(u)]
        return cls(M, tuple(gates), **meta)

    @classmethod
    def identity(cls, M: int, **meta) -> "CircuitSpec":
        return cls(M, (), **meta)

    def to_json(self) -> dict:
        gates = []
        for g in self.gates:
            if isinstance(g, Query):
                gates.append({"kind": "query", "power": g.power})
            else:
                gates.append({"kind": "constant", **g.payload()})
        return {
            "M": self.M,
            "oracle": self.oracle,
            "target": self.target,
            "target_qubits": self.target_qubits,
            "w_as_constant": self.w_as_constant,
            "gates": gates,
        }

    @classmethod
    def from_json(cls, obj: dict, base_dir=None) -> "CircuitSpec":
        from pathlib import Path
        import json

        M = int(obj["M"])
        gates = []
        for g in obj["gates"]:
            kind = g.get("kind")
            if kind == "query":
                gates.append(Query(int(g.get("power", 1))))
            elif kind == "constant":
                if "permutation" in g:
                    gates.append(PermutationGate(g["permutation"]))
                elif "diagonal" in g:
                    gates.append(DiagonalGate(g["diagonal"]))
                elif "front" in g:
                    gates.append(FrontGate(complex_matrix_from_json(g["front"]), 2**M))
                else:
                    mat = g.get("matrix")
                    if isinstance(mat, str):
                        path = Path(base_dir or ".") / mat
                        mat = json.loads(path.read_text())
                    gates.append(Constant(complex_matrix_from_json(mat)))
            else:
                raise ValueError(f"unknown gate kind {kind!r}")
        return cls(
            M,
            tuple(gates),
            oracle=obj.get("oracle"),
            target=obj.get("target"),
            target_qubits=obj.get("target_qubits"),
            w_as_constant=bool(obj.get("w_as_constant", False)),
        )


def _query_matrices(oracle: Oracle, f: FunctionTable, M: int):
    q = oracle.query(f)
    if q.shape[0] > 2**M:
        raise ValueError(f"query of dimension {q.shape[0]} does not fit on {M} qubits")
    return q, q.conj().T


def apply_circuit(
    c: CircuitSpec,
    oracle: Oracle | str,
    f: FunctionTable,
    state: np.ndarray | None = None,
    **params,
) -> np.ndarray:
    """Instantiate the circuit at ``f``.

    Returns the full ``2^M x 2^M`` unitary, or the image of ``state`` (a
    vector or a block of column vectors) when one is given.
    """
    oracle = make_oracle(oracle, **params)
    block = np.eye(c.dim, dtype=complex) if state is None else np.asarray(state, dtype=complex)
    vector = block.ndim == 1
    if vector:
        block = block[:, None]
    if block.shape[0] != c.dim:
        raise ValueError(f"state dimension {block.shape[0]} does not match 2^{c.M}")
    queries = None
    for g in c.gates:
        if isinstance(g, Query):
            if queries is None:
                queries = _query_matrices(oracle, f, c.M)
            block = _apply_front(queries[0] if g.power == 1 else queries[1], block)
        else:
            block = g.apply(block)
    return block[:, 0] if vector else block


def ancilla_zero_columns(M: int, ancilla_bits: int) -> np.ndarray:
    return np.arange(0, 2**M, 2**ancilla_bits)


@dataclass(frozen=True)
class SimulationReport:
    target: str
    per_f_errors: tuple[tuple[tuple[int, ...], float], ...]
    max_error: float
    query_count: int
    exact: bool
    w_as_constant: bool = False
    ancilla_bits: int = 0
    M: int | None = None

    def to_json(self) -> dict:
        return {
            "target": self.target,
            "per_f_errors": [{"f": list(fv), "error": e} for fv, e in self.per_f_errors],
            "max_error": self.max_error,
            "query_count": self.query_count,
            "exact": self.exact,
            "w_as_constant": self.w_as_constant,
            "ancilla_bits": self.ancilla_bits,
            "M": self.M,
        }


def circuit_error(
    c: CircuitSpec, q1: Oracle, q2: Oracle, f: FunctionTable, ancilla_bits: int = 0
) -> float:
    """``|| lift(Q2_f) - C_f ||`` on inputs whose last ``ancilla_bits`` qubits are 0."""
    cols = ancilla_zero_columns(c.M, ancilla_bits)
    inputs = np.eye(c.dim, dtype=complex)[:, cols]
    got = apply_circuit(c, q1, f, inputs)
    want = _apply_front(q2.query(f), inputs)
    return op_norm(want - got)


def approx_error(
    c: CircuitSpec,
    q1: Oracle | str,
    q2: Oracle | str,
    fs: Sequence[FunctionTable],
    ancilla_bits: int = 0,
) -> SimulationReport:
    """Per-function operator-norm distance between the circuit and ``Q2``.

    With ``ancilla_bits > 0`` the distance is measured on the subspace where
    the trailing ancilla qubits start in ``|0>``.
    """
    q1, q2 = make_oracle(q1), make_oracle(q2)
    fs = list(fs)
    if not fs:
        raise ValueError("need at least one function")
    errors = tuple((f.values, circuit_error(c, q1, q2, f, ancilla_bits)) for f in fs)
    worst = max(e for _, e in errors)
    return SimulationReport(
        target=q2.kind,
        per_f_errors=errors,
        max_error=worst,
        query_count=c.query_count,
        exact=worst <= EXACT_TOL,
        w_as_constant=c.w_as_constant,
        ancilla_bits=ancilla_bits,
        M=c.M,
    )


# ---------------------------------------------------------------------------
# named constructions


def adder_gate(n: int) -> PermutationGate:
    """``|a>|y> -> |a>|y + a mod 2^n>`` on ``2n`` qubits."""
    size = 2**n
    a, y = np.divmod(np.arange(size * size), size)
    return PermutationGate(a * size + (y + a) % size, "ADD")


def minimal_simulates_standard(n: int) -> CircuitSpec:
    """Two-query simulation of the standard oracle (``m = n``) by the minimal one.

    ``|x>|y> -> |f(x)>|y> -> |f(x)>|y + f(x)> -> |x>|y + f(x)>``.
    """
    if not 1 <= n <= 5:
        raise SizeCapError("the two-query construction is limited to 1 <= n <= 5")
    return CircuitSpec(
        2 * n,
        (Query(1), adder_gate(n), Query(-1)),
        oracle="min",
        target="std",
        target_qubits=2 * n,
    )


def circuit_W(f: FunctionTable) -> np.ndarray:
    """Orbit-wise Fourier transform ``|f^s(x_l)> -> |psi_{l,s}>``."""
    if not f.is_permutation:
        raise NotAPermutationError(f"{f.values} is not a permutation")
    if f.n > 4:
        raise SizeCapError("circuit_W is limited to n <= 4")
    es = minimal_eigensystem(f)
    orbits = orbit_decomposition(f)
    w = np.zeros((2**f.n, 2**f.n), dtype=complex)
    for col, (ell, s) in enumerate(es.labels):
        w[:, orbits.orbits[ell].members[s]] = es.vectors[:, col]
    return w


def phase_by_register_gate(
    M: int, key_bits: int, phase_table: Mapping[int, float] | Callable[[int], float]
) -> DiagonalGate:
    """Diagonal gate applying ``exp(i theta(G))`` keyed on the last ``key_bits`` qubits."""
    lookup = phase_table if callable(phase_table) else (lambda g: phase_table.get(g, 0.0))
    keys = np.arange(2**M) % 2**key_bits
    table = {int(g): float(lookup(int(g))) for g in np.unique(keys)}
    return DiagonalGate([table[int(g)] for g in keys], "phase")


def locally_basic_sandwich(
    u: CircuitSpec,
    phase_table: Mapping[int, float] | Callable[[int], float],
    key_bits: int,
) -> CircuitSpec:
    """``U``, then a phase keyed on the ancilla register value, then ``U^{-1}``.

    If ``U |psi>|0> = |psi>|G>`` the result maps ``|psi>|0>`` to
    ``exp(i theta(G)) |psi>|0>``.
    """
    phase = phase_by_register_gate(u.M, key_bits, phase_table)
    return u.replace(gates=u.gates + (phase,) + u.inverse().gates)


def qubit_permutation(order: Sequence[int]) -> np.ndarray:
    """Basis map for relabelling qubits: qubit ``j`` of the input lands at ``order[j]``.

    Returns ``perm`` with ``|i> -> |perm[i]>`` (qubit 0 most significant).
    """
    order = list(order)
    total = len(order)
    idx = np.arange(2**total)
    out = np.zeros_like(idx)
    for j, pos in enumerate(order):
        bit = (idx >> (total - 1 - j)) & 1
        out |= bit << (total - 1 - pos)
    return out


def compose_simulations(outer: CircuitSpec, inner: CircuitSpec) -> CircuitSpec:
    """Replace every query of ``outer`` by ``inner`` (reversed for inverse queries).

    ``inner`` must reproduce the oracle that ``outer`` queries. Its leading
    ``inner.target_qubits`` qubits are wired to the front of ``outer`` and its
    ancillas are appended as fresh qubits after ``outer``'s.
    """
    if outer.oracle and inner.target and outer.oracle != inner.target:
        raise ValueError(f"inner simulates {inner.target!r} but outer queries {outer.oracle!r}")
    width = inner.target_qubits if inner.target_qubits is not None else inner.M
    anc = inner.M - width
    total = outer.M + anc
    if total > MAX_QUBITS:
        raise SizeCapError(f"composite needs {total} qubits")
    if width > outer.M:
        raise ValueError("inner target is wider than the outer system")
    mid = outer.M - width
    # inner layout: [inner qubits..., outer's remaining qubits]
    order = list(range(width)) + list(range(outer.M, total)) + list(range(width, outer.M))
    to_natural = PermutationGate(qubit_permutation(order), "wire")
    from_natural = to_natural.inverse()
    lift = 2**mid

    def lifted_inner(circ: CircuitSpec) -> list:
        gates = [from_natural]
        for g in circ.gates:
            if isinstance(g, Query):
                gates.append(g)
            else:
                gates.append(_kron_identity(g, lift))
        gates.append(to_natural)
        return gates

    forward, backward = lifted_inner(inner), lifted_inner(inner.inverse())
    gates: list = []
    for g in outer.gates:
        if isinstance(g, Query):
            gates.extend(forward if g.power == 1 else backward)
        else:
            gates.append(_kron_identity(g, 2**anc))
    return CircuitSpec(
        total,
        tuple(gates),
        oracle=inner.oracle,
        target=outer.target,
        target_qubits=outer.target_qubits,
        w_as_constant=outer.w_as_constant or inner.w_as_constant,
    ).merged()


def _kron_identity(g: Constant, factor: int) -> Constant:
    """``g ⊗ I_factor`` keeping the gate's structure."""
    if factor == 1:
        return g
    if isinstance(g, PermutationGate):
        base = g.perm * factor
        perm = (base[:, None] + np.arange(factor)[None, :]).ravel()
        return PermutationGate(perm, g.label)
    if isinstance(g, DiagonalGate):
        return DiagonalGate(np.repeat(g.phases, factor), g.label)
    if isinstance(g, FrontGate):
        return FrontGate(g.u, g.dim * factor, g.label, check=False)
    return FrontGate(g.matrix, g.dim * factor, g.label, check=False)


def success_probability(
    c: CircuitSpec,
    oracle: Oracle | str,
    f: FunctionTable,
    x: int,
    expected: int,
    out_bits: int,
    initial: np.ndarray | None = None,
) -> float:
    """Probability that the last ``out_bits`` qubits read ``expected``.

    The circuit starts in the basis state ``|x>`` of the whole system (the
    input sits in the low-order qubits, the leading work qubits are ``|0>``)
    unless an explicit ``initial`` state is given.
    """
    if initial is None:
        if not 0 <= x < c.dim:
            raise ValueError(f"input {x} does not fit on {c.M} qubits")
        initial = np.zeros(c.dim, dtype=complex)
        initial[x] = 1.0
    out = apply_circuit(c, oracle, f, initial)
    mask = (np.arange(c.dim) % 2**out_bits) == expected
    return float(np.sum(np.abs(out[mask]) ** 2))


# ---------------------------------------------------------------------------
# symbolic degree tracing


@dataclass(frozen=True)
class DegreeTrace:
    degrees: tuple[int, ...]
    query_counts: tuple[int, ...]
    state: SymbolicState
    basis: np.ndarray


def trace_degree(
    c: CircuitSpec,
    oracle: Oracle | str,
    f: FunctionTable,
    state: np.ndarray,
) -> DegreeTrace:
    """Propagate ``state`` symbolically through ``c`` in the eigenbasis of ``Q_f``.

    Records the trigonometric degree after each gate.
    """
    oracle = make_oracle(oracle)
    es, var_map, D = lifted_var_map(oracle.eigensystem(f), c.dim)
    v = es.vectors
    s = symbolic_init(state, es, var_map, D)
    degrees, counts, used = [s.degree()], [0], 0
    for g in c.gates:
        if isinstance(g, Query):
            s = symbolic_apply_query(s, g.power)
            used += 1
        else:
            s = symbolic_apply_constant(s, v.conj().T @ g.apply(v))
        degrees.append(s.degree())
        counts.append(used)
    return DegreeTrace(tuple(degrees), tuple(counts), s, v)


# ---------------------------------------------------------------------------
# register-level circuits


@dataclass(frozen=True)
class Register:
    name: str
    bits: int


@dataclass(frozen=True)
class StdQuery:
    """Standard-oracle query from register ``src`` into register ``dst``."""

    src: int
    dst: int
    power: int = 1

    def inverse(self):
        return StdQuery(self.src, self.dst, -self.power)


@dataclass(frozen=True)
class Classical:
    """Reversible classical map on register-value tuples."""

    name: str
    forward: Callable[[tuple], tuple]
    backward: Callable[[tuple], tuple]

    def inverse(self):
        return Classical(_inv_label(self.name), self.backward, self.forward)


@dataclass(frozen=True)
class Local:
    """Unitary acting on a single register."""

    reg: int
    matrix: np.ndarray
    name: str = ""

    def inverse(self):
        return Local(self.reg, self.matrix.conj().T, _inv_label(self.name))


@dataclass(frozen=True)
class RegisterPhase:
    """``exp(i * sign * phase(values))`` keyed on the values of ``regs``."""

    regs: tuple[int, ...]
    phase: Callable[..., float]
    sign: int = 1
    name: str = "phase"

    def inverse(self):
        return RegisterPhase(self.regs, self.phase, -self.sign, _inv_label(self.name))


SparseState = dict  # {tuple of register values: amplitude}


@dataclass(frozen=True)
class RegisterCircuit:
    registers: tuple[Register, ...]
    gates: tuple = ()
    w_as_constant: bool = False

    @property
    def qubits(self) -> int:
        return sum(r.bits for r in self.registers)

    @property
    def query_count(self) -> int:
        return sum(isinstance(g, StdQuery) for g in self.gates)

    def index(self, name: str) -> int:
        return [r.name for r in self.registers].index(name)

    def inverse(self) -> "RegisterCircuit":
        return RegisterCircuit(
            self.registers, tuple(g.inverse() for g in reversed(self.gates)), self.w_as_constant
        )

    def __add__(self, other: "RegisterCircuit") -> "RegisterCircuit":
        if other.registers != self.registers:
            raise ValueError("register layouts differ")
        return RegisterCircuit(
            self.registers, self.gates + other.gates, self.w_as_constant or other.w_as_constant
        )

    def zero_key(self, **values) -> tuple:
        return tuple(values.get(r.name, 0) for r in self.registers)

    def run(self, f: FunctionTable, state: SparseState | tuple) -> SparseState:
        if isinstance(state, tuple):
            state = {state: 1.0 + 0j}
        for g in self.gates:
            state = self._apply(g, f, state)
        return state

    def _apply(self, g, f: FunctionTable, state: SparseState) -> SparseState:
        out: dict = {}
        if isinstance(g, StdQuery):
            size = 2 ** self.registers[g.dst].bits
            for key, amp in state.items():
                k = list(key)
                k[g.dst] = (k[g.dst] + g.power * f(k[g.src])) % size
                out[tuple(k)] = out.get(tuple(k), 0j) + amp
        elif isinstance(g, Classical):
            for key, amp in state.items():
                nk = g.forward(key)
                out[nk] = out.get(nk, 0j) + amp
        elif isinstance(g, Local):
            for key, amp in state.items():
                col = g.matrix[:, key[g.reg]]
                for w in np.nonzero(np.abs(col) > 0)[0]:
                    k = list(key)
                    k[g.reg] = int(w)
                    nk = tuple(k)
                    out[nk] = out.get(nk, 0j) + amp * col[w]
        elif isinstance(g, RegisterPhase):
            for key, amp in state.items():
                theta = g.phase(*(key[r] for r in g.regs))
                out[key] = amp * np.exp(1j * g.sign * theta)
        else:
            raise TypeError(f"unsupported register gate {g!r}")
        return {k: a for k, a in out.items() if abs(a) > 1e-14}

    # conversion to a dense circuit

    def key_to_index(self, key: Sequence[int]) -> int:
        idx = 0
        for r, v in zip(self.registers, key):
            idx = (idx << r.bits) | int(v)
        return idx

    def all_keys(self) -> np.ndarray:
        idx = np.arange(2**self.qubits)
        cols = []
        shift = self.qubits
        for r in self.registers:
            shift -= r.bits
            cols.append((idx >> shift) & (2**r.bits - 1))
        return np.stack(cols, axis=1)

    def to_spec(self, target: str | None = None, target_qubits: int | None = None) -> CircuitSpec:
        """Dense equivalent; standard queries are routed through register swaps."""
        M = self.qubits
        if M > MAX_QUBITS:
            raise SizeCapError(f"register layout needs {M} > {MAX_QUBITS} qubits")
        keys = [tuple(k) for k in self.all_keys().tolist()]
        dim = 2**M
        gates: list = []
        for g in self.gates:
            if isinstance(g, StdQuery):
                swap = self._routing(g, keys)
                if swap is not None:
                    gates.append(swap)
                gates.append(Query(g.power))
                if swap is not None:
                    gates.append(swap.inverse())
            elif isinstance(g, Classical):
                gates.append(
                    PermutationGate([self.key_to_index(g.forward(k)) for k in keys], g.name)
                )
            elif isinstance(g, Local):
                if g.reg == 0:
                    gates.append(FrontGate(g.matrix, dim, g.name, check=False))
                else:
                    before = 2 ** sum(r.bits for r in self.registers[: g.reg])
                    after = dim // before // g.matrix.shape[0]
                    gates.append(
                        Constant(np.kron(np.kron(np.eye(before), g.matrix), np.eye(after)), g.name)
                    )
            elif isinstance(g, RegisterPhase):
                gates.append(
                    DiagonalGate([g.sign * g.phase(*(k[r] for r in g.regs)) for k in keys], g.name)
                )
        return CircuitSpec(
            M,
            tuple(gates),
            oracle="std",
            target=target,
            target_qubits=target_qubits,
            w_as_constant=self.w_as_constant,
        ).merged()

    def _routing(self, g: StdQuery, keys) -> PermutationGate | None:
        """Swap registers so the query's (src, dst) pair sits on registers (0, 1)."""
        if (g.src, g.dst) == (0, 1):
            return None
        bits = {self.registers[i].bits for i in (0, 1, g.src, g.dst)}
        if len(bits) != 1:
            raise ValueError("query routing needs equally sized registers")

        def route(key):
            k = list(key)
            k[0], k[g.src] = k[g.src], k[0]
            dst = g.src if g.dst == 0 else g.dst
            k[1], k[dst] = k[dst], k[1]
            return tuple(k)

        return PermutationGate([self.key_to_index(route(k)) for k in keys], "route")


def orbit_register_bits(p_bound: int) -> int:
    """Bits holding ``r - 1`` or ``s`` for orbit lengths up to ``p_bound``."""
    return max(1, (p_bound - 1).bit_length())


def _orbit_data(sequence: Sequence[int], p_bound: int) -> tuple[int, int] | None:
    """``(r, s)`` from ``x, f(x), ..., f^p(x)``; ``None`` if the orbit is too long."""
    x = sequence[0]
    r = next((k for k in range(1, p_bound + 1) if sequence[k] == x), None)
    if r is None:
        return None
    orbit = sequence[:r]
    k_min = orbit.index(min(orbit))
    return r, (r - k_min) % r


def circuit_V(n: int, p_bound: int) -> RegisterCircuit:
    """Register circuit writing orbit length and position of ``x``.

    Layout: ``x`` (n bits), ``p_bound`` iterate registers (n bits each),
    ``r`` holding ``r - 1`` and ``s``, each ``orbit_register_bits(p_bound)``
    bits wide. Net action on permutations with every orbit no longer than
    ``p_bound``: ``|x>|0..0>|0>|0> -> |x>|0..0>|r-1>|s>`` with
    ``x = f^s(x_min)``; uses ``2 * p_bound`` standard queries.
    """
    if n < 1 or p_bound < 1:
        raise ValueError("need n >= 1 and p_bound >= 1")
    wb = orbit_register_bits(p_bound)
    regs = (
        (Register("x", n),)
        + tuple(Register(f"it{k}", n) for k in range(1, p_bound + 1))
        + (Register("r", wb), Register("s", wb))
    )
    ri, si = p_bound + 1, p_bound + 2
    mod = 2**wb

    def step2(sign):
        def fn(key):
            data = _orbit_data(key[: p_bound + 1], p_bound)
            if data is None:
                return key
            r, s = data
            k = list(key)
            k[ri] = (k[ri] + sign * (r - 1)) % mod
            k[si] = (k[si] + sign * s) % mod
            return tuple(k)

        return fn

    iterate = tuple(StdQuery(k, k + 1) for k in range(p_bound))
    gates = iterate + (Classical("orbit", step2(1), step2(-1)),) + tuple(
        q.inverse() for q in reversed(iterate)
    )
    return RegisterCircuit(regs, gates)


@dataclass(frozen=True)
class OrbitRegisterReport:
    """Outputs of ``circuit_V`` per input ``x``."""

    rows: tuple[dict, ...]
    violations: tuple[int, ...]

    @property
    def ok(self) -> bool:
        return not self.violations


def run_circuit_V(f: FunctionTable, p_bound: int) -> OrbitRegisterReport:
    """Run ``circuit_V`` on every basis input and decode ``(r, s)``.

    Inputs whose orbit is longer than ``p_bound`` are listed as violations.
    """
    if not f.is_permutation:
        raise NotAPermutationError(f"{f.values} is not a permutation")
    v = circuit_V(f.n, p_bound)
    ri, si = v.index("r"), v.index("s")
    rows, bad = [], []
    for x in range(2**f.n):
        out = v.run(f, v.zero_key(x=x))
        (key, amp), = out.items()
        clean = all(key[k] == 0 for k in range(1, p_bound + 1)) and key[0] == x
        seq = [f.iterate(x, k) for k in range(p_bound + 1)]
        if _orbit_data(seq, p_bound) is None:
            bad.append(x)
        rows.append(
            {"x": x, "r": key[ri] + 1, "s": key[si], "ancilla_clean": clean, "amplitude": amp}
        )
    return OrbitRegisterReport(tuple(rows), tuple(bad))


def simulate_min_via_std(
    f: FunctionTable, p_bound: int
) -> tuple[SimulationReport, RegisterCircuit]:
    """Standard-oracle simulation of the minimal query at a bounded-orbit permutation.

    Builds ``U = W V W^{-1}`` (``W`` synthesised from the orbits and counted
    as zero queries), sandwiches the phase ``2π s / r`` keyed on the orbit
    registers between ``U`` and ``U^{-1}``, and checks the result against the
    minimal query on inputs whose ancillas start at zero.
    """
    if not f.is_permutation:
        raise NotAPermutationError(f"{f.values} is not a permutation")
    orbits = orbit_decomposition(f)
    if orbits.max_length > p_bound:
        raise PreconditionError(
            f"orbit of length {orbits.max_length} exceeds p_bound={p_bound}"
        )
    v = circuit_V(f.n, p_bound)
    w = circuit_W(f)
    u = RegisterCircuit(
        v.registers, (Local(0, w.conj().T, "W^-1"),) + v.gates + (Local(0, w, "W"),), True
    )
    ri, si = v.index("r"), v.index("s")
    phase = RegisterPhase((ri, si), lambda rv, sv: TWO_PI * sv / (rv + 1))
    full = RegisterCircuit(u.registers, u.gates + (phase,) + u.inverse().gates, True)

    target = build_minimal(f)
    zero = v.zero_key()
    outputs = [full.run(f, (x,) + zero[1:]) for x in range(2**f.n)]
    keys = sorted({k for out in outputs for k in out} | {(y,) + zero[1:] for y in range(2**f.n)})
    pos = {k: i for i, k in enumerate(keys)}
    got = np.zeros((len(keys), 2**f.n), dtype=complex)
    want = np.zeros_like(got)
    for x, out in enumerate(outputs):
        for k, a in out.items():
            got[pos[k], x] = a
        for y in range(2**f.n):
            want[pos[(y,) + zero[1:]], x] = target[y, x]
    err = op_norm(got - want)
    report = SimulationReport(
        target="min",
        per_f_errors=((f.values, err),),
        max_error=err,
        query_count=full.query_count,
        exact=err <= EXACT_TOL,
        w_as_constant=True,
        ancilla_bits=full.qubits - f.n,
        M=full.qubits,
    )
    return report, full
