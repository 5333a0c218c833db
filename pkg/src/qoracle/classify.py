"""Decide the nonentangled / basic / simple predicates by enumeration.

Every decision is made over an explicit family of function tables (all of
``F_n^m`` by default, or a restricted sub-family such as the permutations)
and is backed by a witness that can be re-checked independently.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from ._parallel import parallel_map
from .errors import ContractViolation, SizeCapError
from .linalg import (
    EigenSystem,
    cluster_phases,
    eig_unitary,
    op_norm,
    phase_distance,
    schur_eig,
)
from .oracles import FunctionTable, Oracle, make_oracle

ENUMERATION_CAP = 16  # m * 2^n
NULLSPACE_TOL = 1e-9
STABILITY_TOL = 1e-9
PHASE_TOL = 1e-9
DISTINCT_TOL = 1e-6
SEARCH_ATTEMPTS = 64


def enumerate_functions(n: int, m: int) -> list[FunctionTable]:
    """All ``2^(m 2^n)`` tables in lexicographic order (``f ≡ 0`` first)."""
    if m * 2**n > ENUMERATION_CAP:
        raise SizeCapError(f"m*2^n = {m * 2**n} exceeds the enumeration cap {ENUMERATION_CAP}")
    return [
        FunctionTable(n, m, values)
        for values in itertools.product(range(2**m), repeat=2**n)
    ]


def enumerate_permutations(n: int) -> list[FunctionTable]:
    if 2**n > 8:
        raise SizeCapError("permutation enumeration is limited to n <= 3")
    return [FunctionTable(n, n, p) for p in itertools.permutations(range(2**n))]


def function_family(n: int, m: int, family: str | Sequence[FunctionTable] | None) -> list[FunctionTable]:
    if family is None or family == "all":
        return enumerate_functions(n, m)
    if family == "permutations":
        if n != m:
            raise ValueError("the permutation family needs n == m")
        return enumerate_permutations(n)
    fs = list(family)
    if not fs:
        raise ValueError("empty function family")
    return fs


# ---------------------------------------------------------------------------
# commutant


@dataclass(frozen=True)
class CommutantBasis:
    """Basis of ``{A : [U, A ⊗ I] = 0}`` for ``A`` on the front register."""

    front_dim: int
    basis: tuple[np.ndarray, ...]

    @property
    def dimension(self) -> int:
        return len(self.basis)


def product_commutant(u: np.ndarray, front_bits: int) -> CommutantBasis:
    """Null space of ``A -> U (A⊗I) - (A⊗I) U`` by singular-value thresholding."""
    u = np.asarray(u, dtype=complex)
    dim = u.shape[0]
    front = 2**front_bits
    if dim % front:
        raise ValueError(f"front register of {front_bits} bits does not divide dimension {dim}")
    back = dim // front
    eye_back = np.eye(back)
    cols = []
    for a in range(front):
        for b in range(front):
            e = np.zeros((front, front))
            e[a, b] = 1.0
            x = np.kron(e, eye_back)
            cols.append((u @ x - x @ u).ravel())
    lmat = np.array(cols).T
    _, s, vh = np.linalg.svd(lmat)
    null = [vh[j].conj().reshape(front, front) for j in range(len(s)) if s[j] <= NULLSPACE_TOL]
    return CommutantBasis(front, tuple(null))


def _hermitian_span(basis: Iterable[np.ndarray]) -> list[np.ndarray]:
    herms = []
    for a in basis:
        for h in ((a + a.conj().T) / 2, (a - a.conj().T) / 2j):
            if np.linalg.norm(h) > 1e-12:
                herms.append(h)
    return herms


@dataclass(frozen=True)
class NonentangledWitness:
    status: str  # "yes" | "no" | "inconclusive"
    alpha: np.ndarray | None = None  # columns |alpha_x>
    commutant_dimension: int = 0
    leakage: float = float("nan")


def nonentangled_witness(
    q: np.ndarray, front_bits: int, rng: np.random.Generator
) -> NonentangledWitness:
    """Find an orthonormal front basis whose blocks ``W_x`` are ``q``-stable."""
    comm = product_commutant(q, front_bits)
    front = 2**front_bits
    if front == 1:
        return NonentangledWitness("yes", np.eye(1, dtype=complex), comm.dimension, 0.0)
    if comm.dimension <= 1:
        return NonentangledWitness("no", None, comm.dimension)
    herms = _hermitian_span(comm.basis)
    back = q.shape[0] // front
    for _ in range(SEARCH_ATTEMPTS):
        coef = rng.standard_normal(len(herms))
        h = sum(c * hm for c, hm in zip(coef, herms))
        h = (h + h.conj().T) / 2
        h = h / op_norm(h)
        w, v = np.linalg.eigh(h)
        if np.min(np.diff(w)) <= DISTINCT_TOL:
            continue
        leak = 0.0
        for x in range(front):
            proj = np.kron(np.outer(v[:, x], v[:, x].conj()), np.eye(back))
            leak = max(leak, op_norm(q @ proj - proj @ q @ proj))
        if leak <= STABILITY_TOL:
            return NonentangledWitness("yes", v, comm.dimension, leak)
    return NonentangledWitness("inconclusive", None, comm.dimension)


# ---------------------------------------------------------------------------
# report


@dataclass
class ClassificationReport:
    """Outcome of classifying one oracle instance over a function family.

    ``simple`` is the full predicate (common eigenbasis *and* basic);
    ``common_eigenbasis`` is the raw simultaneous-diagonalisation verdict.
    """

    oracle: dict
    n: int
    m: int
    family: str
    enumerated_function_count: int
    nonentangled: bool
    nonentangled_inconclusive: bool = False
    basic: bool = False
    common_eigenbasis: bool = False
    simple: bool = False
    witnesses: dict = field(default_factory=dict)
    phase_tables: dict | None = None
    common_basis: np.ndarray | None = None
    counterexamples: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.simple and not self.basic:
            raise ContractViolation("invalid report: simple but not basic")
        if self.basic and not self.nonentangled:
            raise ContractViolation("invalid report: basic but not nonentangled")

    def summary(self) -> dict:
        return {
            "simple": self.simple,
            "basic": self.basic,
            "nonentangled": self.nonentangled,
        }

    def to_json(self, witness: bool = False) -> dict:
        out = {
            "oracle": self.oracle,
            "n": self.n,
            "m": self.m,
            "family": self.family,
            "enumerated_function_count": self.enumerated_function_count,
            **self.summary(),
            "nonentangled_inconclusive": self.nonentangled_inconclusive,
            "common_eigenbasis": self.common_eigenbasis,
            "counterexamples": self.counterexamples,
        }
        if self.phase_tables is not None:
            out["phase_tables"] = [
                {"label": list(k), "table": {str(v): p for v, p in sorted(t.items())}}
                for k, t in sorted(self.phase_tables.items())
            ]
        if witness:
            out["witnesses"] = {
                str(k): None if w is None else w for k, w in self.witnesses.items()
            }
            if self.common_basis is not None:
                out["common_basis"] = self.common_basis
        return out


def _family_label(family) -> str:
    if family is None:
        return "all"
    return family if isinstance(family, str) else "custom"


def _front_bits(oracle: Oracle, n: int) -> int:
    return getattr(oracle, "front_bits", n)


# ---------------------------------------------------------------------------
# detectors


@dataclass(frozen=True)
class NonentangledResult:
    nonentangled: bool
    inconclusive: bool
    witnesses: tuple[NonentangledWitness, ...]
    counterexample: FunctionTable | None


def detect_nonentangled(
    oracle: Oracle | str,
    n: int,
    m: int,
    family=None,
    seed: int = 0,
    **params,
) -> NonentangledResult:
    """Nonentangled verdict with a stable-subspace witness for every ``f``.

    Each ``f`` gets its own generator seeded from ``(seed, index)``, so the
    outcome does not depend on evaluation order.
    """
    oracle = make_oracle(oracle, **params)
    fs = function_family(n, m, family)
    front_bits = _front_bits(oracle, n)

    def one(item):
        idx, f = item
        rng = np.random.default_rng([seed, idx])
        return nonentangled_witness(oracle.query(f), front_bits, rng)

    results = parallel_map(one, list(enumerate(fs)))
    counter = next((f for f, r in zip(fs, results) if r.status == "no"), None)
    all_yes = all(r.status == "yes" for r in results)
    inconclusive = counter is None and not all_yes
    return NonentangledResult(all_yes, inconclusive, tuple(results), counter)


@dataclass(frozen=True)
class SimpleResult:
    common_eigenbasis: bool
    basis: np.ndarray | None
    off_diagonal: float
    counterexample: tuple[FunctionTable, FunctionTable] | None


def _reference_eigensystem(oracle: Oracle, f: FunctionTable) -> EigenSystem:
    if oracle.has_analytic_eigensystem():
        return oracle.eigensystem(f)
    return eig_unitary(oracle.query(f))


def detect_simple(
    oracle: Oracle | str,
    n: int,
    m: int,
    family=None,
    **params,
) -> SimpleResult:
    """Search for one orthonormal basis diagonalising every query.

    Starts from the reference eigenbasis (first function of the family) and
    refines each degenerate cluster with the next query, as in a
    simultaneous diagonalisation. The final basis is re-checked against all
    queries.
    """
    oracle = make_oracle(oracle, **params)
    fs = function_family(n, m, family)
    queries = [oracle.query(f) for f in fs]
    ref = _reference_eigensystem(oracle, fs[0])
    basis = ref.vectors.copy()
    groups = [g for g in cluster_phases(ref.phases)]

    for k, q in enumerate(queries[1:], start=1):
        new_groups = []
        for g in groups:
            vc = basis[:, g]
            block = vc.conj().T @ q @ vc
            if op_norm(q @ vc - vc @ block) > STABILITY_TOL:
                partner = next(
                    j for j in range(k) if op_norm(queries[j] @ q - q @ queries[j]) > STABILITY_TOL
                )
                return SimpleResult(False, None, float("nan"), (fs[partner], fs[k]))
            if g.size == 1:
                new_groups.append(g)
                continue
            phases, z = schur_eig(block)
            basis[:, g] = vc @ z
            new_groups.extend(g[sub] for sub in cluster_phases(phases))
        groups = new_groups

    off = 0.0
    for q in queries:
        d = basis.conj().T @ q @ basis
        off = max(off, float(np.linalg.norm(d - np.diag(np.diag(d)))))
    if off > STABILITY_TOL:
        return SimpleResult(False, None, off, None)
    return SimpleResult(True, basis, off, None)


@dataclass(frozen=True)
class BasicResult:
    basic: bool
    phase_tables: dict | None
    matching: str  # "overlap" | "sorted" | "none"
    counterexample: dict | None


def _labelled_blocks(oracle: Oracle, f: FunctionTable, es: EigenSystem) -> dict[int, list[int]]:
    blocks: dict[int, list[int]] = {}
    for j, lab in enumerate(es.labels):
        blocks.setdefault(oracle.block_of(lab, f), []).append(j)
    return blocks


def _numeric_blocked_eigensystem(
    q: np.ndarray, alpha: np.ndarray, front_bits: int
) -> EigenSystem:
    """Eigenvectors ``|alpha_x>|beta_{x,i}>`` from a stable-subspace witness."""
    front = 2**front_bits
    back = q.shape[0] // front
    vecs, phases, labels = [], [], []
    for x in range(front):
        frame = np.kron(alpha[:, [x]], np.eye(back))
        block = frame.conj().T @ q @ frame
        ph, z = schur_eig(block)
        vecs.append(frame @ z)
        phases.extend(ph)
        labels.extend((x, i) for i in range(back))
    return EigenSystem(np.array(phases), np.hstack(vecs), tuple(labels))


def _greedy_match(ref_vecs: np.ndarray, vecs: np.ndarray) -> list[int]:
    """``out[i]`` is the column of ``vecs`` assigned to reference column ``i``."""
    return _greedy_match_scores(np.abs(ref_vecs.conj().T @ vecs))


def detect_basic(
    oracle: Oracle | str,
    n: int,
    m: int,
    family=None,
    witnesses: Sequence[NonentangledWitness] | None = None,
    **params,
) -> BasicResult:
    """Decide whether each eigenphase is a function of ``f(x)`` alone.

    Eigenvectors are grouped into ``x``-blocks (from the analytic labels, or
    from the nonentangled witness when no analytic eigensystem exists).
    Labels inside a block are first matched across functions by greatest
    overlap with the reference function's eigenvectors; if that renumbering
    produces a conflict, the sorted-phase renumbering is tried, which
    succeeds exactly when some within-block renumbering does.
    """
    oracle = make_oracle(oracle, **params)
    fs = function_family(n, m, family)
    front_bits = _front_bits(oracle, n)

    systems = []
    for idx, f in enumerate(fs):
        if oracle.has_analytic_eigensystem():
            es = oracle.eigensystem(f)
            blocks = _labelled_blocks(oracle, f, es)
        else:
            w = witnesses[idx] if witnesses is not None else None
            if w is None or w.status != "yes":
                rng = np.random.default_rng([0, idx])
                w = nonentangled_witness(oracle.query(f), front_bits, rng)
            if w.status != "yes":
                return BasicResult(False, None, "none", {"reason": "not nonentangled", "f": f.values})
            es = _numeric_blocked_eigensystem(oracle.query(f), w.alpha, front_bits)
            blocks = _labelled_blocks(oracle, f, es)
        systems.append((es, blocks))

    if not oracle.has_analytic_eigensystem():
        systems = _align_numeric_blocks(systems)

    ref_es, ref_blocks = systems[0]
    tables, conflict = _tables_by_overlap(fs, systems, ref_es, ref_blocks)
    if conflict is None:
        return BasicResult(True, tables, "overlap", None)
    tables, conflict = _tables_by_sorting(fs, systems)
    if conflict is None:
        return BasicResult(True, tables, "sorted", None)
    return BasicResult(False, None, "none", conflict)


def _align_numeric_blocks(systems):
    """Renumber numeric ``x``-blocks to follow the reference by overlap."""
    ref_es, ref_blocks = systems[0]
    keys = sorted(ref_blocks)
    ref_frames = [ref_es.vectors[:, ref_blocks[x]] for x in keys]
    out = [systems[0]]
    for es, blocks in systems[1:]:
        frames = [es.vectors[:, blocks[x]] for x in keys]
        overlap = np.array(
            [[np.linalg.norm(a.conj().T @ b) for b in frames] for a in ref_frames]
        )
        assign = _greedy_match_scores(overlap)
        out.append((es, {keys[i]: blocks[keys[assign[i]]] for i in range(len(keys))}))
    return out


def _greedy_match_scores(overlap: np.ndarray) -> list[int]:
    # pairs taken in decreasing overlap, ties by index order
    size = overlap.shape[0]
    pairs = sorted((-round(overlap[i, j], 12), i, j) for i in range(size) for j in range(size))
    out = [-1] * size
    used = set()
    for _, i, j in pairs:
        if out[i] < 0 and j not in used:
            out[i] = j
            used.add(j)
    return out


def _record(tables, key, value, phase, f, conflict_info):
    table = tables.setdefault(key, {})
    if value in table:
        if phase_distance(table[value][0], phase) > PHASE_TOL:
            return {
                "label": key,
                "f_x": value,
                "phases": [table[value][0], phase],
                "functions": [list(table[value][1].values), list(f.values)],
                **conflict_info,
            }
    else:
        table[value] = (phase, f)
    return None


def _tables_by_overlap(fs, systems, ref_es, ref_blocks):
    tables: dict = {}
    for f, (es, blocks) in zip(fs, systems):
        for x, cols in sorted(blocks.items()):
            ref_cols = ref_blocks[x]
            if len(cols) != len(ref_cols):
                return None, {"label": (x,), "reason": "block sizes differ"}
            match = _greedy_match(ref_es.vectors[:, ref_cols], es.vectors[:, cols])
            for i, j in enumerate(match):
                bad = _record(tables, (x, i), f(x), float(es.phases[cols[j]]), f, {"rule": "overlap"})
                if bad:
                    return None, bad
    return _strip(tables), None


def _tables_by_sorting(fs, systems):
    tables: dict = {}
    for f, (es, blocks) in zip(fs, systems):
        for x, cols in sorted(blocks.items()):
            ph = np.sort(es.phases[cols])
            # a phase just below 2*pi is the same point as 0
            ph = np.sort(np.where(ph > 2 * np.pi - PHASE_TOL, 0.0, ph))
            for i, p in enumerate(ph):
                bad = _record(tables, (x, i), f(x), float(p), f, {"rule": "sorted"})
                if bad:
                    return None, bad
    return _strip(tables), None


def _strip(tables):
    return {k: {v: p for v, (p, _) in t.items()} for k, t in tables.items()}


# ---------------------------------------------------------------------------
# driver


def classify(
    oracle: Oracle | str,
    n: int,
    m: int,
    family=None,
    seed: int = 0,
    **params,
) -> ClassificationReport:
    """Run all three detectors and assemble a hierarchy-consistent report."""
    oracle = make_oracle(oracle, **params)
    fs = function_family(n, m, family)
    ne = detect_nonentangled(oracle, n, m, fs, seed=seed)
    report = ClassificationReport(
        oracle=oracle.describe(),
        n=n,
        m=m,
        family=_family_label(family),
        enumerated_function_count=len(fs),
        nonentangled=ne.nonentangled,
        nonentangled_inconclusive=ne.inconclusive,
        witnesses={f.values: w.alpha for f, w in zip(fs, ne.witnesses)},
    )
    if ne.counterexample is not None:
        report.counterexamples["nonentangled"] = list(ne.counterexample.values)

    sim = detect_simple(oracle, n, m, fs)
    report.common_eigenbasis = sim.common_eigenbasis
    if sim.common_eigenbasis:
        report.common_basis = sim.basis
    elif sim.counterexample is not None:
        report.counterexamples["common_eigenbasis"] = [list(f.values) for f in sim.counterexample]

    if ne.nonentangled:
        basic = detect_basic(oracle, n, m, fs, witnesses=ne.witnesses)
        report.basic = basic.basic
        report.phase_tables = basic.phase_tables
        if basic.counterexample is not None:
            report.counterexamples["basic"] = basic.counterexample
    report.simple = report.basic and report.common_eigenbasis
    report.__post_init__()
    return report
