import numpy as np
import pytest
from hypothesis import given, settings

from qoracle.circuits import (
    CircuitSpec,
    Constant,
    DiagonalGate,
    PermutationGate,
    Query,
    apply_circuit,
    approx_error,
    circuit_error,
    circuit_W,
    compose_simulations,
    locally_basic_sandwich,
    minimal_simulates_standard,
    qubit_permutation,
    run_circuit_V,
    simulate_min_via_std,
    success_probability,
    trace_degree,
)
from qoracle.classify import enumerate_permutations
from qoracle.errors import NotAPermutationError, PreconditionError
from qoracle.linalg import is_unitary, op_norm, random_unitary
from qoracle.oracles import (
    ConjugatedOracle,
    FunctionTable,
    build_minimal,
    build_standard,
    make_oracle,
)

from conftest import permutations, seeds

H = np.array([[1, 1], [1, -1]]) / np.sqrt(2)


def perm(values):
    n = len(values).bit_length() - 1
    return FunctionTable(n, n, tuple(values))


def random_circuit(M, N, rng):
    constants = [random_unitary(2**M, rng) for _ in range(N + 1)]
    powers = [int(p) for p in rng.choice([1, -1], size=N)]
    return CircuitSpec.from_constants(constants, powers, M)


class TestApplyCircuit:
    def test_empty_is_identity(self):
        f = FunctionTable(1, 1, (1, 0))
        np.testing.assert_array_equal(apply_circuit(CircuitSpec.identity(2), "std", f), np.eye(4))

    def test_inverse_pair(self):
        f = FunctionTable(1, 1, (1, 0))
        c = CircuitSpec(2, (Query(1), Query(-1)))
        np.testing.assert_allclose(apply_circuit(c, "std", f), np.eye(4))

    def test_single_query(self):
        f = FunctionTable(1, 1, (1, 0))
        np.testing.assert_array_equal(apply_circuit(CircuitSpec(2, (Query(1),)), "std", f), build_standard(f))

    def test_query_lifted_to_front(self):
        f = FunctionTable(1, 1, (1, 0))
        u = apply_circuit(CircuitSpec(2, (Query(1),)), "cp", f)
        np.testing.assert_allclose(u, np.diag([-1, -1, 1, 1]), atol=1e-12)

    def test_query_too_wide(self):
        with pytest.raises(ValueError):
            apply_circuit(CircuitSpec(1, (Query(1),)), "std", FunctionTable(1, 1, (0, 0)))

    def test_non_unitary_constant(self):
        with pytest.raises(Exception):
            Constant(np.diag([1.0, 2.0]))

    @given(seeds)
    @settings(max_examples=20, deadline=None)
    def test_inverse_circuit(self, seed):
        rng = np.random.default_rng(seed)
        c = random_circuit(2, 3, rng)
        f = FunctionTable.random(1, 1, rng)
        u = apply_circuit(c, "std", f)
        assert is_unitary(u)
        np.testing.assert_allclose(apply_circuit(c.inverse(), "std", f), u.conj().T, atol=1e-9)

    @given(seeds)
    @settings(max_examples=15, deadline=None)
    def test_structured_gates_match_dense(self, seed):
        rng = np.random.default_rng(seed)
        p = PermutationGate(rng.permutation(8))
        d = DiagonalGate(rng.uniform(0, 2 * np.pi, 8))
        block = random_unitary(8, rng)
        for g in (p, d):
            np.testing.assert_allclose(g.apply(block), g.matrix @ block, atol=1e-12)
            np.testing.assert_allclose(g.inverse().matrix, g.matrix.conj().T, atol=1e-12)

    def test_json_roundtrip(self, rng):
        c = random_circuit(2, 2, rng)
        c = c.replace(gates=c.gates + (PermutationGate([1, 0, 3, 2]), DiagonalGate([0, 1, 2, 3])))
        back = CircuitSpec.from_json(c.to_json())
        f = FunctionTable(1, 1, (1, 1))
        np.testing.assert_allclose(apply_circuit(back, "std", f), apply_circuit(c, "std", f), atol=1e-12)
        assert back.query_count == c.query_count

    def test_json_file_reference(self, tmp_path):
        from qoracle.jsonio import complex_matrix_to_json, dumps

        (tmp_path / "h.json").write_text(dumps(complex_matrix_to_json(H)))
        c = CircuitSpec.from_json({"M": 1, "gates": [{"kind": "constant", "matrix": "h.json"}]}, tmp_path)
        np.testing.assert_allclose(c.gates[0].matrix, H, atol=1e-15)


class TestApproxError:
    def test_exact(self):
        report = approx_error(CircuitSpec(2, (Query(1),)), "std", "std", enumerate_permutations(1))
        assert report.exact and report.max_error == 0

    def test_identity_vs_complex_phase(self):
        f = FunctionTable(1, 1, (1, 0))
        report = approx_error(CircuitSpec.identity(1), "cp", "cp", [f])
        assert report.max_error == pytest.approx(2.0)

    def test_empty_family(self):
        with pytest.raises(ValueError):
            approx_error(CircuitSpec.identity(1), "cp", "cp", [])

    def test_max_is_max(self, rng):
        c = random_circuit(2, 2, rng)
        fs = [FunctionTable(1, 1, v) for v in [(0, 0), (0, 1), (1, 0), (1, 1)]]
        report = approx_error(c, "std", "std", fs)
        assert report.max_error == max(e for _, e in report.per_f_errors)

    @given(seeds)
    @settings(max_examples=10, deadline=None)
    def test_conjugation_invariance(self, seed):
        rng = np.random.default_rng(seed)
        v = random_unitary(4, rng)
        c = random_circuit(2, 2, rng)
        conj_c = c.replace(
            gates=tuple(g if isinstance(g, Query) else Constant(v @ g.matrix @ v.conj().T) for g in c.gates)
        )
        f = FunctionTable.random(1, 1, rng)
        std = make_oracle("std")
        conj = ConjugatedOracle(std, v)
        a = circuit_error(c, std, std, f)
        b = circuit_error(conj_c, conj, conj, f)
        assert a == pytest.approx(b, abs=1e-9)


class TestMinimalSimulatesStandard:
    def test_hand_trace(self):
        f = perm([1, 0])
        u = apply_circuit(minimal_simulates_standard(1), "min", f)
        for x in range(2):
            for y in range(2):
                out = u[:, 2 * x + y]
                assert out[2 * x + (y + f(x)) % 2] == pytest.approx(1)

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_exact_on_all_permutations(self, n):
        c = minimal_simulates_standard(n)
        assert c.query_count == 2
        report = approx_error(c, "min", "std", enumerate_permutations(n))
        assert report.max_error <= 1e-10


class TestCircuitVW:
    def test_identity_orbits(self):
        report = run_circuit_V(perm([0, 1, 2, 3]), 4)
        assert all(r["r"] == 1 and r["s"] == 0 for r in report.rows)

    def test_four_cycle(self):
        report = run_circuit_V(perm([1, 2, 3, 0]), 4)
        row = report.rows[2]
        assert (row["r"], row["s"]) == (4, 2)
        assert all(r["ancilla_clean"] for r in report.rows)

    def test_long_orbit_flagged(self):
        report = run_circuit_V(perm([1, 2, 3, 0]), 2)
        assert not report.ok

    def test_W_identity(self):
        np.testing.assert_allclose(circuit_W(perm([0, 1])), np.eye(2), atol=1e-15)

    def test_W_two_cycle(self):
        np.testing.assert_allclose(circuit_W(perm([1, 0])), H, atol=1e-12)

    def test_W_non_permutation(self):
        with pytest.raises(NotAPermutationError):
            circuit_W(FunctionTable(1, 1, (0, 0)))

    @given(permutations(n_min=3, n_max=3))
    @settings(max_examples=10, deadline=None)
    def test_W_diagonalises_minimal(self, f):
        w = circuit_W(f)
        d = w.conj().T @ build_minimal(f) @ w
        assert op_norm(d - np.diag(np.diag(d))) < 1e-10


class TestSandwich:
    def test_trivial(self):
        c = locally_basic_sandwich(CircuitSpec.identity(2), {}, 1)
        np.testing.assert_allclose(apply_circuit(c, "std", FunctionTable(1, 1, (1, 0))), np.eye(4))

    def test_marker_sign_flip(self):
        marker = CircuitSpec(2, (Query(1),), oracle="std")
        c = locally_basic_sandwich(marker, {1: np.pi}, 1)
        assert c.query_count == 2
        for values in [(0, 0), (0, 1), (1, 0), (1, 1)]:
            f = FunctionTable(1, 1, values)
            assert circuit_error(c, make_oracle("std"), make_oracle("cp"), f, ancilla_bits=1) < 1e-12

    def test_inverse_sandwich(self, rng):
        c = locally_basic_sandwich(random_circuit(2, 1, rng), {0: 0.3, 1: 1.1}, 1)
        f = FunctionTable(1, 1, (1, 0))
        u = apply_circuit(c + c.inverse(), "std", f)
        np.testing.assert_allclose(u, np.eye(4), atol=1e-10)


class TestMinViaStd:
    @pytest.mark.parametrize(
        "values, p_bound", [([0, 1, 2, 3], 1), ([1, 0, 3, 2], 2), ([1, 2, 3, 0], 4)]
    )
    def test_examples(self, values, p_bound):
        report, circuit = simulate_min_via_std(perm(values), p_bound)
        assert report.exact
        assert report.query_count == 4 * p_bound
        assert report.w_as_constant
        assert circuit.query_count == report.query_count

    def test_long_orbit(self):
        with pytest.raises(PreconditionError):
            simulate_min_via_std(perm([1, 2, 3, 0]), 3)

    @given(permutations(n_min=2, n_max=3))
    @settings(max_examples=25, deadline=None)
    def test_exact_for_bounded_orbits(self, f):
        report, _ = simulate_min_via_std(f, 8)
        assert report.max_error <= 1e-8

    def test_dense_spec_agrees(self):
        f = perm([1, 0, 3, 2])
        _, reg = simulate_min_via_std(f, 2)
        dense = reg.to_spec(target="min", target_qubits=2)
        assert circuit_error(dense, make_oracle("std"), make_oracle("min"), f, dense.M - 2) < 1e-10


class TestCompose:
    def test_outer_without_queries(self, rng):
        outer = CircuitSpec.from_constants([random_unitary(4, rng)], [], 2, oracle="min", target="std")
        inner = minimal_simulates_standard(1).replace(target="min", target_qubits=1)
        comp = compose_simulations(outer, inner)
        f = perm([1, 0])
        np.testing.assert_allclose(
            apply_circuit(comp, "min", f)[::2, ::2], apply_circuit(outer, "min", f), atol=1e-12
        )

    def test_slot_mismatch(self):
        outer = minimal_simulates_standard(1)
        with pytest.raises(ValueError):
            compose_simulations(outer, minimal_simulates_standard(1))

    def test_transitivity(self):
        f = perm([1, 0, 3, 2])
        outer = minimal_simulates_standard(2)
        _, reg = simulate_min_via_std(f, 2)
        inner = reg.to_spec(target="min", target_qubits=2)
        comp = compose_simulations(outer, inner)
        std, mn = make_oracle("std"), make_oracle("min")
        assert comp.query_count == outer.query_count * inner.query_count
        anc = comp.M - outer.M
        outer_err = circuit_error(outer, mn, std, f)
        inner_err = circuit_error(inner, std, mn, f, inner.M - 2)
        err = circuit_error(comp, std, std, f, anc)
        assert err <= outer_err + outer.query_count * inner_err + 1e-8

    def test_qubit_permutation_identity(self):
        np.testing.assert_array_equal(qubit_permutation([0, 1, 2]), np.arange(8))
        assert list(qubit_permutation([1, 0])) == [0, 2, 1, 3]


class TestSuccessProbability:
    def test_deterministic(self):
        f = perm([1, 0])
        c = minimal_simulates_standard(1)
        for x in range(2):
            assert success_probability(c, "min", f, 2 * x, f(x), 1) == pytest.approx(1.0)

    def test_identity_wrong_answer(self):
        assert success_probability(CircuitSpec.identity(1), "cp", perm([0, 1]), 0, 1, 1) == 0.0

    def test_uniform(self):
        c = CircuitSpec(1, (Constant(H),))
        assert success_probability(c, "cp", perm([0, 1]), 0, 0, 1) == pytest.approx(0.5)


class TestDegreeTrace:
    @given(seeds)
    @settings(max_examples=10, deadline=None)
    def test_degree_bounded_by_queries(self, seed):
        rng = np.random.default_rng(seed)
        c = random_circuit(3, 3, rng)
        f = FunctionTable.random(1, 1, rng)
        trace = trace_degree(c, "std", f, random_unitary(8, rng)[:, 0])
        assert all(d <= q for d, q in zip(trace.degrees, trace.query_counts))
        assert trace.degrees[-1] <= c.query_count
