import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qoracle.errors import BandConditionError, SizeCapError
from qoracle.linalg import eig_unitary, is_unitary, lift, op_norm
from qoracle.oracles import (
    ConjugatedOracle,
    FunctionTable,
    GenericLocalPhaseSpec,
    build_complex_phase,
    build_generic_local_phase,
    build_minimal,
    build_standard,
    fourier_state,
    make_oracle,
    minimal_eigensystem,
    minimal_query,
    oracle_phases,
    orbit_decomposition,
    standard_eigensystem,
)
from qoracle.linalg import random_unitary

from conftest import function_tables, permutations, seeds


def ft(values, n, m):
    return FunctionTable(n, m, tuple(values))


class TestFunctionTable:
    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            ft([0, 4], 1, 2)

    def test_rejects_wrong_length(self):
        with pytest.raises(ValueError):
            ft([0, 1, 2], 1, 2)

    def test_json_roundtrip(self):
        f = ft([3, 0, 1, 2], 2, 2)
        assert FunctionTable.from_json(f.to_json()) == f

    def test_iterate(self):
        f = ft([1, 2, 3, 0], 2, 2)
        assert f.iterate(2, 3) == 1
        assert f.iterate(2, 4) == 2

    def test_orbits(self):
        dec = orbit_decomposition(ft([1, 0, 2, 3], 2, 2))
        assert sorted(dec.lengths) == [1, 1, 2]
        assert dec.max_length == 2


class TestStandard:
    def test_fourier_state_example(self):
        np.testing.assert_allclose(fourier_state(1, 1), np.array([1, -1]) / np.sqrt(2))

    def test_action_example(self):
        q = build_standard(ft([3, 0], 1, 2))
        basis = np.zeros(8); basis[0 * 4 + 2] = 1
        out = q @ basis
        assert out[0 * 4 + 1] == pytest.approx(1)

    def test_zero_function_is_identity(self):
        np.testing.assert_array_equal(build_standard(ft([0, 0], 1, 1)), np.eye(4))

    def test_size_cap(self):
        with pytest.raises(SizeCapError):
            build_standard(FunctionTable.constant(6, 5))

    @given(function_tables(n_max=3, m_max=3))
    @settings(max_examples=40, deadline=None)
    def test_analytic_eigensystem(self, f):
        q = build_standard(f)
        es = standard_eigensystem(f)
        assert es.residual(q) < 1e-10
        assert es.orthonormality_defect() < 1e-10
        for (x, s), theta in es.phase_map().items():
            assert theta == pytest.approx((2 * np.pi * s * f(x) / 2**f.m) % (2 * np.pi))

    @given(function_tables(n_max=2, m_max=2))
    @settings(max_examples=30, deadline=None)
    def test_is_permutation_matrix(self, f):
        q = build_standard(f).real
        assert set(np.unique(q)) <= {0.0, 1.0}
        np.testing.assert_array_equal(q.sum(axis=0), 1)


class TestComplexPhase:
    def test_diagonal_example(self):
        q = build_complex_phase(ft([1, 0], 1, 2), d=1)
        np.testing.assert_allclose(np.diag(q), [1j, 1])

    def test_full_period_is_identity(self):
        f = ft([1, 2], 1, 2)
        np.testing.assert_allclose(build_complex_phase(f, d=4), np.eye(2), atol=1e-15)

    @given(function_tables(n_max=3, m_max=3), st.integers(0, 8))
    @settings(max_examples=30, deadline=None)
    def test_diagonal_unitary(self, f, d):
        q = build_complex_phase(f, d)
        assert is_unitary(q)
        np.testing.assert_array_equal(q, np.diag(np.diag(q)))


class TestMinimal:
    def test_eigenvector_example(self):
        f = ft([1, 2, 3, 0], 2, 2)
        q = build_minimal(f)
        v = np.array([1, -1j, -1, 1j]) / 2
        np.testing.assert_allclose(q @ v, 1j * v, atol=1e-12)
        phases = minimal_eigensystem(f).phase_map()
        assert phases[(0, 1)] == pytest.approx(np.pi / 2)

    def test_non_permutation_falls_back(self):
        mq = minimal_query(ft([0, 0], 1, 1))
        assert mq.degenerate
        np.testing.assert_array_equal(mq.matrix, np.eye(2))

    @given(permutations(n_max=3))
    @settings(max_examples=40, deadline=None)
    def test_inverse_and_eigensystem(self, f):
        q = build_minimal(f)
        np.testing.assert_allclose(q @ build_minimal(f.inverse()), np.eye(2**f.n))
        es = minimal_eigensystem(f)
        assert es.residual(q) < 1e-10
        assert es.orthonormality_defect() < 1e-10

    @given(permutations(n_max=3))
    @settings(max_examples=20, deadline=None)
    def test_phases_are_orbit_roots_of_unity(self, f):
        dec = orbit_decomposition(f)
        for (ell, s), theta in minimal_eigensystem(f).phase_map().items():
            r = dec.orbits[ell].length
            assert theta == pytest.approx(2 * np.pi * s / r)


class TestGenericLocalPhase:
    def test_diagonal_matches_complex_phase(self):
        f = ft([1, 3], 1, 2)
        spec = GenericLocalPhaseSpec.diagonal(1, "linear", 1.0)
        np.testing.assert_allclose(build_generic_local_phase(spec, f), build_complex_phase(f, 1), atol=1e-12)

    def test_band_violation(self):
        coeffs = np.zeros((4, 4)); coeffs[0, 2] = 1
        with pytest.raises(BandConditionError):
            GenericLocalPhaseSpec("linear", coeffs, p_bound=1)

    def test_band_wraps_cyclically(self):
        coeffs = np.zeros((4, 4)); coeffs[0, 3] = 0.5
        spec = GenericLocalPhaseSpec("linear", coeffs, p_bound=1)
        assert spec.C == pytest.approx(0.5)

    def test_callable_needs_bound(self):
        with pytest.raises(ValueError):
            GenericLocalPhaseSpec(lambda t: t, np.eye(2), p_bound=0)

    def test_C_overrun(self):
        with pytest.raises(ValueError):
            GenericLocalPhaseSpec("linear", 2 * np.eye(2), p_bound=0, C=1.0)

    def test_json_roundtrip(self):
        spec = GenericLocalPhaseSpec.diagonal(2, "sine", 0.5)
        back = GenericLocalPhaseSpec.from_json(spec.to_json())
        f = ft([0, 1, 2, 3], 2, 2)
        np.testing.assert_allclose(back.phases(f), spec.phases(f))


class TestOracleObjects:
    @pytest.mark.parametrize("kind, n, m, qubits", [("std", 2, 3, 5), ("cp", 2, 3, 2), ("min", 3, 3, 3)])
    def test_qubits(self, kind, n, m, qubits):
        assert make_oracle(kind).qubits(n, m) == qubits

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            make_oracle("nope")

    def test_glp_requires_spec(self):
        with pytest.raises(ValueError):
            make_oracle("glp")

    def test_phases_labelled(self):
        ph = oracle_phases("std", ft([1, 0], 1, 1))
        assert ph[(0, 1)] == pytest.approx(np.pi)
        assert ph[(1, 1)] == pytest.approx(0)

    @given(seeds)
    @settings(max_examples=10, deadline=None)
    def test_conjugated_eigensystem(self, seed):
        rng = np.random.default_rng(seed)
        u = random_unitary(4, rng)
        oracle = ConjugatedOracle(make_oracle("std"), u)
        f = FunctionTable.random(1, 1, rng)
        q = oracle.query(f)
        assert oracle.eigensystem(f).residual(q) < 1e-9

    def test_lifted_multiplicity(self):
        f = ft([1, 0], 1, 1)
        es = eig_unitary(lift(build_complex_phase(f, 1), 8))
        groups = sorted(len(c) for c in es.clusters())
        assert groups == [4, 4]
        assert op_norm(es.reconstruct() - lift(build_complex_phase(f, 1), 8)) < 1e-10
