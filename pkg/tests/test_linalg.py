import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings

from qoracle.errors import ContractViolation, SizeCapError
from qoracle.linalg import (
    CLUSTER_TOL,
    canonical_phase,
    cluster_phases,
    eig_unitary,
    lift,
    op_norm,
    phase_distance,
    random_unitary,
    tensor,
    unitary_log,
)

from conftest import seeds


def random_hermitian(dim, rng):
    a = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return (a + a.conj().T) / 2


class TestTensorAndLift:
    def test_identity(self):
        np.testing.assert_array_equal(tensor(np.eye(2), np.eye(2)), np.eye(4))

    def test_diagonal(self):
        np.testing.assert_array_equal(tensor(np.diag([1, -1]), np.eye(2)), np.diag([1, 1, -1, -1]))

    def test_dimension_law(self, rng):
        assert tensor(random_unitary(2, rng), random_unitary(4, rng)).shape == (8, 8)

    def test_front_register_is_most_significant(self):
        a = np.zeros((2, 2)); a[1, 0] = 1
        b = np.eye(2)
        # |0>|1> (index 1) maps to |1>|1> (index 3)
        assert tensor(a, b)[3, 1] == 1

    def test_size_cap(self):
        with pytest.raises(SizeCapError):
            tensor(np.eye(64), np.eye(32))

    @given(seeds)
    @settings(max_examples=20, deadline=None)
    def test_associativity(self, seed):
        rng = np.random.default_rng(seed)
        a, b, c = (random_unitary(2, rng) for _ in range(3))
        np.testing.assert_allclose(tensor(tensor(a, b), c), tensor(a, tensor(b, c)), atol=1e-12)

    @pytest.mark.parametrize(
        "u, dim, expected",
        [
            (np.eye(2), 4, np.eye(4)),
            (np.diag([1, 1j]), 4, np.diag([1, 1, 1j, 1j])),
        ],
    )
    def test_lift_examples(self, u, dim, expected):
        np.testing.assert_array_equal(lift(u, dim), expected)

    def test_lift_noop(self, rng):
        u = random_unitary(4, rng)
        np.testing.assert_array_equal(lift(u, 4), u)

    @pytest.mark.parametrize("dim", [3, 6, 2])
    def test_lift_rejects_bad_targets(self, rng, dim):
        with pytest.raises(ValueError):
            lift(random_unitary(4, rng), dim)


class TestOpNorm:
    def test_examples(self):
        assert op_norm(np.eye(4)) == pytest.approx(1.0)
        assert op_norm(np.zeros((2, 2))) == 0.0
        assert op_norm(np.diag([1, -1]) - np.eye(2)) == pytest.approx(2.0)

    @given(seeds)
    @settings(max_examples=30, deadline=None)
    def test_unitary_invariance(self, seed):
        rng = np.random.default_rng(seed)
        a = rng.standard_normal((8, 8)) + 1j * rng.standard_normal((8, 8))
        u, v = random_unitary(8, rng), random_unitary(8, rng)
        assert op_norm(u @ a @ v) == pytest.approx(op_norm(a), abs=1e-9)


class TestPhases:
    @pytest.mark.parametrize(
        "theta, expected",
        [(0.0, 0.0), (-np.pi / 2, 3 * np.pi / 2), (2 * np.pi, 0.0), (5 * np.pi, np.pi)],
    )
    def test_canonical_range(self, theta, expected):
        assert canonical_phase(theta) == pytest.approx(expected)

    def test_distance_wraps(self):
        assert phase_distance(0.01, 2 * np.pi - 0.01) == pytest.approx(0.02)

    def test_clusters_merge_across_zero(self):
        groups = cluster_phases(np.array([1e-12, 1.0, 2 * np.pi - 1e-12]))
        assert sorted(len(g) for g in groups) == [1, 2]


class TestEigUnitary:
    def test_identity(self):
        es = eig_unitary(np.eye(2))
        np.testing.assert_allclose(es.phases, [0, 0])
        assert es.orthonormality_defect() < 1e-12

    def test_diagonal(self):
        es = eig_unitary(np.diag([1, np.exp(1j * np.pi / 3)]))
        np.testing.assert_allclose(sorted(es.phases), [0, np.pi / 3], atol=1e-12)

    def test_four_cycle(self):
        shift = np.roll(np.eye(4), 1, axis=0)
        es = eig_unitary(shift)
        np.testing.assert_allclose(np.sort(es.phases), np.arange(4) * np.pi / 2, atol=1e-12)

    def test_rejects_non_unitary(self):
        with pytest.raises(ContractViolation):
            eig_unitary(np.diag([1.0, 2.0]))

    def test_degenerate_cluster_is_orthonormal(self, rng):
        v = random_unitary(8, rng)
        u = v @ np.diag([1, 1, 1, 1j, 1j, -1, -1, -1]) @ v.conj().T
        es = eig_unitary(u)
        assert es.orthonormality_defect() < 1e-9
        assert es.residual(u) < 1e-9
        assert len(es.clusters()) == 3

    def test_random_hermitian_exponentials(self):
        rng = np.random.default_rng(7)
        worst_res = worst_rec = 0.0
        for _ in range(200):
            dim = int(2 ** rng.integers(1, 7))
            u = scipy.linalg.expm(1j * random_hermitian(dim, rng))
            es = eig_unitary(u)
            worst_res = max(worst_res, es.residual(u))
            worst_rec = max(worst_rec, op_norm(es.reconstruct() - u))
        assert worst_res <= 1e-9
        assert worst_rec <= 1e-8

    def test_lifted_labels_and_multiplicity(self):
        es = eig_unitary(np.diag([1, 1j]), labels=[(0, 0), (1, 0)])
        up = es.lifted(4)
        assert up.labels == ((0, 0, 0), (0, 0, 1), (1, 0, 0), (1, 0, 1))
        np.testing.assert_allclose(up.phases, [0, 0, np.pi / 2, np.pi / 2])
        assert up.residual(lift(np.diag([1, 1j]), 4)) < 1e-12

    @given(seeds)
    @settings(max_examples=25, deadline=None)
    def test_unitary_log_roundtrip(self, seed):
        u = random_unitary(4, np.random.default_rng(seed))
        h = unitary_log(u)
        np.testing.assert_allclose(h, h.conj().T, atol=1e-12)
        np.testing.assert_allclose(scipy.linalg.expm(1j * h), u, atol=1e-9)


def test_cluster_tolerance_constant():
    assert CLUSTER_TOL == 1e-8
