import numpy as np
import pytest

from qoracle.classify import (
    classify,
    detect_basic,
    detect_nonentangled,
    detect_simple,
    enumerate_functions,
    enumerate_permutations,
    product_commutant,
)
from qoracle.errors import ContractViolation
from qoracle.linalg import random_unitary
from qoracle.oracles import (
    ConjugatedOracle,
    FixedOracle,
    FunctionTable,
    build_standard,
    make_oracle,
)

SWAP = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex)


class TestEnumeration:
    @pytest.mark.parametrize("n, m, count", [(1, 1, 4), (1, 2, 16), (2, 1, 16), (2, 2, 256)])
    def test_counts(self, n, m, count):
        fs = enumerate_functions(n, m)
        assert len(fs) == count
        assert len(set(f.values for f in fs)) == count

    def test_cap(self):
        with pytest.raises(ValueError):
            enumerate_functions(3, 3)

    @pytest.mark.parametrize("n, count", [(1, 2), (2, 24)])
    def test_permutations(self, n, count):
        assert len(enumerate_permutations(n)) == count


class TestCommutant:
    def test_identity(self):
        assert product_commutant(np.eye(4), 1).dimension == 4

    def test_standard_query(self):
        q = build_standard(FunctionTable(1, 1, (1, 0)))
        assert product_commutant(q, 1).dimension >= 2

    def test_swap(self):
        assert product_commutant(SWAP, 1).dimension == 1

    def test_bad_split(self):
        with pytest.raises(ValueError):
            product_commutant(np.eye(6), 2)


class TestDetectors:
    @pytest.mark.parametrize("kind", ["std", "cp"])
    def test_simple_oracles(self, kind):
        report = classify(kind, 1, 1)
        assert report.summary() == {"simple": True, "basic": True, "nonentangled": True}

    def test_minimal_nonentangled_not_basic(self):
        report = classify("min", 2, 2, family="permutations")
        assert report.nonentangled
        assert not report.basic and not report.simple
        assert "basic" in report.counterexamples
        assert "common_eigenbasis" in report.counterexamples

    def test_swap_not_nonentangled(self):
        oracle = FixedOracle(SWAP, front_bits=1)
        result = detect_nonentangled(oracle, 1, 1)
        assert not result.nonentangled
        assert result.counterexample is not None
        report = classify(oracle, 1, 1)
        assert report.summary() == {"simple": False, "basic": False, "nonentangled": False}

    def test_std_common_eigenbasis(self):
        sim = detect_simple("std", 1, 2)
        assert sim.common_eigenbasis
        assert sim.basis.shape == (8, 8)

    def test_basic_tables_match_phases(self):
        basic = detect_basic("cp", 1, 1)
        assert basic.basic
        assert basic.phase_tables

    def test_invalid_report_rejected(self):
        report = classify("std", 1, 1)
        report.nonentangled = False
        with pytest.raises(ContractViolation):
            report.__post_init__()

    def test_json_has_counts(self):
        out = classify("cp", 1, 1).to_json()
        assert out["enumerated_function_count"] == 4
        assert out["simple"] is True


class TestInvariance:
    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_basis_change(self, seed):
        rng = np.random.default_rng(seed)
        u = np.kron(random_unitary(2, rng), random_unitary(2, rng))
        base = classify("std", 1, 1).summary()
        conj = classify(ConjugatedOracle(make_oracle("std"), u), 1, 1).summary()
        assert conj == base

    @pytest.mark.parametrize("kind, family", [("std", None), ("cp", None), ("min", "permutations")])
    def test_hierarchy(self, kind, family):
        r = classify(kind, 1, 1, family=family)
        assert (not r.simple) or r.basic
        assert (not r.basic) or r.nonentangled

    def test_deterministic(self):
        a = classify("min", 2, 2, family="permutations", seed=5).to_json()
        b = classify("min", 2, 2, family="permutations", seed=5).to_json()
        assert a == b
