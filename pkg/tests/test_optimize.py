import numpy as np
import pytest
from hypothesis import given, settings

from qoracle.bounds import adversary_pair, glp_min_error, mainthm_bound
from qoracle.classify import enumerate_permutations
from qoracle.errors import SizeCapError
from qoracle.linalg import is_unitary
from qoracle.optimize import (
    OptimizerConfig,
    _build_problem,
    constant_floor,
    error_floor,
    error_floor_sweep,
    hermitian_from_params,
    optimize_circuit,
    params_from_hermitian,
    power_patterns,
)
from qoracle.oracles import FunctionTable, GenericLocalPhaseOracle, GenericLocalPhaseSpec, make_oracle

from conftest import seeds

FAST = OptimizerConfig(restarts=3, max_iterations=300)


def glp_linear():
    return GenericLocalPhaseOracle(GenericLocalPhaseSpec.diagonal(1, "linear", 1.0))


class TestParameterisation:
    @given(seeds)
    @settings(max_examples=20, deadline=None)
    def test_roundtrip(self, seed):
        x = np.random.default_rng(seed).standard_normal(16)
        h = hermitian_from_params(x, 4)
        np.testing.assert_allclose(h, h.conj().T)
        np.testing.assert_allclose(params_from_hermitian(h), x, atol=1e-12)

    def test_gradient_matches_finite_differences(self):
        rng = np.random.default_rng(3)
        fs = enumerate_permutations(1)
        problem = _build_problem(make_oracle("min"), make_oracle("std"), (1, -1), fs, 50.0)
        x = rng.standard_normal(problem.n_params) * 0.5
        _, grad = problem.value_and_grad(x)
        h = 1e-6
        idx = rng.choice(problem.n_params, 12, replace=False)
        for i in idx:
            e = np.zeros_like(x); e[i] = h
            fd = (problem.value(x + e) - problem.value(x - e)) / (2 * h)
            assert grad[i] == pytest.approx(fd, abs=1e-6)


class TestOptimizeCircuit:
    def test_standard_sandwich(self):
        fs = [FunctionTable(1, 1, v) for v in [(0, 0), (0, 1), (1, 0), (1, 1)]]
        res = optimize_circuit("std", "std", 1, fs, cfg=FAST)
        assert res.max_error <= 1e-6
        assert all(is_unitary(g.matrix) for g in res.circuit.constants())

    def test_two_query_construction(self):
        res = optimize_circuit("min", "std", 2, enumerate_permutations(1), (1, -1), FAST)
        assert res.max_error <= 1e-6

    def test_glp_floor_not_beaten(self):
        pair = adversary_pair(1, 3)
        res = optimize_circuit(glp_linear(), "std", 1, [pair.f1, pair.f2], cfg=FAST)
        assert res.max_error >= glp_min_error(3, 1, 2 * np.pi, 1.0) - 0.02
        bound = mainthm_bound(res.circuit, glp_linear(), "std", pair).bound
        assert res.max_error >= bound - 1e-6

    def test_best_is_minimum_over_restarts(self):
        fs = enumerate_permutations(1)
        res = optimize_circuit("cp", "std", 1, fs, cfg=OptimizerConfig(restarts=4, max_iterations=50))
        assert res.max_error <= min(r.final_error for r in res.restarts)

    def test_deterministic(self):
        fs = enumerate_permutations(1)
        cfg = OptimizerConfig(restarts=2, max_iterations=100, master_seed=9)
        a = optimize_circuit("cp", "std", 1, fs, cfg=cfg)
        b = optimize_circuit("cp", "std", 1, fs, cfg=cfg)
        assert a.objective == pytest.approx(b.objective, abs=1e-12)
        assert a.to_json() == b.to_json()

    def test_restart_independence(self):
        fs = enumerate_permutations(1)
        cfg = OptimizerConfig(restarts=3, max_iterations=60, master_seed=1)
        res = optimize_circuit("cp", "std", 1, fs, cfg=cfg)
        shuffled = list(reversed(res.restarts))
        best = min(shuffled, key=lambda r: (r.final_error, r.final_objective))
        assert best.final_error == res.max_error

    @pytest.mark.parametrize(
        "kwargs", [dict(N=-1), dict(N=1, powers=(1, 1)), dict(N=1, powers=(2,)), dict(N=1, fs=[])]
    )
    def test_invalid_arguments(self, kwargs):
        args = dict(N=1, fs=enumerate_permutations(1))
        args.update(kwargs)
        with pytest.raises(ValueError):
            optimize_circuit("cp", "std", cfg=FAST, **args)

    def test_size_cap(self):
        with pytest.raises(SizeCapError):
            optimize_circuit("std", "std", 0, [FunctionTable.constant(4, 3)], cfg=FAST)

    def test_config_validation(self):
        with pytest.raises(ValueError):
            OptimizerConfig(restarts=0)


class TestErrorFloor:
    @pytest.mark.parametrize("N, expected", [(0, [()]), (1, [(1,)]), (3, [(1, 1, 1), (1, -1, 1)])])
    def test_patterns(self, N, expected):
        assert power_patterns(N) == expected

    def test_all_patterns(self):
        assert len(power_patterns(3, all_patterns=True)) == 8

    def test_constant_circuits(self):
        fs = [FunctionTable(1, 1, v) for v in [(0, 0), (1, 0)]]
        floor = error_floor("cp", "std", 0, fs, FAST)
        assert floor.floor >= constant_floor("std", fs) - 1e-6

    def test_exact_when_enough_queries(self):
        floor = error_floor("min", "std", 2, enumerate_permutations(1), FAST)
        assert floor.floor <= 1e-6

    @pytest.mark.slow
    def test_sweep_monotone_every_two(self):
        fs = [FunctionTable(1, 1, v) for v in [(0, 0), (0, 1), (1, 0), (1, 1)]]
        cfg = OptimizerConfig(restarts=2, max_iterations=200)
        floors = error_floor_sweep("cp", "std", 3, fs, cfg)
        for N in range(2, 4):
            assert floors[N].floor <= floors[N - 2].floor + 1e-9
