"""
Searching for the best N-query circuit
======================================

The optimiser fits the constant unitaries of an ``N``-query circuit to a
target oracle over a family of functions. When an exact construction exists
it finds one; when the analytic floor forbids it, the error stays above.
"""

import numpy as np

from qoracle.bounds import adversary_pair, glp_min_error, mainthm_bound
from qoracle.classify import enumerate_permutations
from qoracle.optimize import OptimizerConfig, error_floor_sweep, optimize_circuit
from qoracle.oracles import GenericLocalPhaseOracle, GenericLocalPhaseSpec

cfg = OptimizerConfig(restarts=5, max_iterations=500, master_seed=0)

# %%
# The two-query construction is rediscovered from random starts.

res = optimize_circuit("min", "std", 2, enumerate_permutations(1), (1, -1), cfg)
print(f"min -> std with 2 queries: error {res.max_error:.2e}")

# %%
# One query of a linear phase oracle against the adversary pair at m = 3.

glp = GenericLocalPhaseOracle(GenericLocalPhaseSpec.diagonal(1, "linear", 1.0))
pair = adversary_pair(1, 3)
res = optimize_circuit(glp, "std", 1, [pair.f1, pair.f2], cfg=cfg)
print(f"best error {res.max_error:.4f}  analytic floor {glp_min_error(3, 1, 2 * np.pi, 1.0):.4f}"
      f"  pairwise bound on this circuit {mainthm_bound(res.circuit, glp, 'std', pair).bound:.4f}")

# %%
# Floors as N grows, warm-started from shorter circuits. Appending a query
# and its inverse reproduces a shorter circuit exactly, so the floor at N
# never exceeds the floor at N - 2; neighbouring N can still go either way
# because the search is local.

for floor in error_floor_sweep("cp", "std", 3, enumerate_permutations(1), cfg):
    print(f"N={floor.N}: floor {floor.floor:.4f}")
