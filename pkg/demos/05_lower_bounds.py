"""
Certified lower bounds on approximation error
=============================================

The pairwise bound compares the eigenvalue gap of the target at two
functions with how much the circuit can move the matching projections. If
the circuit barely notices the change of function but the target does,
the error must be large at one of the two.
"""

import numpy as np

from qoracle.bounds import (
    FunctionPair,
    adversary_pair,
    bernstein_ratio,
    eigenvalue_gap,
    glp_lower_bound,
    glp_min_error,
    lemma1_bound,
    mainthm_bound,
)
from qoracle.circuits import CircuitSpec
from qoracle.linalg import random_unitary
from qoracle.oracles import FunctionTable, GenericLocalPhaseOracle, GenericLocalPhaseSpec
from qoracle.trig import TrigPoly

# %%
# A query-free circuit cannot follow the standard oracle across the pair.

glp = GenericLocalPhaseOracle(GenericLocalPhaseSpec.diagonal(1, "linear", 1.0))
pair = adversary_pair(1, 1)
report = mainthm_bound(CircuitSpec.identity(2), glp, "std", pair)
print("bound:", report.bound, " measured:", report.max_error, " terms:", report.terms)

# %%
# Soundness on random circuits: the bound never exceeds the measured error.

rng = np.random.default_rng(1)
pair_slack = lemma_slack = np.inf
for _ in range(200):
    N = int(rng.integers(0, 4))
    c = CircuitSpec.from_constants([random_unitary(8, rng) for _ in range(N + 1)], [1] * N, 3)
    f1, f2 = FunctionTable.random(1, 2, rng), FunctionTable.random(1, 2, rng)
    r = mainthm_bound(c, "cp", "std", FunctionPair(f1, f2))
    pair_slack = min(pair_slack, r.max_error - r.bound)
    r = lemma1_bound(c, "cp", "std", f1)
    lemma_slack = min(lemma_slack, r.max_error - r.bound)
print("smallest (error - bound): pairwise", pair_slack, " single", lemma_slack)

# %%
# Bernstein's inequality on two monomials.

for k, b in [(1, np.pi / 2), (2, np.pi / 4)]:
    print(f"degree {k}: ratio {bernstein_ratio(TrigPoly(1, {(k,): 1}), 0.0, b):.4f}")

# %%
# Closed forms for the generic local phase oracle.

B = 2 * np.pi
for m in (2, 3, 4, 6):
    print(f"m={m}: gap {eigenvalue_gap(m):.1f}, N_min(δ=0.1) = {glp_lower_bound(m, 0.1, B, 1.0)},"
          f" floor at N=1: {glp_min_error(m, 1, B, 1.0):.4f}")
