"""
Simulating one oracle with another
==================================

Two constructive simulations. The minimal oracle reproduces the standard
oracle with two queries. Conversely, the standard oracle reproduces the
minimal one at any permutation whose orbits are all short, by computing
the orbit data into ancilla registers and kicking back a phase.
"""

from qoracle.circuits import (
    approx_error,
    circuit_error,
    compose_simulations,
    minimal_simulates_standard,
    run_circuit_V,
    simulate_min_via_std,
)
from qoracle.classify import enumerate_permutations
from qoracle.oracles import FunctionTable, make_oracle

# %%
# Two queries of the minimal oracle around an adder.

for n in (1, 2, 3):
    report = approx_error(minimal_simulates_standard(n), "min", "std", enumerate_permutations(n))
    print(f"n={n}: worst error {report.max_error:.1e} with {report.query_count} queries")

# %%
# Circuit V writes the orbit length ``r`` and the offset ``s`` of ``x``
# from the orbit minimum, then cleans up the iterate registers.

f = FunctionTable(2, 2, (1, 2, 3, 0))
for row in run_circuit_V(f, 4).rows:
    print(row["x"], "->", "r =", row["r"], " s =", row["s"], " clean:", row["ancilla_clean"])

# %%
# The full sandwich ``W^-1 V W``, phase ``2π s / r``, and its inverse.

for values, p in [((1, 0, 3, 2), 2), ((1, 2, 3, 0), 4)]:
    report, circuit = simulate_min_via_std(FunctionTable(2, 2, values), p)
    print(values, f"error {report.max_error:.1e}, {report.query_count} queries, {circuit.qubits} qubits")

# %%
# Composition: substitute the second construction into the first. The
# composite queries the standard oracle and reproduces it.

g = FunctionTable(2, 2, (1, 0, 3, 2))
_, reg = simulate_min_via_std(g, 2)
inner = reg.to_spec(target="min", target_qubits=2)
outer = minimal_simulates_standard(2)
comp = compose_simulations(outer, inner)
std = make_oracle("std")
print("composite:", comp.M, "qubits,", comp.query_count, "queries,",
      f"error {circuit_error(comp, std, std, g, comp.M - outer.M):.1e}")
