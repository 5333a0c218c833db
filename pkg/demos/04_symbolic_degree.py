"""
Amplitudes as trigonometric polynomials
=======================================

Written in the eigenbasis of the query, every amplitude of an ``N``-query
circuit is a trigonometric polynomial in the eigenphases of degree at most
``N``. Tracing a random circuit symbolically shows the degree growing by at
most one per query and the polynomial agreeing with the numeric state.
"""

import numpy as np

from qoracle.circuits import CircuitSpec, apply_circuit, trace_degree
from qoracle.linalg import random_unitary
from qoracle.oracles import FunctionTable, make_oracle

rng = np.random.default_rng(0)
M, N = 3, 4
constants = [random_unitary(2**M, rng) for _ in range(N + 1)]
circuit = CircuitSpec.from_constants(constants, [1, -1, 1, 1], M)
f = FunctionTable(1, 2, (2, 3))
psi = random_unitary(2**M, rng)[:, 0]

trace = trace_degree(circuit, "std", f, psi)
print("queries so far:", trace.query_counts)
print("degree        :", trace.degrees)
print("terms at the end:", trace.state.term_count)

# %%
# Evaluating the polynomials at the true eigenphases recovers the state.

es = make_oracle("std").eigensystem(f)
amps = trace.state.evaluate(es.phases)
numeric = apply_circuit(circuit, "std", f, psi)
print("max deviation:", np.max(np.abs(trace.basis @ amps - numeric)))

# %%
# Each coefficient is bounded by one in modulus for every choice of phases,
# since it is an amplitude of a unit vector for some unitary oracle.

thetas = rng.uniform(-np.pi, np.pi, (500, trace.state.D))
print("largest |coefficient| over 500 random phase points:",
      max(np.abs(trace.state.evaluate(t)).max() for t in thetas))
