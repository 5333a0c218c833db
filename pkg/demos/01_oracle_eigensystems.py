"""
Eigenvectors of the three basic oracles
=======================================

Every oracle in the package comes with an analytic eigensystem. Here we
build the standard, complex phase and minimal queries for small functions
and check that the closed-form eigenpairs really diagonalise them.
"""

import numpy as np

from qoracle.oracles import (
    FunctionTable,
    build_minimal,
    build_standard,
    fourier_state,
    make_oracle,
    orbit_decomposition,
)

# %%
# Phase kickback. The Fourier state on the output register picks up the
# phase ``2π s f(x) / 2^m`` when the standard query acts on ``|x>|ψ_s>``.

f = FunctionTable(1, 2, (3, 1))
q = build_standard(f)
psi = np.kron([0, 1], fourier_state(2, 1))  # |x=1>|ψ_1>
kicked = q @ psi
print("phase picked up:", np.angle(np.vdot(psi, kicked)) % (2 * np.pi))
print("expected       :", 2 * np.pi * 1 * f(1) / 4)

# %%
# The full labelled eigensystem, with residual ``max ||Qv - λv||``.

for kind, fn in [("std", f), ("cp", f), ("min", FunctionTable(2, 2, (1, 2, 3, 0)))]:
    oracle = make_oracle(kind)
    es = oracle.eigensystem(fn)
    print(f"{kind:>3}: dim={es.dim:2d}  residual={es.residual(oracle.query(fn)):.1e}")

# %%
# Minimal oracle eigenvectors live on the orbits of the permutation. A
# 4-cycle gives the four fourth roots of unity.

cycle = FunctionTable(2, 2, (1, 2, 3, 0))
print("orbit lengths:", orbit_decomposition(cycle).lengths)
v = np.array([1, -1j, -1, 1j]) / 2
print("Q v / v =", np.round((build_minimal(cycle) @ v)[0] / v[0], 12))
for label, theta in sorted(make_oracle("min").phases(cycle).items()):
    print(f"  label {label}: phase {theta:.4f}")
