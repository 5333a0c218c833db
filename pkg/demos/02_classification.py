"""
Where each oracle sits in the hierarchy
=======================================

An oracle family is *nonentangled* when every query preserves a product
splitting of the input register, *basic* when in addition its eigenphases
depend on ``f`` only through ``f(x)``, and *simple* when the eigenbasis is
also shared across all ``f``. The detectors decide each property by
exhaustive enumeration over a small function family.
"""

import numpy as np

from qoracle.classify import classify, product_commutant
from qoracle.oracles import FixedOracle

# %%
# Standard and complex phase oracles: all three properties hold.

for kind in ("std", "cp"):
    for n, m in ((1, 1), (2, 1), (1, 2)):
        print(kind, (n, m), classify(kind, n, m).summary())

# %%
# The minimal oracle, restricted to permutations, is nonentangled but
# already fails to be basic. The report carries an explicit counterexample.

report = classify("min", 2, 2, family="permutations")
print("min (2,2):", report.summary())
print("counterexample:", report.counterexamples["basic"])

# %%
# A SWAP between the input and output qubits commutes only with scalars on
# the input register, so no product splitting survives.

swap = np.eye(4)[[0, 2, 1, 3]]
print("commutant dimension of SWAP:", product_commutant(swap, 1).dimension)
print("SWAP:", classify(FixedOracle(swap, front_bits=1), 1, 1).summary())
