"""Dense, desk-scale laboratory for general quantum oracles.

Oracle queries are explicit unitaries on at most ten qubits. The package
builds them, checks their eigenstructure, classifies oracle families,
assembles simulation circuits between families and evaluates
trigonometric-polynomial lower bounds on approximating one family with
another.
"""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    BandConditionError,
    ContractViolation,
    NotAPermutationError,
    PreconditionError,
    QOracleError,
    SizeCapError,
)
from .linalg import EigenSystem, eig_unitary, lift, op_norm, tensor  # noqa: E402
from .oracles import (  # noqa: E402
    FunctionTable,
    GenericLocalPhaseSpec,
    build_complex_phase,
    build_generic_local_phase,
    build_minimal,
    build_standard,
    make_oracle,
    minimal_eigensystem,
    orbit_decomposition,
    standard_eigensystem,
)
from .trig import SymbolicState, TrigPoly  # noqa: E402
from .circuits import CircuitSpec, Constant, Query, apply_circuit, approx_error  # noqa: E402
from .classify import classify  # noqa: E402

__all__ = [
    "BandConditionError",
    "CircuitSpec",
    "Constant",
    "ContractViolation",
    "EigenSystem",
    "FunctionTable",
    "GenericLocalPhaseSpec",
    "NotAPermutationError",
    "PreconditionError",
    "QOracleError",
    "Query",
    "SizeCapError",
    "SymbolicState",
    "TrigPoly",
    "apply_circuit",
    "approx_error",
    "build_complex_phase",
    "build_generic_local_phase",
    "build_minimal",
    "build_standard",
    "classify",
    "eig_unitary",
    "lift",
    "make_oracle",
    "minimal_eigensystem",
    "op_norm",
    "orbit_decomposition",
    "standard_eigensystem",
    "tensor",
]
