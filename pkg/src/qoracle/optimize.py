"""Multi-restart search for the best ``N``-query approximation circuit.

Each interleaving constant is ``exp(iH)`` with ``H`` Hermitian and built
from ``dim**2`` real parameters (diagonal, then real and imaginary parts of
the strict upper triangle). The surrogate objective is the mean squared
Frobenius distance per function, aggregated over the function set with a
log-sum-exp of sharpness ``beta``. Its gradient is exact: the derivative
of the matrix exponential is taken in the eigenbasis of ``H`` with the
divided differences of ``exp(i x)``.

Restarts are seeded from ``SeedSequence([master_seed, r])`` and minimised
with L-BFGS-B. The reported figure of merit is always the true maximum
operator-norm error over the function set.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import minimize
from scipy.special import logsumexp, softmax

from ._parallel import parallel_map
from .circuits import CircuitSpec, approx_error
from .errors import SizeCapError
from .linalg import random_unitary, unitary_log
from .oracles import FunctionTable, Oracle, make_oracle

MAX_OPT_DIM = 64


@dataclass(frozen=True)
class OptimizerConfig:
    """Budget and seeding for :func:`optimize_circuit`.

    ``ftol`` and ``gtol`` are handed to L-BFGS-B; they are tight because the
    exact cases need the surrogate far below ``1e-8`` before the operator
    norm error drops under ``1e-6``.
    """

    restarts: int = 20
    max_iterations: int = 2000
    master_seed: int = 0
    beta: float = 50.0
    ftol: float = 1e-15
    gtol: float = 1e-12

    def __post_init__(self):
        if self.restarts < 1:
            raise ValueError("need at least one restart")
        if self.max_iterations < 0:
            raise ValueError("max_iterations must be non-negative")

    def to_json(self) -> dict:
        return {
            "restarts": self.restarts,
            "max_iterations": self.max_iterations,
            "master_seed": self.master_seed,
            "beta": self.beta,
            "ftol": self.ftol,
            "gtol": self.gtol,
        }


@dataclass(frozen=True)
class RestartSummary:
    index: int | str
    seed: tuple[int, ...] | None
    final_error: float
    final_objective: float
    iterations: int

    def to_json(self) -> dict:
        return {
            "index": self.index,
            "seed": list(self.seed) if self.seed is not None else None,
            "final_error": self.final_error,
            "final_objective": self.final_objective,
            "iterations": self.iterations,
        }


@dataclass(frozen=True)
class OptimizationResult:
    circuit: CircuitSpec
    objective: float
    max_error: float
    restarts: tuple[RestartSummary, ...]
    powers: tuple[int, ...]
    config: OptimizerConfig

    def to_json(self, circuit_ref: str | None = None) -> dict:
        return {
            "best_error": self.max_error,
            "surrogate": self.objective,
            "N": len(self.powers),
            "powers": list(self.powers),
            "config": self.config.to_json(),
            "restarts": [r.to_json() for r in self.restarts],
            "circuit_ref": circuit_ref,
        }


# ---------------------------------------------------------------------------
# parameterisation


def hermitian_from_params(x: np.ndarray, dim: int) -> np.ndarray:
    iu = np.triu_indices(dim, 1)
    k = iu[0].size
    h = np.diag(x[:dim]).astype(complex)
    h[iu] = x[dim : dim + k] + 1j * x[dim + k : dim + 2 * k]
    h[iu[1], iu[0]] = np.conj(h[iu])
    return h


def params_from_hermitian(h: np.ndarray) -> np.ndarray:
    dim = h.shape[0]
    iu = np.triu_indices(dim, 1)
    return np.concatenate([np.real(np.diag(h)), h[iu].real, h[iu].imag])


def _hermitian_grad_to_params(gamma: np.ndarray) -> np.ndarray:
    """Map ``dL = Re tr(Gamma^† dH)`` onto the real parameters of ``H``."""
    iu = np.triu_indices(gamma.shape[0], 1)
    upper, lower = gamma[iu], gamma[iu[1], iu[0]]
    return np.concatenate(
        [np.real(np.diag(gamma)), (upper + lower).real, upper.imag - lower.imag]
    )


def _expi(h: np.ndarray):
    lam, v = np.linalg.eigh(h)
    u = (v * np.exp(1j * lam)) @ v.conj().T
    return u, lam, v


def _expi_pullback(grad_u: np.ndarray, lam: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Gradient with respect to ``H`` of a loss whose gradient in ``U = exp(iH)`` is ``grad_u``."""
    delta = lam[:, None] - lam[None, :]
    phi = 1j * np.exp(0.5j * (lam[:, None] + lam[None, :])) * np.sinc(delta / (2 * np.pi))
    y = v.conj().T @ grad_u @ v
    return v @ (np.conj(phi) * y) @ v.conj().T


# ---------------------------------------------------------------------------
# objective


@dataclass
class _Problem:
    dim: int
    powers: tuple[int, ...]
    queries: list[list[np.ndarray]]  # per f, per query slot
    targets: list[np.ndarray]
    beta: float

    @property
    def n_params(self) -> int:
        return (len(self.powers) + 1) * self.dim**2

    def unpack(self, x: np.ndarray) -> list[np.ndarray]:
        d2 = self.dim**2
        return [hermitian_from_params(x[k * d2 : (k + 1) * d2], self.dim) for k in range(len(self.powers) + 1)]

    def circuit_matrix(self, us: Sequence[np.ndarray], qs: Sequence[np.ndarray]) -> np.ndarray:
        c = us[0]
        for q, u in zip(qs, us[1:]):
            c = u @ (q @ c)
        return c

    def value_and_grad(self, x: np.ndarray) -> tuple[float, np.ndarray]:
        hs = self.unpack(x)
        decomp = [_expi(h) for h in hs]
        us = [d[0] for d in decomp]
        nu = len(us)
        losses = np.empty(len(self.targets))
        grads_u = []
        for fi, (qs, target) in enumerate(zip(self.queries, self.targets)):
            right = [np.eye(self.dim, dtype=complex)]
            for k in range(nu - 1):
                right.append(qs[k] @ us[k] @ right[-1])
            c = us[-1] @ right[-1]
            diff = c - target
            losses[fi] = np.vdot(diff, diff).real / self.dim
            g_c = 2.0 * diff / self.dim
            left = np.eye(self.dim, dtype=complex)
            per_u = [None] * nu
            for k in range(nu - 1, -1, -1):
                per_u[k] = left.conj().T @ g_c @ right[k].conj().T
                if k:
                    left = left @ us[k] @ qs[k - 1]
            grads_u.append(per_u)
        n_f = len(self.targets)
        value = float((logsumexp(self.beta * losses) - np.log(n_f)) / self.beta)
        weights = softmax(self.beta * losses)
        grad = np.empty(self.n_params)
        d2 = self.dim**2
        for k in range(nu):
            g = sum(w * gu[k] for w, gu in zip(weights, grads_u))
            _, lam, v = decomp[k]
            grad[k * d2 : (k + 1) * d2] = _hermitian_grad_to_params(_expi_pullback(g, lam, v))
        return value, grad

    def value(self, x: np.ndarray) -> float:
        return self.value_and_grad(x)[0]


def _lift(q: np.ndarray, dim: int) -> np.ndarray:
    return np.kron(q, np.eye(dim // q.shape[0]))


def _build_problem(q1: Oracle, q2: Oracle, powers, fs, beta) -> _Problem:
    targets = [q2.query(f) for f in fs]
    dim = max(t.shape[0] for t in targets)
    if dim > MAX_OPT_DIM:
        raise SizeCapError(f"optimisation is limited to dimension {MAX_OPT_DIM}, got {dim}")
    queries = []
    for f in fs:
        q = _lift(q1.query(f), dim)
        qi = q.conj().T
        queries.append([q if p == 1 else qi for p in powers])
    return _Problem(dim, tuple(powers), queries, [_lift(t, dim) for t in targets], beta)


def _circuit_from_params(problem: _Problem, x: np.ndarray, q1: Oracle, q2: Oracle) -> CircuitSpec:
    us = [_expi(h)[0] for h in problem.unpack(x)]
    M = problem.dim.bit_length() - 1
    return CircuitSpec.from_constants(us, problem.powers, M, oracle=q1.kind, target=q2.kind)


def _run(problem: _Problem, x0: np.ndarray, cfg: OptimizerConfig):
    if cfg.max_iterations == 0:
        return x0, problem.value(x0), 0
    res = minimize(
        problem.value_and_grad,
        x0,
        jac=True,
        method="L-BFGS-B",
        options={"maxiter": cfg.max_iterations, "ftol": cfg.ftol, "gtol": cfg.gtol, "maxcor": 20},
    )
    return res.x, float(res.fun), int(res.nit)


def restart_rng(master_seed: int, restart: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([master_seed, restart]))


def optimize_circuit(
    q1: Oracle | str,
    q2: Oracle | str,
    N: int,
    fs: Sequence[FunctionTable],
    powers: Sequence[int] | None = None,
    cfg: OptimizerConfig | None = None,
    init: Sequence[np.ndarray] | None = None,
) -> OptimizationResult:
    """Best circuit with ``N`` queries of ``q1`` approximating ``q2`` on ``fs``.

    Parameters
    ----------
    powers
        Query powers; all ``+1`` by default.
    init
        Optional list of ``N + 1`` unitaries used as an extra warm-started
        run next to the seeded restarts.
    """
    q1, q2 = make_oracle(q1), make_oracle(q2)
    cfg = cfg or OptimizerConfig()
    fs = list(fs)
    if N < 0:
        raise ValueError("N must be non-negative")
    if not fs:
        raise ValueError("need at least one function")
    powers = tuple(powers) if powers is not None else (1,) * N
    if len(powers) != N or any(p not in (1, -1) for p in powers):
        raise ValueError("powers must be N entries of +1 or -1")
    problem = _build_problem(q1, q2, powers, fs, cfg.beta)

    def job(r):
        if r == "warm":
            seed = None
            x0 = np.concatenate([params_from_hermitian(unitary_log(u)) for u in init])
        else:
            seed = (cfg.master_seed, r)
            rng = restart_rng(*seed)
            x0 = np.concatenate(
                [params_from_hermitian(unitary_log(random_unitary(problem.dim, rng))) for _ in range(N + 1)]
            )
        x, obj, nit = _run(problem, x0, cfg)
        circuit = _circuit_from_params(problem, x, q1, q2)
        err = approx_error(circuit, q1, q2, fs).max_error
        if r == "warm":
            # keep the starting point if optimisation made the true metric worse
            start = _circuit_from_params(problem, x0, q1, q2)
            start_err = approx_error(start, q1, q2, fs).max_error
            if start_err < err:
                x, obj, circuit, err = x0, problem.value(x0), start, start_err
        return RestartSummary(r, seed, err, obj, nit), circuit

    jobs: list = list(range(cfg.restarts))
    if init is not None:
        if len(init) != N + 1:
            raise ValueError("init needs N + 1 unitaries")
        jobs.append("warm")
    outcomes = parallel_map(job, jobs)
    best = min(range(len(outcomes)), key=lambda i: (outcomes[i][0].final_error, outcomes[i][0].final_objective, i))
    summary, circuit = outcomes[best]
    return OptimizationResult(
        circuit=circuit,
        objective=summary.final_objective,
        max_error=summary.final_error,
        restarts=tuple(o[0] for o in outcomes),
        powers=powers,
        config=cfg,
    )


# ---------------------------------------------------------------------------
# error floors


def power_patterns(N: int, all_patterns: bool = False) -> list[tuple[int, ...]]:
    """All-``+1`` and alternating patterns, or every pattern when asked (``N <= 4``)."""
    if all_patterns:
        if N > 4:
            raise ValueError("exhaustive pattern search is limited to N <= 4")
        import itertools

        return [tuple(p) for p in itertools.product((1, -1), repeat=N)]
    pats = [(1,) * N, tuple(1 if k % 2 == 0 else -1 for k in range(N))]
    return list(dict.fromkeys(pats))


@dataclass(frozen=True)
class FloorResult:
    N: int
    floor: float
    by_pattern: dict = field(default_factory=dict)
    best: OptimizationResult | None = None

    def to_json(self) -> dict:
        return {
            "N": self.N,
            "floor": self.floor,
            "by_pattern": {"".join("+" if p == 1 else "-" for p in k): v for k, v in self.by_pattern.items()},
        }


def _pad(circuit: CircuitSpec, extra: int) -> list[np.ndarray]:
    us = [g.matrix for g in circuit.constants()]
    return us + [np.eye(circuit.dim, dtype=complex)] * extra


def error_floor(
    q1: Oracle | str,
    q2: Oracle | str,
    N: int,
    fs: Sequence[FunctionTable],
    cfg: OptimizerConfig | None = None,
    previous: Sequence[FloorResult] = (),
    all_patterns: bool = False,
) -> FloorResult:
    """Smallest maximum error found with ``N`` queries over the searched patterns.

    ``previous`` holds floors for smaller ``N`` (as produced by
    :func:`error_floor_sweep`); their best circuits, padded with identity
    constants, seed an extra warm-started run per pattern. Padding by two
    opposite queries reproduces the shorter circuit exactly, so the floor at
    ``N`` never exceeds the floor at ``N - 2``.
    """
    cfg = cfg or OptimizerConfig()
    by_pattern = {}
    best: OptimizationResult | None = None
    for pattern in power_patterns(N, all_patterns):
        exact, loose = None, None
        for prev in previous:
            if prev.best is None or prev.N >= N or tuple(pattern[: prev.N]) != prev.best.powers:
                continue
            gap = N - prev.N
            if gap == 2 and pattern[-1] == -pattern[-2]:
                exact = _pad(prev.best.circuit, gap)
            elif gap == 1:
                loose = _pad(prev.best.circuit, gap)
        init = exact if exact is not None else loose
        res = optimize_circuit(q1, q2, N, fs, pattern, cfg, init=init)
        by_pattern[pattern] = res.max_error
        if best is None or res.max_error < best.max_error:
            best = res
    return FloorResult(N, best.max_error, by_pattern, best)


def error_floor_sweep(
    q1: Oracle | str,
    q2: Oracle | str,
    N_max: int,
    fs: Sequence[FunctionTable],
    cfg: OptimizerConfig | None = None,
) -> list[FloorResult]:
    """Floors for ``N = 0 .. N_max`` with warm starts from earlier results."""
    out: list[FloorResult] = []
    for N in range(N_max + 1):
        out.append(error_floor(q1, q2, N, fs, cfg, previous=tuple(out)))
    return out


def constant_floor(q2: Oracle | str, fs: Sequence[FunctionTable]) -> float:
    """``1/2 max_{f, f'} ||Q2_f - Q2_f'||``, a floor for query-free circuits."""
    from .linalg import op_norm

    q2 = make_oracle(q2)
    mats = [q2.query(f) for f in fs]
    return max(
        (0.5 * op_norm(a - b) for i, a in enumerate(mats) for b in mats[i + 1 :]), default=0.0
    )
