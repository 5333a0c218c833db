"""Command-line front end: ``qoracle <command> [<action>] [options]``.

Every command writes one JSON document with the tool version, the fully
resolved configuration, the seed, the wall-clock duration and a ``result``
block. The ``result`` block depends only on the configuration, so reruns
reproduce it byte for byte.

Exit codes: 0 success, 1 contract violation, 2 bad input.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from pathlib import Path
from typing import Any

import numpy as np

from . import __version__
from .bounds import (
    FunctionPair,
    adversary_pair,
    bernstein_ratio,
    glp_lower_bound,
    glp_min_error,
    lemma1_bound,
    mainthm_bound,
)
from .circuits import (
    CircuitSpec,
    approx_error,
    minimal_simulates_standard,
    simulate_min_via_std,
    trace_degree,
)
from .classify import classify, enumerate_functions, enumerate_permutations
from .errors import ContractViolation
from .jsonio import complex_matrix_to_json, dumps, to_plain, write_atomic
from .optimize import OptimizerConfig, optimize_circuit, power_patterns
from .oracles import G_PRESETS, FunctionTable, GenericLocalPhaseSpec, make_oracle
from .suite import CRITERIA, determinism_result, run_suite
from .trig import TrigPoly


class UsageError(ValueError):
    pass


# ---------------------------------------------------------------------------
# input helpers


def _read_json(path: str) -> Any:
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"file not found: {path}")
    try:
        return json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path} is not valid JSON: {exc}") from exc


def _function(path: str | None, what: str = "--fn") -> FunctionTable:
    if path is None:
        raise UsageError(f"{what} is required")
    return FunctionTable.from_json(_read_json(path))


def _oracle(kind: str, args, glp_spec_path: str | None = None):
    if kind == "glp":
        spec_path = glp_spec_path or getattr(args, "spec", None)
        if spec_path:
            return make_oracle("glp", spec=_read_json(spec_path))
        n = getattr(args, "n", None) or 1
        g = getattr(args, "g", None) or "linear"
        c = getattr(args, "C", None) or 1.0
        return make_oracle("glp", spec=GenericLocalPhaseSpec.diagonal(n, g, c))
    return make_oracle(kind, d=getattr(args, "d", 1) or 1)


def _circuit(path: str | None) -> CircuitSpec:
    if path is None:
        raise UsageError("--circuit is required")
    return CircuitSpec.from_json(_read_json(path), base_dir=Path(path).parent)


def _pair(args) -> FunctionPair:
    if args.fn and args.fn2:
        return FunctionPair(_function(args.fn), _function(args.fn2, "--fn2"))
    if args.m is None:
        raise UsageError("give --fn and --fn2, or --m (and optionally --n) for the adversary pair")
    return adversary_pair(args.n or 1, args.m)


def _eig_json(es) -> dict:
    return {
        "labels": [list(lab) if isinstance(lab, tuple) else lab for lab in es.labels] if es.labels else None,
        "phases": es.phases.tolist(),
        "vectors": complex_matrix_to_json(es.vectors.T),
    }


# ---------------------------------------------------------------------------
# commands; each returns (result, resolved config, seed)


def cmd_oracle(args):
    f = _function(args.fn)
    oracle = _oracle(args.kind, args)
    config = {"kind": args.kind, "oracle": oracle.describe(), "f": f.to_json()}
    if args.action == "build":
        return {"matrix": complex_matrix_to_json(oracle.query(f))}, config, None
    es = oracle.eigensystem(f)
    result = _eig_json(es)
    result["residual"] = es.residual(oracle.query(f))
    return result, config, None


def cmd_classify(args):
    if args.n is None or args.m is None:
        raise UsageError("classify needs --n and --m")
    family = args.family if args.family != "all" else None
    oracle = _oracle(args.kind, args)
    report = classify(oracle, args.n, args.m, family=family, seed=args.seed)
    config = {"kind": args.kind, "oracle": oracle.describe(), "n": args.n, "m": args.m, "family": args.family}
    return report.to_json(witness=args.witness), config, args.seed


def cmd_simulate(args):
    tol = args.tol if args.tol is not None else 1e-8
    if args.action == "min-via-std":
        f = _function(args.fn)
        p = args.p_bound
        report, circuit = simulate_min_via_std(f, p)
        result = report.to_json()
        result.update(
            {
                "registers": [{"name": r.name, "bits": r.bits} for r in circuit.registers],
                "exact_within_tol": report.max_error <= tol,
            }
        )
        if args.circuit_out:
            write_atomic(args.circuit_out, dumps(circuit.to_spec(target="min", target_qubits=f.n).to_json()))
            result["circuit_ref"] = args.circuit_out
        return result, {"f": f.to_json(), "p_bound": p, "tol": tol}, None
    n = args.n or 1
    circuit = minimal_simulates_standard(n)
    fs = [_function(args.fn)] if args.fn else enumerate_permutations(n)
    report = approx_error(circuit, "min", "std", fs)
    result = report.to_json()
    result["exact_within_tol"] = report.max_error <= tol
    if args.circuit_out:
        write_atomic(args.circuit_out, dumps(circuit.to_json()))
        result["circuit_ref"] = args.circuit_out
    return result, {"n": n, "functions": len(fs), "tol": tol}, None


def cmd_degree(args):
    circuit = _circuit(args.circuit)
    f = _function(args.fn)
    oracle = _oracle(args.kind, args)
    rng = np.random.default_rng(args.seed)
    psi = rng.standard_normal(circuit.dim) + 1j * rng.standard_normal(circuit.dim)
    psi /= np.linalg.norm(psi)
    trace = trace_degree(circuit, oracle, f, psi)
    result = {
        "degrees": list(trace.degrees),
        "query_counts": list(trace.query_counts),
        "final_degree": trace.degrees[-1],
        "query_count": circuit.query_count,
        "degree_within_queries": all(d <= q for d, q in zip(trace.degrees, trace.query_counts)),
        "terms": trace.state.term_count,
    }
    return result, {"kind": args.kind, "oracle": oracle.describe(), "f": f.to_json(), "circuit": args.circuit}, args.seed


def cmd_bound(args):
    if args.action == "glp":
        if args.m is None or args.delta is None:
            raise UsageError("bound glp needs --m and --delta")
        g = args.g or "linear"
        if g not in G_PRESETS:
            raise UsageError(f"unknown phase function {g!r}")
        B = args.B if args.B is not None else G_PRESETS[g][1]
        C = args.C if args.C is not None else 1.0
        n_min = glp_lower_bound(args.m, args.delta, B, C)
        result = {"N_min": n_min}
        if args.N is not None:
            result["min_error"] = glp_min_error(args.m, args.N, B, C)
        return result, {"m": args.m, "delta": args.delta, "g": g, "B": B, "C": C, "N": args.N}, None
    if args.action == "bernstein":
        if args.poly is None or args.theta1 is None or args.theta2 is None:
            raise UsageError("bound bernstein needs --poly, --theta1 and --theta2")
        t = TrigPoly.from_json(_read_json(args.poly))
        ratio = bernstein_ratio(t, args.theta1, args.theta2)
        return (
            {"ratio": ratio, "degree": t.degree(), "within_degree": ratio <= t.degree() + 1e-9},
            {"poly": args.poly, "theta1": args.theta1, "theta2": args.theta2},
            None,
        )
    circuit = _circuit(args.circuit)
    q1 = _oracle(args.q1, args)
    q2 = _oracle(args.q2, args)
    config = {"circuit": args.circuit, "q1": q1.describe(), "q2": q2.describe()}
    if args.action == "lemma1":
        f = _function(args.fn)
        report = lemma1_bound(circuit, q1, q2, f)
        config["f"] = f.to_json()
    else:
        pair = _pair(args)
        report = mainthm_bound(circuit, q1, q2, pair)
        config["pair"] = pair.to_json()
    result = report.to_json()
    result["sound"] = report.sound
    return result, config, None


def _function_set(args) -> list[FunctionTable]:
    if args.fn:
        fs = [_function(args.fn)]
        if args.fn2:
            fs.append(_function(args.fn2, "--fn2"))
        return fs
    if args.family == "pair":
        pair = adversary_pair(args.n or 1, args.m)
        return [pair.f1, pair.f2]
    if args.n is None or args.m is None:
        raise UsageError("optimize needs --fn, or --n and --m with --family")
    if args.family == "permutations":
        return enumerate_permutations(args.n)
    return enumerate_functions(args.n, args.m)


def cmd_optimize(args):
    if args.N is None:
        raise UsageError("optimize needs --N")
    fs = _function_set(args)
    q1 = _oracle(args.q1, args)
    q2 = _oracle(args.q2, args)
    cfg = OptimizerConfig(restarts=args.restarts, max_iterations=args.iterations, master_seed=args.seed)
    if args.powers:
        patterns = [tuple(int(p) for p in args.powers.split(","))]
    else:
        patterns = power_patterns(args.N, args.all_patterns)
    runs = [optimize_circuit(q1, q2, args.N, fs, pat, cfg) for pat in patterns]
    best = min(runs, key=lambda r: r.max_error)
    result = best.to_json(args.circuit_out)
    result["patterns"] = [{"powers": list(r.powers), "best_error": r.max_error} for r in runs]
    if args.circuit_out:
        write_atomic(args.circuit_out, dumps(best.circuit.to_json()))
    config = {
        "q1": q1.describe(),
        "q2": q2.describe(),
        "N": args.N,
        "functions": [f.to_json() for f in fs],
        "optimizer": cfg.to_json(),
    }
    return result, config, args.seed


def cmd_suite(args):
    only = [int(k) for k in args.only.split(",")] if args.only else None
    if only and any(k not in CRITERIA for k in only):
        raise UsageError(f"criteria must be among {sorted(CRITERIA)}")
    run = run_suite(args.seed, only)
    lines = [r.line() for r in run.results]
    result = run.payload()
    timings = {str(k): v for k, v in run.timings.items()}
    if args.check_determinism:
        again = run_suite(args.seed, only)
        det = determinism_result(run, again)
        result["criteria"].append(det.to_json())
        lines.append(det.line())
    for line in lines:
        print(line, file=sys.stderr)
    result["passed"] = all(c["passed"] for c in result["criteria"])
    return result, {"seed": args.seed, "only": only, "check_determinism": args.check_determinism}, args.seed, timings


COMMANDS = {
    "oracle": cmd_oracle,
    "classify": cmd_classify,
    "simulate": cmd_simulate,
    "degree": cmd_degree,
    "bound": cmd_bound,
    "optimize": cmd_optimize,
    "suite": cmd_suite,
}


# ---------------------------------------------------------------------------
# parser


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--fn", help="FunctionTable JSON file")
    p.add_argument("--kind", choices=("std", "cp", "min", "glp"), default="std")
    p.add_argument("--n", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--d", type=int, default=1, help="complex phase multiplier")
    p.add_argument("--spec", help="GenericLocalPhaseSpec JSON file (glp oracles)")
    p.add_argument("--g", choices=tuple(G_PRESETS), help="glp phase function preset")
    p.add_argument("--C", type=float, help="glp coefficient bound")
    p.add_argument("--B", type=float, help="glp phase function bound")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="write the JSON result here instead of stdout")
    p.add_argument("--csv", help="also write a flattened CSV table here")
    p.add_argument("--tol", type=float, help="tolerance override for exactness flags")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qoracle", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"qoracle {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("oracle", help="build a query matrix or its eigensystem")
    p.add_argument("action", choices=("build", "eig"))
    _common(p)

    p = sub.add_parser("classify", help="nonentangled / basic / simple verdicts")
    p.add_argument("--family", default="all", choices=("all", "permutations"))
    p.add_argument("--witness", action="store_true", help="include witness bases")
    _common(p)

    p = sub.add_parser("simulate", help="constructive simulations between oracles")
    p.add_argument("action", choices=("min-via-std", "std-via-min"))
    p.add_argument("--p-bound", type=int, default=4)
    p.add_argument("--circuit-out", help="write the circuit JSON here")
    _common(p)

    p = sub.add_parser("degree", help="symbolic degree along a circuit")
    p.add_argument("action", choices=("trace",))
    p.add_argument("--circuit", help="CircuitSpec JSON file")
    _common(p)

    p = sub.add_parser("bound", help="lower-bound evaluators")
    p.add_argument("action", choices=("lemma1", "mainthm", "glp", "bernstein"))
    p.add_argument("--circuit")
    p.add_argument("--q1", default="cp", choices=("std", "cp", "min", "glp"))
    p.add_argument("--q2", default="std", choices=("std", "cp", "min", "glp"))
    p.add_argument("--fn2", help="second function of the pair")
    p.add_argument("--delta", type=float)
    p.add_argument("--N", type=int)
    p.add_argument("--poly", help="TrigPoly JSON file")
    p.add_argument("--theta1", type=float)
    p.add_argument("--theta2", type=float)
    _common(p)

    p = sub.add_parser("optimize", help="search for the best N-query circuit")
    p.add_argument("--q1", default="min", choices=("std", "cp", "min", "glp"))
    p.add_argument("--q2", default="std", choices=("std", "cp", "min", "glp"))
    p.add_argument("--N", type=int)
    p.add_argument("--fn2")
    p.add_argument("--family", default="all", choices=("all", "permutations", "pair"))
    p.add_argument("--powers", help="comma separated +1/-1 pattern")
    p.add_argument("--all-patterns", action="store_true")
    p.add_argument("--restarts", type=int, default=20)
    p.add_argument("--iterations", type=int, default=2000)
    p.add_argument("--circuit-out")
    _common(p)

    p = sub.add_parser("suite", help="acceptance experiments")
    p.add_argument("action", choices=("acceptance",))
    p.add_argument("--only", help="comma separated criterion numbers")
    p.add_argument("--check-determinism", action="store_true")
    _common(p)
    p.set_defaults(seed=42)
    return parser


# ---------------------------------------------------------------------------
# output


def _flatten(obj: Any, prefix: str = "") -> dict:
    out = {}
    if isinstance(obj, dict):
        for k, v in obj.items():
            out.update(_flatten(v, f"{prefix}{k}." if prefix or k else ""))
    elif isinstance(obj, list) and obj and not all(isinstance(v, dict) for v in obj):
        out[prefix.rstrip(".")] = json.dumps(obj)
    elif isinstance(obj, list):
        for i, v in enumerate(obj):
            out.update(_flatten(v, f"{prefix}{i}."))
    else:
        out[prefix.rstrip(".")] = obj
    return out


def to_csv(result: Any) -> str:
    """Rows of the first list-of-records found in ``result``; key/value pairs otherwise."""
    result = to_plain(result)
    records = None
    if isinstance(result, dict):
        for key in ("rows", "criteria", "restarts", "per_f_errors"):
            if isinstance(result.get(key), list) and result[key] and isinstance(result[key][0], dict):
                records = [_flatten(r) for r in result[key]]
                break
    buf = io.StringIO()
    if records is None:
        writer = csv.writer(buf)
        writer.writerow(["key", "value"])
        for k, v in _flatten(result).items():
            writer.writerow([k, v])
    else:
        fields = list(dict.fromkeys(k for r in records for k in r))
        writer = csv.DictWriter(buf, fieldnames=fields)
        writer.writeheader()
        writer.writerows(records)
    return buf.getvalue()


def run_command(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    start = time.perf_counter()
    try:
        out = COMMANDS[args.command](args)
    except ContractViolation as exc:
        print(f"qoracle: contract violation: {exc}", file=sys.stderr)
        return 1
    except (ValueError, KeyError, TypeError, OSError) as exc:
        print(f"qoracle: bad input: {exc}", file=sys.stderr)
        return 2
    result, config, seed, *extra = out
    doc = {
        "tool": {"name": "qoracle", "version": __version__},
        "command": [args.command] + ([args.action] if hasattr(args, "action") else []),
        "config": config,
        "seed": seed,
        "duration_s": time.perf_counter() - start,
        "result": result,
    }
    if extra:
        doc["timings_s"] = extra[0]
    text = dumps(doc)
    if args.out:
        write_atomic(args.out, text)
    else:
        sys.stdout.write(text)
    if args.csv:
        write_atomic(args.csv, to_csv(result))
    if args.command == "suite" and not result.get("passed", True):
        return 1
    return 0


def main() -> None:
    sys.exit(run_command())
