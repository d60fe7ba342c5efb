"""Command-line front end.

Exit codes: 0 success, 1 config error, 2 non-convergence, 3 infinite
distance, 4 reproduction failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import replace
from typing import Optional, Sequence

import numpy as np

from .config import ConfigError, TripleConfig, load_config
from .linalg import DomainError
from .metric import NonConvergenceError, cost_matrix, spectral_distance
from .paperlab import INEQUALITY_TOL, repro_paper
from .transport import kantorovich_dual, spectral_wasserstein
from .triple import Diagonal, ProbabilityState

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NONCONVERGENCE = 2
EXIT_INFINITE = 3
EXIT_REPRO = 4


def _num(x: float):
    """JSON-safe float: infinities become the strings "inf" / "-inf"."""
    x = float(x)
    if math.isfinite(x):
        return x
    return "inf" if x > 0 else "-inf"


def _fmt(x: float) -> str:
    return "inf" if math.isinf(x) else repr(float(x))


def _witness(w) -> list:
    if w is None:
        return []
    if isinstance(w, Diagonal):
        return [float(z.real) for z in w.z]
    return [[[float(z.real), float(z.imag)] for z in row] for row in w.a]


def _load(args) -> TripleConfig:
    cfg = load_config(args.config)
    if args.tol is not None:
        cfg = replace(cfg, solver=replace(cfg.solver, tol=args.tol))
    return cfg


def cmd_distance(args, out) -> int:
    cfg = _load(args)
    phi, psi = cfg.state(args.phi), cfg.state(args.psi)
    res = spectral_distance(cfg.triple, phi, psi, cfg.solver)
    if args.json:
        json.dump({"value": _num(res.value), "witness": _witness(res.witness),
                   "iterations": res.iterations, "certified_gap": res.certified_gap}, out)
        out.write("\n")
    else:
        out.write(f"distance: {_fmt(res.value)}\n")
        out.write(f"witness: {_witness(res.witness)}\n")
        out.write(f"iterations: {res.iterations}\n")
        out.write(f"certified_gap: {res.certified_gap!r}\n")
    return EXIT_INFINITE if res.is_infinite else EXIT_OK


def cmd_wasserstein(args, out) -> int:
    cfg = _load(args)
    phi, psi = cfg.state(args.phi), cfg.state(args.psi)
    res = spectral_wasserstein(cfg.triple, phi, psi, cfg.solver)
    dual_value = None
    if res.potential is not None:
        dual_value, _ = kantorovich_dual(res.cost, phi.weights, psi.weights)
    payload = {
        "value": _num(res.value),
        "dual_value": None if dual_value is None else _num(dual_value),
        "duality_gap": None if dual_value is None or math.isinf(res.value) else abs(res.value - dual_value),
        "plan": res.plan.pi.tolist(),
        "potential": None if res.potential is None else res.potential.f.tolist(),
    }
    if args.json:
        json.dump(payload, out)
        out.write("\n")
    else:
        out.write(f"wasserstein: {_fmt(res.value)}\n")
        if dual_value is not None:
            out.write(f"dual: {_fmt(dual_value)}\n")
            out.write(f"duality_gap: {payload['duality_gap']!r}\n")
        out.write("plan:\n")
        for row in res.plan.pi:
            out.write("  " + " ".join(f"{x:.12g}" for x in row) + "\n")
        if res.potential is not None:
            out.write("potential: " + " ".join(f"{x:.12g}" for x in res.potential.f) + "\n")
    return EXIT_INFINITE if math.isinf(res.value) else EXIT_OK


def cmd_compare(args, out) -> int:
    cfg = _load(args)
    if len(args.states) % 2:
        raise ConfigError("states", "compare takes pairs of states")
    cost = cost_matrix(cfg.triple, cfg.solver)
    rows = []
    for a, b in zip(args.states[0::2], args.states[1::2]):
        phi, psi = cfg.state(a), cfg.state(b)
        d = spectral_distance(cfg.triple, phi, psi, cfg.solver).value
        w = spectral_wasserstein(cfg.triple, phi, psi, cfg.solver, cost=cost).value
        gap = w - d if not (math.isinf(w) and math.isinf(d)) else 0.0
        rows.append({"phi": a, "psi": b, "d": d, "w": w, "gap": gap, "internal_error": gap < -INEQUALITY_TOL})
    if args.json:
        json.dump([{k: _num(v) if isinstance(v, float) else v for k, v in r.items()} for r in rows], out)
        out.write("\n")
    else:
        out.write(f"{'phi':>14} {'psi':>14} {'d':>20} {'W':>20} {'gap':>12}\n")
        for r in rows:
            flag = "  INTERNAL ERROR: d > W" if r["internal_error"] else ""
            out.write(f"{r['phi']:>14} {r['psi']:>14} {_fmt(r['d']):>20} {_fmt(r['w']):>20} {r['gap']:>12.3e}{flag}\n")
    if any(r["internal_error"] for r in rows):
        return EXIT_NONCONVERGENCE
    return EXIT_INFINITE if any(math.isinf(r["d"]) or math.isinf(r["w"]) for r in rows) else EXIT_OK


def cmd_cost_matrix(args, out) -> int:
    cfg = _load(args)
    c = cost_matrix(cfg.triple, cfg.solver).entries
    if args.json:
        json.dump([[_num(x) for x in row] for row in c], out)
        out.write("\n")
    elif args.csv:
        w = csv.writer(out, lineterminator="\n")
        for row in c:
            w.writerow([_fmt(x) for x in row])
    else:
        for row in c:
            out.write(" ".join(f"{_fmt(x):>20}" for x in row) + "\n")
    return EXIT_INFINITE if not np.all(np.isfinite(c)) else EXIT_OK


def simplex_grid(resolution: int) -> list[tuple[float, float, float]]:
    """Regular grid on the 2-simplex with ``resolution`` points per edge."""
    k = resolution - 1
    return [(i / k, j / k, (k - i - j) / k) for i in range(k + 1) for j in range(k + 1 - i)]


def cmd_grid_scan(args, out) -> int:
    cfg = _load(args)
    if not cfg.triple.is_commutative or cfg.triple.algebra.n != 3:
        raise ConfigError("algebra", "grid-scan supports commutative algebras with n = 3 only")
    if args.resolution < 2:
        raise ConfigError("--resolution", "must be at least 2")
    grid = simplex_grid(args.resolution)
    refs = [tuple(cfg.state(args.reference).weights)] if args.reference else grid
    cost = cost_matrix(cfg.triple, cfg.solver)
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["lambda1", "lambda2", "lambda1_ref", "lambda2_ref", "d", "w", "gap"])
    for p in grid:
        for q in refs:
            phi, psi = ProbabilityState(p), ProbabilityState(q)
            d = spectral_distance(cfg.triple, phi, psi, cfg.solver).value
            wv = spectral_wasserstein(cfg.triple, phi, psi, cfg.solver, cost=cost).value
            gap = wv - d if not (math.isinf(wv) and math.isinf(d)) else 0.0
            w.writerow([repr(p[0]), repr(p[1]), repr(q[0]), repr(q[1]), _fmt(d), _fmt(wv), _fmt(gap)])
    return EXIT_OK


def cmd_repro_paper(args, out) -> int:
    report = repro_paper(seed=args.seed, samples=args.samples)
    if args.json:
        out.write(json.dumps(report, sort_keys=True, indent=2) + "\n")
    else:
        for check in report["checks"]:
            out.write(f"{'PASS' if check['passed'] else 'FAIL'}  {check['name']}\n")
        out.write(f"overall: {'PASS' if report['passed'] else 'FAIL'}\n")
        if not report["passed"]:
            failing = [c for c in report["checks"] if not c["passed"]]
            out.write(json.dumps(failing, sort_keys=True, indent=2) + "\n")
    return EXIT_OK if report["passed"] else EXIT_REPRO


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--csv", action="store_true", help="CSV output where supported")
    common.add_argument("--tol", type=float, default=None, help="absolute tolerance on spectral distances")
    common.add_argument("--seed", type=int, default=42)
    common.add_argument("--samples", type=int, default=64, help="sphere sample size for the M2 probe")

    parser = argparse.ArgumentParser(prog="spectral-transport", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    for name, fn in [("distance", cmd_distance), ("wasserstein", cmd_wasserstein)]:
        p = sub.add_parser(name, parents=[common])
        p.add_argument("config")
        p.add_argument("phi", help="state name, dN for a pure state, or comma-separated weights")
        p.add_argument("psi")
        p.set_defaults(func=fn)

    p = sub.add_parser("compare", parents=[common])
    p.add_argument("config")
    p.add_argument("states", nargs="+", help="pairs of states: PHI1 PSI1 [PHI2 PSI2 ...]")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("cost-matrix", parents=[common])
    p.add_argument("config")
    p.set_defaults(func=cmd_cost_matrix)

    p = sub.add_parser("grid-scan", parents=[common])
    p.add_argument("config")
    p.add_argument("--resolution", type=int, default=5)
    p.add_argument("--reference", default=None, help="fixed reference state (default: every grid point)")
    p.set_defaults(func=cmd_grid_scan)

    p = sub.add_parser("repro-paper", parents=[common])
    p.set_defaults(func=cmd_repro_paper)
    return parser


def main(argv: Optional[Sequence[str]] = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    args = build_parser().parse_args(argv)
    buf = io.StringIO()
    try:
        code = args.func(args, buf)
    except ConfigError as err:
        stderr.write(f"config error: {err}\n")
        return EXIT_CONFIG
    except (DomainError, OSError) as err:
        stderr.write(f"config error: {err}\n")
        return EXIT_CONFIG
    except NonConvergenceError as err:
        stderr.write(f"did not converge: {err} (bounds [{err.lower!r}, {err.upper!r}])\n")
        return EXIT_NONCONVERGENCE
    stdout.write(buf.getvalue())
    return code


if __name__ == "__main__":
    sys.exit(main())
