"""Command-line front end: ``maxent-bell {solve,sweep,check,verify}``.

Exit codes: 0 success, 1 usage or parse error, 2 infeasible / boundary /
non-converged, 3 verification failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import verify as verify_mod
from .bell import (
    TWO_SQRT2,
    BellDiagonalState,
    Region,
    bell_chsh_operator,
    bell_chsh_squared,
    classify_constraint_point,
    two_constraint_state,
    uncertainty_lower_bound,
)
from .errors import BoundaryDivergenceError, InfeasibleError, MaxEntError
from .problem import FileFormatError, load_problem
from .qstate import BELL_LABELS, expectation, to_bell_basis
from .separability import bell_diagonal_separable, inseparability_threshold, ppt_check
from .solver import entropy_from_dual, solve_dual, thermo_map
from .sweep import fmt, load_sweep, render_csv, run_sweep

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INFEASIBLE = 2
EXIT_VERIFY = 3

BELL_DIAGONAL_TOL = 1e-9


def _err(msg: str) -> None:
    print(f"error: {msg}", file=sys.stderr)


def _complex(z: complex) -> str:
    re, im = fmt(z.real), fmt(abs(z.imag))
    return f"{re}{'-' if z.imag < 0 else '+'}{im}j"


def _matrix_lines(m: np.ndarray, indent: str = "  ") -> list[str]:
    cells = [[_complex(z) for z in row] for row in m]
    width = max(len(c) for row in cells for c in row)
    return [indent + "  ".join(c.rjust(width) for c in row) for row in cells]


def _state_report(rho: np.ndarray) -> tuple[list[str], dict]:
    """Lines and record fields describing a 4x4 state: moments, bound, separability."""
    lines, rec = [], {}
    b = expectation(rho, bell_chsh_operator())
    s2 = expectation(rho, bell_chsh_squared())
    slack = s2 - TWO_SQRT2 * abs(b)
    lines.append(f"Bell-CHSH moments: b = {fmt(b)}, sigma2 = {fmt(s2)}")
    status = "satisfied" if slack >= -1e-10 else "VIOLATED"
    lines.append(f"uncertainty bound: sigma2 - 2*sqrt(2)*|b| = {fmt(slack)} ({status})")
    region = classify_constraint_point(b, s2)
    if b >= -1e-12:
        lines.append(f"constraint region: {region}")
    rec.update(b=b, sigma2=s2, uncertainty_slack=slack, region=region.value)

    in_bell = to_bell_basis(rho)
    off = np.max(np.abs(in_bell - np.diag(np.diag(in_bell))))
    ppt = ppt_check(rho)
    lines.append(
        f"separability (PPT): {'separable' if ppt.separable else 'inseparable'}, "
        f"min partial-transpose eigenvalue {fmt(ppt.margin)}"
    )
    rec["ppt"] = {"separable": ppt.separable, "min_eigenvalue": ppt.margin}
    if off <= BELL_DIAGONAL_TOL:
        state = BellDiagonalState.from_probabilities(np.clip(np.diag(in_bell).real, 0.0, 1.0))
        v = bell_diagonal_separable(state)
        lines.append(
            f"separability (Bell-diagonal, max weight <= 1/2): {'separable' if v.separable else 'inseparable'}, "
            f"max weight {fmt(v.max_eigenvalue)}, margin {fmt(v.margin)}"
        )
        rec["bell_diagonal"] = {"separable": v.separable, "max_eigenvalue": v.max_eigenvalue, "margin": v.margin}
        if b >= 0 and region is not Region.INFEASIBLE:
            lines.append(f"inseparability threshold 8 - 2*sqrt(2)*b = {fmt(inseparability_threshold(min(b, TWO_SQRT2)))}")
    return lines, rec


def cmd_solve(args) -> int:
    try:
        problem = load_problem(args.problem)
    except FileFormatError as exc:
        _err(str(exc))
        return EXIT_USAGE
    except OSError as exc:
        _err(f"cannot read {args.problem}: {exc}")
        return EXIT_USAGE

    pair = problem.bell_pair()
    if pair is not None and pair[1] is not None:
        region = classify_constraint_point(*pair)
        if region is Region.INFEASIBLE:
            _err(
                f"infeasible Bell-CHSH targets b={fmt(pair[0])}, sigma2={fmt(pair[1])}: need 0 <= b <= 2*sqrt(2) "
                f"and 2*sqrt(2)*b <= sigma2 <= 8"
            )
            return EXIT_INFEASIBLE
        if region is not Region.INTERIOR:
            state = two_constraint_state(*pair)
            _err(
                f"targets sit on the boundary ({region}); the multipliers diverge. Closed-form state "
                f"({', '.join(BELL_LABELS)}) = ({', '.join(fmt(p) for p in state.probabilities)})"
            )
            return EXIT_INFEASIBLE

    try:
        constraints = problem.constraint_set()
        sol = solve_dual(
            constraints,
            tolerance=problem.tolerance,
            max_iterations=problem.max_iterations,
            multiplier_cap=problem.multiplier_cap,
        )
    except InfeasibleError as exc:
        _err(f"infeasible: {exc}")
        return EXIT_INFEASIBLE
    except BoundaryDivergenceError as exc:
        _err(f"boundary: {exc}")
        return EXIT_INFEASIBLE
    except MaxEntError as exc:
        _err(str(exc))
        return EXIT_USAGE

    out = []
    status = "converged" if sol.converged else "NOT converged"
    out.append(f"status: {status} after {sol.iterations} iterations")
    out.append("constraints:")
    width = max(len(n) for n in constraints.names)
    for name, t, lam, r in zip(constraints.names, constraints.targets, sol.multipliers, sol.residuals):
        out.append(f"  {name.ljust(width)}  target {fmt(t)}  lambda {fmt(lam)}  residual {fmt(r)}")
    out.append(f"ln_Z: {fmt(sol.ln_Z)}")
    out.append(f"entropy: {fmt(sol.entropy)}")
    record = {
        "converged": sol.converged,
        "iterations": sol.iterations,
        "names": list(constraints.names),
        "targets": list(constraints.targets),
        "multipliers": sol.multipliers.tolist(),
        "residuals": sol.residuals.tolist(),
        "ln_Z": sol.ln_Z,
        "entropy": sol.entropy,
        "state": [[[z.real, z.imag] for z in row] for row in sol.state],
    }
    if sol.converged:
        s_dual = entropy_from_dual(sol, constraints)
        out.append(f"entropy (ln Z + sum lambda*target): {fmt(s_dual)}")
        record["entropy_from_dual"] = s_dual
    lam1 = float(sol.multipliers[0])
    lam2 = float(sol.multipliers[1]) if len(sol.multipliers) > 1 else 0.0
    thermo = thermo_map(lam1, lam2, sol.ln_Z)
    mu = "undefined" if thermo.mu is None else fmt(thermo.mu)
    out.append(f"thermo: beta = {fmt(thermo.beta)}, mu = {mu}, free energy (ln Z) = {fmt(thermo.free_energy)}")
    record["thermo"] = {"beta": thermo.beta, "mu": thermo.mu, "free_energy": thermo.free_energy}
    out.append("state (computational basis uu, ud, du, dd):" if constraints.dim == 4 else "state:")
    out.extend(_matrix_lines(sol.state))
    if constraints.dim == 4:
        out.append(f"state (Bell basis {', '.join(BELL_LABELS)}):")
        out.extend(_matrix_lines(to_bell_basis(sol.state)))
        lines, extra = _state_report(sol.state)
        out.extend(lines)
        record.update(extra)
    print("\n".join(out))
    if args.record:
        Path(args.record).write_text(json.dumps(record, indent=2, sort_keys=True) + "\n")
    if not sol.converged:
        _err(f"solver did not converge; max residual {fmt(np.max(np.abs(sol.residuals)))}")
        return EXIT_INFEASIBLE
    return EXIT_OK


def cmd_sweep(args) -> int:
    try:
        spec = load_sweep(args.sweep)
    except FileFormatError as exc:
        _err(str(exc))
        return EXIT_USAGE
    except OSError as exc:
        _err(f"cannot read {args.sweep}: {exc}")
        return EXIT_USAGE
    try:
        result = run_sweep(spec, jobs=args.jobs)
    except InfeasibleError as exc:
        _err(str(exc))
        return EXIT_INFEASIBLE
    for w in result.warnings:
        print(f"warning: {w}", file=sys.stderr)
    try:
        with open(args.out, "w", newline="") as fh:
            fh.write(render_csv(result.rows))
    except OSError as exc:
        _err(f"cannot write {args.out}: {exc}")
        return EXIT_USAGE
    print(f"wrote {len(result.rows)} rows to {args.out}")
    return EXIT_OK


def cmd_check(args) -> int:
    b, s2 = args.b, args.sigma2
    region = classify_constraint_point(b, s2)
    print(f"b = {fmt(b)}, sigma2 = {fmt(s2)}")
    print(f"region: {region}")
    if region is Region.INFEASIBLE:
        if not 0 <= b <= TWO_SQRT2 + 1e-12:
            print("infeasible: b must lie in [0, 2*sqrt(2)]")
        else:
            print(f"infeasible: need {fmt(uncertainty_lower_bound(b))} <= sigma2 <= 8")
        return EXIT_INFEASIBLE
    threshold = inseparability_threshold(b)
    print(f"uncertainty bound 2*sqrt(2)*b: {fmt(uncertainty_lower_bound(b))}")
    print(f"inseparability threshold 8 - 2*sqrt(2)*b: {fmt(threshold)}")
    state = two_constraint_state(b, s2)
    print(f"state ({', '.join(BELL_LABELS)}): ({', '.join(fmt(p) for p in state.probabilities)})")
    v = bell_diagonal_separable(state)
    if abs(s2 - threshold) <= 1e-12:
        where = "b = sqrt(2)" if region is Region.MIN_UNCERTAINTY_BOUNDARY else "sigma2 = 8 - 2*sqrt(2)*b"
        verdict = f"boundary: {where} (separable, max weight 1/2)"
    else:
        verdict = "separable" if v.separable else "inseparable"
    print(f"verdict: {verdict}")
    print(f"max weight {fmt(v.max_eigenvalue)}, margin {fmt(v.margin)}")
    return EXIT_OK


def cmd_verify(args) -> int:
    names = args.suite or list(verify_mod.SUITES)
    unknown = [n for n in names if n not in verify_mod.SUITES]
    if unknown:
        _err(f"unknown suite(s) {', '.join(unknown)}; known: {', '.join(verify_mod.SUITES)}")
        return EXIT_USAGE
    failed = []
    for name in names:
        result = verify_mod.SUITES[name]()
        print(f"[{'PASS' if result.passed else 'FAIL'}] {name}")
        for c in result.checks:
            bound = f"<= {fmt(c.tolerance)}" if c.upper else f">= {fmt(-c.tolerance)}"
            line = f"    {'ok ' if c.passed else 'BAD'} {c.name}: worst {fmt(c.worst)} (need {bound})"
            if not c.passed and c.where:
                line += f" at {c.where}"
            print(line)
        if not result.passed:
            failed.append(name)
    if failed:
        print(f"verification FAILED: {', '.join(failed)}")
        return EXIT_VERIFY
    print(f"all {len(names)} suites passed")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="maxent-bell",
        description="Maximum-entropy inference with Bell-CHSH mean and dispersion constraints.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve a problem file")
    p.add_argument("problem", help="JSON problem file")
    p.add_argument("--record", metavar="PATH", help="also write a JSON record of the solution")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("sweep", help="sweep the (b, sigma2) region into a CSV file")
    p.add_argument("sweep", help="JSON sweep file")
    p.add_argument("--out", required=True, help="output CSV path")
    p.add_argument("--jobs", type=int, default=1, help="worker threads (row order is unaffected)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("check", help="classify a (b, sigma2) point")
    p.add_argument("--b", type=float, required=True)
    p.add_argument("--sigma2", type=float, required=True)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("verify", help="run the closed-form vs solver verification suites")
    p.add_argument("--suite", action="append", help="run only this suite (repeatable)")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
