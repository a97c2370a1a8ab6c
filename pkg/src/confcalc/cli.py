"""Command-line interface: deriv | integ | solve | verify | serve.

Contract: machine-readable results go to stdout as JSON with a fixed field
order; human-readable diagnostics go to stderr.  Exit codes are stable:

    0  success / all verifications passed
    1  usage or evaluation error
    2  mathematical nonexistence or divergence verdict
    3  solver nonconvergence

A mathematical "does not exist" is a correct answer in this domain, hence
its own exit code rather than an error.  The CONFCALC_TOL environment
variable overrides the default tolerances of integ and verify.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import identities, ivp
from .core import (
    ConformableError,
    DivergenceError,
    DomainError,
    EvaluationError,
    IvpSpec,
    LowerTerminal,
    Method,
    NonConvergence,
    Order,
    SpecError,
    StepFailure,
    Verdict,
)
from .deriv import Side, conformable_derivative, derivative_at_lower_terminal, one_sided_derivative
from .exprparse import ExprSyntaxError, rhs_function, scalar_function
from .integ import ProbeVerdict, QuadOptions, conformable_integral, divergence_probe

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NONEXISTENCE = 2
EXIT_NONCONVERGENCE = 3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage problems instead of exiting with code 2."""

    def error(self, message):
        raise _UsageError(message)


def _env_tol(default: float) -> float:
    raw = os.environ.get("CONFCALC_TOL")
    if raw is None:
        return default
    try:
        v = float(raw)
    except ValueError:
        raise _UsageError(f"CONFCALC_TOL must be a float, got {raw!r}")
    if not v > 0:
        raise _UsageError(f"CONFCALC_TOL must be > 0, got {v}")
    return v


def _emit(payload: dict):
    sys.stdout.write(json.dumps(payload) + "\n")


def build_parser() -> _Parser:
    p = _Parser(prog="confcalc",
                description="numerical conformable calculus: derivatives, "
                            "integrals, IVP solvers, identity verification")
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("deriv", help="conformable derivative of an expression in t")
    d.add_argument("--expr", required=True, help="expression in t, e.g. '2*sqrt(t)'")
    d.add_argument("--a", type=float, required=True, help="lower terminal")
    d.add_argument("--alpha", type=float, required=True, help="order in (0, 1]")
    d.add_argument("--t", type=float, help="evaluation point (t > a)")
    d.add_argument("--side", choices=["left", "right"],
                   help="one-sided limit instead of the two-sided derivative")
    d.add_argument("--at-terminal", action="store_true",
                   help="derivative at the lower terminal itself (--t ignored)")

    i = sub.add_parser("integ", help="conformable integral of an expression in t")
    i.add_argument("--expr", required=True)
    i.add_argument("--a", type=float, required=True)
    i.add_argument("--alpha", type=float, required=True)
    i.add_argument("--t", type=float, required=True)
    i.add_argument("--probe", action="store_true",
                   help="run the divergence probe instead of plain integration")

    s = sub.add_parser("solve", help="solve an IVP described by a JSON spec file")
    s.add_argument("spec_path", help="JSON file with a, alpha, x0, F, T, method, tol, samples")
    s.add_argument("--out", help="CSV output path (default: stdout)")
    s.add_argument("--compare", action="store_true",
                   help="run all three methods and print pairwise sup-norm gaps")

    v = sub.add_parser("verify", help="run the identity verification suites")
    v.add_argument("--suite", default="all", choices=list(identities.SUITE_NAMES))
    v.add_argument("--out", help="write the JSON report array to this path")
    v.add_argument("--tol", type=float, help="override the residual tolerance")

    srv = sub.add_parser("serve", help="start the HTTP service")
    srv.add_argument("--host", default="127.0.0.1")
    srv.add_argument("--port", type=int, default=8000)
    return p


def cmd_deriv(args) -> int:
    f = scalar_function(args.expr, domain_start=-math.inf)
    if args.at_terminal:
        est = derivative_at_lower_terminal(f, args.a, args.alpha)
    else:
        if args.t is None:
            raise _UsageError("--t is required unless --at-terminal is given")
        if args.side is not None:
            side = Side.LEFT if args.side == "left" else Side.RIGHT
            est = one_sided_derivative(f, args.a, args.alpha, args.t, side)
        else:
            est = conformable_derivative(f, args.a, args.alpha, args.t)
    _emit(est.to_dict())
    return EXIT_OK if est.verdict is Verdict.EXISTS else EXIT_NONEXISTENCE


def cmd_integ(args) -> int:
    f = scalar_function(args.expr, domain_start=-math.inf)
    opts = QuadOptions(tol=_env_tol(1e-10))
    if args.probe:
        result = divergence_probe(f, args.a, args.alpha, args.t, opts)
        _emit(result.to_dict())
        return EXIT_OK if result.verdict is ProbeVerdict.CONVERGENT else EXIT_NONEXISTENCE
    try:
        value = conformable_integral(f, args.a, args.alpha, args.t, opts)
    except DivergenceError as exc:
        print(f"confcalc: {exc}", file=sys.stderr)
        _emit({"verdict": "Divergent"})
        return EXIT_NONEXISTENCE
    _emit({"value": value})
    return EXIT_OK


_REQUIRED_SPEC_FIELDS = {
    "a": float, "alpha": float, "x0": float, "F": str,
    "T": float, "method": str, "tol": float, "samples": int,
}
# optional solver controls, each tied to the method it configures
_OPTIONAL_SPEC_FIELDS = {"grid_n": "picard", "max_iters": "picard",
                         "epsilon_frac": "direct"}
_METHODS = {"regularized": Method.REGULARIZED, "picard": Method.PICARD,
            "direct": Method.DIRECT_SINGULAR}


def _load_solve_spec(path: str):
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise _UsageError(f"cannot read spec file: {exc}")
    except json.JSONDecodeError as exc:
        raise _UsageError(f"spec file is not valid JSON: {exc}")
    problems = []
    if not isinstance(raw, dict):
        raise SpecError(["spec file must contain a JSON object"])
    for name, typ in _REQUIRED_SPEC_FIELDS.items():
        if name not in raw:
            problems.append(f"{name}: missing")
            continue
        value = raw[name]
        if typ is float and not isinstance(value, (int, float)):
            problems.append(f"{name}: expected a number, got {value!r}")
        elif typ is int and not isinstance(value, int):
            problems.append(f"{name}: expected an integer, got {value!r}")
        elif typ is str and not isinstance(value, str):
            problems.append(f"{name}: expected a string, got {value!r}")
    if problems:
        raise SpecError(problems)
    if raw["method"] not in _METHODS:
        problems.append(f"method: unknown {raw['method']!r}, choose from "
                        f"{', '.join(_METHODS)}")
    if raw["samples"] < 2:
        problems.append(f"samples: must be >= 2, got {raw['samples']}")
    try:
        F = rhs_function(raw["F"])
    except ExprSyntaxError as exc:
        problems.append(f"F: {exc}")
        F = None
    solver_kwargs = {}
    for name, method in _OPTIONAL_SPEC_FIELDS.items():
        if name in raw:
            if raw.get("method") != method:
                problems.append(f"{name}: only applies to method {method!r}")
            elif not isinstance(raw[name], (int, float)):
                problems.append(f"{name}: expected a number, got {raw[name]!r}")
            elif name == "epsilon_frac":
                solver_kwargs[name] = float(raw[name])
            else:
                solver_kwargs[name] = int(raw[name])
    spec = None
    if not problems:
        try:
            spec = IvpSpec(a=LowerTerminal(raw["a"]), alpha=Order(raw["alpha"]),
                           x0=raw["x0"], F=F, horizon_T=raw["T"],
                           method=_METHODS[raw["method"]], tol=raw["tol"])
        except SpecError as exc:
            problems.extend(exc.problems)
        except DomainError as exc:
            problems.append(str(exc))
    if problems:
        raise SpecError(problems)
    return spec, int(raw["samples"]), solver_kwargs


def _write_csv(path: str | None, ts, xs):
    lines = ["t,x"]
    lines += [f"{t:.17g},{x:.17g}" for t, x in zip(ts, xs)]
    text = "\n".join(lines) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def cmd_solve(args) -> int:
    spec, samples, solver_kwargs = _load_solve_spec(args.spec_path)
    grid = np.linspace(spec.a.a, spec.horizon_T, samples)

    if args.compare:
        trajs = {
            "regularized": ivp.solve_regularized(spec, sample_at=grid),
            "picard": ivp.solve_picard(spec, sample_at=grid),
            "direct": ivp.solve_direct_singular(spec, sample_at=grid),
        }
        values = {name: tr.evaluate_many(grid) for name, tr in trajs.items()}
        gaps = {
            "regularized_vs_picard": float(np.max(np.abs(values["regularized"] - values["picard"]))),
            "regularized_vs_direct": float(np.max(np.abs(values["regularized"] - values["direct"]))),
            "picard_vs_direct": float(np.max(np.abs(values["picard"] - values["direct"]))),
        }
        if args.out:
            _write_csv(args.out, grid, values[spec.method.value])
        _emit({"gaps": gaps, "method": spec.method.value})
        return EXIT_OK

    try:
        traj = ivp.solve(spec, sample_at=grid, **solver_kwargs)
    except NonConvergence as exc:
        # the stalled iterate is withheld; report the regularized answer instead
        print(f"confcalc: {exc}; falling back to the regularized solver",
              file=sys.stderr)
        traj = ivp.solve_regularized(spec, sample_at=grid)
        _write_csv(args.out, grid, traj.evaluate_many(grid))
        return EXIT_NONCONVERGENCE
    _write_csv(args.out, grid, traj.evaluate_many(grid))
    return EXIT_OK


def cmd_verify(args) -> int:
    tol = args.tol
    if tol is None and os.environ.get("CONFCALC_TOL"):
        tol = _env_tol(0.0)
    reports = identities.run_suite(args.suite, a=0.0, tol=tol)
    payload = [r.to_dict() for r in reports]
    text = json.dumps(payload, indent=2) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
        print(f"confcalc: wrote {len(reports)} report(s) to {args.out}", file=sys.stderr)
    else:
        sys.stdout.write(text)
    return EXIT_OK if all(r.passed for r in reports) else EXIT_NONEXISTENCE


def cmd_serve(args) -> int:
    import uvicorn

    from .service import app
    uvicorn.run(app, host=args.host, port=args.port)
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "deriv":
            return cmd_deriv(args)
        if args.command == "integ":
            return cmd_integ(args)
        if args.command == "solve":
            return cmd_solve(args)
        if args.command == "verify":
            return cmd_verify(args)
        return cmd_serve(args)
    except _UsageError as exc:
        print(f"confcalc: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SpecError as exc:
        for problem in exc.problems:
            print(f"confcalc: spec error: {problem}", file=sys.stderr)
        return EXIT_USAGE
    except ExprSyntaxError as exc:
        print(f"confcalc: expression error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except StepFailure as exc:
        print(f"confcalc: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    except (DomainError, EvaluationError) as exc:
        print(f"confcalc: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConformableError as exc:
        print(f"confcalc: {exc}", file=sys.stderr)
        return EXIT_USAGE


def entrypoint():
    raise SystemExit(main())


if __name__ == "__main__":
    entrypoint()
