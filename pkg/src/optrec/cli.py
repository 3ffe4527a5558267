"""Command-line front end: ``optrec <subcommand> ...``.

Results are JSON objects tagged ``"schema": "optrec/1"`` carrying an echo
of the resolved run configuration.  Exit codes: 0 success, 1 a verification
check failed, 2 invalid input, 3 the ideal-spline solver did not converge.
"""

from __future__ import annotations

import argparse
import ast
import io
import json
import math
import operator
import sys
from dataclasses import asdict, dataclass, field

import numpy as np

from . import recovery
from .classes import ClassSpec
from .ideal_spline import IdealSpline, SolverError, SolverOptions, validate_ideal_spline, validate_nodes
from .interpolation import factor, space_from_ideal
from .verify import CHECKS, format_result

SCHEMA = "optrec/1"
EXIT_OK, EXIT_VERIFY, EXIT_INPUT, EXIT_SOLVER = 0, 1, 2, 3

_BINARY = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul, ast.Div: operator.truediv,
           ast.Pow: operator.pow}
_UNARY = {ast.UAdd: operator.pos, ast.USub: operator.neg}
_NAMES = {"pi": math.pi, "tau": 2 * math.pi, "inf": math.inf}


def parse_angle(text):
    """A real number or arithmetic in ``pi`` such as ``pi/2`` or ``3*pi/4``."""

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id.lower() in _NAMES:
            return _NAMES[node.id.lower()]
        if isinstance(node, ast.BinOp) and type(node.op) in _BINARY:
            return _BINARY[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _UNARY:
            return _UNARY[type(node.op)](ev(node.operand))
        raise ValueError(f"cannot parse number {text!r}")

    try:
        return float(ev(ast.parse(str(text).strip().replace("π", "pi"), mode="eval")))
    except (SyntaxError, ZeroDivisionError, TypeError, OverflowError) as exc:
        raise ValueError(f"cannot parse number {text!r}") from exc


def parse_list(text):
    if text is None:
        return None
    items = [s for s in str(text).replace(";", ",").split(",") if s.strip()]
    if not items:
        raise ValueError("empty list")
    return np.array([parse_angle(s) for s in items])


class InputError(ValueError):
    pass


@dataclass
class RunConfig:
    subcommand: str
    spec: dict | None = None
    nodes: list | None = None
    values: list | None = None
    tau: list | None = None
    p: str | None = None
    tol: float | None = None
    seed: int = 0
    max_restarts: int = 64
    outputs: dict = field(default_factory=dict)


def parse_names(text):
    names = [x.strip() for x in str(text).split(",") if x.strip()]
    if not names:
        raise InputError("empty method list")
    return names


def _spec_from_args(args):
    if getattr(args, "variant", None) is None:
        return None
    if args.r is None or args.M is None:
        raise InputError("--class needs --r and --M")
    return ClassSpec(args.variant, args.r, parse_angle(args.M), None if args.N is None else parse_angle(args.N))


def _config(args):
    spec = _spec_from_args(args)
    nodes = parse_list(getattr(args, "nodes", None))
    if nodes is not None:
        nodes = validate_nodes(nodes)
    values = parse_list(getattr(args, "values", None))
    if values is not None and nodes is not None and len(values) != len(nodes):
        raise InputError(f"need {len(nodes)} values, got {len(values)}")
    tau = parse_list(getattr(args, "tau", None))
    p = getattr(args, "p", None)
    if p is not None:
        recovery.parse_p(p)
    outputs = {k: getattr(args, k) for k in ("out", "csv", "json") if getattr(args, k, None)}
    return RunConfig(
        subcommand=args.command,
        spec=None if spec is None else spec.to_dict(),
        nodes=None if nodes is None else nodes.tolist(),
        values=None if values is None else values.tolist(),
        tau=None if tau is None else tau.tolist(),
        p=p,
        tol=getattr(args, "tol", None),
        seed=getattr(args, "seed", 0),
        max_restarts=getattr(args, "max_restarts", 64),
        outputs=outputs,
    ), spec


def _opts(cfg):
    return SolverOptions(tol=cfg.tol, seed=cfg.seed, max_restarts=cfg.max_restarts)


def _need(cfg, *names):
    for name in names:
        if getattr(cfg, name) is None:
            raise InputError(f"--{name} is required for {cfg.subcommand}")


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_ideal(cfg, spec):
    _need(cfg, "spec", "nodes")
    phi = recovery.ideal_spline(spec, cfg.nodes, _opts(cfg))
    rep = validate_ideal_spline(phi)
    return {"ideal_spline": phi.to_dict(), "validation": rep.to_dict(), "valid": rep.passed,
            "sup_norm": phi.body.sup_norm()[0]}


def _load_spline(path):
    with open(path) as fh:
        data = json.load(fh)
    return IdealSpline.from_dict(data.get("result", data).get("ideal_spline", data))


def cmd_interp(cfg, spec, args):
    _need(cfg, "values")
    phi = _load_spline(args.spline)
    space = space_from_ideal(phi)
    col = factor(space, phi.zeros)
    out = {"coefficients": col.coefficients(cfg.values).tolist(), "condition": col.condition,
           "nodes": phi.zeros.tolist(), "dimension": space.dim, "interpolant": col.solve(cfg.values).to_dict()}
    if cfg.tau is not None:
        w = col.weights(np.asarray(cfg.tau))
        out["at"] = [{"tau": t, "weights": wi.tolist(), "value": float(wi @ np.asarray(cfg.values))}
                     for t, wi in zip(cfg.tau, w)]
    return out


def cmd_recover_point(cfg, spec):
    _need(cfg, "spec", "nodes", "values", "tau")
    prob = recovery.problem(spec, cfg.nodes, _opts(cfg))
    return {"points": [{"tau": t, "value": float(prob.weights(t) @ np.asarray(cfg.values)),
                        "weights": prob.weights(t).tolist(), "best_error": float(abs(prob.phi.body(t)))}
                       for t in cfg.tau]}


def cmd_recover_function(cfg, spec, args):
    _need(cfg, "spec", "nodes", "values")
    s = recovery.recover_function(spec, cfg.nodes, cfg.values, _opts(cfg))
    if args.csv:
        _write_csv(args.csv, s, args.points, 0, "s")
    return {"recovered": s.to_dict(), "best_error_sup": recovery.best_error_norm(spec, cfg.nodes, math.inf, _opts(cfg))}


def cmd_errors(cfg, spec, args):
    _need(cfg, "spec", "nodes")
    if (cfg.tau is None) == (cfg.p is None):
        raise InputError("give exactly one of --tau and --p")
    if cfg.tau is not None:
        vals = [recovery.best_error_point(spec, cfg.nodes, t, _opts(cfg)) for t in cfg.tau]
        out = {"kind": "point", "tau": cfg.tau, "value": vals[0] if len(vals) == 1 else vals}
    else:
        out = {"kind": "norm", "p": cfg.p, "value": recovery.best_error_norm(spec, cfg.nodes, cfg.p, _opts(cfg))}
    if args.samples is not None:
        if args.samples < 1:
            raise InputError("--samples must be positive")
        if cfg.tau is not None and len(cfg.tau) != 1:
            raise InputError("--samples needs a single --tau")
        tau = None if cfg.tau is None else cfg.tau[0]
        out["empirical"] = {
            m: recovery.empirical_worst_error(m, spec, cfg.nodes, tau=tau, p=cfg.p, samples=args.samples,
                                              seed=cfg.seed, opts=_opts(cfg))
            for m in parse_names(args.methods)}
        out["samples"] = args.samples
    return out


def cmd_nodes_check(cfg, spec):
    _need(cfg, "spec", "nodes")
    u = np.asarray(cfg.nodes)
    star = recovery.uniform_nodes(len(u) // 2)
    return {"gap": recovery.node_optimality_gap(spec, u, _opts(cfg)),
            "canonical_nodes": recovery.canonical_nodes(u).tolist(), "uniform_nodes": star.tolist(),
            "sup_norm": recovery.best_error_norm(spec, u, math.inf, _opts(cfg)),
            "uniform_sup_norm": recovery.best_error_norm(spec, star, math.inf, _opts(cfg))}


def cmd_verify(args):
    numbers = sorted(CHECKS) if not args.only else [int(x) for x in args.only.split(",")]
    unknown = [k for k in numbers if k not in CHECKS]
    if unknown:
        raise InputError(f"unknown checks {unknown}")
    results = []
    for k in numbers:
        res = CHECKS[k]()
        print(format_result(res), file=sys.stderr)
        results.append(res)
    return {"checks": [r.to_dict() for r in results], "passed": all(r.passed for r in results)}


def _write_csv(path, pp, points, derivatives, name):
    buf = io.StringIO()
    pp.to_csv(buf, n=points, derivatives=derivatives, name=name)
    if path == "-":
        sys.stdout.write(buf.getvalue())
    else:
        with open(path, "w") as fh:
            fh.write(buf.getvalue())


def cmd_plot_data(cfg, spec, args):
    _need(cfg, "spec", "nodes")
    phi = recovery.ideal_spline(spec, cfg.nodes, _opts(cfg))
    d = spec.r if args.derivatives is None else args.derivatives
    _write_csv(args.csv or "-", phi.body, args.points, d, "phi")
    return None


# ---------------------------------------------------------------------------
# parser and dispatch
# ---------------------------------------------------------------------------

def _class_args(p, required=True):
    p.add_argument("--class", dest="variant", required=required, help="rm1, rm2 or rm1m2")
    p.add_argument("--r", type=int, help="order of the top derivative")
    p.add_argument("--M", help="bound on the clamped derivative")
    p.add_argument("--N", help="bound on the (r-1)-st derivative (rm1m2)")
    p.add_argument("--tol", type=float, help="solver residual tolerance")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-restarts", type=int, default=64)


def build_parser():
    parser = argparse.ArgumentParser(prog="optrec", description="Ideal splines and optimal recovery from 2n samples.")
    parser.add_argument("--version", action="version", version="optrec 0.1.0")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ideal", help="solve for the ideal spline vanishing at the nodes")
    _class_args(p)
    p.add_argument("--nodes", required=True)
    p.add_argument("--out", "--json", dest="out", help="write the JSON result here")

    p = sub.add_parser("interp", help="interpolate in the space of a saved ideal spline")
    p.add_argument("--spline", required=True, help="JSON written by 'optrec ideal'")
    p.add_argument("--values", required=True)
    p.add_argument("--at", dest="tau", help="points where weights and values are reported")
    p.add_argument("--out", "--json", dest="out", help="write the JSON result here")

    p = sub.add_parser("recover-point", help="optimal recovery of x(tau)")
    _class_args(p)
    p.add_argument("--nodes", required=True)
    p.add_argument("--values", required=True)
    p.add_argument("--tau", required=True)
    p.add_argument("--out", "--json", dest="out", help="write the JSON result here")

    p = sub.add_parser("recover-function", help="optimal recovery of x")
    _class_args(p)
    p.add_argument("--nodes", required=True)
    p.add_argument("--values", required=True)
    p.add_argument("--csv", help="also write samples of the recovered function")
    p.add_argument("--points", type=int, default=1000)
    p.add_argument("--out", "--json", dest="out", help="write the JSON result here")

    p = sub.add_parser("errors", help="best recovery error at a point or in L_p")
    _class_args(p)
    p.add_argument("--nodes", required=True)
    p.add_argument("--tau")
    p.add_argument("--p")
    p.add_argument("--samples", type=int, help="also estimate worst errors of --methods on this many members")
    p.add_argument("--methods", default="optimal,linear,trig", help="comma-separated methods for --samples")
    p.add_argument("--out", "--json", dest="out", help="write the JSON result here")

    p = sub.add_parser("nodes-check", help="compare nodes with the uniform mesh")
    _class_args(p)
    p.add_argument("--nodes", required=True)
    p.add_argument("--out", "--json", dest="out", help="write the JSON result here")

    p = sub.add_parser("verify", help="run the numerical verification suite")
    p.add_argument("--only", help="comma-separated check numbers")
    p.add_argument("--out", "--json", dest="out", help="write the JSON result here")

    p = sub.add_parser("plot-data", help="CSV samples of the ideal spline and its derivatives")
    _class_args(p)
    p.add_argument("--nodes", required=True)
    p.add_argument("--points", type=int, default=1000)
    p.add_argument("--derivatives", type=int)
    p.add_argument("--csv", help="output file (default stdout)")
    return parser


def _emit(payload, out):
    text = json.dumps(payload, indent=2, default=_json_default)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not serializable: {type(obj).__name__}")


def _error(kind, message, cfg, code, fallback=None):
    _emit({"schema": SCHEMA, "error": {"type": kind, "message": message},
           "config": fallback if cfg is None else asdict(cfg)}, None)
    print(f"optrec: error: {message}", file=sys.stderr)
    return code


def run(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(argv)
    cfg = None
    # echoed when validation fails before a RunConfig exists
    raw = {"subcommand": args.command, "argv": argv}
    try:
        if args.command == "verify":
            cfg = RunConfig("verify", outputs={"out": args.out} if args.out else {})
            result = cmd_verify(args)
            _emit({"schema": SCHEMA, "config": asdict(cfg), "result": result}, args.out)
            return EXIT_OK if result["passed"] else EXIT_VERIFY
        cfg, spec = _config(args)
        handlers = {
            "ideal": lambda: cmd_ideal(cfg, spec),
            "interp": lambda: cmd_interp(cfg, spec, args),
            "recover-point": lambda: cmd_recover_point(cfg, spec),
            "recover-function": lambda: cmd_recover_function(cfg, spec, args),
            "errors": lambda: cmd_errors(cfg, spec, args),
            "nodes-check": lambda: cmd_nodes_check(cfg, spec),
            "plot-data": lambda: cmd_plot_data(cfg, spec, args),
        }
        result = handlers[args.command]()
    except SolverError as exc:
        return _error("SolverError", f"{exc}", cfg, EXIT_SOLVER, raw)
    except (ValueError, OSError, KeyError) as exc:
        return _error(type(exc).__name__, str(exc), cfg, EXIT_INPUT, raw)
    if result is not None:
        _emit({"schema": SCHEMA, "config": asdict(cfg), "result": result}, getattr(args, "out", None))
    return EXIT_OK


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
