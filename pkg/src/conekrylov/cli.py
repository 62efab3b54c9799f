"""Command-line front end: ``conekrylov solve | bench | generate``.

Exit codes: 0 for a solved problem, 2 when the special case is detected, 3
when the iteration limit is hit and 1 for bad input.
"""

import argparse
import csv
import json
import logging
import os
import sys
from dataclasses import replace

import numpy as np

from .bench import METHODS, Instance, records_to_csv, records_to_json, run_bench
from .errors import ConeKrylovError, InvalidParams, ParseError
from .generate import gen_random_spd
from .mmio import read_matrix_market, write_matrix_market
from .rksm import Outcome, SolverOptions, direct_oracle, newton_baseline, solve

log = logging.getLogger("conekrylov")

SCHEMA = 1
EXIT_OK, EXIT_INPUT, EXIT_SPECIAL, EXIT_MAXIT = 0, 1, 2, 3
EXIT_CODES = {
    Outcome.TRIVIAL_ZERO: EXIT_OK,
    Outcome.LINEAR_SOLVE: EXIT_OK,
    Outcome.BOUNDARY_ROOT: EXIT_OK,
    Outcome.SPECIAL_CASE: EXIT_SPECIAL,
    Outcome.MAX_ITERATIONS: EXIT_MAXIT,
}
TRACE_HEADER = ["side", "j", "shift", "h", "dim", "chi_rel"]
LOG_LEVELS = {"error": logging.ERROR, "warn": logging.WARNING, "warning": logging.WARNING,
              "info": logging.INFO, "debug": logging.DEBUG}
GEN_KEYS = {"n": int, "density": float, "rc": float, "kind": int, "seed": int}


def configure_logging():
    level = os.environ.get("CONEKRYLOV_LOG", "warn").lower()
    logging.basicConfig(level=LOG_LEVELS.get(level, logging.WARNING), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")


def parse_gen(spec):
    """``gen:n=..,density=..,rc=..,kind=..,seed=..`` to keyword arguments."""
    params = {"density": 0.01, "rc": 0.01, "kind": 1, "seed": 0}
    body = spec[len("gen:"):]
    for item in filter(None, body.split(",")):
        key, sep, val = item.partition("=")
        key = key.strip()
        if not sep or key not in GEN_KEYS:
            raise InvalidParams(f"bad generator parameter {item!r}")
        try:
            params[key] = GEN_KEYS[key](val)
        except ValueError:
            raise InvalidParams(f"bad value for {key}: {val!r}") from None
    if "n" not in params:
        raise InvalidParams("generator spec needs n=")
    return params


def load_matrix(source, base=None):
    if source.startswith("gen:"):
        return gen_random_spd(**parse_gen(source))
    path = source if base is None or os.path.isabs(source) else os.path.join(base, source)
    return read_matrix_market(path)


def load_q(source, n, base=None):
    """``ones``, a comma-separated list, or a file of numbers (a Matrix Market array works)."""
    if source in (None, "ones"):
        return np.ones(n)
    if "," in source and not os.path.exists(source):
        try:
            q = np.array([float(t) for t in source.split(",")])
        except ValueError:
            raise ParseError(f"bad q list {source!r}") from None
    else:
        path = source if base is None or os.path.isabs(source) else os.path.join(base, source)
        try:
            with open(path, encoding="ascii") as fh:
                lines = fh.read().splitlines()
        except OSError as exc:
            raise ParseError(f"cannot read {path}: {exc}") from exc
        mm = bool(lines) and lines[0].lower().startswith("%%matrixmarket")
        vals, seen_size = [], False
        for lineno, line in enumerate(lines, start=1):
            text = line.strip()
            if not text or text.startswith("%"):
                continue
            if mm and not seen_size:
                seen_size = True
                continue
            for tok in text.replace(",", " ").split():
                try:
                    vals.append(float(tok))
                except ValueError:
                    raise ParseError(f"bad number {tok!r}", lineno, line.find(tok) + 1) from None
        q = np.array(vals)
    if q.shape != (n,):
        raise InvalidParams(f"q has {q.size} entries, matrix has order {n}")
    return q


def options_from(args, base=None):
    opts = base or SolverOptions()
    overrides = {k: getattr(args, k) for k in ("ell", "ell0", "k0", "eps1", "eps2", "eps3", "j_max")
                 if getattr(args, k, None) is not None}
    return replace(opts, **overrides)


def write_trace(path, trace):
    with open(path, "w", newline="", encoding="ascii") as fh:
        w = csv.writer(fh)
        w.writerow(TRACE_HEADER)
        for r in trace:
            w.writerow([r.side, r.j, repr(r.shift), repr(r.h), r.dim, repr(r.chi_rel)])


def convergence_rows(trace):
    """Per loop: ``(side, j, s_j, |s_j - s*|, |s_j - s*| / |s_{j-1} - s*|^2)``.

    ``s*`` is the last shift of that loop; the ratio is ``None`` where it is
    undefined (first row, and the last row whose error is zero by definition).
    """
    rows = []
    for side in ("left", "right"):
        part = [r for r in trace if r.side == side]
        if not part:
            continue
        s_star = part[-1].shift
        prev = None
        for r in part:
            err = abs(r.shift - s_star)
            ratio = err / prev**2 if prev not in (None, 0.0) and err > 0.0 else None
            rows.append((side, r.j, r.shift, err, ratio))
            prev = err
    return rows


def write_convergence(path, trace):
    with open(path, "w", newline="", encoding="ascii") as fh:
        w = csv.writer(fh)
        w.writerow(["side", "j", "shift", "abs_err", "ratio"])
        for side, j, s, err, ratio in convergence_rows(trace):
            w.writerow([side, j, repr(s), repr(err), "" if ratio is None else repr(ratio)])


def cmd_solve(args):
    M = load_matrix(args.matrix)
    q = load_q(args.q, M.n)
    solver = {"rksm": solve, "oracle": direct_oracle, "newton": newton_baseline}[args.method]
    report = solver(M, q, opts=options_from(args))
    doc = {"schema": SCHEMA, "n": M.n, **report.to_dict()}
    text = json.dumps(doc, indent=2)
    if args.json:
        with open(args.json, "w", encoding="ascii") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    if args.trace:
        write_trace(args.trace, report.trace)
    if args.convergence:
        write_convergence(args.convergence, report.trace)
    return EXIT_CODES[report.outcome]


def load_suite(path):
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"bad suite JSON: {exc.msg}", exc.lineno, exc.colno) from exc
    base = os.path.dirname(os.path.abspath(path))
    instances = []
    for k, item in enumerate(doc.get("instances", [])):
        if "matrix" not in item:
            raise InvalidParams(f"suite instance {k} has no matrix")
        M = load_matrix(item["matrix"], base)
        q = load_q(item.get("q", "ones"), M.n, base)
        instances.append(Instance(str(item.get("id", k)), M, q))
    opts = SolverOptions(**doc.get("options", {}))
    return instances, opts


def cmd_bench(args):
    instances, opts = load_suite(args.suite)
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    records = run_bench(instances, methods, opts, workers=args.workers)
    out = records_to_json(records) if args.out and args.out.endswith(".json") else records_to_csv(records)
    if args.out:
        with open(args.out, "w", newline="", encoding="utf-8") as fh:
            fh.write(out)
    else:
        sys.stdout.write(out)
    return EXIT_OK


def cmd_generate(args):
    M = gen_random_spd(args.n, args.density, args.rc, args.kind, args.seed)
    write_matrix_market(args.out, M, comment=(
        f"random SPD n={args.n} density={args.density} rc={args.rc} kind={args.kind} seed={args.seed}"))
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="conekrylov", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="solve one problem and print a JSON report")
    s.add_argument("--matrix", required=True, help="Matrix Market file or gen:n=..,density=..,rc=..,kind=..,seed=..")
    s.add_argument("--q", default="ones", help="'ones', a file of numbers, or a comma-separated list")
    s.add_argument("--ell", type=int)
    s.add_argument("--ell0", type=int)
    s.add_argument("--k0", type=int)
    s.add_argument("--eps1", type=float)
    s.add_argument("--eps2", type=float)
    s.add_argument("--eps3", type=float)
    s.add_argument("--jmax", dest="j_max", type=int)
    s.add_argument("--method", choices=("rksm", "oracle", "newton"), default="rksm")
    s.add_argument("--trace", help="write per-iteration CSV here")
    s.add_argument("--convergence", help="write shift convergence rows (j, s_j, |s_j - s*|, ratio) here")
    s.add_argument("--json", help="write the report here instead of stdout")
    s.set_defaults(func=cmd_solve)

    b = sub.add_parser("bench", help="run methods over a suite of instances")
    b.add_argument("--suite", required=True, help="suite JSON file")
    b.add_argument("--methods", default=",".join(METHODS))
    b.add_argument("--out", help="CSV (or .json) output; stdout if omitted")
    b.add_argument("--workers", type=int)
    b.set_defaults(func=cmd_bench)

    g = sub.add_parser("generate", help="write a random SPD matrix in Matrix Market format")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--density", type=float, default=0.01)
    g.add_argument("--rc", type=float, default=0.01)
    g.add_argument("--kind", type=int, default=1)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_generate)
    return p


def main(argv=None):
    configure_logging()
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConeKrylovError, ValueError, TypeError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT
