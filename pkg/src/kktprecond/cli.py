"""Command-line benchmark harness.

Subcommands: generate (run the SQP driver and export KKT systems), solve (run
preconditioned GMRES on an exported system), sweep (batch runs along one study
axis), stencil (synthetic 2D block stencil matrix). Output is CSV on stdout
with a leading comment line carrying the GMRES settings.

Exit codes: 0 success, 2 usage error, 1 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np
import scipy.linalg

from .conprec import CATALOG, build_at_preconditioner
from .errors import KktPrecondError, ManifestError, UnknownPreconditioner
from .kkt import KktOperator, materialize_dense
from .krylov import DEFAULT_MAX_ITERS, DEFAULT_TOL, EXACT_SOLUTION, GmresConfig, gmres_solve
from .manifest import export_system, import_system
from .mmio import write_matrix
from .shocktrack import (
    GenerateConfig,
    SqpConfig,
    build_kkt,
    load_problem_config,
    make_problem,
    run_sqp,
)
from .stencil import generate_stencil_system

CSV_COLUMNS = "case,precond,kappa,gamma,k,p,q,n_elem,iters,converged"


class UsageError(Exception):
    pass


def _csv_header(tol: float, max_iters: int) -> str:
    return f"# tol={tol:g} max_iters={max_iters}\n{CSV_COLUMNS}"


def _solve_one(sys, precond_name: str, tol: float, max_iters: int):
    """Run one preconditioned solve; returns (iters, converged)."""
    prec = build_at_preconditioner(sys, precond_name)
    op = KktOperator(sys)
    rhs = sys.rhs()
    s_ex = scipy.linalg.solve(materialize_dense(op), rhs)
    cfg = GmresConfig(tol=tol, max_iters=max_iters, criterion=EXACT_SOLUTION, reference=s_ex)
    report = gmres_solve(op.as_linear_operator(), rhs, prec.as_preconditioner(), cfg)
    return report.iterations, report.converged


def _csv_row(sys, precond_name: str, iters: int, converged: bool) -> str:
    dims = sys.dims
    return ",".join(
        [
            sys.case,
            precond_name,
            f"{sys.factors.kappa:.10g}",
            f"{sys.factors.gamma:.10g}",
            str(sys.state_index),
            str(dims.p),
            str(dims.q),
            str(dims.n_elem),
            str(iters),
            "true" if converged else "false",
        ]
    )


def cmd_generate(args) -> int:
    try:
        cfg = load_problem_config(args.config)
    except FileNotFoundError:
        raise UsageError(f"config file not found: {args.config}")
    except ValueError as exc:
        raise UsageError(str(exc))
    problem = make_problem(cfg)
    sqp = SqpConfig(max_iters=cfg.max_iters, kappa=cfg.kappa, gamma=cfg.gamma)
    states = run_sqp(problem, sqp)
    for k in cfg.states:
        if not 0 <= k < len(states):
            raise UsageError(
                f"state {k} not available: run produced states 0..{len(states) - 1}"
            )
        sys_k = build_kkt(problem, states[k], case=cfg.case_name)
        path = export_system(sys_k, args.outdir, prefix=f"state{k}_")
        print(path)
    return 0


def cmd_solve(args) -> int:
    sys_loaded = import_system(args.manifest)
    iters, converged = _solve_one(sys_loaded, args.precond, args.tol, args.max_iters)
    print(_csv_header(args.tol, args.max_iters))
    print(_csv_row(sys_loaded, args.precond, iters, converged))
    return 0


def _sweep_systems(spec: dict):
    """Yield (sort_key, KktSystem) pairs along the requested study axis."""
    axis = spec.get("axis")
    values = spec.get("values")
    if axis not in ("kappa", "gamma", "state", "degree", "mesh"):
        raise UsageError(f"unknown sweep axis {axis!r}")
    if not values:
        raise UsageError("sweep values must be a nonempty list")
    fixed = dict(spec.get("fixed", {}))
    state_index = int(fixed.pop("state", 1))
    cfg_fields = {k: v for k, v in fixed.items() if k in GenerateConfig.__dataclass_fields__}
    unknown = set(fixed) - set(cfg_fields)
    if unknown:
        raise UsageError(f"unknown fixed parameters: {sorted(unknown)}")
    base = GenerateConfig(**cfg_fields)

    def generate(cfg: GenerateConfig, k: int):
        problem = make_problem(cfg)
        sqp = SqpConfig(max_iters=cfg.max_iters, kappa=cfg.kappa, gamma=cfg.gamma)
        states = run_sqp(problem, sqp)
        if not 0 <= k < len(states):
            raise UsageError(f"state {k} not available: run produced states 0..{len(states) - 1}")
        return problem, states

    if axis in ("kappa", "gamma"):
        problem, states = generate(base, state_index)
        state = states[state_index]
        for i, val in enumerate(values):
            override = {axis: float(val)}
            yield i, build_kkt(problem, state, case=base.case_name, **override)
    elif axis == "state":
        problem, states = generate(base, max(int(v) for v in values))
        for i, val in enumerate(values):
            yield i, build_kkt(problem, states[int(val)], case=base.case_name)
    elif axis == "degree":
        for i, val in enumerate(values):
            if isinstance(val, (list, tuple)):
                p, q = int(val[0]), int(val[1])
            else:
                p, q = int(val), base.q
            cfg = GenerateConfig(**{**cfg_fields, "p": p, "q": q})
            problem, states = generate(cfg, state_index)
            yield i, build_kkt(problem, states[state_index], case=cfg.case_name)
    else:
        for i, val in enumerate(values):
            cfg = GenerateConfig(**{**cfg_fields, "n_elem": int(val)})
            problem, states = generate(cfg, state_index)
            yield i, build_kkt(problem, states[state_index], case=cfg.case_name)


def cmd_sweep(args) -> int:
    try:
        with open(args.spec) as fh:
            spec = json.load(fh)
    except FileNotFoundError:
        raise UsageError(f"sweep spec not found: {args.spec}")
    except json.JSONDecodeError as exc:
        raise UsageError(f"{args.spec}: invalid JSON ({exc})")

    preconds = spec.get("preconditioners")
    if not preconds:
        raise UsageError("sweep needs a nonempty preconditioner list")
    for name in preconds:
        if name not in CATALOG:
            raise UsageError(f"unknown preconditioner {name!r}; catalog: {', '.join(CATALOG)}")
    tol = float(spec.get("tol", DEFAULT_TOL))
    max_iters = int(spec.get("max_iters", DEFAULT_MAX_ITERS))

    rows = []
    for value_pos, sys_i in _sweep_systems(spec):
        for precond_pos, name in enumerate(preconds):
            try:
                iters, converged = _solve_one(sys_i, name, tol, max_iters)
            except KktPrecondError:
                iters, converged = max_iters, False
            rows.append(((value_pos, precond_pos), _csv_row(sys_i, name, iters, converged)))
    rows.sort(key=lambda item: item[0])
    print(_csv_header(tol, max_iters))
    for _, row in rows:
        print(row)
    return 0


def cmd_stencil(args) -> int:
    A = generate_stencil_system(args.n, args.block, args.seed)
    write_matrix(args.out, A)
    print(args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kktprecond",
        description="Benchmark harness for constrained KKT preconditioners.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_gen = sub.add_parser("generate", help="run the SQP driver and export KKT systems")
    p_gen.add_argument("config", help="key = value problem config file")
    p_gen.add_argument("outdir", help="output directory (created if missing)")
    p_gen.set_defaults(func=cmd_generate)

    p_solve = sub.add_parser("solve", help="run preconditioned GMRES on an exported system")
    p_solve.add_argument("manifest", help="system manifest JSON")
    p_solve.add_argument("--precond", required=True, help=f"one of: {', '.join(CATALOG)}")
    p_solve.add_argument("--tol", type=float, default=DEFAULT_TOL)
    p_solve.add_argument("--max-iters", type=int, default=DEFAULT_MAX_ITERS)
    p_solve.set_defaults(func=cmd_solve)

    p_sweep = sub.add_parser("sweep", help="batch solves along one study axis")
    p_sweep.add_argument("spec", help="sweep spec JSON")
    p_sweep.set_defaults(func=cmd_sweep)

    p_sten = sub.add_parser("stencil", help="generate a synthetic 2D block stencil matrix")
    p_sten.add_argument("out", help="output Matrix Market file")
    p_sten.add_argument("--n", type=int, required=True, help="grid size")
    p_sten.add_argument("--block", type=int, required=True, help="block size")
    p_sten.add_argument("--seed", type=int, default=0)
    p_sten.set_defaults(func=cmd_stencil)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if exc.code is not None else 2
    try:
        return args.func(args)
    except (UsageError, UnknownPreconditioner, ManifestError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except KktPrecondError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
