"""Command-line front end: solve, check, table, gen.

Exit codes follow one rule everywhere: 0 when the requested work
succeeded (including a convergence check whose conditions fail -- the
check itself ran), 2 when a solve stopped without converging, 1 for
usage and input errors.
"""

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

from .convergence import check_spectral_condition
from .matrix_core import read_matrix_market, read_vector, write_matrix_market, write_vector
from .problems import BenchSpec, gen_random_hplus
from .solvers import (
    DivergenceError,
    LcpProblem,
    ModulusConfig,
    SolverConfig,
    modulus_solve,
    projected_solve,
)
from .splittings import SplittingKind, make_splitting

PROJECTED_METHODS = ("npj", "npgs", "npsor", "npaor")
MODULUS_METHODS = ("mgs", "msor")

# per-table method grid and the parameters each table pins
TABLE_SETUPS = {
    "table1": {"family": "example1", "msor_alpha": 0.85, "npsor_alpha": 1.7,
               "sizes": (100, 900, 2500, 3600, 4900, 10000)},
    "table2": {"family": "example2", "msor_alpha": 0.88, "npsor_alpha": 1.7,
               "sizes": (100, 400, 900, 1600, 2500, 3600)},
}


class UsageError(Exception):
    """Bad flags or unusable input; maps to exit code 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _add_problem_flags(p):
    p.add_argument("--family", choices=("example1", "example2", "random"),
                   help="generated problem family; 'random' uses --m as the dimension")
    p.add_argument("--m", type=int, help="block order (n = m*m); dimension for random")
    p.add_argument("--delta", type=float, default=4.0, help="diagonal shift delta1")
    p.add_argument("--seed", type=int, default=0, help="seed for the random family")
    p.add_argument("--matrix", help="MatrixMarket file for A")
    p.add_argument("--sigma", help="plain-text vector file for sigma")


def _add_method_flags(p, methods):
    p.add_argument("--method", choices=methods, required=True)
    p.add_argument("--alpha", type=float, help="relaxation parameter")
    p.add_argument("--beta", type=float, help="acceleration parameter (npaor)")


def _add_run_flags(p):
    p.add_argument("--gamma", type=float, default=1.0, help="modulus scaling")
    p.add_argument("--omega-scale", type=float, default=None,
                   help="Omega = omega_scale * D_A (default 1/(2*alpha))")
    p.add_argument("--tol", type=float, default=1e-5)
    p.add_argument("--max-iters", type=int, default=10000)
    p.add_argument("--init", default="alt",
                   help="start vector: 'alt' for (1,0,1,0,...) or a vector file")


def _add_output_flags(p, default_format="md"):
    p.add_argument("--format", choices=("csv", "md", "json"), default=default_format)
    p.add_argument("--output", help="write the report here instead of stdout")


def build_parser():
    parser = _Parser(prog="lcpkit",
                     description="Projected and modulus splitting solvers for LCP(sigma, A)")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p_solve = sub.add_parser("solve", help="run one method on one problem")
    _add_problem_flags(p_solve)
    _add_method_flags(p_solve, PROJECTED_METHODS + MODULUS_METHODS)
    _add_run_flags(p_solve)
    _add_output_flags(p_solve)
    p_solve.set_defaults(func=cmd_solve)

    p_check = sub.add_parser("check", help="evaluate convergence conditions")
    _add_problem_flags(p_check)
    _add_method_flags(p_check, PROJECTED_METHODS)
    _add_output_flags(p_check)
    p_check.set_defaults(func=cmd_check)

    p_table = sub.add_parser("table", help="reproduce a benchmark table")
    p_table.add_argument("which", choices=("table1", "table2"))
    p_table.add_argument("--sizes", help="comma-separated n values (perfect squares)")
    p_table.add_argument("--delta", type=float, default=4.0)
    p_table.add_argument("--gamma", type=float, default=1.0,
                         help="gamma for the modulus baselines")
    p_table.add_argument("--tol", type=float, default=1e-5)
    p_table.add_argument("--max-iters", type=int, default=10000)
    _add_output_flags(p_table, default_format="md")
    p_table.set_defaults(func=cmd_table)

    p_gen = sub.add_parser("gen", help="write a generated problem to files")
    p_gen.add_argument("--family", choices=("example1", "example2", "random"),
                       required=True)
    p_gen.add_argument("--m", type=int,
                       help="block order (n = m*m); dimension for random")
    p_gen.add_argument("--delta", type=float, default=4.0)
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("--matrix", required=True, help="output MatrixMarket path for A")
    p_gen.add_argument("--sigma", required=True, help="output vector path for sigma")
    p_gen.add_argument("--solution", help="also write the reference solution here")
    p_gen.set_defaults(func=cmd_gen)

    return parser


def _load_problem(args, need_sigma=True):
    if args.matrix:
        a = read_matrix_market(args.matrix)
        if args.sigma:
            sigma = read_vector(args.sigma)
        elif need_sigma:
            raise UsageError("--sigma is required with --matrix")
        else:
            sigma = [0.0] * a.n
        return LcpProblem(a=a, sigma=sigma)
    if args.family in ("example1", "example2"):
        if args.m is None:
            raise UsageError("--m is required for generated families")
        return BenchSpec(args.family, args.m, args.delta).build()
    if args.family == "random":
        if args.m is None:
            raise UsageError("--m (the dimension) is required for the random family")
        return gen_random_hplus(args.m, args.seed)
    raise UsageError("provide --family or --matrix (with --sigma)")


def _splitting_kind(args):
    method = args.method
    if method == "npj":
        return SplittingKind.npj()
    if method == "npgs":
        return SplittingKind.npgs()
    if method == "npsor":
        if args.alpha is None:
            raise UsageError("npsor requires --alpha")
        return SplittingKind.npsor(args.alpha)
    if args.alpha is None or args.beta is None:
        raise UsageError("npaor requires --alpha and --beta")
    return SplittingKind.npaor(args.alpha, args.beta)


def _initial_vector(args):
    if args.init == "alt":
        return None
    return read_vector(args.init)


def _emit(text, args):
    if args.output:
        with open(args.output, "w", encoding="ascii") as fh:
            fh.write(text)
    else:
        print(text, end="" if text.endswith("\n") else "\n")


def _g17(x):
    return f"{x:.17g}"


def _render_solve(report, fmt):
    rec = report.to_json_dict()
    if fmt == "json":
        return json.dumps(rec, indent=2) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(rec.keys())
        writer.writerow(
            "" if v is None else (_g17(v) if isinstance(v, float) else v)
            for v in rec.values()
        )
        return buf.getvalue()
    lines = [
        f"method:        {rec['method']}",
        f"n:             {rec['n']}",
        f"alpha:         {rec['alpha'] if rec['alpha'] is not None else '-'}",
        f"beta:          {rec['beta'] if rec['beta'] is not None else '-'}",
        f"iterations:    {rec['iterations']}",
        f"residual:      {rec['residual_final']:.6e}",
        f"wall_seconds:  {rec['wall_seconds']:.4f}",
        f"converged:     {'yes' if rec['converged'] else 'no'}",
    ]
    return "\n".join(lines) + "\n"


def cmd_solve(args):
    problem = _load_problem(args)
    cfg = SolverConfig(tol=args.tol, max_iters=args.max_iters,
                       initial=_initial_vector(args))
    if args.method in MODULUS_METHODS:
        if args.method == "msor" and args.alpha is None:
            raise UsageError("msor requires --alpha")
        mcfg = ModulusConfig(variant=args.method,
                             alpha=args.alpha if args.alpha is not None else 1.0,
                             omega_scale=args.omega_scale, gamma=args.gamma)
        report = modulus_solve(problem, cfg, mcfg)
    else:
        splitting = make_splitting(problem.a, _splitting_kind(args))
        report = projected_solve(problem, splitting, cfg)
    _emit(_render_solve(report, args.format), args)
    return 0 if report.converged else 2


def _render_certificate(cert, fmt):
    rec = cert.to_json_dict()
    if fmt == "json":
        return json.dumps(rec, indent=2) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(rec.keys())
        writer.writerow("" if v is None else v for v in rec.values())
        return buf.getvalue()

    def mark(flag):
        return "pass" if flag else "fail"

    lines = []
    if cert.rho_t is not None:
        lines.append(f"rho(T):                    {cert.rho_t:.6f} (mode: {cert.rho_mode})")
        lines.append(f"spectral condition rho<1:  {mark(cert.spectral_condition_ok)}")
    lines += [
        f"H-matrix, positive diag:   {mark(cert.h_plus)}",
        f"compatible splitting:      {mark(cert.h_compatible)}",
        f"diagonal >= 1:             {mark(cert.diag_geq_one)}",
        f"coupling matrix is M:      {mark(cert.coupling_matrix_is_m)}",
        f"diagonal < 1:              {mark(cert.diag_below_one)}",
        f"structural conditions:     {mark(cert.hmatrix_conditions_ok)}",
    ]
    if cert.notes:
        lines.append(f"notes: {cert.notes}")
    return "\n".join(lines) + "\n"


def cmd_check(args):
    problem = _load_problem(args, need_sigma=False)
    splitting = make_splitting(problem.a, _splitting_kind(args))
    cert = check_spectral_condition(problem.a, splitting)
    _emit(_render_certificate(cert, args.format), args)
    return 0


def _thread_cap():
    raw = os.environ.get("LCPKIT_THREADS", "").strip()
    if not raw:
        return 1
    try:
        return max(1, int(raw))
    except ValueError:
        raise UsageError(f"LCPKIT_THREADS must be an integer, got {raw!r}")


def _parse_sizes(raw, default):
    if raw is None:
        return list(default)
    try:
        sizes = [int(tok) for tok in raw.split(",") if tok.strip()]
    except ValueError:
        raise UsageError(f"--sizes must be comma-separated integers, got {raw!r}")
    if not sizes:
        raise UsageError("--sizes is empty")
    return sizes


def _table_cells(args):
    setup = TABLE_SETUPS[args.which]
    sizes = _parse_sizes(args.sizes, setup["sizes"])
    for n in sizes:
        m = math.isqrt(n)
        if m * m != n or m < 2:
            raise UsageError(f"table sizes must be perfect squares >= 4, got {n}")
    problems = {n: BenchSpec(setup["family"], math.isqrt(n), args.delta).build()
                for n in sizes}
    methods = [
        ("mgs", f"alpha=1;gamma={args.gamma:g}"),
        ("msor", f"alpha={setup['msor_alpha']:g};gamma={args.gamma:g}"),
        ("npgs", ""),
        ("npsor", f"alpha={setup['npsor_alpha']:g}"),
    ]
    cfg = SolverConfig(tol=args.tol, max_iters=args.max_iters)

    def run_cell(cell):
        method, _ = methods[cell[0]]
        problem = problems[sizes[cell[1]]]
        if method == "mgs":
            return modulus_solve(problem, cfg, ModulusConfig("mgs", 1.0, gamma=args.gamma))
        if method == "msor":
            return modulus_solve(problem, cfg,
                                 ModulusConfig("msor", setup["msor_alpha"], gamma=args.gamma))
        if method == "npgs":
            kind = SplittingKind.npgs()
        else:
            kind = SplittingKind.npsor(setup["npsor_alpha"])
        return projected_solve(problem, make_splitting(problem.a, kind), cfg)

    cells = [(mi, ni) for mi in range(len(methods)) for ni in range(len(sizes))]
    workers = min(_thread_cap(), len(cells))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            reports = list(pool.map(run_cell, cells))
    else:
        reports = [run_cell(c) for c in cells]
    grid = {}
    for cell, report in zip(cells, reports):
        grid[cell] = report
    return sizes, methods, grid


def _render_table_csv(which, sizes, methods, grid):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["table", "method", "parameter", "n", "iterations",
                     "residual_final", "cpu_seconds", "converged"])
    for mi, (method, parameter) in enumerate(methods):
        for ni, n in enumerate(sizes):
            r = grid[(mi, ni)]
            writer.writerow([which, method, parameter, n, r.iterations,
                             _g17(r.residual_final), f"{r.wall_seconds:.6f}",
                             r.converged])
    return buf.getvalue()


def _render_table_md(which, sizes, methods, grid):
    header = ["method", "metric"] + [f"n={n}" for n in sizes]
    lines = [f"# {which}", "", "| " + " | ".join(header) + " |",
             "|" + "---|" * len(header)]
    for mi, (method, parameter) in enumerate(methods):
        label = method if not parameter else f"{method} ({parameter})"
        rows = {"IT": [], "CPU(s)": [], "Res": []}
        for ni in range(len(sizes)):
            r = grid[(mi, ni)]
            it = str(r.iterations) if r.converged else f"{r.iterations}*"
            rows["IT"].append(it)
            rows["CPU(s)"].append(f"{r.wall_seconds:.4f}")
            rows["Res"].append(f"{r.residual_final:.2e}")
        for j, metric in enumerate(("IT", "CPU(s)", "Res")):
            head = label if j == 0 else ""
            lines.append("| " + " | ".join([head, metric] + rows[metric]) + " |")
    lines.append("")
    lines.append("(* did not reach the residual threshold)")
    return "\n".join(lines) + "\n"


def _render_table_json(which, sizes, methods, grid):
    runs = []
    for mi, (method, parameter) in enumerate(methods):
        for ni, n in enumerate(sizes):
            rec = {"table": which, "parameter": parameter}
            rec.update(grid[(mi, ni)].to_json_dict())
            runs.append(rec)
    return json.dumps({"table": which, "sizes": sizes, "runs": runs}, indent=2) + "\n"


def cmd_table(args):
    sizes, methods, grid = _table_cells(args)
    if args.format == "csv":
        text = _render_table_csv(args.which, sizes, methods, grid)
    elif args.format == "json":
        text = _render_table_json(args.which, sizes, methods, grid)
    else:
        text = _render_table_md(args.which, sizes, methods, grid)
    _emit(text, args)
    return 0


def cmd_gen(args):
    problem = _load_problem_from_family(args)
    write_matrix_market(problem.a, args.matrix)
    write_vector(problem.sigma, args.sigma)
    if args.solution:
        if problem.known_solution is None:
            raise UsageError("this family carries no reference solution")
        write_vector(problem.known_solution, args.solution)
    return 0


def _load_problem_from_family(args):
    if args.family in ("example1", "example2"):
        if args.m is None:
            raise UsageError("--m is required for generated families")
        return BenchSpec(args.family, args.m, args.delta).build()
    if args.m is None:
        raise UsageError("--m (the dimension) is required for the random family")
    return gen_random_hplus(args.m, args.seed)


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except DivergenceError as exc:
        print(f"did not converge: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
