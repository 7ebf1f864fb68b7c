"""fracvar experiment harness.

Subcommands reproduce the reference table, the derivative-approximation
figures (as CSV series), the direct-method convergence studies, the
indirect-method curves, and the truncation-bound dominance checks:

    fracvar table-b    [--alpha ...] [--N ...] [--out PATH]
    fracvar derivative --function ID --method ID [--N ...|--n ...] [...]
    fracvar direct     --example ex1|ex2|ex3 [--n ...] [...]
    fracvar indirect   --example ex2-integer|ex2-moment|ex4-moment [--N ...]
    fracvar bounds     --function ID --method ID [--N ...] [...]

All values may come from an INI config file (one section per subcommand,
``--config PATH``); command-line flags override file values.  Output is a
headed CSV with LF line endings and 17-significant-digit floats, so
identical configs produce byte-identical files.

Exit codes: 0 all runs completed, 1 usage error, 2 numerical failure (a
JSON error list goes to stderr).
"""

import argparse
import configparser
import csv
import json
import sys
from typing import Optional

import numpy as np

from . import expansions, indirect
from ._functions import CATALOG, caputo_exact
from .direct import (
    NewtonConvergenceError,
    SingularSystemError,
    example1_problem,
    example2_problem,
    example3_minimizer,
    example3_problem,
    solve_direct,
)
from .operators import (
    Mesh,
    SampledCurve,
    diethelm_caputo,
    gl_left_all,
    l2_error,
    max_error,
)
from .specfun import SeriesConvergenceError

#: Default grid of the B(alpha, N) reference table.
TABLE_ALPHAS = (0.1, 0.3, 0.5, 0.7, 0.9, 0.99)
TABLE_NS = (4, 7, 15, 30, 70, 120, 170)

#: Absolute slack on the dominance flag, absorbing quadrature and roundoff
#: where the analytic bound is zero or near machine scale.
DOMINANCE_SLACK = 1e-8

EXPANSION_METHODS = ("integer", "moment", "atanackovic", "hadamard-moment")
MESH_METHODS = ("gl", "diethelm")

NUMERICAL_ERRORS = (
    NewtonConvergenceError,
    SingularSystemError,
    SeriesConvergenceError,
    expansions.ExpansionDomainError,
    indirect.NonAffineSystemError,
    np.linalg.LinAlgError,
)


class UsageError(Exception):
    pass


def _single_alpha(alphas) -> float:
    if len(alphas) != 1:
        raise UsageError("this subcommand uses a single alpha")
    alpha = alphas[0]
    if not 0.0 < alpha < 1.0:
        raise UsageError(f"alpha must lie in (0, 1), got {alpha}")
    return alpha


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".17g")


def _write_csv(path: str, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _floats(text: str):
    return [float(tok) for tok in text.replace(",", " ").split()]


def _ints(text: str):
    return [int(tok) for tok in text.replace(",", " ").split()]


class _Options:
    """Merged view of defaults, config-file section, and CLI flags."""

    def __init__(self, args: argparse.Namespace, section: str):
        self._args = vars(args)
        self._cfg = {}
        path = self._args.get("config")
        if path:
            parser = configparser.ConfigParser()
            parser.optionxform = str  # keep N and n distinct
            read = parser.read(path)
            if not read:
                raise UsageError(f"config file not found: {path}")
            if parser.has_section(section):
                self._cfg = dict(parser.items(section))

    def get(self, name: str, default=None, kind=str):
        flag = self._args.get(name.replace("-", "_"))
        if flag is not None:
            return flag
        if name in self._cfg:
            raw = self._cfg[name]
            if kind == "floats":
                return _floats(raw)
            if kind == "ints":
                return _ints(raw)
            if kind == "float":
                return float(raw)
            if kind == "int":
                return int(raw)
            return raw
        return default


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_table_b(opts: _Options) -> tuple:
    alphas = opts.get("alpha", list(TABLE_ALPHAS), kind="floats")
    ns = opts.get("N", list(TABLE_NS), kind="ints")
    if not alphas or not ns:
        raise UsageError("table-b needs nonempty alpha and N lists")
    if any(not 0.0 < a < 1.0 for a in alphas):
        raise UsageError("all alpha values must lie in (0, 1)")
    if any(n < 1 for n in ns):
        raise UsageError("all N values must be >= 1")
    rows = []
    for a in alphas:
        for n in ns:
            rows.append((a, n, expansions.moment_coeffs(a, n).B))
    return ("alpha", "N", "B"), rows, []


def _eval_grid(a: float, b: float, points: int) -> np.ndarray:
    return np.linspace(a, b, points + 1)[1:]  # expansions are singular at a


def cmd_derivative(opts: _Options) -> tuple:
    fname = opts.get("function", "t4")
    method = opts.get("method", "moment")
    alphas = opts.get("alpha", [0.5], kind="floats")
    quad_n = int(opts.get("quad-n", 2000, kind="int"))
    points = int(opts.get("points", 100, kind="int"))
    if fname not in CATALOG:
        raise UsageError(f"unknown function id {fname!r} (have {sorted(CATALOG)})")
    if method not in EXPANSION_METHODS + MESH_METHODS:
        raise UsageError(
            f"unknown method id {method!r} (have {EXPANSION_METHODS + MESH_METHODS})"
        )
    alpha = _single_alpha(alphas)
    func = CATALOG[fname]

    if method == "hadamard-moment":
        a, b = 1.0, 2.0
        if func.hadamard_exact is None:
            raise UsageError(f"function {fname!r} has no Hadamard reference")
        exact = lambda t: func.hadamard_exact(alpha, t)
    elif method == "diethelm":
        if func.rl_exact is None:
            raise UsageError(f"function {fname!r} not usable with method {method!r}")
        a, b = 0.0, 1.0
        exact = lambda t: caputo_exact(func, alpha, t)
    else:
        if func.rl_exact is None:
            raise UsageError(f"function {fname!r} not usable with method {method!r}")
        a, b = 0.0, 1.0
        exact = lambda t: func.rl_exact(alpha, t)

    rows = []
    failures = []
    if method in EXPANSION_METHODS:
        sweep = opts.get("N", [1, 2, 3], kind="ints")
        if not sweep:
            raise UsageError("derivative needs a nonempty N list")
        if method == "integer":
            if any(N < 0 for N in sweep):
                raise UsageError("integer method needs N >= 0")
        elif any(N < 1 for N in sweep):
            raise UsageError(f"method {method!r} needs N >= 1")
        grid = _eval_grid(a, b, points)
        for N in sweep:
            try:
                mc = expansions.moment_coeffs(alpha, max(N, 1))
                hc = expansions.hadamard_moment_coeffs(alpha, max(N, 1))
                for t in grid:
                    if method == "integer":
                        approx = expansions.expand_integer_left(
                            func.bundle, alpha, N, t, a
                        )
                    elif method == "moment":
                        approx = expansions.expand_moment_left(
                            func.x, func.xdot, mc, t, a, quad_n
                        )
                    elif method == "atanackovic":
                        approx = expansions.expand_atanackovic(func.x, mc, t, a, quad_n)
                    else:
                        approx = expansions.hadamard_expand_moment(
                            func.x, func.xdot, hc, t, a, quad_n
                        )
                    ex = exact(t)
                    rows.append((N, t, ex, approx, abs(approx - ex)))
            except NUMERICAL_ERRORS as exc:
                failures.append({"run": f"{method}:{fname}:N={N}", "error": str(exc)})
        header = ("N", "t", "exact", "approx", "abs_error")
    else:
        sweep = opts.get("n", [100], kind="ints")
        if not sweep:
            raise UsageError("derivative needs a nonempty n list")
        for n in sweep:
            try:
                mesh = Mesh(a, b, n)
                curve = SampledCurve.from_function(mesh, func.x)
                tnodes = mesh.nodes()
                if method == "gl":
                    approxes = gl_left_all(curve, alpha)
                else:
                    approxes = [
                        diethelm_caputo(curve, alpha, [func.x0], i)
                        for i in range(n + 1)
                    ]
                for i in range(1, n + 1):
                    ex = exact(tnodes[i])
                    rows.append((n, tnodes[i], ex, approxes[i], abs(approxes[i] - ex)))
            except NUMERICAL_ERRORS as exc:
                failures.append({"run": f"{method}:{fname}:n={n}", "error": str(exc)})
        header = ("n", "t", "exact", "approx", "abs_error")
    return header, rows, failures


def cmd_direct(opts: _Options) -> tuple:
    example = opts.get("example", "ex1")
    tol = float(opts.get("tol", 1e-10, kind="float"))
    if example == "ex1":
        problem, linear = example1_problem(), True
        exact = lambda t: t**2
        default_ns = [5, 10, 20, 40]
    elif example == "ex2":
        problem, linear = example2_problem(), True
        exact = lambda t: indirect.analytic_solution_example2(problem.alpha, t)
        default_ns = [5, 10, 20, 40]
    elif example == "ex3":
        problem, linear = example3_problem(), False
        exact = example3_minimizer
        default_ns = [10, 20, 30]
    else:
        raise UsageError(f"unknown example id {example!r} (have ex1, ex2, ex3)")
    ns = opts.get("n", default_ns, kind="ints")
    if not ns or any(n < 2 for n in ns):
        raise UsageError("direct needs a list of n values >= 2")

    rows = []
    failures = []
    for n in ns:
        try:
            curve = solve_direct(problem, n, newton_tol=tol, linear=linear)
        except NUMERICAL_ERRORS as exc:
            failures.append({"run": f"{example}:n={n}", "error": str(exc)})
            continue
        tnodes = curve.mesh.nodes()
        exact_curve = SampledCurve(curve.mesh, np.array([exact(t) for t in tnodes]))
        err = max_error(curve, exact_curve)
        for i, t in enumerate(tnodes):
            rows.append(
                (
                    n,
                    t,
                    curve.values[i],
                    exact_curve.values[i],
                    abs(curve.values[i] - exact_curve.values[i]),
                    err,
                    True,
                )
            )
    header = ("n", "t", "approx", "exact", "abs_error", "max_error", "converged")
    return header, rows, failures


def cmd_indirect(opts: _Options) -> tuple:
    example = opts.get("example", "ex2-moment")
    alpha = _single_alpha(opts.get("alpha", [0.5], kind="floats"))
    n_mesh = int(opts.get("n", 400, kind="int"))
    eps = float(opts.get("eps", 1e-4, kind="float"))
    defaults = {
        "ex2-integer": [1, 2, 3, 4],
        "ex2-moment": [2, 4, 8],
        "ex4-moment": [2, 4],
    }
    if example not in defaults:
        raise UsageError(
            f"unknown example id {example!r} (have {sorted(defaults)})"
        )
    Ns = opts.get("N", defaults[example], kind="ints")
    if not Ns:
        raise UsageError("indirect needs a nonempty N list")

    mesh = Mesh(0.0, 1.0, n_mesh)
    tnodes = mesh.nodes()
    if example.startswith("ex2"):
        exact_curve = SampledCurve(
            mesh, np.array([indirect.analytic_solution_example2(alpha, t) for t in tnodes])
        )
    else:
        exact_curve = SampledCurve(
            mesh, np.array([indirect.exact_solution_example4(alpha, t) for t in tnodes])
        )

    rows = []
    failures = []
    for N in Ns:
        try:
            if example == "ex2-integer":
                x = indirect.solve_example2_integer(alpha, N)
                approx = SampledCurve(mesh, x(tnodes))
            elif example == "ex2-moment":
                x = indirect.solve_example2_moment_closed(alpha, N)
                approx = SampledCurve(mesh, x(tnodes))
            else:
                system = indirect.assemble_tpbvp_example4(alpha, N)
                approx = indirect.solve_linear_tpbvp(system, mesh, eps=eps)[0]
        except NUMERICAL_ERRORS as exc:
            failures.append({"run": f"{example}:N={N}", "error": str(exc)})
            continue
        err = l2_error(approx, exact_curve)
        for i, t in enumerate(tnodes):
            rows.append((N, t, approx.values[i], exact_curve.values[i], err))
    header = ("N", "t", "approx", "exact", "l2_error")
    return header, rows, failures


def cmd_bounds(opts: _Options) -> tuple:
    fname = opts.get("function", "t4")
    method = opts.get("method", "integer")
    alphas = opts.get("alpha", [0.5], kind="floats")
    quad_n = int(opts.get("quad-n", 20000, kind="int"))
    points = int(opts.get("points", 20, kind="int"))
    Ns = opts.get("N", list(range(2, 11)), kind="ints")
    if fname not in CATALOG:
        raise UsageError(f"unknown function id {fname!r} (have {sorted(CATALOG)})")
    if method not in ("integer", "moment", "hadamard"):
        raise UsageError("bounds method must be integer, moment, or hadamard")
    if not Ns or any(N < 1 for N in Ns):
        raise UsageError("bounds needs a nonempty list of N >= 1")
    alpha = _single_alpha(alphas)
    func = CATALOG[fname]

    if method == "hadamard":
        if func.hadamard_exact is None:
            raise UsageError(f"function {fname!r} has no Hadamard reference")
        a, b = 1.0, 2.0
        exact = lambda t: func.hadamard_exact(alpha, t)
    else:
        if func.rl_exact is None:
            raise UsageError(f"function {fname!r} not usable with method {method!r}")
        a, b = 0.0, 1.0
        exact = lambda t: func.rl_exact(alpha, t)

    grid = _eval_grid(a, b, points)
    rows = []
    failures = []
    for N in Ns:
        try:
            mc = expansions.moment_coeffs(alpha, N)
            hc = expansions.hadamard_moment_coeffs(alpha, N)
            for t in grid:
                if method == "integer":
                    approx = expansions.expand_integer_left(func.bundle, alpha, N, t, a)
                    bound = expansions.bound_integer(func.integer_m(N, t), alpha, N, t, a)
                elif method == "moment":
                    approx = expansions.expand_moment_left(
                        func.x, func.xdot, mc, t, a, quad_n
                    )
                    bound = expansions.bound_moment(func.moment_l2(t), alpha, N, t, a)
                else:
                    approx = expansions.hadamard_expand_moment(
                        func.x, func.xdot, hc, t, a, quad_n
                    )
                    bound = expansions.bound_hadamard(
                        func.hadamard_lmax(t), alpha, N, t, a
                    )
                err = abs(approx - exact(t))
                rows.append((N, t, err, bound, err <= bound + DOMINANCE_SLACK))
        except NUMERICAL_ERRORS as exc:
            failures.append({"run": f"bounds:{method}:{fname}:N={N}", "error": str(exc)})
    header = ("N", "t", "abs_error", "bound", "dominated")
    return header, rows, failures


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

COMMANDS = {
    "table-b": cmd_table_b,
    "derivative": cmd_derivative,
    "direct": cmd_direct,
    "indirect": cmd_indirect,
    "bounds": cmd_bounds,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fracvar",
        description="Fractional-derivative approximation and variational-problem experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="INI config file (section per subcommand)")
        p.add_argument("--out", help="output CSV path")
        p.add_argument("--alpha", nargs="+", type=float, help="fractional order(s)")
        p.add_argument("--N", nargs="+", type=int, help="expansion order list")
        if name in ("derivative", "direct"):
            p.add_argument("--n", nargs="+", type=int, help="mesh size list")
        if name == "indirect":
            p.add_argument("--n", type=int, help="collocation mesh size")
        if name in ("derivative", "bounds"):
            p.add_argument("--function", help="test function id")
            p.add_argument("--method", help="approximation method id")
            p.add_argument("--quad-n", type=int, help="moment quadrature panels")
            p.add_argument("--points", type=int, help="evaluation grid size")
        if name in ("direct", "indirect"):
            p.add_argument("--example", help="catalog example id")
        p.add_argument("--eps", type=float, help="singular-origin offset")
        p.add_argument("--tol", type=float, help="nonlinear solver tolerance")
    return parser


def main(argv: Optional[list] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    try:
        opts = _Options(args, args.command)
        header, rows, failures = COMMANDS[args.command](opts)
        out_path = opts.get("out", f"{args.command.replace('-', '_')}.csv")
        _write_csv(out_path, header, rows)
    except UsageError as exc:
        print(f"fracvar: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"fracvar: I/O error: {exc}", file=sys.stderr)
        return 1
    if failures:
        print(json.dumps(failures), file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
