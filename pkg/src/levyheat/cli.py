"""Command-line interface: ``levyheat <subcommand> --config model.json ...``.

Reports are CSV files with ``#`` metadata lines (tool version, config hash and
the normalised flags) and a JSON summary printed to stdout.  Exit codes:
0 all verdicts pass, 1 a verdict failed, 2 usage or config error, 3 numeric
error.  Errors are reported as one JSON object on stderr.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from typing import Optional, Sequence

import numpy as np

from . import __version__
from . import bounds as bd
from . import dirichlet as dr
from . import levy_model as lm
from . import rate as rt
from . import simulate as sm
from .config import load_config, parse_bernstein_tag
from .density import density_grid
from .errors import FeatureUnavailableError, InvalidInputError, LevyHeatError
from .io import fmt, write_json_atomic, write_text_atomic

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(InvalidInputError):
    code = "usage"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def parse_grid(text: str) -> list[float]:
    """Comma-separated values, each a number or an inclusive ``start:stop:step`` range."""
    out: list[float] = []
    for item in str(text).split(","):
        item = item.strip()
        if not item:
            continue
        parts = item.split(":")
        try:
            nums = [float(p) for p in parts]
        except ValueError:
            raise UsageError(f"cannot parse grid item {item!r}") from None
        if len(nums) == 1:
            out.append(nums[0])
            continue
        if len(nums) != 3:
            raise UsageError(f"ranges take the form start:stop:step, got {item!r}")
        start, stop, step = nums
        if step <= 0 or stop < start:
            raise UsageError(f"range {item!r} needs step > 0 and stop >= start")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        out.extend(start + k * step for k in range(count))
    if not out:
        raise UsageError("empty grid")
    return out


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    return obj


# --------------------------------------------------------------------------
# argument parser


def _add_common(p):
    p.add_argument("--config", required=True, help="model config (JSON)")
    p.add_argument("--out", help="report path (written atomically)")
    p.add_argument("--summary", help="also write the JSON summary to this path")


def _bernstein_opt(p):
    p.add_argument("--f", dest="bernstein",
                   help="Bernstein function, e.g. power(0.75); defaults to the config's")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="levyheat", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"levyheat {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("validate", help="check model invariants")
    _add_common(p)

    p = sub.add_parser("exponent", help="tables of psi and Lambda")
    _add_common(p)
    p.add_argument("--xi", default="0:10:0.5", help="frequency grid (first axis)")

    p = sub.add_parser("density", help="transition density on a grid")
    _add_common(p)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--x-max", type=float, default=10.0)

    p = sub.add_parser("rate", help="rate function D_t^2(x)")
    _add_common(p)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--x", required=True, help="points (first axis in dim > 1)")

    p = sub.add_parser("bounds", help="heat-kernel bound checks")
    bsub = p.add_subparsers(dest="bound", required=True, parser_class=_Parser)
    q = bsub.add_parser("off-diagonal")
    _add_common(q)
    q.add_argument("--t", required=True, help="one or more times")
    q.add_argument("--x", required=True)
    q.add_argument("--rtol", type=float, default=bd.OFF_DIAGONAL_RTOL)
    q = bsub.add_parser("on-diagonal")
    _add_common(q)
    _bernstein_opt(q)
    q.add_argument("--ts", default="0.05,0.1,0.25,0.5,1")
    q = bsub.add_parser("combined")
    _add_common(q)
    _bernstein_opt(q)
    q.add_argument("--t", type=float, required=True)
    q.add_argument("--x", required=True)
    q.add_argument("--ts", default="0.05,0.1,0.25,0.5,1")
    q = bsub.add_parser("asymptotics")
    _add_common(q)
    q.add_argument("--t", type=float, default=1.0)
    q.add_argument("--x", default="20,40,80")
    q.add_argument("--eps", type=float, default=bd.DEFAULT_EPS)
    q.add_argument("--beta", type=float)

    p = sub.add_parser("nash", help="Nash inequality constants over a test family")
    _add_common(p)
    _bernstein_opt(p)
    p.add_argument("--delta", type=float, default=0.0)
    p.add_argument("--count", type=int, default=12)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--grid-n", type=int, default=4096)
    p.add_argument("--refine", action="store_true",
                   help="also require worst C0 stable within 10%% under grid doubling")

    p = sub.add_parser("ldp", help="large-deviation error along scaled points")
    _add_common(p)
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--x", type=float, default=1.0)
    p.add_argument("--ells", default="1,2,4,8,16")
    p.add_argument("--threshold", type=float)
    p.add_argument("--method", choices=("point", "grid"), default="point")

    p = sub.add_parser("simulate", help="Monte Carlo samples of X_t")
    _add_common(p)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--eps", type=float)
    p.add_argument("--compensation", choices=sm.COMPENSATION_MODES, default="gaussian")
    p.add_argument("--compare", action="store_true",
                   help="KS distance against the Fourier density")
    p.add_argument("--ks-max", type=float, default=0.01)
    return parser


# --------------------------------------------------------------------------
# helpers


class _Run:
    """Shared state of one invocation: config, model, header lines."""

    def __init__(self, args):
        self.args = args
        self.cfg = load_config(args.config)
        self.model = self.cfg.build()
        flags = {k: v for k, v in sorted(vars(args).items())
                 if k not in ("config", "out", "summary") and v is not None}
        self.header = [f"# levyheat {__version__}",
                       f"# config_sha256={self.cfg.sha256}",
                       "# flags=" + json.dumps(_jsonable(flags), sort_keys=True)]

    def bernstein(self):
        if getattr(self.args, "bernstein", None):
            return parse_bernstein_tag(self.args.bernstein)
        if self.model.bernstein is None:
            raise UsageError("no Bernstein function: pass --f or set 'bernstein' in the config")
        return self.model.bernstein

    def write_csv(self, columns: Sequence[str], rows, extra=()):
        if not self.args.out:
            return
        lines = list(self.header) + [f"# {e}" for e in extra] + [",".join(columns)]
        lines += [",".join(fmt(v) for v in row) for row in rows]
        write_text_atomic(self.args.out, "\n".join(lines) + "\n")


def _cmd_validate(run: _Run):
    res = lm.validate_model(run.model)
    run.write_csv(("check", "ok"), sorted(res["checks"].items()))
    return res["ok"], {"checks": res["checks"], **res["details"]}


def _cmd_exponent(run: _Run):
    xs = parse_grid(run.args.xi)
    pts = np.zeros((len(xs), run.model.dim))
    pts[:, 0] = xs
    psi = run.model._psi(pts)
    lam = run.model._cumulant(pts) if run.model.has_exp_moments else np.full(len(xs), np.nan)
    run.write_csv(("xi", "psi", "Lambda"), zip(xs, psi, lam), extra=["direction=e1"])
    return True, {"points": len(xs), "has_exp_moments": run.model.has_exp_moments}


def _cmd_density(run: _Run):
    a = run.args
    grid = density_grid(run.model, a.t, x_max=a.x_max)
    if a.out:
        extra = run.header + [f"# h={fmt(grid.h)}", f"# n={grid.spec.n}"]
        if grid.dim == 1:
            grid.to_csv(a.out, x_max=a.x_max, extra_header=extra)
        else:
            x, p = grid.window(a.x_max)
            rows = ((x1, x2, p[i, j]) for i, x1 in enumerate(x) for j, x2 in enumerate(x))
            run.write_csv(("x1", "x2", "p"), rows,
                          extra=[f"t={fmt(a.t)}", f"model={run.model.name}"])
    return True, {"t": a.t, "p0": grid.at_origin, "h": grid.h, **grid.diagnostics}


def _cmd_rate(run: _Run):
    a = run.args
    rows = []
    for x in parse_grid(a.x):
        point = x if run.model.dim == 1 else np.eye(run.model.dim)[0] * x
        r = rt.rate_function(run.model, a.t, point)
        xi0 = r.xi0 if np.ndim(r.xi0) == 0 else float(np.asarray(r.xi0)[0])
        rows.append((a.t, x, r.D_sq, xi0, r.iterations, r.gradient_norm, r.status))
    run.write_csv(("t", "x", "D_sq", "xi0", "iterations", "gradient_norm", "status"), rows)
    summary = {"rows": [{"x": r[1], "D_sq": r[2], "xi0": r[3], "status": r[6]}
                        for r in rows]}
    return True, summary


def _report_rows(report: bd.BoundReport, t=None):
    for point, lhs, rhs, slack, flag in report.csv_rows():
        yield (report.bound_id, report.fits.get("t", t), point, lhs, rhs, slack, flag)


_BOUND_COLUMNS = ("bound_id", "t", "point", "lhs", "rhs", "slack", "flag")


def _cmd_bounds(run: _Run):
    a = run.args
    if a.bound == "off-diagonal":
        xs = parse_grid(a.x)
        reports = [bd.off_diagonal_check(run.model, t, xs, rtol=a.rtol)
                   for t in parse_grid(a.t)]
        run.write_csv(_BOUND_COLUMNS, [r for rep in reports for r in _report_rows(rep)])
        ok = all(rep.verdict for rep in reports)
        return ok, {"verdict": "pass" if ok else "fail",
                    "reports": [rep.summary() for rep in reports]}
    if a.bound == "on-diagonal":
        rep = bd.on_diagonal_fit(run.model, run.bernstein(), parse_grid(a.ts))
        run.write_csv(("bound_id", "t", "point", "lhs", "rhs", "slack", "flag"),
                      _report_rows(rep), extra=[f"c={fmt(rep.fits['c'])}",
                                                f"gamma={fmt(rep.fits['gamma'])}"])
        return rep.verdict, rep.summary()
    if a.bound == "combined":
        rep = bd.combined_bound_check(run.model, run.bernstein(), a.t, parse_grid(a.x),
                                      ts=parse_grid(a.ts))
        run.write_csv(_BOUND_COLUMNS, _report_rows(rep))
        return rep.verdict, rep.summary()
    rep = bd.example_iii_asymptotics_check(run.model, a.t, parse_grid(a.x), eps=a.eps,
                                           beta=a.beta)
    cols = ("x", "xi0", "reference", "ratio", "deviation", "D_sq", "rate_bound",
            "rate_bound_ok", "flag")
    run.write_csv(cols, ([r[c] for c in cols] for r in rep.rows))
    summary = {"beta": rep.beta, "t": rep.t, "eps": rep.eps,
               "ratio_trend_ok": rep.ratio_trend_ok, "last_deviation": rep.last_deviation,
               "rate_bound_ok": rep.rate_bound_ok,
               "verdict": "pass" if rep.verdict else "fail"}
    return rep.verdict, summary


def _cmd_nash(run: _Run):
    a = run.args
    family = dr.default_family(a.count, a.seed)
    f = run.bernstein()
    measure_model = run.model if run.model.measure is not None else None
    grid = dr.grid_for(family, measure_model, n=a.grid_n)
    rep = dr.nash_check(run.model, f, a.delta, family, grid)
    summary = {"worst_C0": rep.worst_C0, "finite": rep.finite, "delta": a.delta}
    ok = rep.finite
    if a.refine:
        fine = dr.nash_check(run.model, f, a.delta, family, grid.refined())
        change = abs(fine.worst_C0 / rep.worst_C0 - 1.0)
        summary.update(refined_C0=fine.worst_C0, relative_change=change)
        ok = ok and fine.finite and change <= 0.10
    run.write_csv(("function_id", "L1", "L2", "form", "lhs", "rhs0", "C0"), rep.csv_rows())
    summary["verdict"] = "pass" if ok else "fail"
    return ok, summary


def _cmd_ldp(run: _Run):
    a = run.args
    rep = rt.ldp_check(run.model, a.t, a.x, parse_grid(a.ells), method=a.method)
    cols = ("ell", "t", "x", "p", "e", "error")
    run.write_csv(cols, ([r[c] if r[c] is not None else "" for c in cols] for r in rep.rows),
                  extra=[f"D_sq={fmt(rep.D_sq)}"])
    ok = rep.passed(a.threshold)
    return ok, {"D_sq": rep.D_sq, "errors": rep.errors, "e_last": rep.e_last,
                "strictly_decreasing": rep.strictly_decreasing,
                "verdict": "pass" if ok else "fail"}


def _cmd_simulate(run: _Run):
    a = run.args
    plan = sm.SamplePlan(run.model, a.t, a.n, seed=a.seed, eps=a.eps,
                         compensation=a.compensation)
    samples = sm.sample_increments(plan)
    if a.out:
        sm.save_samples(a.out, samples, plan,
                        extra={"version": __version__, "config_sha256": run.cfg.sha256})
    summary = {"n": a.n, "mean": float(np.mean(samples)), "var": float(np.var(samples))}
    ok = True
    if a.compare:
        cmp = sm.empirical_vs_fourier(plan, samples=samples)
        ok = cmp["ks_distance"] <= a.ks_max
        summary.update(cmp, ks_max=a.ks_max, verdict="pass" if ok else "fail")
    return ok, summary


_COMMANDS = {"validate": _cmd_validate, "exponent": _cmd_exponent,
             "density": _cmd_density, "rate": _cmd_rate, "bounds": _cmd_bounds,
             "nash": _cmd_nash, "ldp": _cmd_ldp, "simulate": _cmd_simulate}


def _error_exit(exc: BaseException) -> int:
    if isinstance(exc, (InvalidInputError, FeatureUnavailableError)):
        code = EXIT_USAGE
    else:
        code = EXIT_NUMERIC
    record = {"error": getattr(exc, "code", type(exc).__name__),
              "message": str(exc), "exit_code": code}
    for attr in ("estimate", "error_bound", "lower", "upper"):
        if getattr(exc, attr, None) is not None:
            record[attr] = _jsonable(getattr(exc, attr))
    print(json.dumps(record, sort_keys=True), file=sys.stderr)
    return code


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        run = _Run(args)
        ok, summary = _COMMANDS[args.command](run)
    except LevyHeatError as exc:
        return _error_exit(exc)
    except (ArithmeticError, np.linalg.LinAlgError) as exc:
        return _error_exit(exc)
    summary = _jsonable({"command": args.command, "config_sha256": run.cfg.sha256,
                         "version": __version__, **summary})
    text = json.dumps(summary, sort_keys=True, indent=2)
    if args.summary:
        write_json_atomic(args.summary, summary)
    print(text)
    return EXIT_OK if ok else EXIT_FAIL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
