"""Command-line front end: ``hypflow {run,rhat,sphere-ode,identities,sweep}``.

Exit codes for ``run``: 0 converged with every applicable check passing,
1 usage/config error, 2 cone exit, 3 time limit, 4 converged but a check
failed.
"""
import argparse
import csv
import io
import json
import logging
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace

import numpy as np

from . import diagnostics, flow
from .config import make_initial, parse_config
from .diagnostics import DiagnosticsRecord
from .errors import ConfigError, DomainError, InitRejected
from .params import FlowParams

logger = logging.getLogger("hypflow")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_CONE = 2
EXIT_TIME = 3
EXIT_CHECKS = 4


def _fmt(x):
    return format(x, ".17g")


def records_csv(records):
    """CSV text for a trajectory: header plus one row per record."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(DiagnosticsRecord.columns())
    for rec in records:
        w.writerow([_fmt(v) for v in rec.values()])
    return buf.getvalue()


def _finite_or_none(x):
    if x is None:
        return None
    x = float(x)
    return x if math.isfinite(x) else None


def _clean(obj):
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, float):
        return _finite_or_none(obj)
    return obj


def summarize(result, report, rate):
    """JSON-ready summary of a finished run (no wall-clock data)."""
    params = result.params
    final = {}
    if result.final_state is not None:
        r = result.final_state.rf.r
        final = {
            "r_min": float(r.min()),
            "r_max": float(r.max()),
            "r_mean": float(r.mean()),
            "osc": float(r.max() - r.min()),
            "grad_vphi_sq_max": float(result.final_state.geo.grad_vphi_sq.max()),
            "dist_rhat": result.records[-1].dist_rhat,
        }
    out = {
        "status": result.status,
        "t_final": result.t_exit,
        "steps": result.steps,
        "r_hat_exact": result.r_hat,
        "r_hat_paper": result.r_hat_paper,
        "decay_rate": rate,
        "theorem_regime": params.theorem_regime,
        "params": {"n": params.n, "k": params.k, "alpha": params.alpha, "beta": params.beta, "gamma": params.gamma},
        "grid": {"mode": result.grid.mode, "n_theta": result.grid.n_theta, "n_phi": result.grid.n_phi},
        "mode": result.mode,
        "records": len(result.records),
        "final": final,
        "checks": report.as_dict(),
    }
    if result.cone_exit is not None:
        out["cone_exit"] = {"node": list(result.cone_exit.node), "sigma_k": result.cone_exit.value}
    return _clean(out)


def exit_code(result, report):
    if result.status == flow.CONE_EXIT:
        return EXIT_CONE
    if result.status == flow.TIME_LIMIT:
        return EXIT_TIME
    if result.params.theorem_regime and not report.all_passed:
        return EXIT_CHECKS
    return EXIT_OK


def execute(config):
    """Run one configuration; returns ``(result, report, rate)``."""
    r0 = make_initial(config)
    result = flow.run(
        config.grid, r0, config.params, config.stop, config.mode,
        safety=config.safety, record_stride=config.record_stride,
    )
    report, rate = diagnostics.verify_run(result)
    return result, report, rate


def write_outputs(config, result, report, rate, csv_path=None, json_path=None):
    csv_path = csv_path or config.csv_path
    json_path = json_path or config.json_path
    if csv_path:
        with open(csv_path, "w", newline="") as fh:
            fh.write(records_csv(result.records))
    summary = summarize(result, report, rate)
    if json_path:
        with open(json_path, "w") as fh:
            json.dump(summary, fh, indent=2)
            fh.write("\n")
    return summary


def run_command(config, out=None):
    """Execute ``config``, write its outputs and return the exit code."""
    out = out or sys.stdout
    try:
        result, report, rate = execute(config)
    except InitRejected as exc:
        print(f"error: initial data rejected: {exc}", file=sys.stderr)
        return EXIT_USAGE
    write_outputs(config, result, report, rate)
    print(f"status: {result.status}  t = {result.t_exit:.6g}  steps = {result.steps}", file=out)
    if result.r_hat is not None:
        print(f"r_hat (exact) = {result.r_hat:.12f}  r_hat (eta = 1) = {result.r_hat_paper:.12f}", file=out)
    if rate is not None:
        print(f"decay rate = {rate:.6g}", file=out)
    for line in report.lines():
        print(line, file=out)
    return exit_code(result, report)


# -- sweep ------------------------------------------------------------------

def _suffixed(path, alpha, beta):
    if not path:
        return None
    stem, dot, ext = path.rpartition(".")
    if not dot:
        stem, ext = path, ""
    tag = f"_a{alpha:g}_b{beta:g}"
    return f"{stem}{tag}.{ext}" if ext else f"{stem}{tag}"


def _sweep_cell(config, alpha, beta):
    p = config.params
    try:
        params = FlowParams(p.n, p.k, alpha, beta)
        cell = replace(config, params=params)
        result, report, rate = execute(cell)
    except (DomainError, InitRejected) as exc:
        return {"alpha": alpha, "beta": beta, "status": type(exc).__name__, "final_radius": None,
                "r_hat_exact": None, "decay_rate": None, "checks_passed": False}
    write_outputs(cell, result, report, rate,
                  _suffixed(config.csv_path, alpha, beta), _suffixed(config.json_path, alpha, beta))
    final = None if result.final_state is None else float(result.final_state.rf.r.mean())
    return {"alpha": alpha, "beta": beta, "status": result.status, "final_radius": final,
            "r_hat_exact": result.r_hat, "decay_rate": rate, "checks_passed": report.all_passed}


SWEEP_COLUMNS = ("alpha", "beta", "status", "final_radius", "r_hat_exact", "decay_rate", "checks_passed")


def sweep(config, jobs=1):
    """Run every ``(alpha, beta)`` cell; returns the rows in grid order."""
    alphas = config.sweep_alpha or (config.params.alpha,)
    betas = config.sweep_beta or (config.params.beta,)
    cells = [(a, b) for a in alphas for b in betas]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            futures = [ex.submit(_sweep_cell, config, a, b) for a, b in cells]
            return [f.result() for f in futures]
    return [_sweep_cell(config, a, b) for a, b in cells]


def sweep_table(rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_COLUMNS)
    for row in rows:
        w.writerow(["" if row[c] is None else (_fmt(row[c]) if isinstance(row[c], float) else row[c])
                    for c in SWEEP_COLUMNS])
    return buf.getvalue()


# -- argument handling ------------------------------------------------------

def _kv_tokens(tokens, required, optional=None):
    optional = optional or {}
    values = {}
    for tok in tokens:
        if "=" not in tok:
            raise ConfigError(f"expected key=value, got {tok!r}")
        key, val = tok.split("=", 1)
        key = key.strip()
        if key not in required and key not in optional:
            raise ConfigError("unknown key", key)
        conv = required.get(key) or optional[key][0]
        try:
            values[key] = conv(val)
        except ValueError:
            raise ConfigError(f"cannot parse {val!r}", key) from None
    for key in required:
        if key not in values:
            raise ConfigError("missing required key", key)
    for key, (_, default) in optional.items():
        values.setdefault(key, default)
    return values


PARAM_KEYS = {"n": int, "k": int, "alpha": float, "beta": float}


def _params_from(values):
    try:
        return FlowParams(values["n"], values["k"], values["alpha"], values["beta"])
    except DomainError as exc:
        raise ConfigError(str(exc)) from None


def cmd_run(args):
    with open(args.config) as fh:
        config = parse_config(fh.read(), args.override)
    return run_command(config)


def cmd_rhat(args):
    params = _params_from(_kv_tokens(args.pairs, PARAM_KEYS))
    try:
        exact = flow.r_hat(params)
        paper = flow.r_hat(params, "paper")
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    print(f"r_hat_exact = {exact:.12f}")
    print(f"r_hat_paper = {paper:.12f}")
    return EXIT_OK


def cmd_sphere_ode(args):
    keys = dict(PARAM_KEYS, a0=float, t_end=float, dt=float)
    values = _kv_tokens(args.pairs, keys, {"stride": (int, 1)})
    params = _params_from(values)
    t, a = flow.integrate_sphere_ode(values["a0"], params, values["t_end"], values["dt"], values["stride"])
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "a"])
    for ti, ai in zip(t, a):
        w.writerow([_fmt(ti), _fmt(ai)])
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())
    return EXIT_OK


def cmd_identities(args):
    report = diagnostics.identity_suite(args.samples, args.seed)
    for line in report.lines():
        print(line)
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(_clean(report.as_dict()), fh, indent=2)
            fh.write("\n")
    return EXIT_OK if report.all_passed else EXIT_CHECKS


def cmd_sweep(args):
    with open(args.config) as fh:
        config = parse_config(fh.read(), args.override)
    rows = sweep(config, args.jobs)
    table = sweep_table(rows)
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(table)
    else:
        sys.stdout.write(table)
    return EXIT_OK if all(r["status"] == flow.CONVERGED for r in rows) else EXIT_TIME


def build_parser():
    parser = argparse.ArgumentParser(prog="hypflow", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="evolve one configuration")
    p.add_argument("config")
    p.add_argument("--override", action="append", default=[], metavar="KEY=VALUE")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("rhat", help="print both equilibrium radii")
    p.add_argument("pairs", nargs="+", metavar="KEY=VALUE", help="n, k, alpha, beta")
    p.set_defaults(func=cmd_rhat)

    p = sub.add_parser("sphere-ode", help="integrate the round-sphere ODE")
    p.add_argument("pairs", nargs="+", metavar="KEY=VALUE", help="n, k, alpha, beta, a0, t_end, dt [, stride]")
    p.add_argument("--out", help="CSV path (default: stdout)")
    p.set_defaults(func=cmd_sphere_ode)

    p = sub.add_parser("identities", help="randomized identity suite")
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--json", help="write the report as JSON")
    p.set_defaults(func=cmd_identities)

    p = sub.add_parser("sweep", help="run a grid of (alpha, beta) cells")
    p.add_argument("config")
    p.add_argument("--override", action="append", default=[], metavar="KEY=VALUE")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", help="summary CSV path (default: stdout)")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
