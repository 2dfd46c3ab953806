"""End-to-end acceptance criteria, one test each.

Every test prints a ``PASS``/``FAIL`` line (also collected into the pytest
terminal summary) before asserting, so a failing criterion still reports
its measured values.
"""
import json
import math
import statistics
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES, THEOREM_CASES, config_text
from hypflow import cli, diagnostics, flow, hypgeom
from hypflow.params import FlowParams
from hypflow.sphgrid import Grid

RHAT_CLOSED = math.asinh(2.0) / 2


def verdict(number, ok, detail):
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def _timed(fn, *args):
    start = time.perf_counter()
    out = fn(*args)
    return out, time.perf_counter() - start


def test_criterion_01_rhat_closed_form():
    errs, times = [], []
    for params in (FlowParams(2, 1, 3.0, 1.0), FlowParams(2, 2, 5.0, 1.0)):
        for _ in range(5):
            value, dt = _timed(flow.r_hat, params)
            times.append(dt)
        errs.append(abs(value - RHAT_CLOSED))
    runtime = statistics.median(times)
    ok = max(errs) < 1e-10 and runtime < 1e-3
    verdict(1, ok, f"max |r_hat - asinh(2)/2| = {max(errs):.2e} (< 1e-10), median call {runtime * 1e3:.3f} ms (< 1 ms)")


def test_criterion_02_ode_pde_equivalence():
    params = FlowParams(2, 1, 3.0, 1.0)
    grid = Grid.axisymmetric(64)
    a0 = 2 * flow.r_hat(params)
    start = time.perf_counter()
    # tol_r = 0 disables the convergence stop so the run covers all of [0, 10]
    res = flow.run(grid, np.full(grid.shape, a0), params, flow.StoppingRule(tol_r=0.0, t_max=10.0), record_stride=1)
    t_ode, a = flow.integrate_sphere_ode(a0, params, None, res.dts)
    runtime = time.perf_counter() - start
    t_pde = np.array([rec.t for rec in res.records])
    dev = max(
        np.abs(np.array([rec.r_max for rec in res.records]) - a).max(),
        np.abs(np.array([rec.r_min for rec in res.records]) - a).max(),
    )
    ok = (res.status == flow.TIME_LIMIT and t_pde[-1] == pytest.approx(10.0) and np.array_equal(t_pde, t_ode)
          and dev < 1e-10 and runtime < 5.0)
    verdict(2, ok, f"{len(res.dts)} steps to t={t_pde[-1]:g}, max |r - a| = {dev:.2e} (< 1e-10), {runtime:.2f} s (< 5 s)")


def test_criterion_03_mean_convex_convergence(theorem_run):
    _, res, report, rate, runtime = theorem_run("k1")
    final = res.records[-1]
    mono = diagnostics.verify_gradient_monotone(res.records, slack=1e-12)
    ok = (res.status == flow.CONVERGED and res.t_exit <= 50 and final.osc < 1e-6 and final.dist_rhat < 1e-4
          and mono.passed and rate is not None and rate < -0.1 and runtime < 60)
    verdict(3, ok, f"{res.status} at t={res.t_exit:.3f}, osc={final.osc:.2e}, dist_rhat={final.dist_rhat:.2e}, "
                   f"grad monotone margin={mono.margin:.2e}, rate={rate:.3f}, {runtime:.1f} s (< 60 s)")


def test_criterion_04_uniformly_convex_convergence(theorem_run):
    _, res, _, _, runtime = theorem_run("k2")
    floor = 0.5 * min(res.records[0].kappa_min, 1.0)
    kmin = min(rec.kappa_min for rec in res.records)
    dist = float(np.abs(res.final_state.rf.r - res.r_hat).max())
    ok = res.status == flow.CONVERGED and kmin >= floor and dist < 1e-4 and runtime < 120
    verdict(4, ok, f"{res.status} at t={res.t_exit:.3f}, min kappa_min={kmin:.4f} (>= {floor:.4f}), "
                   f"max |r - r_hat|={dist:.2e} (< 1e-4), {runtime:.1f} s (< 120 s)")


def test_criterion_05_fractional_beta(theorem_run):
    _, res, report, rate, _ = theorem_run("beta_half")
    summary = json.loads(json.dumps(cli.summarize(res, report, rate)))
    mean_r = float(res.final_state.rf.r.mean())
    err = abs(mean_r - flow.r_hat(res.params))
    gap = summary["r_hat_paper"] - summary["r_hat_exact"]
    ok = res.status == flow.CONVERGED and err < 1e-4 and summary["r_hat_exact"] == res.r_hat and abs(gap) > 1e-3
    verdict(5, ok, f"{res.status}, |mean r - r_hat_exact| = {err:.2e} (< 1e-4), "
                   f"JSON r_hat exact={summary['r_hat_exact']:.12f} paper={summary['r_hat_paper']:.12f}")


def test_criterion_06_c0_sandwich(theorem_run):
    margins = {}
    for label in THEOREM_CASES:
        _, res, _, _, _ = theorem_run(label)
        margins[label] = diagnostics.verify_c0(res.records, res.r_hat, res.grid.h)
    ok = all(c.passed for c in margins.values())
    verdict(6, ok, "worst margins " + ", ".join(f"{k}={c.margin:.2e}" for k, c in margins.items()))


def test_criterion_07_bound_suite(theorem_run):
    failed = []
    for label in THEOREM_CASES:
        _, res, report, _, _ = theorem_run(label)
        bounds = diagnostics.verify_bounds_suite(res)
        failed += [f"{label}:{name}" for name, c in list(bounds.items()) + list(report.items()) if not c.passed]
    ok = not failed
    verdict(7, ok, "all checks pass on runs 3-5" if ok else "failed: " + ", ".join(failed))


def test_criterion_08_identity_suite():
    report, runtime = _timed(diagnostics.identity_suite, 1000, 7)
    ok = report.all_passed and runtime < 10
    verdict(8, ok, ", ".join(f"{n}={'ok' if c.passed else 'FAIL'}" for n, c in report.items()) + f", {runtime:.2f} s (< 10 s)")


def _operator_errors(n):
    grid = Grid.axisymmetric(n)
    t = grid.theta
    r = 1 + 0.1 * np.cos(2 * t)
    grad = (-0.2 * np.sin(2 * t), None)
    hess = (-0.4 * np.cos(2 * t), None, -0.4 * np.cos(t) ** 2)
    params = FlowParams(2, 2, 5.0, 1.0)
    exact = hypgeom.geometry_from_derivatives(np.sinh(r), np.cosh(r), grad, hess, params)
    disc = hypgeom.geometry(grid, hypgeom.radial_from_values(grid, r), params)
    return {
        "kappa_min": np.abs(disc.kappa1 - exact.kappa1).max(),
        "kappa_max": np.abs(disc.kappa2 - exact.kappa2).max(),
        "gradient": np.abs(np.sqrt(disc.grad_sq) - np.abs(grad[0])).max(),
    }


def test_criterion_09_discretization_order():
    coarse, fine = _operator_errors(65), _operator_errors(129)
    ratios = {k: coarse[k] / fine[k] for k in coarse}
    ok = all(3.5 <= v <= 4.5 for v in ratios.values())
    verdict(9, ok, "halving ratios " + ", ".join(f"{k}={v:.3f}" for k, v in ratios.items()) + " (in [3.5, 4.5])")


def test_criterion_10_determinism(tmp_path):
    outputs = []
    n, k, alpha, beta, mode = THEOREM_CASES["k1"]
    for tag in ("first", "second"):
        extra = f"output.csv = {tmp_path / tag}.csv\noutput.json = {tmp_path / tag}.json\n"
        cfg = tmp_path / f"{tag}.cfg"
        cfg.write_text(config_text(n, k, alpha, beta, mode, extra=extra))
        code = cli.main(["run", str(cfg)])
        outputs.append((code, (tmp_path / f"{tag}.csv").read_bytes(), (tmp_path / f"{tag}.json").read_bytes()))
    (c1, csv1, json1), (c2, csv2, json2) = outputs
    ok = c1 == c2 == 0 and csv1 == csv2 and json1 == json2
    verdict(10, ok, f"exit codes {c1}/{c2}, CSV {len(csv1)} bytes identical={csv1 == csv2}, JSON identical={json1 == json2}")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
