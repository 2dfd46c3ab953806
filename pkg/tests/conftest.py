import functools
import time

import pytest

from hypflow.cli import execute
from hypflow.config import parse_config

THEOREM_CASES = {
    "k1": (2, 1, 3.0, 1.0, "mean_convex"),
    "k2": (2, 2, 5.0, 1.0, "uniformly_convex"),
    "beta_half": (2, 1, 3.0, 0.5, "mean_convex"),
}


def config_text(n, k, alpha, beta, mode="unchecked", n_theta=128, t_max=50.0, eps=0.1, extra=""):
    return f"""\
n = {n}
k = {k}
alpha = {alpha}
beta = {beta}
grid.mode = axisymmetric
grid.n_theta = {n_theta}
initial.kind = harmonic
initial.base = rhat
initial.eps = {eps}
initial.l = 2
initial.m = 0
stopping.t_max = {t_max}
mode = {mode}
{extra}"""


@functools.lru_cache(maxsize=None)
def _theorem_run(label):
    config = parse_config(config_text(*THEOREM_CASES[label]))
    start = time.perf_counter()
    result, report, rate = execute(config)
    return config, result, report, rate, time.perf_counter() - start


@pytest.fixture(scope="session")
def theorem_run():
    """Callable returning ``(config, result, report, rate, seconds)`` for a named case, computed once."""
    return _theorem_run


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
