"""Shared fixtures: the 2-neuron benchmark network and its derived objects.

The benchmark is small enough that every derived quantity (invariant
measure, kernels, ratio constants) has a hand-checkable closed form, so
the heavy objects are built once per session.
"""

import numpy as np
import pytest

from pjmp.model import Config, IntensitySpec, NetworkParams
from pjmp.semigroup import kernel_ratios
from pjmp.statespace import (
    build_rate_matrix,
    enumerate_reachable,
    invariant_domain,
    invariant_measure,
)
from pjmp.inequalities import build_mlsi_constants


@pytest.fixture(scope="session")
def bench_params():
    return NetworkParams(
        n_neurons=2,
        cap=2,
        weights=[[0, 1], [1, 0]],
        intensity=IntensitySpec.affine(1, 1),
        delta=1,
    )


@pytest.fixture(scope="session")
def bench_x0(bench_params):
    return Config.from_potentials(bench_params, [0, 0])


@pytest.fixture(scope="session")
def bench_reachable(bench_params, bench_x0):
    return enumerate_reachable(bench_params, bench_x0)


@pytest.fixture(scope="session")
def bench_domain(bench_params, bench_x0):
    return invariant_domain(bench_params, bench_x0)


@pytest.fixture(scope="session")
def bench_rm(bench_domain):
    return build_rate_matrix(bench_domain)


@pytest.fixture(scope="session")
def bench_measure(bench_rm):
    return invariant_measure(bench_rm)


@pytest.fixture(scope="session")
def bench_ratios(bench_rm):
    # default grid: geomspace(0.05, 20, 25) x 64 u-points
    return kernel_ratios(bench_rm)


@pytest.fixture(scope="session")
def bench_constants(bench_rm, bench_ratios):
    return build_mlsi_constants(bench_rm, bench_ratios)


@pytest.fixture(scope="session")
def bench_config_doc():
    """The benchmark experiment config as a plain dict."""
    return {
        "network": {
            "n_neurons": 2,
            "cap": "2",
            "weights": [["0", "1"], ["1", "0"]],
            "intensity": {"kind": "affine", "a": "1", "b": "1"},
            "delta": "1",
        },
        "experiment": "verify-all",
        "t": 1.0,
        "observable": "identity",
        "neuron": 0,
        "eps": 0.3,
        "n_grid": list(range(2, 11)),
        "n_paths": 100000,
        "seed": 7,
    }


# ---------------------------------------------------------------------------
# acceptance criterion reporting

_CRITERIA = []


def record_criterion(num: int, name: str, passed: bool, detail: str = ""):
    _CRITERIA.append((num, name, bool(passed), detail))


@pytest.fixture(scope="session")
def criteria():
    """Recorder for the acceptance gate; each criterion reports one line."""
    return record_criterion


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for num, name, ok, detail in sorted(_CRITERIA):
        status = "PASS" if ok else "FAIL"
        line = f"[{status}] criterion {num:02d} {name}"
        if detail:
            line += f": {detail}"
        terminalreporter.write_line(line)


def assert_close(actual, expected, rel=1e-12, abs_tol=0.0):
    actual = np.asarray(actual, dtype=float)
    expected = np.asarray(expected, dtype=float)
    np.testing.assert_allclose(actual, expected, rtol=rel, atol=abs_tol)
