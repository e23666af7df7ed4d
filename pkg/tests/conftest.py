import numpy as np
import pytest

from boson_sde.dnse import DnseParams, build_dnse_spec


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def dnse_spec():
    """Two-site DNSE with ring hopping, n = 2, c = 1."""
    return build_dnse_spec(DnseParams(N=2, n=2, c=1.0))


def loop_B(z, tensor):
    N = len(z)
    B = np.zeros((N, N), dtype=complex)
    for j in range(N):
        for k in range(N):
            for l in range(N):
                for m in range(N):
                    B[j, k] += -0.5j * (tensor[j, k, l, m] + tensor[k, j, l, m]) * z[l] * z[m]
    return B


_ACCEPTANCE_LINES = []


@pytest.fixture
def ac_report():
    """Record one PASS/FAIL line per acceptance criterion; printed in the terminal summary."""

    def report(name, ok, detail):
        line = f"{name}: {'PASS' if ok else 'FAIL'}  {detail}"
        print(line)
        _ACCEPTANCE_LINES.append(line)
        return ok

    return report


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
