import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from inlslab import PhysParams, build_grid, minimize_nehari  # noqa: E402


def _gs(d, alpha, kappa=1.0, gamma=0.0, omega=1.0, n=32000, extent=12.0):
    p = PhysParams(d, alpha, kappa, gamma, omega)
    return minimize_nehari(p, build_grid("radial", d, extent, n, alpha=alpha))


@pytest.fixture(scope="session")
def gs_mass_critical():
    return _gs(2, 1.0)


@pytest.fixture(scope="session")
def gs_mass_critical_half_kappa():
    return _gs(2, 1.0, kappa=0.5)


@pytest.fixture(scope="session")
def gs_super():
    return _gs(3, 1.0, n=16000)


@pytest.fixture(scope="session")
def gs_3d_half():
    return _gs(3, 0.5, n=16000)


@pytest.fixture(scope="session")
def solve_gs():
    return _gs


# --- acceptance report ---------------------------------------------------------------

_ACCEPTANCE = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(name): acceptance criterion reported in the summary")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    name = marker.args[0]
    failed = report.failed
    if report.when == "call" or failed:
        ok, details = _ACCEPTANCE.get(name, (True, []))
        details = details + [v for k, v in item.user_properties if k == "detail" and v not in details]
        _ACCEPTANCE[name] = (ok and not failed, details)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, (ok, details) in _ACCEPTANCE.items():
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}")
        for text in details:
            terminalreporter.write_line(f"      {text}")
