import pytest

from optimal_lockdown import COUNTRIES, SweepSpec, default_c1_grid, preset, run_sweep


@pytest.fixture(params=["burundi", "india", "us"])
def country(request):
    return request.param


@pytest.fixture
def scenario(country):
    return preset(country)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def sweeps():
    """Default-grid sweeps for all three presets (a few minutes on one core)."""
    out = {}
    for c in COUNTRIES:
        p = preset(c)
        out[c] = run_sweep(SweepSpec(p, tuple(default_c1_grid(p.cost.c1))))
    return out
