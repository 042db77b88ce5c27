import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "boglab",
    deadline=None,
    max_examples=int(os.environ.get("BOG_LAB_EXAMPLES", "25")),
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.function_scoped_fixture],
)
settings.load_profile("boglab")


@pytest.fixture(scope="session")
def annulus():
    from boglab.geometry import build_grid, make_domain

    return build_grid(make_domain("annulus3d", 1.0, 2.0), (6, 8, 16))


@pytest.fixture
def rng():
    return np.random.default_rng(0x5EED)


@pytest.fixture
def criterion(request):
    """Record one PASS/FAIL line per acceptance criterion; echoed in the terminal summary."""
    lines = request.config.__dict__.setdefault("_criterion_lines", [])

    def record(number: int, ok: bool, detail: str):
        line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        lines.append((number, line))
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "_criterion_lines", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
