import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from onerelu.core import from_arrays

settings.register_profile("repo", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("repo")

_ACCEPTANCE = pytest.StashKey[list]()


def random_dataset(rng: np.random.Generator, n: int, p: int, scale: float = 1.0):
    X = rng.normal(size=(n, p))
    y = scale * rng.normal(size=n)
    return from_arrays(X, y)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def acceptance(request):
    """Record one summary line per acceptance criterion."""
    log = request.config.stash.setdefault(_ACCEPTANCE, [])

    def record(num: int, ok: bool, detail: str) -> None:
        log.append((num, ok, detail))

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    log = config.stash.get(_ACCEPTANCE, [])
    if not log:
        return
    terminalreporter.section("acceptance criteria")
    for num, ok, detail in sorted(log):
        terminalreporter.write_line(f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
