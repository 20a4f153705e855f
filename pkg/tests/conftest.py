import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from specialkahler.cli import RunConfig, run

settings.register_profile("default", max_examples=25, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", max_examples=10, deadline=None, derandomize=True,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


class SuiteCache:
    """Runs each CLI configuration once per session."""

    def __init__(self, root):
        self.root = root
        self.results = {}

    def __call__(self, suite: str, **overrides):
        key = (suite, tuple(sorted(overrides.items())))
        if key not in self.results:
            out = self.root / f"{suite}-{len(self.results)}"
            cfg = RunConfig(suite=suite, out=str(out), **overrides).validate()
            code, rep = run(cfg)
            self.results[key] = (code, rep, out)
        return self.results[key]


@pytest.fixture(scope="session")
def suite_run(tmp_path_factory):
    return SuiteCache(tmp_path_factory.mktemp("reports"))


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def verdict():
    """Records one summary line per acceptance criterion."""
    def record(n: int, ok: bool, detail: str) -> bool:
        line = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
