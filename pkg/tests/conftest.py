import numpy as np
import pytest

from dvnreverb import AnalysisConfig, analyze
from dvnreverb.targets import hall_target, mixture_target

FS = 48000


class FixedUniforms:
    """Stand-in random stream that hands out prescribed uniform values in order."""

    def __init__(self, *values):
        self.values = list(np.concatenate([np.atleast_1d(v) for v in values]))

    def random(self, size=None):
        n = int(np.prod(size)) if size is not None else 1
        out, self.values = self.values[:n], self.values[n:]
        if len(out) < n:
            raise AssertionError("ran out of prescribed uniforms")
        return np.reshape(np.array(out, dtype=float), size) if size is not None else out[0]


@pytest.fixture(scope="session")
def fs():
    return FS


@pytest.fixture(scope="session")
def hall_model():
    return analyze(hall_target(0), FS, AnalysisConfig(late_start_ms=0))


@pytest.fixture(scope="session")
def mixture():
    y, filters = mixture_target(0)
    return y, filters


@pytest.fixture(scope="session")
def mixture_model(mixture):
    return analyze(mixture[0], FS, AnalysisConfig())


ACCEPTANCE_LINES = []


@pytest.fixture
def verdict(request):
    """Record one pass/fail line for the acceptance summary."""
    def record(label, ok, detail):
        line = f"{label}: {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    def skip(label, reason):
        line = f"{label}: SKIP  {reason}"
        ACCEPTANCE_LINES.append(line)
        pytest.skip(reason)

    record.skip = skip
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
