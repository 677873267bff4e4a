import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from sbmanon.graph import CommunityLabeling, Graph

settings.register_profile(
    "default", deadline=None, max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


def random_graph(rng, n, density):
    i, j = np.triu_indices(n, k=1)
    keep = rng.random(len(i)) < density
    return Graph(n, np.stack([i[keep], j[keep]], axis=1))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def two_blocks8():
    return CommunityLabeling.equal_blocks(8, 2)


ACCEPTANCE_LINES = []


def report(criterion, ok, detail):
    """Log one acceptance verdict; all of them are echoed at the end of the run."""
    status = "SKIP" if ok is None else ("PASS" if ok else "FAIL")
    line = f"criterion {criterion:>2}: {status}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
