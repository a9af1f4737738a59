import numpy as np
import pytest
from hypothesis import HealthCheck, settings

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("-", "acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

settings.register_profile(
    "ci",
    max_examples=100,
    deadline=None,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("ci")


@pytest.fixture
def rng():
    return np.random.Generator(np.random.PCG64(20240817))


def random_tiny_instance(rng, max_n=5, max_b=3, max_r=6, kinds=("weighted-linear",)):
    """Small random instance for oracle-equivalence suites."""
    from latmax import ProblemInstance, weighted_concave_sqrt, weighted_linear

    n = int(rng.integers(1, max_n + 1))
    w = rng.integers(1, 101, size=n)
    kind = kinds[int(rng.integers(len(kinds)))]
    objective = weighted_linear(w) if kind == "weighted-linear" else weighted_concave_sqrt(w)
    return ProblemInstance(
        n=n,
        b=rng.integers(1, max_b + 1, size=n),
        r=int(rng.integers(1, max_r + 1)),
        objective=objective,
    )
