import numpy as np
import pytest

from covkit.ss import StateSpaceModel

# one line per acceptance criterion, printed at the end of the run
ACCEPTANCE_LINES = []


def record(criterion, ok, detail):
    ACCEPTANCE_LINES.append(f"criterion {criterion}: {'PASS' if ok else 'FAIL'}  {detail}")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def random_stable_system(rng, n_x, n_u, n_p, margin=(0.1, 2.0), scale=1.0):
    """Random Hurwitz model: a Gaussian matrix shifted left of the imaginary axis."""
    G = rng.standard_normal((n_x, n_x)) * scale / np.sqrt(n_x)
    shift = np.linalg.eigvals(G).real.max() + rng.uniform(*margin) * scale
    A = G - shift * np.eye(n_x)
    B = rng.standard_normal((n_x, n_u))
    C = rng.standard_normal((n_p, n_x))
    return StateSpaceModel(A, B, C)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def mimo():
    from covkit.scenarios import mimo_model
    return mimo_model()
