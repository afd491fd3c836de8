import json
import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile(
    "default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

DATA = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def frozen():
    return json.loads((DATA / "oracle_values.json").read_text())


def random_distance(n, seed):
    """Euclidean distances between random points: a proper metric without ties."""
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((n, 3))
    return np.sqrt(((x[:, None] - x[None]) ** 2).sum(-1))


def random_corr(n, seed, t=None):
    rng = np.random.default_rng(seed)
    t = t or 3 * n
    x = rng.standard_normal((n, t)) + 0.4 * rng.standard_normal(t)
    c = np.corrcoef(x)
    c = (c + c.T) / 2
    np.fill_diagonal(c, 1.0)
    return c


def corr_to_dist(c):
    return np.sqrt(np.clip(2 * (1 - c), 0, None))


def block_returns(n_blocks, size, t, seed, strength=0.8, noise=0.6):
    rng = np.random.default_rng(seed)
    lab = np.arange(n_blocks * size) % n_blocks
    f = rng.standard_normal((n_blocks, t))
    x = strength * f[lab] + noise * rng.standard_normal((len(lab), t))
    return x, lab


ACCEPTANCE_LINES = []


@pytest.fixture
def report():
    """Record one PASS/FAIL line for the acceptance summary."""
    def _report(label, ok, detail=""):
        line = f"{'PASS' if ok else 'FAIL'}  {label}" + (f"  ({detail})" if detail else "")
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok
    return _report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
