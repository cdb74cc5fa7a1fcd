import numpy as np
import pytest

from qagree.sampling import random_kraus, rng_for

S2 = 1 / np.sqrt(2)
KET0 = np.array([1, 0], dtype=complex)
KET1 = np.array([0, 1], dtype=complex)
PLUS = np.array([S2, S2], dtype=complex)
MINUS = np.array([S2, -S2], dtype=complex)
P0 = np.outer(KET0, KET0)
P1 = np.outer(KET1, KET1)
X = np.array([[0, 1], [1, 0]], dtype=complex)
FLIP = np.array([[0, 1], [0, 0]], dtype=complex)  # |0><1|
THIRDS = np.array([np.sqrt(1 / 3), np.sqrt(2 / 3)], dtype=complex)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_instruments(count, seed, dims=(2, 3, 4), outcomes=(2, 3, 4)):
    """Deterministic stream of (instrument kraus list, states) test cases."""
    for k in range(count):
        r = rng_for(seed, k)
        d = dims[k % len(dims)]
        n = outcomes[(k // len(dims)) % len(outcomes)]
        yield random_kraus(d, n, r), r


_RESULTS = []


@pytest.fixture
def criterion():
    """Record a pass/fail line for the acceptance summary."""

    def record(label, ok, detail=""):
        _RESULTS.append((label, bool(ok), detail))
        assert ok, f"{label}: {detail}"

    return record


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for label, ok, detail in _RESULTS:
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {label}  {detail}")
