import numpy as np
import pytest
from hypothesis import settings
from hypothesis import strategies as st

from attinit import quaternion as quat

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(20170321)


finite = st.floats(-1.0, 1.0, allow_nan=False, allow_infinity=False)


@st.composite
def unit_quaternions(draw):
    v = np.array([draw(finite) for _ in range(4)])
    if np.linalg.norm(v) < 1e-3:
        v = np.array([0.1, -0.2, 0.3, 0.9])
    return quat.normalize(v)


@st.composite
def unit_vectors(draw):
    v = np.array([draw(finite) for _ in range(3)])
    if np.linalg.norm(v) < 1e-3:
        v = np.array([0.0, 0.6, 0.8])
    return v / np.linalg.norm(v)


rates = st.lists(st.floats(-0.5, 0.5, allow_nan=False), min_size=3, max_size=3).map(np.array)


def same_rotation(p, q, tol):
    """Quaternion equality modulo sign."""
    return min(np.max(np.abs(p - q)), np.max(np.abs(p + q))) < tol


def pytest_terminal_summary(terminalreporter):
    import sys
    module = sys.modules.get("test_acceptance")
    if module is not None and module.VERDICTS:
        terminalreporter.section("acceptance")
        for line in module.VERDICTS:
            terminalreporter.write_line(line)
