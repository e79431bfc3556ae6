import math
import os
import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

sys.path.insert(0, os.path.dirname(__file__))

from circle_pattern import beach_ball  # noqa: E402
from circle_pattern.generators import random_complex  # noqa: E402

settings.register_profile(
    "default", max_examples=60, deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

DATA = Path(__file__).parent / "data"
HALF_PI = math.pi / 2

# strictly inside the open domains, away from float-level boundary noise
radii = st.floats(1e-3, HALF_PI - 1e-3)
radii_or_great = st.one_of(radii, st.just(HALF_PI))
angles = st.floats(1e-3, HALF_PI - 1e-3)


@st.composite
def complexes(draw, max_faces=6, max_edges=12):
    seed = draw(st.integers(0, 2**32 - 1))
    return random_complex(np.random.default_rng(seed), max_faces=max_faces, max_edges=max_edges)


@pytest.fixture
def ball():
    return beach_ball()


@pytest.fixture
def ball_path():
    return DATA / "beach_ball.json"


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for n in sorted(results):
            terminalreporter.write_line(results[n])
