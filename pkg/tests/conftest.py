import numpy as np
import pytest

from lplab.functions import GridFunction
from lplab.numerics import Box, Grid

ACCEPTANCE_LINES = []


def indicator_fn(lo, hi, points=129, height=1.0):
    return GridFunction(
        Grid(Box((lo,), (hi,)), points),
        np.full(points, float(height)),
    )


def tent_fn(lo, hi, points=129, height=1.0, box=None):
    box = box or Box((lo,), (hi,))
    c, w = (lo + hi) / 2, (hi - lo) / 2
    return GridFunction.sample(lambda x: height * np.maximum(0.0, 1 - np.abs(x[:, 0] - c) / w), box, points)


@pytest.fixture
def unit_indicator():
    return indicator_fn(0.0, 1.0)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
