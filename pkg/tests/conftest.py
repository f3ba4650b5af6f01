"""Shared fixtures: worked-example inputs and a cached canonical design."""

import pytest

from deltans.color import XyzColor, xyz_to_lab
from deltans.dataset import generate_design

# Worked-example tristimulus inputs (D65, 1964 observer) and the white
# point they were measured under.
WORKED_WHITE = (95.78, 100.00, 104.61)
WORKED_XYZ = {
    "S1": (8.90, 9.53, 23.10),
    "P1": (9.21, 9.72, 23.38),
    "S2": (58.26, 64.26, 24.83),
    "P2": (59.10, 64.76, 25.50),
}
# Published outputs at their printed precision.
WORKED_LAB = {
    "S1": (36.99, -1.92, -29.53),
    "P1": (37.34, -0.82, -29.42),
    "S2": (84.10, -7.82, 48.76),
    "P2": (84.36, -6.91, 48.10),
}
WORKED_CHROMA = {"S1": 29.59, "P1": 29.43, "S2": 49.38, "P2": 48.59}
WORKED_DE00 = {"pair1": 0.95, "pair2": 0.61}
WORKED_DL = {"pair1": 0.35, "pair2": 0.32}
WORKED_NS = {"pair1": 1.25, "pair2": 0.80}


@pytest.fixture(scope="session")
def worked_labs():
    return {name: xyz_to_lab(XyzColor(*xyz)) for name, xyz in WORKED_XYZ.items()}


@pytest.fixture(scope="session")
def canonical_design():
    return generate_design()
