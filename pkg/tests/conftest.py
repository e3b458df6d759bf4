"""Shared fixtures: golden evaluation points and default quadrature"""

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from cvk.core.numerics import QuadratureSettings
from cvk.kernels.confluent import ConfluentParams
from cvk.kernels.fusion import FusionParams


@pytest.fixture
def qs():
    return QuadratureSettings()


@pytest.fixture
def golden_fusion():
    return FusionParams.create(0.7, 0.3, -0.2, 0.5, 0.1, 0.4, 0.6)


@pytest.fixture(params=[1, 2])
def golden_confluent(request):
    return ConfluentParams.create(0.7, 0.3, -0.2, 0.4, 0.25, 0.35, k=request.param)


def pytest_addoption(parser):
    parser.addoption("--regen-golden", action="store_true", default=False,
                     help="record kernel values into tests/fixtures/golden_*.json instead of comparing")


@pytest.fixture
def regen_golden(request):
    return request.config.getoption("--regen-golden")
