import math
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from snhopf.spectral import analyze_kernel, design_kernel


@pytest.fixture(scope="session")
def kernel_p1():
    kernel, _ = design_kernel([1.0], [0.0, -1.0, -2.0])
    return kernel


@pytest.fixture(scope="session")
def data_p1(kernel_p1):
    return analyze_kernel(kernel_p1, expected_omegas=[1.0])


@pytest.fixture(scope="session")
def kernel_p1_generic():
    kernel, _ = design_kernel([1.3], [0.0, -0.9, -1.7])
    return kernel


@pytest.fixture(scope="session")
def data_p1_generic(kernel_p1_generic):
    return analyze_kernel(kernel_p1_generic, expected_omegas=[1.3])


@pytest.fixture(scope="session")
def kernel_p2():
    kernel, _ = design_kernel([1.0, math.sqrt(2.0)],
                              [0.0, -1.0, -2.0, -3.0, -4.0])
    return kernel


@pytest.fixture(scope="session")
def data_p2(kernel_p2):
    return analyze_kernel(kernel_p2,
                          expected_omegas=[1.0, math.sqrt(2.0)])


@pytest.fixture(scope="session")
def models_dir():
    return Path(__file__).resolve().parent.parent / "models"
