import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from qkmeans import _kernels  # noqa: E402
from qkmeans.data import fit_scale, load_builtin  # noqa: E402


@pytest.fixture(params=sorted(_kernels.BACKENDS))
def backend(request):
    """Run the test once per available simulation backend."""
    before = _kernels.name
    _kernels.set_backend(request.param)
    yield request.param
    _kernels.set_backend(before)


@pytest.fixture(scope="session")
def iris():
    return load_builtin("iris")


@pytest.fixture(scope="session")
def iris_angles(iris):
    scaled, _ = fit_scale(iris, "standard_then_minmax", 0.0, np.pi)
    return scaled


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[number])
