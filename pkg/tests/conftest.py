import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from sphereforge.geometry.shapes import box_bounds, capsule, icosphere, plate, torus, unit_cube  # noqa: E402

DATA = os.path.join(os.path.dirname(__file__), "data")
URDF_DIR = os.path.join(DATA, "urdf")
PACKAGES = os.path.join(DATA, "packages")
URDF_CORPUS = sorted(os.path.join(URDF_DIR, f) for f in os.listdir(URDF_DIR) if f.endswith(".urdf"))


def shape_corpus():
    """The five shapes used across the spherization checks."""
    return {
        "cube": unit_cube(),
        "icosphere": icosphere(3),
        "capsule": capsule(0.2, 1.0, 32, 8),
        "plate": plate((1.0, 1.0, 0.1)),
        "torus": torus(),
    }


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def shapes():
    return shape_corpus()


@pytest.fixture
def cube():
    return box_bounds((0, 0, 0), (1, 1, 1))


# one line per acceptance criterion, printed at the end of the run
ACCEPTANCE = {}


@pytest.fixture
def criterion(request):
    """Call with ``(number, passed, detail)`` to record a verdict line."""

    def record(number, passed, detail):
        ACCEPTANCE[number] = (bool(passed), detail)
        return passed

    return record


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    num = getattr(item.function, "criterion_number", None)
    if num is not None and rep.when == "call" and rep.failed:
        ok, detail = ACCEPTANCE.get(num, (True, ""))
        if ok:
            # an assertion or error after a passing record still fails the criterion
            name = call.excinfo.typename if call.excinfo else "error"
            ACCEPTANCE[num] = (False, f"{detail} [{name}]".strip())


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[num]
        terminalreporter.write_line(f"C{num:<2} {'PASS' if ok else 'FAIL'}  {detail}")
