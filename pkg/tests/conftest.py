import math

import numpy as np
import pytest

from measurement_uncertainty.linalg import PAULI_X, PAULI_Z, basis_state, bloch_state
from measurement_uncertainty.measurement import Scenario, builtin_cnot_model, identity_model

PLUS_Y = bloch_state(math.pi / 2, math.pi / 2)


@pytest.fixture
def s1():
    return Scenario(builtin_cnot_model(0, 0), PAULI_Z, PAULI_X, PLUS_Y)


@pytest.fixture
def trivial():
    """No coupling, A = B = meter = sigma_z, psi = xi = |0>."""
    return Scenario(identity_model(2, PAULI_Z, basis_state(2, 0)), PAULI_Z, PAULI_Z,
                    basis_state(2, 0))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    module = __import__("sys").modules.get("test_acceptance")
    results = getattr(module, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(results, key=lambda k: int(k.split(".")[0])):
        ok, line = results[key]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {key} {line}")
