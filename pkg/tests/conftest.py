import numpy as np
import pytest

from gasfold.family import SolutionFamily
from gasfold.singularity import caustic, shock_fronts
from gasfold.thermo import IdealGasParams, homentropic_reduce, ideal_gas_model, power_law_model

PSTAR = dict(lam=1.0, alpha0=1.0, alpha2=-2.0, t0=1.0, x0=0.0)


@pytest.fixture(scope="session")
def pl_model():
    return power_law_model(1.0, -2.0 / 3.0)


@pytest.fixture(scope="session")
def pstar(pl_model):
    return SolutionFamily(hm=pl_model, **PSTAR)


@pytest.fixture(scope="session")
def ideal3():
    return ideal_gas_model(IdealGasParams(3))


@pytest.fixture(scope="session")
def ideal3_hm(ideal3):
    return homentropic_reduce(ideal3, 0.0)


@pytest.fixture(scope="session")
def pstar_fronts(pstar):
    return shock_fronts(pstar)


@pytest.fixture(scope="session")
def pstar_caustics(pstar):
    return {b: caustic(pstar, None, b) for b in ("plus", "minus")}


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240917)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance") or __import__("sys").modules.get("tests.test_acceptance")
    lines = getattr(mod, "REPORT", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
