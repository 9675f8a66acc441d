import math

import numpy as np
import pytest

from hsclab.model import ModelParams, table1_params

#: one line per acceptance criterion, echoed into the terminal summary
ACCEPTANCE_LINES: list[str] = []


def record_criterion(cid: str, ok: bool, detail: str):
    status = "PASS" if ok else "FAIL"
    line = f"[{status}] {cid}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("-", "acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def printed_tol(ref: float, sf: int, ulps: float = 1.02) -> float:
    """Tolerance for comparing against a value printed with ``sf``
    significant figures.  Printed tables round *or truncate*, so one unit of
    the last printed digit (plus float fuzz) is the faithful uncertainty."""
    place = math.floor(math.log10(abs(ref))) - (sf - 1)
    return ulps * 10.0**place


def assert_printed(x: float, ref: float, sf: int, label: str = ""):
    tol = printed_tol(ref, sf)
    assert abs(x - ref) <= tol, \
        f"{label or 'value'}: {x!r} vs printed {ref!r} ({sf} s.f., tol {tol:.2e})"


def random_valid_params(rng: np.random.Generator) -> ModelParams:
    """A parameter set satisfying the existence bounds for the nontrivial
    steady state (used by the property-test ensembles)."""
    f = 10.0 ** rng.uniform(0.0, 1.3)
    theta = 10.0 ** rng.uniform(-2.0, 0.0)
    s = rng.uniform(1.2, 4.0)
    gamma = 10.0 ** rng.uniform(-2.0, -0.5)
    tau = rng.uniform(0.5, 8.0)
    # keep the amplification above 1 so the nontrivial state can exist
    if gamma * tau >= 0.9 * math.log(2.0):
        tau = 0.9 * math.log(2.0) / gamma
    a = 2.0 * math.exp(-gamma * tau)
    kappa = rng.uniform(0.02, 0.9) * f * (a - 1.0)
    return ModelParams(kappa=kappa, gamma=gamma, tau=tau, theta=theta, f=f, s=s)


@pytest.fixture(scope="session")
def table1():
    return table1_params()


@pytest.fixture(scope="session")
def canard_params():
    return table1_params().with_(gamma=0.2453692)
