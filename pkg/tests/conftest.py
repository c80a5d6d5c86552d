import numpy as np
import pytest

from msburden import ArmDataset, StateSpace


def random_arm(rng, k, n, arm=1, censor=True, ties=True):
    """A valid random arm: progressive times, optional ties and censoring."""
    m = k + 1
    if ties:
        gaps = rng.integers(0, 3, size=(n, m)).astype(float)
    else:
        gaps = rng.exponential(1.0, size=(n, m))
    times = np.cumsum(gaps, axis=1) + (rng.integers(1, 3, size=(n, 1)) if ties else 0.0)
    if censor:
        if ties:
            cens = rng.integers(0, 10, size=n).astype(float)
        else:
            cens = rng.exponential(3.0, size=n)
        cens[rng.random(n) < 0.3] = np.inf
    else:
        cens = np.full(n, np.inf)
    delta = (times <= cens[:, None]).astype(int)
    x = np.where(delta == 1, times, cens[:, None])
    return ArmDataset(arm, x, delta, StateSpace.default(k))


def random_pair(rng, k=None, n=None, **kw):
    k = int(rng.integers(0, 5)) if k is None else k
    n1 = int(rng.integers(1, 25)) if n is None else n
    n0 = int(rng.integers(1, 25)) if n is None else n
    return random_arm(rng, k, n1, 1, **kw), random_arm(rng, k, n0, 0, **kw)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def five_labels():
    return ("40% decline", "50% decline", "57% decline", "ESRD", "death")


_ACCEPTANCE = []


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        detail = "; ".join(str(v) for k, v in report.user_properties if k == "detail")
        name = report.nodeid.split("::")[-1]
        _ACCEPTANCE.append((name, report.outcome, detail))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome, detail in _ACCEPTANCE:
        verdict = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"{verdict}  {name}  {detail}")
