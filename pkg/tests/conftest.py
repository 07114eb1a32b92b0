import numpy as np
import pytest

from diagsym import load_example, new_table

TABLE1 = [
    [36, 16, 7, 7],
    [74, 96, 22, 4],
    [119, 174, 48, 4],
    [127, 93, 26, 18],
]

# Published DPS and DGS fitted values for the stem-cell table, to 2 decimals.
DPS_TABLE1 = [
    [36.00, 11.96, 6.22, 7.00],
    [78.04, 96.00, 26.05, 4.78],
    [119.78, 169.95, 48.00, 3.99],
    [127.00, 92.22, 26.01, 18.00],
]
DGS_TABLE1 = [
    [36.00, 60.19, 70.95, 67.00],
    [42.67, 96.00, 82.76, 40.55],
    [62.59, 100.34, 48.00, 15.05],
    [67.00, 48.91, 14.99, 18.00],
]


@pytest.fixture
def table1():
    return new_table(TABLE1)


@pytest.fixture
def stemcell():
    return load_example("stemcell")


def random_table(rng, r, low=1.0, high=60.0):
    """Strictly positive real-valued r x r table."""
    return new_table(rng.uniform(low, high, size=(r, r)))


def random_dps_probs(rng, r):
    """Probability table with the DPS structure pi_ij = d_k psi_ij above the diagonal."""
    a = rng.uniform(0.2, 2.0, size=(r, r))
    psi = a + a.T
    d = np.exp(rng.uniform(-2.0, 2.0, size=r - 1))
    p = psi.copy()
    for k in range(1, r):
        for i in range(r - k):
            p[i, i + k] *= d[k - 1]
    return p / p.sum(), d


# -- acceptance reporting ---------------------------------------------------

ACCEPTANCE_LINES = []


@pytest.fixture
def criterion(request):
    """Record a one-line PASS/FAIL verdict for an acceptance criterion."""
    marker = request.node.get_closest_marker("criterion")
    label = marker.args[0] if marker else request.node.name
    detail = {}
    yield detail
    failed = getattr(request.node, "rep_call", None)
    status = "FAIL" if failed is None or failed.failed else "PASS"
    extra = "; ".join(f"{k}={v}" for k, v in detail.items())
    ACCEPTANCE_LINES.append(f"[{status}] {label}" + (f" ({extra})" if extra else ""))


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.rep_call = rep


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(label): acceptance criterion label")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
