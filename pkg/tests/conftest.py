import numpy as np
import pytest

from adaptomo.priors import PriorSpec, sample_states


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def random_states(kind, dim, n, seed):
    return sample_states(PriorSpec(kind, dim), n, np.random.default_rng(seed))


_CRITERIA = {}


def pytest_runtest_logreport(report):
    k = dict(report.user_properties).get("criterion")
    if k is None:
        return
    entry = _CRITERIA.setdefault(k, {"failed": False, "ran": False, "details": []})
    if report.when == "call" or report.failed:
        entry["ran"] = True
        entry["failed"] |= report.failed
    if report.when == "call":
        entry["details"] += [v for name, v in report.user_properties if name == "detail"]


@pytest.fixture(autouse=True)
def _criterion_tag(request):
    marker = request.node.get_closest_marker("criterion")
    if marker is not None:
        request.node.user_properties.append(("criterion", marker.args[0]))


@pytest.fixture
def detail(request):
    """Attach a one-line measurement to the criterion summary."""

    def add(text):
        request.node.user_properties.append(("detail", text))

    return add


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_CRITERIA):
        entry = _CRITERIA[k]
        status = "FAIL" if entry["failed"] else ("PASS" if entry["ran"] else "SKIP")
        terminalreporter.write_line(f"criterion {k}: {status}  " + "; ".join(entry["details"]))
