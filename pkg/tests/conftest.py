import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def phase_equal(a, b, tol=1e-9):
    """True when ``a`` and ``b`` agree up to a global phase."""
    from diagsynth.linalg import hs_distance
    return hs_distance(np.asarray(a), np.asarray(b)) <= tol


# --- acceptance verdict lines ---------------------------------------------------

_VERDICTS: list[str] = []


@pytest.fixture
def notes(request):
    """Free-form details a criterion test attaches to its verdict line."""
    request.node.criterion_notes = []
    return request.node.criterion_notes


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or not (rep.when == "call" or (rep.when == "setup" and not rep.passed)):
        return
    status = "PASS" if rep.passed else "SKIP" if rep.skipped else "FAIL"
    label = " ".join(str(a) for a in marker.args)
    detail = "; ".join(getattr(item, "criterion_notes", []))
    if rep.skipped and not detail:
        detail = str(rep.longrepr[-1]).removeprefix("Skipped: ") if isinstance(rep.longrepr, tuple) else ""
    line = f"{status} criterion {label}: {detail}"
    _VERDICTS.append(line)


def pytest_terminal_summary(terminalreporter):
    if _VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in _VERDICTS:
            terminalreporter.write_line(line)
