import numpy as np
import pandas as pd
import pytest

_acceptance = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, text): exit criterion")


def pytest_runtest_logreport(report):
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        crit = getattr(report, "_criterion", None)
        if crit is not None:
            _acceptance[crit] = report.outcome


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is not None:
        report._criterion = (marker.args[0], marker.args[1])


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for (num, text), outcome in sorted(_acceptance.items()):
        tag = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}[outcome]
        terminalreporter.write_line(f"[{tag}] {num:>2}. {text}")


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def make_panel(rng, n_groups=4, n_times=12, beta=(1.5, -0.5), n_inst=2, endog=0.0):
    """Small balanced panel with group effects and an instrumented regressor."""
    groups = np.repeat(np.arange(n_groups), n_times)
    times = np.tile(np.arange(n_times), n_groups)
    n = groups.size
    fe = rng.normal(size=n_groups)[groups]
    Zx = rng.normal(size=(n, n_inst))
    u = rng.normal(size=n)
    w = rng.normal(size=n)
    x_endog = Zx @ np.linspace(1.0, 0.5, n_inst) + endog * u + 0.5 * rng.normal(size=n) + fe
    X = np.column_stack([x_endog, w])
    Z = np.column_stack([Zx, w])
    y = X @ np.asarray(beta) + 2.0 * fe + u
    return y, X, Z, groups, times


@pytest.fixture
def toy_panel(rng):
    return make_panel(rng)


def frame_from_arrays(y, X, Z, groups, times):
    return pd.DataFrame(
        {
            "partner": [f"G{g}" for g in groups],
            "month": times,
            "ln_x": y,
            "ln_e": X[:, 0],
            "ln_p_lme": X[:, 1],
            **{f"z{i + 1}": Z[:, i] for i in range(Z.shape[1] - 1)},
        }
    )
