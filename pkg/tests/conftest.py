import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from nswr.bench import ExperimentConfig, run_experiment
from nswr.core import Ranking
from nswr.oracle import NoiseParams, make_noisy_tournament

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

# acceptance label -> (outcome, detail), filled as acceptance tests finish
_ACCEPTANCE: dict[str, tuple[str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(label): numbered acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None or not (rep.when == "call" or rep.failed):
        return
    detail = dict(item.user_properties).get("detail", "")
    _ACCEPTANCE[marker.args[0]] = ("PASS" if rep.passed else "FAIL", detail)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for label in sorted(_ACCEPTANCE, key=lambda s: int(s.split()[0])):
        status, detail = _ACCEPTANCE[label]
        line = f"{status} {label}"
        terminalreporter.write_line(f"{line}: {detail}" if detail else line)


def random_table(n: int, seed: int, gamma: float = 0.25):
    """A noisy tournament over a seeded random truth; returns ``(pi, q)``."""
    pi = Ranking(np.random.default_rng(seed).permutation(n))
    return pi, make_noisy_tournament(pi, NoiseParams(gamma, seed))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def insertion_sweep():
    """20 seeded insertion trials at each of n = 250, 500, 1000 with gamma = 0.25."""
    return run_experiment(ExperimentConfig(n=[250, 500, 1000], gamma=[0.25], trials=20, algorithm="insertion", seed=0))
