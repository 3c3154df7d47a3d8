import numpy as np
import pytest

from wvtune.core_stats import GaussianClassModel, LabeledDataset


def random_spd(rng, p, floor=0.1):
    a = rng.standard_normal((p, p))
    return a @ a.T / p + floor * np.eye(p)


def random_model(rng, p, common=True, pi0=0.5):
    mu0 = rng.standard_normal(p)
    mu1 = rng.standard_normal(p)
    s0 = random_spd(rng, p)
    s1 = s0 if common else random_spd(rng, p)
    return GaussianClassModel(mu0, mu1, s0, s1, pi0, 1 - pi0)


def one_d(x0, x1):
    return LabeledDataset(np.array([x0], dtype=float), np.array([x1], dtype=float))


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])
