import sys

import numpy as np
import pytest
from hypothesis import settings

from idsgame.model import ModelParams, poisson, power_law

# fixed example database-free runs, so the suite is reproducible
settings.register_profile("repro", derandomize=True, database=None)
settings.load_profile("repro")


def random_params(rng, k=None, beta=None) -> ModelParams:
    """A parameter draw satisfying assumption 1."""
    p_p = rng.uniform(0.0, 0.3)
    p_u = rng.uniform(p_p + 0.2, 1.0)
    l_u = rng.uniform(50.0, 200.0)
    xi = rng.uniform(0.2, 0.9)
    l_p = rng.uniform(0.05, 0.95) * (1.0 - xi) * l_u
    c_i = rng.uniform(5.0, 80.0)
    ded = rng.uniform(0.0, 40.0)
    c_p = c_i + ded + rng.uniform(1.0, 300.0)
    return ModelParams(
        tau_da=rng.uniform(0.3, 1.0), p_p=p_p, p_u=p_u, l_p=l_p, l_u=l_u, c_p=c_p,
        c_i=c_i, ded=ded, xi_cov=xi, cov_max=rng.uniform(100.0, 1000.0),
        beta_ia=beta if beta is not None else rng.uniform(0.05, 1.0),
        k=k if k is not None else int(rng.integers(1, 11)),
    )


def random_dist(rng, d_max=None):
    d_max = d_max or int(rng.integers(5, 21))
    if rng.random() < 0.5:
        return power_law(rng.uniform(0.0, 3.0), d_max)
    return poisson(rng.uniform(1.1, 10.6), d_max)


def random_suite(n=200, seed=20240601):
    rng = np.random.default_rng(seed)
    return [(random_params(rng), random_dist(rng)) for _ in range(n)]


@pytest.fixture(scope="session")
def suite():
    return random_suite()


def pytest_terminal_summary(terminalreporter):
    acceptance = sys.modules.get("test_acceptance")
    lines = getattr(acceptance, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
