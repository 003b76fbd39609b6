import numpy as np
import pytest

from idsgame.exposure import SocialState, exposure
from idsgame.model import DegreeDistribution, power_law, table_one, table_two
from idsgame.poa import bound_applies, e_max, poa, poa_bound

from conftest import random_suite


def test_e_max_single_hop():
    p = table_one(k=1, beta_ia=0.4, p_u=0.9, p_p=0.1)
    assert e_max(p, power_law(0.5, 20)) == pytest.approx(0.36)


@pytest.mark.parametrize("k", [1, 4, 10])
def test_e_max_single_degree(k):
    p = table_one(k=k)
    assert e_max(p, DegreeDistribution([1.0])) == pytest.approx(p.beta_ia * p.p_u)


def test_e_max_equals_unprotected_exposure(suite):
    for p, dist in suite:
        e0 = exposure(SocialState.unprotected(dist), p)
        assert e_max(p, dist) == pytest.approx(e0, rel=1e-12, abs=1e-12)


def test_bound_formula():
    p = table_two()
    dist = power_law(1.0, 20)
    assert poa_bound(p, dist) == 1 + dist.d_avg * e_max(p, dist)


def test_ratio_one_without_protection():
    rep = poa(table_one(c_p=1e9), power_law(1, 20))
    assert rep.ne.protected_mass == 0 and rep.opt.protected_mass == 0
    assert rep.ratio == pytest.approx(1.0, abs=1e-12)


def test_ratio_one_with_full_protection():
    p = table_one(l_u=1e5 + 10)
    rep = poa(p, power_law(1, 20))
    assert rep.ne.protected_mass == pytest.approx(1.0)
    assert rep.ratio == pytest.approx(1.0, abs=1e-12)


def test_ratio_at_least_one(suite):
    for p, dist in suite[:100]:
        assert poa(p, dist).ratio >= 1 - 1e-9


def test_bound_holds_when_applicable():
    rng = np.random.default_rng(12)
    checked = 0
    for p, dist in random_suite(400, seed=31):
        if not bound_applies(p):
            continue
        rep = poa(p, dist)
        assert rep.bound_applicable
        assert rep.ratio <= rep.bound + 1e-9
        checked += 1
        if checked == 200:
            break
    assert checked == 200


def test_table_two_sweep():
    p = table_two()
    assert bound_applies(p)  # c_p = 88 >= 90 * 0.9 = 81
    davg, ratios, bounds = [], [], []
    for alpha in np.arange(0.0, 3.01, 0.25):
        dist = power_law(alpha, 20)
        rep = poa(p, dist)
        assert rep.ratio <= rep.bound + 1e-9
        davg.append(dist.d_avg)
        ratios.append(rep.ratio)
        bounds.append(rep.bound)
    # increasing alpha lowers the average degree
    order = np.argsort(davg)
    r, b, x = np.array(ratios)[order], np.array(bounds)[order], np.array(davg)[order]
    assert np.all(np.diff(r) > 0)
    assert np.all(np.diff(b) > 0)
    assert np.all(np.diff(np.diff(b) / np.diff(x)) > 0)
