import numpy as np
import pytest

from idsgame.equilibrium import ThresholdProfile, solve_ne
from idsgame.exposure import SocialState, exposure
from idsgame.model import DegreeDistribution, InvalidParameters, power_law, table_one, table_two
from idsgame.optimum import (
    SpAction,
    _exposure_gradient,
    social_cost,
    social_cost_derivative,
    social_cost_of_state,
    solve_opt,
)
from idsgame.poa import e_max

from conftest import random_suite
from oracles import brute_force_opt, social_cost_loop, threshold_vector


def central_difference(f, y, i, h=1e-6):
    up, down = y.copy(), y.copy()
    up[i] += h
    down[i] -= h
    return (f(up) - f(down)) / (2 * h)


def test_zero_protection_cost():
    p = table_one(k=4)
    dist = power_law(0.8, 20)
    assert p.p_u == 1.0
    sc = social_cost(SpAction(dist, np.zeros(20)), p)
    assert sc == pytest.approx(p.tau_da * p.l_u * (1 + dist.d_avg * e_max(p, dist)), rel=1e-13)


def test_full_protection_cost():
    p = table_one(k=4)
    dist = power_law(0.8, 20)
    assert p.p_p == 0.0
    assert social_cost(SpAction(dist, dist.m), p) == pytest.approx(p.tau_da * p.l_p + p.c_p)


def test_table_two_threshold_cost_matches_frozen_summation():
    dist = power_law(1.0, 20)
    p = table_two()
    y = ThresholdProfile(10, 0.0).protected(dist)
    sc = social_cost(SpAction(dist, y), p)
    assert sc == pytest.approx(social_cost_loop(list(dist.m), list(y), p), rel=1e-12)
    assert sc == pytest.approx(102.93106478002959, rel=1e-12)


def test_derivative_matches_finite_differences():
    rng = np.random.default_rng(17)
    for p, dist in random_suite(40, seed=5):
        y = rng.uniform(0.05, 0.95, dist.d_max) * dist.m
        act = SpAction(dist, y)

        def sc(v):
            return social_cost(SpAction(dist, v), p)

        for d in range(1, dist.d_max + 1):
            if dist.m[d - 1] < 1e-5:
                continue
            fd = central_difference(sc, y, d - 1)
            for direction in ("up", "down"):
                an = social_cost_derivative(act, p, d, direction)
                assert abs(fd - an) <= 1e-5 * max(abs(an), 1.0)


def test_single_degree_exposure_gradient():
    p = table_one(k=6)
    dist = DegreeDistribution([1.0])
    grad = _exposure_gradient(dist, np.array([0.3]), p, 1)
    assert grad == pytest.approx(-p.beta_ia * p.delta_p / dist.d_avg)

    def e_of(v):
        return exposure(SocialState.from_protected(dist, v), p)

    assert central_difference(e_of, np.array([0.3]), 0) == pytest.approx(grad, rel=1e-7)


def test_derivative_rejects_bad_direction():
    dist = power_law(1, 5)
    p = table_one()
    with pytest.raises(InvalidParameters):
        social_cost_derivative(SpAction(dist, dist.m), p, 2, "up")
    with pytest.raises(InvalidParameters):
        social_cost_derivative(SpAction(dist, np.zeros(5)), p, 2, "down")
    with pytest.raises(InvalidParameters):
        social_cost_derivative(SpAction(dist, np.zeros(5)), p, 2, "sideways")
    with pytest.raises(InvalidParameters):
        SpAction(dist, dist.m * 1.5)


def test_prohibitive_cost_gives_no_protection():
    res = solve_opt(table_one(c_p=1e9), power_law(1, 20))
    assert res.protected_mass == 0.0
    assert res.d_dagger == 21


def test_huge_loss_gap_gives_full_protection():
    p = table_one(l_u=1e5 + 10)
    dist = power_law(1, 20)
    res = solve_opt(p, dist)
    np.testing.assert_allclose(res.y, dist.m, atol=1e-12)
    assert res.d_dagger == 1


def test_frozen_optimum_table_one_alpha_12_k5():
    # Frozen from brute_force_opt on a 10^4-point t grid
    res = solve_opt(table_one(k=5), power_law(1.2, 20))
    assert res.d_dagger == 4  # degree 4 protects fully: t sits at m_4
    assert res.y[3] == pytest.approx(0.06627472156, abs=1e-4)
    assert res.protected_mass == pytest.approx(0.40434090831, abs=1e-4)
    assert res.social_cost == pytest.approx(206.970812438726, rel=1e-9)


def test_optimum_against_live_grid_oracle():
    for p, dist in random_suite(25, seed=41):
        res = solve_opt(p, dist)
        y, sc = brute_force_opt(dist.m, p, points=1000)
        assert res.social_cost <= sc + 1e-9
        assert np.abs(res.y - y).max() < 1e-2


@pytest.mark.parametrize("alpha, k", [(0.5, 5), (3.0, 1), (1.5, 2)])
def test_first_order_condition_at_interior_optimum(alpha, k):
    res = solve_opt(table_one(k=k), power_law(alpha, 20))
    ds = res.d_dagger
    assert 0 < res.y[ds - 1] < res.action.dist.m[ds - 1]
    for direction in ("up", "down"):
        assert abs(social_cost_derivative(res.action, table_one(k=k), ds, direction)) < 1e-6


def test_two_social_cost_forms_agree(suite):
    for p, dist in suite[:80]:
        ne = solve_ne(p, dist)
        a = social_cost_of_state(ne.state, p)
        b = social_cost(SpAction(dist, ne.protected), p)
        assert a == pytest.approx(b, rel=1e-12, abs=1e-9)


def test_threshold_structure_and_optimality_certificate(suite):
    rng = np.random.default_rng(23)
    for p, dist in suite[:50]:
        res = solve_opt(p, dist)
        ds = res.d_dagger
        if ds <= dist.d_max:
            np.testing.assert_array_equal(res.y[ds:], dist.m[ds:])
            assert np.all(res.y[: ds - 1] == 0)
        for _ in range(100):
            y = rng.uniform(0, 1, dist.d_max) * dist.m
            assert res.social_cost <= social_cost(SpAction(dist, y), p) + 1e-9


def test_optimum_protects_at_least_the_equilibrium(suite):
    for p, dist in suite:
        assert solve_opt(p, dist).protected_mass >= solve_ne(p, dist).protected_mass - 1e-9


def test_threshold_vector_oracle_agrees_with_profile():
    dist = power_law(0.4, 12)
    for ds, t in [(13, 0.0), (5, 0.01), (1, dist.m[0])]:
        np.testing.assert_allclose(
            ThresholdProfile(ds, t).protected(dist), threshold_vector(list(dist.m), ds, t)
        )
