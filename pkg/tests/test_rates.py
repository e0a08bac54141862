"""Contraction-rate formula and round-count calculators."""

import math

import numpy as np
import pytest

from conftest import RATE_TABLE
from fedl_lab.rates import LocalSolverConstants, k_g, k_l, theta_rate


@pytest.mark.parametrize("args,expected", RATE_TABLE)
def test_rate_table_values(args, expected):
    assert theta_rate(*args) == pytest.approx(expected, abs=2e-3)


def test_rate_vanishes_with_eta():
    assert abs(theta_rate(0.1, 1e-9, 2.0)) < 1e-8


def test_rate_formula_spot_check():
    # direct transcription evaluated independently
    theta, eta, rho = 0.2, 0.4, 1.5
    num = eta * (2 * (theta - 1) ** 2
                 - (theta + 1) * theta * (3 * eta + 2) * rho**2
                 - (theta + 1) * eta * rho**2)
    den = 2 * rho * ((1 + theta) ** 2 * eta**2 * rho**2 + 1)
    assert theta_rate(theta, eta, rho) == pytest.approx(num / den, rel=1e-14)


def test_rate_broadcasts():
    thetas = np.array([0.01, 0.05, 0.2])
    etas = np.array([0.1, 0.3])
    grid = theta_rate(thetas[:, None], etas[None, :], 2.0)
    assert grid.shape == (3, 2)
    for i, th in enumerate(thetas):
        for j, et in enumerate(etas):
            assert grid[i, j] == pytest.approx(theta_rate(float(th), float(et), 2.0), rel=1e-14)


def test_rate_can_go_negative():
    assert theta_rate(0.5, 5.0, 2.0) < 0.0


def test_rate_rejects_bad_rho():
    with pytest.raises(ValueError):
        theta_rate(0.1, 0.1, 0.5)


def test_gd_constants():
    consts = LocalSolverConstants.for_gradient_descent(3.0)
    assert consts.c == 1.0
    assert consts.gamma == pytest.approx(1.0 / 3.0, rel=1e-15)
    assert consts.C == 3.0
    with pytest.raises(ValueError):
        LocalSolverConstants(c=1.0, gamma=1.5, C=1.0)
    with pytest.raises(ValueError):
        LocalSolverConstants(c=1.0, gamma=0.5, C=-1.0)


def test_local_round_count():
    consts = LocalSolverConstants(c=1.0, gamma=0.5, C=10.0)
    assert k_l(10.0, consts) == pytest.approx(0.0, abs=1e-15)
    assert k_l(0.1, consts) == pytest.approx(4.0 * math.log(100.0), rel=1e-12)
    # halving theta adds exactly (2/gamma) ln 2
    delta = k_l(0.05, consts) - k_l(0.1, consts)
    assert delta == pytest.approx(4.0 * math.log(2.0), rel=1e-12)
    with pytest.raises(ValueError):
        k_l(0.0, consts)


def test_global_round_count():
    assert k_g(0.1, math.e, 1.0) == pytest.approx(10.0, rel=1e-12)
    assert k_g(0.5, 7.0, 7.0) == 0.0
    assert k_g(0.041, 100.0, 1.0) == pytest.approx(112.3, abs=0.1)
    with pytest.raises(ValueError):
        k_g(0.0, 10.0, 1.0)
    with pytest.raises(ValueError):
        k_g(0.1, 1.0, 10.0)
