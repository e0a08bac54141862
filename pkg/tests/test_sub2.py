"""Uplink stage: power law, duration bounds, threshold rule, golden oracle."""

import dataclasses
import math

import numpy as np
import pytest

from _oracles import golden_tau
from fedl_lab.wireless.profiles import SystemParams, UEProfile, sample_instance
from fedl_lab.wireless.uplink import (
    energy_co,
    g_fn,
    g_inv,
    power_of_tau,
    solve_sub2,
    solve_tau,
    tau_bounds,
)


def _sys(kappa=0.5, n=1):
    return SystemParams(B=1e6, N0=1e-10, kappa=kappa, N=n)


def _ue(hbar=1e-6, p_min=0.2, p_max=1.0, s=25000.0):
    return UEProfile(c_n=20.0, D_n=6e7, alpha_n=2e-28, f_min=3e8, f_max=1.5e9,
                     hbar_n=hbar, p_min=p_min, p_max=p_max, s_n=s)


def test_power_limits_and_pinned_point():
    ue, sys = _ue(), _sys()
    assert power_of_tau(ue, sys, 1e9) < 1e-12
    # unit nats-per-symbol point: tau = s/B makes the exponent exactly one
    assert power_of_tau(ue, sys, 0.025) == pytest.approx(
        sys.N0 / ue.hbar_n * (math.e - 1.0), rel=1e-12)
    tau_at_pmax = ue.s_n / (sys.B * math.log1p(ue.hbar_n / sys.N0 * ue.p_max))
    assert power_of_tau(ue, sys, tau_at_pmax) == pytest.approx(ue.p_max, rel=1e-9)
    with pytest.raises(ValueError):
        power_of_tau(ue, sys, 0.0)


def test_tau_bounds_invert_power_limits():
    for seed in range(10):
        ues, sys = sample_instance(5, seed=seed)
        for ue in ues:
            lo, hi = tau_bounds(ue, sys)
            assert 0 < lo < hi
            assert power_of_tau(ue, sys, lo) == pytest.approx(ue.p_max, rel=1e-9)
            assert power_of_tau(ue, sys, hi) == pytest.approx(ue.p_min, rel=1e-9)


def test_tau_bounds_degenerate_power_window():
    ue = _ue(p_min=0.7, p_max=0.7)
    lo, hi = tau_bounds(ue, _sys())
    assert lo == pytest.approx(hi, rel=1e-12)


def test_tau_bound_log_identity():
    sys = _sys()
    # channel chosen so hbar/N0 * p_max + 1 = e, hence tau_min = s/B
    ue = _ue(hbar=(math.e - 1.0) * sys.N0, p_max=1.0)
    lo, _ = tau_bounds(ue, sys)
    assert lo == pytest.approx(ue.s_n / sys.B, rel=1e-12)


def test_g_fn_unit_argument():
    sys = _sys()
    ue = _ue()
    kappa = sys.N0 / ue.hbar_n  # makes kappa * hbar / N0 = 1, W(0) = 0
    assert g_fn(ue, sys, kappa) == pytest.approx(ue.s_n / sys.B, rel=1e-12)


def test_g_fn_strictly_decreasing():
    ue, sys = _ue(), _sys()
    kappas = np.geomspace(1e-8, 1e3, 100)
    vals = [g_fn(ue, sys, float(k)) for k in kappas]
    assert all(b < a for a, b in zip(vals, vals[1:]))


def test_g_inverse_pair():
    ue, sys = _ue(), _sys()
    for kappa in np.geomspace(1e-6, 1e2, 40):
        assert g_inv(ue, sys, g_fn(ue, sys, float(kappa))) == pytest.approx(
            float(kappa), rel=1e-9)
    lo, hi = tau_bounds(ue, sys)
    for tau in np.geomspace(lo, hi, 40):
        assert g_fn(ue, sys, g_inv(ue, sys, float(tau))) == pytest.approx(
            float(tau), rel=1e-9)


def test_threshold_cases():
    ue, sys = _ue(), _sys()
    lo, hi = tau_bounds(ue, sys)
    assert solve_tau(ue, sys, 0.5 * g_inv(ue, sys, hi)) == pytest.approx(hi, rel=1e-15)
    assert solve_tau(ue, sys, 2.0 * g_inv(ue, sys, lo)) == pytest.approx(lo, rel=1e-15)
    mid_kappa = g_inv(ue, sys, 0.5 * (lo + hi))
    tau = solve_tau(ue, sys, mid_kappa)
    assert lo < tau < hi
    assert g_inv(ue, sys, tau) == pytest.approx(mid_kappa, rel=1e-9)


def test_interior_solution_matches_golden_section():
    count = 0
    for seed in range(12):
        ues, sys = sample_instance(5, seed=seed)
        for ue in ues:
            for kappa in (1e-4, 0.01, 0.5, 10.0):
                got = solve_tau(ue, sys, kappa)
                ref = golden_tau(ue, sys, kappa)
                assert abs(got - ref) <= 1e-8
                count += 1
    assert count == 240


def test_tau_never_beats_grid_on_objective():
    ue, sys = _ue(), _sys()
    for kappa in (0.001, 0.1, 2.0):
        tau = solve_tau(ue, sys, kappa)
        best = energy_co(ue, sys, tau) + kappa * tau
        lo, hi = tau_bounds(ue, sys)
        for t in np.linspace(lo, hi, 400):
            assert best <= energy_co(ue, sys, float(t)) + kappa * float(t) + 1e-12


def test_tau_monotone_in_kappa():
    ue, sys = _ue(), _sys()
    kappas = np.geomspace(1e-6, 1e3, 60)
    taus = [solve_tau(ue, sys, float(k)) for k in kappas]
    assert all(b <= a + 1e-15 for a, b in zip(taus, taus[1:]))


def test_solve_sub2_aggregates():
    ues, sys = sample_instance(5, seed=2, kappa=0.7)
    sol = solve_sub2(ues, sys)
    assert sol.tau_star.shape == (5,)
    assert sol.T_co_star == pytest.approx(float(sol.tau_star.sum()), rel=1e-12)
    for n, ue in enumerate(ues):
        assert sol.energy_co[n] == pytest.approx(
            energy_co(ue, sys, float(sol.tau_star[n])), rel=1e-12)
    expect = float(sol.energy_co.sum()) + sys.kappa * sol.T_co_star
    assert sol.objective == pytest.approx(expect, rel=1e-12)


def test_energy_is_duration_times_power():
    ue, sys = _ue(), _sys()
    for tau in (0.01, 0.05, 0.2):
        assert energy_co(ue, sys, tau) == pytest.approx(
            tau * power_of_tau(ue, sys, tau), rel=1e-15)
