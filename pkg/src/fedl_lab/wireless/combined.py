"""End-to-end resource allocation: chain the three subproblems.

The CPU and uplink subproblems are independent of the learning knobs, so the
full solve runs them once, then tunes (theta, eta) on top of their costs.
``pareto_sweep`` repeats the chain over a grid of time weights to map the
energy/time frontier.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from ..rates import LocalSolverConstants, k_l
from .cpu import KappaRegion, Sub1Solution, classify_kappa, solve_sub1
from .profiles import SystemParams, UEProfile
from .tuning import Sub3Solution, solve_sub3
from .uplink import Sub2Solution, solve_sub2, tau_bounds

THREADS_ENV = "FEDL_LAB_THREADS"


@dataclass(frozen=True)
class AllocationSolution:
    """Everything the caller needs from one full allocation solve."""

    sub1: Sub1Solution
    sub2: Sub2Solution
    sub3: Sub3Solution
    region: KappaRegion
    K_l: float          # local iterations per round at theta_star
    K_g: float          # global rounds for the requested gap reduction
    E_g: float          # J per round
    T_g: float          # s per round
    total_energy: float  # K_g * E_g
    total_time: float    # K_g * T_g
    objective: float     # K_g * (E_g + kappa * T_g)
    kappa: float
    rho: float


@dataclass(frozen=True)
class ParetoPoint:
    kappa: float
    total_time: float
    total_energy: float


def solve_fedl_alloc(
    ues: list[UEProfile],
    sys: SystemParams,
    consts: LocalSolverConstants,
    rho: float,
    *,
    gap_ratio: float = math.e,
) -> AllocationSolution:
    """Solve the whole allocation at ``sys.kappa``.

    ``gap_ratio`` is the initial-to-target loss-gap ratio that sizes the
    round count; the default e makes the round count exactly 1/Theta.
    """
    if gap_ratio <= 1.0:
        raise ValueError("need gap_ratio > 1")
    sub1 = solve_sub1(ues, sys)
    sub2 = solve_sub2(ues, sys)
    sub3 = solve_sub3(sub1, sub2, consts, rho, sys.kappa)
    kl = k_l(sub3.theta_star, consts)
    kg = math.log(gap_ratio) / sub3.Theta
    e_g = float(sub2.energy_co.sum() + kl * sub1.energy_cp.sum())
    t_g = sub2.T_co_star + kl * sub1.T_cp_star
    return AllocationSolution(
        sub1=sub1,
        sub2=sub2,
        sub3=sub3,
        region=classify_kappa(ues, sys),
        K_l=kl,
        K_g=kg,
        E_g=e_g,
        T_g=t_g,
        total_energy=kg * e_g,
        total_time=kg * t_g,
        objective=kg * (e_g + sys.kappa * t_g),
        kappa=sys.kappa,
        rho=rho,
    )


def heterogeneity(ues: list[UEProfile], sys: SystemParams) -> tuple[float, float]:
    """(L_cp, L_co): spread of compute loads and of uplink slot needs.

    L_cp compares the fastest possible finish of the heaviest UE against the
    slowest possible finish of the lightest; L_co compares the shortest
    full-power slot against the longest low-power one.  Both equal their
    lower bound when every UE is identical.
    """
    loads_fast = [u.cycles / u.f_max for u in ues]
    loads_slow = [u.cycles / u.f_min for u in ues]
    l_cp = max(loads_fast) / min(loads_slow)
    bounds = [tau_bounds(u, sys) for u in ues]
    l_co = max(b[0] for b in bounds) / min(b[1] for b in bounds)
    return l_cp, l_co


def pareto_sweep(
    ues: list[UEProfile],
    sys: SystemParams,
    consts: LocalSolverConstants,
    rho: float,
    kappa_grid: np.ndarray,
    *,
    gap_ratio: float = math.e,
    max_workers: int | None = None,
) -> list[ParetoPoint]:
    """Total time and energy at each weight in ``kappa_grid``.

    Points come back sorted by kappa no matter how the solves are scheduled.
    Worker count defaults to the CPU count, capped by the FEDL_LAB_THREADS
    environment variable when set.
    """
    grid = [float(k) for k in np.asarray(kappa_grid, dtype=float)]
    if not grid:
        raise ValueError("kappa_grid is empty")
    if any(k <= 0 for k in grid):
        raise ValueError("kappa values must be > 0")

    def solve_one(kappa: float) -> ParetoPoint:
        sol = solve_fedl_alloc(
            ues, replace(sys, kappa=kappa), consts, rho, gap_ratio=gap_ratio
        )
        return ParetoPoint(kappa, sol.total_time, sol.total_energy)

    if max_workers is None:
        max_workers = os.cpu_count() or 1
        env = os.environ.get(THREADS_ENV)
        if env is not None:
            try:
                max_workers = max(1, min(max_workers, int(env)))
            except ValueError:
                raise ValueError(f"{THREADS_ENV} must be an integer, got {env!r}") from None
    if max_workers == 1:
        points = [solve_one(k) for k in grid]
    else:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            points = list(pool.map(solve_one, grid))
    return sorted(points, key=lambda p: p.kappa)
