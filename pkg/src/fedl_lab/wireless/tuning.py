"""Joint tuning of local accuracy and aggregation weight (sub3).

Given the per-round computation cost (from sub1) and communication cost
(from sub2), total training cost is

    (rounds needed) * (per-round cost)
    = (1 / Theta(theta, eta)) * [E_co + K_l(theta) E_cp + kappa (T_co + K_l(theta) T_cp)]

up to the fixed log factor in the round count.  Looser local accuracy
(larger theta) cuts local iterations K_l but weakens the per-round
contraction Theta; ``eta`` only affects Theta.  The surface is non-convex,
so the solver scans a dense log-spaced grid and then polishes the best cell
by coordinate descent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..rates import LocalSolverConstants, k_l, theta_rate
from .cpu import Sub1Solution
from .uplink import Sub2Solution

THETA_RANGE = (1e-4, 0.999)
ETA_RANGE = (1e-4, 10.0)
GRID_POINTS = 200
REFINE_TOL = 1e-6


class InfeasibleError(RuntimeError):
    """No (theta, eta) in the search box gives a contraction in (0, 1)."""

    def __init__(self, max_Theta: float):
        self.max_Theta = max_Theta
        super().__init__(
            f"no feasible contraction found; best Theta on the grid was {max_Theta:.6g}"
        )


@dataclass(frozen=True)
class Sub3Solution:
    theta_star: float
    eta_star: float
    Theta: float
    objective: float  # per-unit-progress cost: (E_g + kappa T_g) / Theta


def round_cost(
    theta: float,
    sub1: Sub1Solution,
    sub2: Sub2Solution,
    consts: LocalSolverConstants,
    kappa: float,
) -> float:
    """Energy-plus-weighted-time cost of one global round at accuracy theta."""
    kl = k_l(theta, consts)
    e_g = float(sub2.energy_co.sum() + kl * sub1.energy_cp.sum())
    t_g = sub2.T_co_star + kl * sub1.T_cp_star
    return e_g + kappa * t_g


def _objective(
    theta: float,
    eta: float,
    sub1: Sub1Solution,
    sub2: Sub2Solution,
    consts: LocalSolverConstants,
    rho: float,
    kappa: float,
) -> tuple[float, float]:
    """(objective, Theta); objective is +inf when the pair is infeasible."""
    Theta = theta_rate(theta, eta, rho)
    if not 0.0 < Theta < 1.0:
        return math.inf, Theta
    return round_cost(theta, sub1, sub2, consts, kappa) / Theta, Theta


def solve_sub3(
    sub1: Sub1Solution,
    sub2: Sub2Solution,
    consts: LocalSolverConstants,
    rho: float,
    kappa: float,
    *,
    grid_points: int = GRID_POINTS,
    refine_tol: float = REFINE_TOL,
) -> Sub3Solution:
    """Grid-scan the (theta, eta) box, then coordinate-descend the best cell.

    Raises :class:`InfeasibleError` (reporting the largest contraction seen)
    if no grid point yields Theta in (0, 1).
    """
    thetas = np.geomspace(*THETA_RANGE, grid_points)
    etas = np.geomspace(*ETA_RANGE, grid_points)

    # Vectorized scan: the contraction on the full mesh, the per-round cost
    # only along the theta axis (eta does not touch the cost).
    Theta_grid = theta_rate(thetas[:, None], etas[None, :], rho)
    kl = (2.0 / consts.gamma) * np.log(consts.C / thetas)
    cost = (
        float(sub2.energy_co.sum())
        + kl * float(sub1.energy_cp.sum())
        + kappa * (sub2.T_co_star + kl * sub1.T_cp_star)
    )
    feasible = (Theta_grid > 0.0) & (Theta_grid < 1.0)
    if not feasible.any():
        raise InfeasibleError(float(Theta_grid.max()))
    obj_grid = np.where(feasible, cost[:, None] / Theta_grid, math.inf)
    i, j = np.unravel_index(int(np.argmin(obj_grid)), obj_grid.shape)
    obj = float(obj_grid[i, j])
    theta, eta, Theta = float(thetas[i]), float(etas[j]), float(Theta_grid[i, j])
    # Polish: alternating single-coordinate probes with a shrinking step.
    step_theta = theta * (thetas[1] / thetas[0] - 1.0)
    step_eta = eta * (etas[1] / etas[0] - 1.0)
    while step_theta > refine_tol or step_eta > refine_tol:
        improved = False
        for dt, de in ((step_theta, 0.0), (-step_theta, 0.0), (0.0, step_eta), (0.0, -step_eta)):
            cand_theta = min(max(theta + dt, THETA_RANGE[0]), THETA_RANGE[1])
            cand_eta = min(max(eta + de, ETA_RANGE[0]), ETA_RANGE[1])
            cand_obj, cand_Theta = _objective(
                cand_theta, cand_eta, sub1, sub2, consts, rho, kappa
            )
            if cand_obj < obj:
                obj, theta, eta, Theta = cand_obj, cand_theta, cand_eta, cand_Theta
                improved = True
        if not improved:
            step_theta *= 0.5
            step_eta *= 0.5
    return Sub3Solution(theta, eta, Theta, obj)
