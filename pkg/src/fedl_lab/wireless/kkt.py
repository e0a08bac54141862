"""First-order optimality audits for the two convex subproblems.

Both solvers produce closed-form answers.  These checks independently
reconstruct the KKT multipliers from a candidate solution and report the
worst normalized residual across stationarity, primal/dual feasibility, and
complementary slackness.  A correct closed form lands at roundoff level; a
perturbed solution shows up immediately.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cpu import Sub1Solution
from .profiles import SystemParams, UEProfile
from .uplink import Sub2Solution, g_inv, tau_bounds

_TIGHT_REL = 1e-9


@dataclass(frozen=True)
class KktReport:
    stationarity: float
    primal: float
    dual: float
    complementarity: float
    lambdas: np.ndarray

    @property
    def max_residual(self) -> float:
        return max(self.stationarity, self.primal, self.dual, self.complementarity)


def kkt_check_sub1(
    sol: Sub1Solution, ues: list[UEProfile], sys: SystemParams, kappa: float
) -> KktReport:
    """Audit a CPU-frequency solution.

    The deadline constraint carries one multiplier per UE whose mass must sum
    to ``kappa``.  Interior UEs force lambda_n = alpha_n f_n^3 through
    stationarity; UEs strictly inside the deadline force lambda_n = 0; UEs at
    a frequency bound absorb the slack through the bound multipliers, with
    any unassignable mass reported as dual residual.
    """
    n = len(ues)
    f = np.asarray(sol.f_star, dtype=float)
    t_cp = sol.T_cp_star
    loads = np.array([u.cycles for u in ues]) / f
    tight = np.abs(loads - t_cp) <= _TIGHT_REL * t_cp
    at_max = np.array([abs(f[i] - u.f_max) <= _TIGHT_REL * u.f_max for i, u in enumerate(ues)])
    at_min = np.array([abs(f[i] - u.f_min) <= _TIGHT_REL * u.f_min for i, u in enumerate(ues)])

    lam = np.zeros(n)
    interior = tight & ~at_max & ~at_min
    for i in np.flatnonzero(interior):
        lam[i] = ues[i].alpha_n * f[i] ** 3
    # Distribute the remaining deadline mass to tight boundary UEs: pinned-fast
    # UEs need at least alpha f^3 (else f_max would not bind), pinned-slow UEs
    # accept at most alpha f^3 (else f_min would not bind).
    remaining = kappa - lam.sum()
    hi_idx = np.flatnonzero(tight & at_max)
    lo_idx = np.flatnonzero(tight & at_min & ~at_max)
    floors = np.array([ues[i].alpha_n * f[i] ** 3 for i in hi_idx])
    caps = np.array([ues[i].alpha_n * f[i] ** 3 for i in lo_idx])
    dual_resid = 0.0
    if hi_idx.size:
        lam[hi_idx] = floors
        remaining -= floors.sum()
        if remaining >= 0.0:
            lam[hi_idx] += remaining / hi_idx.size
            remaining = 0.0
    if remaining > 0.0 and lo_idx.size:
        for i, cap in zip(lo_idx, caps):
            take = min(cap, remaining)
            lam[i] = take
            remaining -= take
    dual_resid = abs(remaining) / max(kappa, 1e-300)

    # Stationarity: alpha c D f - lambda c D / f^2 + mu - nu = 0 with the bound
    # multipliers recovered as the case-appropriate sign of the gap.
    stat = 0.0
    for i, u in enumerate(ues):
        gap = lam[i] * u.cycles / f[i] ** 2 - u.alpha_n * u.cycles * f[i]
        scale = max(abs(lam[i] * u.cycles / f[i] ** 2), abs(u.alpha_n * u.cycles * f[i]))
        if at_max[i] and at_min[i]:
            viol = 0.0             # degenerate box, both multipliers free
        elif at_max[i]:
            viol = max(0.0, -gap)  # needs mu = gap >= 0
        elif at_min[i]:
            viol = max(0.0, gap)   # needs nu = -gap >= 0
        else:
            viol = abs(gap)
        stat = max(stat, viol / max(scale, 1e-300))

    primal = 0.0
    for i, u in enumerate(ues):
        primal = max(
            primal,
            (loads[i] - t_cp) / t_cp,
            (u.f_min - f[i]) / u.f_min,
            (f[i] - u.f_max) / u.f_max,
        )
    primal = max(primal, 0.0)
    dual_resid = max(dual_resid, float(-lam.min(initial=0.0)) / max(kappa, 1e-300))
    comp = max(
        (lam[i] / kappa) * abs(loads[i] - t_cp) / t_cp for i in range(n)
    )
    return KktReport(stat, primal, dual_resid, comp, lam)


def kkt_check_sub2(
    sol: Sub2Solution, ues: list[UEProfile], sys: SystemParams, kappa: float
) -> KktReport:
    """Audit an uplink-slot solution.

    The total-time constraint multiplier equals ``kappa`` exactly; each UE's
    stationarity then demands the marginal energy saving -dE/dtau match
    ``kappa`` in the interior or overshoot it in the right direction at a
    power bound.
    """
    taus = np.asarray(sol.tau_star, dtype=float)
    stat = 0.0
    primal = 0.0
    for i, u in enumerate(ues):
        lo, hi = tau_bounds(u, sys)
        saving = g_inv(u, sys, taus[i])
        gap = saving - kappa
        if abs(taus[i] - hi) <= _TIGHT_REL * hi:
            viol = max(0.0, -gap)   # blocked from stretching: saving must still be >= kappa
        elif abs(taus[i] - lo) <= _TIGHT_REL * lo:
            viol = max(0.0, gap)    # blocked from shrinking: saving must be <= kappa
        else:
            viol = abs(gap)
        stat = max(stat, viol / kappa)
        primal = max(primal, (lo - taus[i]) / lo, (taus[i] - hi) / hi)
    primal = max(primal, 0.0)
    total = float(taus.sum())
    comp = abs(total - sol.T_co_star) / max(total, 1e-300)
    lam = np.full(len(ues), kappa)
    return KktReport(stat, primal, 0.0, comp, lam)
