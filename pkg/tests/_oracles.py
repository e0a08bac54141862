"""Independent reference implementations the tests compare against.

Everything here is deliberately slow and simple: finite differences,
exhaustive grids, high-precision golden-section search.  None of it shares
code with the package under test beyond the data types.
"""

from __future__ import annotations

import math

import mpmath
import numpy as np

from fedl_lab.wireless.profiles import SystemParams, UEProfile
from fedl_lab.wireless.uplink import tau_bounds


def finite_diff_grad(f, w: np.ndarray, eps: float = 1e-6) -> np.ndarray:
    """Central-difference gradient of a scalar function."""
    g = np.empty_like(w, dtype=float)
    for i in range(w.size):
        e = np.zeros_like(w, dtype=float)
        e[i] = eps
        g[i] = (f(w + e) - f(w - e)) / (2.0 * eps)
    return g


# ------------------------------------------------------------ SUB1 oracle


def _sub1_objective_at_T(ues: list[UEProfile], kappa: float, T: float) -> float:
    """Objective when every UE picks its cheapest feasible clock for deadline T."""
    total = kappa * T
    for u in ues:
        f = min(max(u.cycles / T, u.f_min), u.f_max)
        if u.cycles / f > T * (1.0 + 1e-12):
            return math.inf  # deadline impossible for this UE
        total += 0.5 * u.alpha_n * u.cycles * f * f
    return total


def sub1_brute_force(
    ues: list[UEProfile], kappa: float, grid_points: int = 200
) -> tuple[float, float]:
    """(T, objective) from an exhaustive deadline scan.

    Every candidate deadline is induced by some UE frequency taken from a
    per-UE log grid between its extreme loads, then the best bracket gets a
    dense linear refinement pass.
    """
    candidates: list[float] = []
    for u in ues:
        lo = u.cycles / u.f_max
        hi = u.cycles / u.f_min
        candidates.extend(np.geomspace(lo, hi, grid_points).tolist())
    floor = max(u.cycles / u.f_max for u in ues)
    candidates = sorted(c for c in candidates if c >= floor * (1.0 - 1e-12))
    candidates.append(floor)
    values = [_sub1_objective_at_T(ues, kappa, t) for t in candidates]
    best = int(np.argmin(values))
    lo = candidates[max(best - 1, 0)]
    hi = candidates[min(best + 1, len(candidates) - 1)]
    fine = np.linspace(lo, hi, 2000)
    fine_vals = [_sub1_objective_at_T(ues, kappa, t) for t in fine]
    k = int(np.argmin(fine_vals))
    if fine_vals[k] < values[best]:
        return float(fine[k]), float(fine_vals[k])
    return float(candidates[best]), float(values[best])


# ------------------------------------------------------------ SUB2 oracle


def golden_tau(ue: UEProfile, sys: SystemParams, kappa: float, dps: int = 30) -> float:
    """High-precision golden-section minimizer of tau*p(tau) + kappa*tau.

    Works in mpmath arithmetic: the float64 objective is so flat near the
    minimum that double-precision search stalls around 1e-7.
    """
    lo_f, hi_f = tau_bounds(ue, sys)
    with mpmath.workdps(dps):
        s = mpmath.mpf(ue.s_n)
        B = mpmath.mpf(sys.B)
        N0 = mpmath.mpf(sys.N0)
        hbar = mpmath.mpf(ue.hbar_n)
        kap = mpmath.mpf(kappa)

        def val(tau):
            return tau * (N0 / hbar) * mpmath.expm1(s / (tau * B)) + kap * tau

        a, b = mpmath.mpf(lo_f), mpmath.mpf(hi_f)
        invphi = (mpmath.sqrt(5) - 1) / 2
        c = b - invphi * (b - a)
        d = a + invphi * (b - a)
        fc, fd = val(c), val(d)
        for _ in range(200):
            if fc < fd:
                b, d, fd = d, c, fc
                c = b - invphi * (b - a)
                fc = val(c)
            else:
                a, c, fc = c, d, fd
                d = a + invphi * (b - a)
                fd = val(d)
            if b - a < mpmath.mpf(10) ** (-dps + 5):
                break
        return float((a + b) / 2)


def lambertw_mp(x: float, dps: int = 40) -> float:
    """Reference principal-branch value; clamps float roundoff below -1/e."""
    with mpmath.workdps(dps):
        xm = mpmath.mpf(x)
        branch = -1 / mpmath.e
        if xm < branch:
            xm = branch
        return float(mpmath.lambertw(xm, 0).real)
