"""Uplink transmission-time allocation: the communication-side subproblem (sub2).

Each UE must push ``s_n`` nats through its TDMA slot of length ``tau_n``.
The slot fixes the required rate ``s_n / tau_n`` and hence, by inverting the
capacity formula ``r = B ln(1 + hbar p / N0)``, the transmit power.  The
energy ``tau * p(tau)`` is convex and decreasing in ``tau``, so each UE's
optimal slot balances its marginal energy saving against the time weight
``kappa``; the balance point has a closed form in the Lambert W function.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..lambertw import lambert_w0
from .profiles import SystemParams, UEProfile


def power_of_tau(ue: UEProfile, sys: SystemParams, tau: float) -> float:
    """Transmit power (W) that delivers s_n nats in ``tau`` seconds."""
    if tau <= 0:
        raise ValueError("need tau > 0")
    x = ue.s_n / (tau * sys.B)
    return sys.N0 / ue.hbar_n * math.expm1(x)


def energy_co(ue: UEProfile, sys: SystemParams, tau: float) -> float:
    """Uplink energy tau * p(tau), joules."""
    return tau * power_of_tau(ue, sys, tau)


def tau_bounds(ue: UEProfile, sys: SystemParams) -> tuple[float, float]:
    """Slot lengths at which the required power hits p_max and p_min."""
    t_min = ue.s_n / (sys.B * math.log1p(ue.hbar_n * ue.p_max / sys.N0))
    t_max = ue.s_n / (sys.B * math.log1p(ue.hbar_n * ue.p_min / sys.N0))
    return t_min, t_max


def g_fn(ue: UEProfile, sys: SystemParams, kappa: float) -> float:
    """Unconstrained energy/time balance point: the slot length where the
    marginal energy saving of stretching the slot equals ``kappa``.

    Strictly decreasing in ``kappa``: a pricier second pushes toward shorter
    slots at higher power.
    """
    if kappa <= 0:
        raise ValueError("need kappa > 0")
    arg = (kappa * ue.hbar_n / sys.N0 - 1.0) / math.e
    return (ue.s_n / sys.B) / (1.0 + lambert_w0(arg))


def g_inv(ue: UEProfile, sys: SystemParams, tau: float) -> float:
    """Marginal energy saving -dE/dtau at slot length ``tau``; inverse of
    :func:`g_fn` in ``kappa``."""
    if tau <= 0:
        raise ValueError("need tau > 0")
    x = ue.s_n / (tau * sys.B)
    return sys.N0 / ue.hbar_n * (math.exp(x) * (x - 1.0) + 1.0)


@dataclass(frozen=True)
class Sub2Solution:
    tau_star: np.ndarray    # s, per UE
    T_co_star: float        # s, total uplink round length
    energy_co: np.ndarray   # J, per UE
    objective: float        # sum energy + kappa * T_co


def solve_tau(ue: UEProfile, sys: SystemParams, kappa: float) -> float:
    """One UE's optimal slot: the balance point clamped into the power box."""
    t_min, t_max = tau_bounds(ue, sys)
    if kappa <= g_inv(ue, sys, t_max):
        return t_max
    if kappa >= g_inv(ue, sys, t_min):
        return t_min
    return min(max(g_fn(ue, sys, kappa), t_min), t_max)


def solve_sub2(ues: list[UEProfile], sys: SystemParams) -> Sub2Solution:
    """Closed-form optimal slots for every UE at weight ``sys.kappa``."""
    taus = np.array([solve_tau(u, sys, sys.kappa) for u in ues])
    energies = np.array([energy_co(u, sys, t) for u, t in zip(ues, taus)])
    t_co = float(taus.sum())
    return Sub2Solution(taus, t_co, energies, float(energies.sum() + sys.kappa * t_co))
