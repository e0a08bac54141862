"""CPU-frequency allocation: the computation-side subproblem (sub1).

Minimize sum_n (alpha_n/2) c_n D_n f_n^2 + kappa * T_cp over per-UE clock
frequencies f_n in [f_min, f_max], where T_cp = max_n c_n D_n / f_n is the
round's computation deadline.  The optimum splits the UEs into three groups:

* N1: UEs pinned at f_max (their full-speed load sets the deadline),
* N2: UEs pinned at f_min (they finish early anyway),
* N3: UEs that run exactly at the deadline, f_n = c_n D_n / T_cp.

The closed form assembles the deadline as the max of the three group
deadlines; the partition itself comes from a single sorted scan.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .profiles import SystemParams, UEProfile


def energy_cp(ue: UEProfile, f: float) -> float:
    """CPU energy of one local round at clock ``f``: (alpha/2) c D f^2, joules."""
    return 0.5 * ue.alpha_n * ue.cycles * f * f


@dataclass(frozen=True)
class Sub1Solution:
    f_star: np.ndarray       # Hz, per UE
    T_cp_star: float         # s
    partition: tuple[tuple[int, ...], tuple[int, ...], tuple[int, ...]]  # (N1, N2, N3)
    energy_cp: np.ndarray    # J, per UE
    objective: float         # sum energy + kappa * T_cp


def _deadline_n3(ues: list[UEProfile], members, kappa: float) -> float:
    """Unconstrained-optimal shared deadline for the members running at it."""
    if not members:
        return 0.0
    total = sum(ues[n].alpha_n * ues[n].cycles ** 3 for n in members)
    return (total / kappa) ** (1.0 / 3.0)


def partition_ues(
    ues: list[UEProfile], sys: SystemParams
) -> tuple[tuple[int, ...], tuple[int, ...], tuple[int, ...]]:
    """Sorted scan assigning every UE to N1, N2, or N3 for ``sys.kappa``.

    Scans UEs by their slowest-clock load c D / f_min, ascending.  Before each
    step, if the full-speed bottleneck load has caught up with the current N3
    deadline, the bottleneck UEs are pinned to f_max once and for all.  A UE
    whose slowest-clock load fits under the current deadline is pinned to
    f_min; everyone else stays in N3.
    """
    kappa = sys.kappa
    loads_min = [u.cycles / u.f_min for u in ues]
    loads_max = [u.cycles / u.f_max for u in ues]
    bottleneck = max(loads_max)
    order = sorted(range(len(ues)), key=loads_min.__getitem__)

    n1: set[int] = set()
    n2: set[int] = set()
    n3: set[int] = set(range(len(ues)))
    t_n3 = _deadline_n3(ues, n3, kappa)
    for i in order:
        if not n1 and bottleneck >= t_n3 > 0.0:
            n1 = {m for m in range(len(ues)) if loads_max[m] == bottleneck}
            n3 -= n1
            t_n3 = _deadline_n3(ues, n3, kappa)
        if i in n3 and loads_min[i] <= t_n3:
            n2.add(i)
            n3.discard(i)
            t_n3 = _deadline_n3(ues, n3, kappa)
    return tuple(sorted(n1)), tuple(sorted(n2)), tuple(sorted(n3))


def solve_sub1(ues: list[UEProfile], sys: SystemParams) -> Sub1Solution:
    """Closed-form optimal frequencies and deadline at weight ``sys.kappa``."""
    n1, n2, n3 = partition_ues(ues, sys)
    t1 = max((u.cycles / u.f_max for u in ues), default=0.0) if n1 else 0.0
    t2 = max((ues[n].cycles / ues[n].f_min for n in n2), default=0.0) if n2 else 0.0
    t3 = _deadline_n3(ues, n3, sys.kappa)
    t_cp = max(t1, t2, t3)

    f = np.empty(len(ues))
    for n in n1:
        f[n] = ues[n].f_max
    for n in n2:
        f[n] = ues[n].f_min
    for n in n3:
        # Exactly at the deadline; clamp only against roundoff.
        f[n] = min(max(ues[n].cycles / t_cp, ues[n].f_min), ues[n].f_max)
    energies = np.array([energy_cp(u, f[n]) for n, u in enumerate(ues)])
    objective = float(energies.sum() + sys.kappa * t_cp)
    return Sub1Solution(f, t_cp, (n1, n2, n3), energies, objective)


REGIONS = ("a", "b", "c", "d")


@dataclass(frozen=True)
class KappaRegion:
    """Which qualitative regime ``kappa`` falls in, plus the boundaries.

    * a: energy so cheap every UE idles at f_min,
    * b: a mix of f_min UEs and deadline-tracking UEs,
    * c: every UE tracks the shared deadline,
    * d: time so expensive the slowest UEs are pinned at f_max.

    Thresholds assume the regimes appear in that order, which holds whenever
    the full-speed bottleneck load stays below the smallest slow-clock load
    (``ordered`` is False otherwise and region c may be empty).
    """

    region: str
    kappa_ab: float
    kappa_bc: float
    kappa_cd: float
    ordered: bool


def region_thresholds(ues: list[UEProfile], sys: SystemParams) -> tuple[float, float, float]:
    """Exact boundary weights between the four regimes of the sorted scan.

    With UEs sorted by slow-clock load l_i (ascending) and cubic energy
    weights A_i = alpha_i (c_i D_i)^3:

    * above ``sum A / l_min^3`` no UE fits under the deadline (region c),
    * above ``sum A / bottleneck^3`` the deadline hits the full-speed
      bottleneck (region d),
    * below ``min_i (sum_{j>=i} A_j) / l_i^3`` every UE fits as the scan
      proceeds (region a); the minimizer is the largest-load UE, giving
      ``alpha (f_min)^3`` for that UE.
    """
    loads_min = np.array([u.cycles / u.f_min for u in ues])
    weights = np.array([u.alpha_n * u.cycles**3 for u in ues])
    bottleneck = max(u.cycles / u.f_max for u in ues)
    order = np.argsort(loads_min)
    suffix = np.cumsum(weights[order][::-1])[::-1]
    kappa_ab = float(np.min(suffix / loads_min[order] ** 3))
    kappa_bc = float(weights.sum() / loads_min.min() ** 3)
    kappa_cd = float(weights.sum() / bottleneck**3)
    return kappa_ab, kappa_bc, kappa_cd


def classify_kappa(ues: list[UEProfile], sys: SystemParams) -> KappaRegion:
    """Place ``sys.kappa`` into regime a, b, c, or d by threshold comparison."""
    kappa_ab, kappa_bc, kappa_cd = region_thresholds(ues, sys)
    k = sys.kappa
    if k >= kappa_cd:
        region = "d"
    elif k > kappa_bc:
        region = "c"
    elif k > kappa_ab:
        region = "b"
    else:
        region = "a"
    ordered = kappa_ab <= kappa_bc <= kappa_cd
    return KappaRegion(region, kappa_ab, kappa_bc, kappa_cd, ordered)
