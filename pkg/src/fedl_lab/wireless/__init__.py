"""Wireless resource allocation for federated training rounds."""

from .combined import (
    AllocationSolution,
    ParetoPoint,
    heterogeneity,
    pareto_sweep,
    solve_fedl_alloc,
)
from .cpu import (
    KappaRegion,
    Sub1Solution,
    classify_kappa,
    energy_cp,
    partition_ues,
    region_thresholds,
    solve_sub1,
)
from .kkt import KktReport, kkt_check_sub1, kkt_check_sub2
from .profiles import (
    SystemParams,
    UEProfile,
    heterogeneous_instance,
    load_instance,
    sample_instance,
    save_instance,
)
from .tuning import InfeasibleError, Sub3Solution, round_cost, solve_sub3
from .uplink import (
    Sub2Solution,
    energy_co,
    g_fn,
    g_inv,
    power_of_tau,
    solve_sub2,
    solve_tau,
    tau_bounds,
)

__all__ = [
    "AllocationSolution",
    "InfeasibleError",
    "KappaRegion",
    "KktReport",
    "ParetoPoint",
    "Sub1Solution",
    "Sub2Solution",
    "Sub3Solution",
    "SystemParams",
    "UEProfile",
    "classify_kappa",
    "energy_co",
    "energy_cp",
    "g_fn",
    "g_inv",
    "heterogeneity",
    "heterogeneous_instance",
    "kkt_check_sub1",
    "kkt_check_sub2",
    "load_instance",
    "pareto_sweep",
    "partition_ues",
    "power_of_tau",
    "region_thresholds",
    "round_cost",
    "sample_instance",
    "save_instance",
    "solve_fedl_alloc",
    "solve_sub1",
    "solve_sub2",
    "solve_sub3",
    "solve_tau",
    "tau_bounds",
]
