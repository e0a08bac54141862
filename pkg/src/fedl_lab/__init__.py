"""fedl_lab: a desk-scale federated training simulator with a wireless
energy/time resource-allocation layer.

The library half covers synthetic data generation, two training loops (a
surrogate-driven solver and a FedAvg baseline), convergence-rate algebra,
and closed-form per-round resource allocation with KKT audits.  The CLI
(``fedl-lab``) wraps the common workflows and renders figures next to its
CSV/JSON outputs.
"""

from .datagen import SyntheticSpec, UEDataset, generate_synthetic, load_csv
from .losses import CurvatureConstants, LossModel, estimate_curvature, grad, loss
from .lambertw import lambert_w0
from .rates import LocalSolverConstants, k_g, k_l, theta_rate
from .training import (
    DivergenceError,
    TrainConfig,
    TrainingTrace,
    aggregate,
    local_solve,
    run_fedavg,
    run_fedl,
    surrogate_grad,
)

__version__ = "0.1.0"

__all__ = [
    "CurvatureConstants",
    "DivergenceError",
    "LocalSolverConstants",
    "LossModel",
    "SyntheticSpec",
    "TrainConfig",
    "TrainingTrace",
    "UEDataset",
    "aggregate",
    "estimate_curvature",
    "generate_synthetic",
    "grad",
    "k_g",
    "k_l",
    "lambert_w0",
    "load_csv",
    "local_solve",
    "loss",
    "run_fedavg",
    "run_fedl",
    "surrogate_grad",
    "theta_rate",
]
