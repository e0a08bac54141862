"""Convergence-rate algebra for the federated solver.

The training loop has two nested budgets: local iterations per round and
global rounds.  Both admit closed forms in terms of the local accuracy
``theta``, the aggregation weight ``eta``, and the condition number ``rho``
of the per-node objectives.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class LocalSolverConstants:
    """Linear-rate constants of the local solver: error <= c * (1 - gamma)^k.

    ``C = c * rho`` is the factor by which the gradient-norm contraction lags
    the objective contraction.
    """

    c: float
    gamma: float
    C: float

    def __post_init__(self) -> None:
        if self.c < 1.0:
            raise ValueError("need c >= 1")
        if not 0.0 < self.gamma <= 1.0:
            raise ValueError("need 0 < gamma <= 1")
        if self.C <= 0.0:
            raise ValueError("need C > 0")

    @classmethod
    def for_gradient_descent(cls, rho: float) -> "LocalSolverConstants":
        """Constants for plain gradient descent with step 1/L: c=1, gamma=1/rho."""
        if rho < 1.0 or not math.isfinite(rho):
            raise ValueError(f"need finite rho >= 1, got {rho}")
        return cls(c=1.0, gamma=1.0 / rho, C=rho)


def theta_rate(theta: float, eta: float, rho: float) -> float:
    """Per-round objective contraction factor Theta of the federated solver.

    The global gap shrinks like ``(1 - Theta)^t`` whenever the returned value
    lies in (0, 1); callers must check that themselves since the expression
    can leave that interval for aggressive ``theta`` or ``eta``.
    """
    if rho < 1.0:
        raise ValueError(f"need rho >= 1, got {rho}")
    num = eta * (
        2.0 * (theta - 1.0) ** 2
        - (theta + 1.0) * theta * (3.0 * eta + 2.0) * rho**2
        - (theta + 1.0) * eta * rho**2
    )
    den = 2.0 * rho * ((1.0 + theta) ** 2 * eta**2 * rho**2 + 1.0)
    return num / den


def k_l(theta: float, consts: LocalSolverConstants) -> float:
    """Local iterations sufficient to certify a theta-approximate solution.

    Evaluates (2/gamma) ln(C/theta); zero at theta = C, negative beyond it.
    """
    if theta <= 0.0:
        raise ValueError(f"need theta > 0, got {theta}")
    return (2.0 / consts.gamma) * math.log(consts.C / theta)


def k_g(Theta: float, gap0: float, eps: float) -> float:
    """Global rounds to drive an initial gap ``gap0`` below ``eps``."""
    if not 0.0 < Theta < 1.0:
        raise ValueError(f"need Theta in (0, 1), got {Theta}")
    if gap0 <= 0.0 or eps <= 0.0 or eps > gap0:
        raise ValueError("need gap0 >= eps > 0")
    return math.log(gap0 / eps) / Theta
