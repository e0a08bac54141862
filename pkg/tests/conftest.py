"""Shared builders and fixtures for the test suite."""

from __future__ import annotations

import numpy as np
import pytest

from fedl_lab.datagen import LABEL_NOISE_STD, UEDataset
from fedl_lab.rates import LocalSolverConstants
from fedl_lab.wireless.profiles import sample_instance

# contraction-rate table from the five-UE reference setup: (theta, eta, rho) -> Theta
RATE_TABLE = [
    ((0.033, 0.253, 1.4), 0.094),
    ((0.016, 0.177, 2.0), 0.041),
    ((0.002, 0.036, 5.0), 0.003),
]


def quadratic_nodes(
    n_nodes: int,
    dim: int,
    rows: tuple[int, int],
    seed: int,
    *,
    target_rho: float = 2.0,
    scale_spread: tuple[float, float] | None = None,
) -> list[UEDataset]:
    """Linear-regression nodes drawing from one shared covariance spectrum.

    Unlike the shipped generator there is no per-node variance spread unless
    ``scale_spread`` asks for one, so the cross-node condition number stays
    close to ``target_rho``.
    """
    ss = np.random.SeedSequence(seed)
    streams = [np.random.default_rng(s) for s in ss.spawn(n_nodes + 1)]
    decay = 0.0 if target_rho == 1.0 else np.log(target_rho) / np.log(dim)
    std = np.arange(1, dim + 1, dtype=float) ** (-decay / 2.0)
    w_true = streams[0].normal(size=dim)
    nodes = []
    counts = []
    for k in range(n_nodes):
        rng = streams[k + 1]
        n = int(rng.integers(rows[0], rows[1] + 1))
        x = rng.normal(size=(n, dim)) * std
        if scale_spread is not None:
            x = x * rng.uniform(*scale_spread)
        y = x @ w_true + rng.normal(scale=LABEL_NOISE_STD, size=n)
        nodes.append((x, y))
        counts.append(n)
    total = float(sum(counts))
    return [
        UEDataset(features=x, labels=y, weight=c / total)
        for (x, y), c in zip(nodes, counts)
    ]


@pytest.fixture
def fig1_pack():
    """A five-UE reference instance with a matching curvature ratio."""
    ues, sys = sample_instance(5, seed=1, kappa=0.5)
    rho = 2.0
    return ues, sys, LocalSolverConstants.for_gradient_descent(rho), rho
