"""Federated training loops.

Each global round broadcasts the current parameters and an aggregate
gradient, lets every sampled node drive a local surrogate objective down to
a relative gradient-norm target ``theta``, then re-aggregates both the
parameters and the fresh local gradients.  A plain FedAvg loop with a fixed
local iteration budget is included as the baseline.

All randomness (node subsets, mini-batches) is drawn from streams keyed by
``(seed, round, node)``, so a fixed seed reproduces the numeric trace
exactly, independent of scheduling order.
"""

from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .datagen import UEDataset
from .losses import LossModel, grad, loss

# Spawn-key namespaces (datagen owns 0 and 1).
_ROUND_STREAM = 2
_NODE_ROUND_STREAM = 3

TRACE_COLUMNS = (
    "round",
    "global_loss",
    "test_accuracy",
    "grad_bar_norm",
    "mean_local_iters",
    "elapsed_ms",
)


class DivergenceError(RuntimeError):
    """Local iterates left the representable range."""

    def __init__(self, node: int, round_index: int | None = None):
        self.node = node
        self.round_index = round_index
        self.trace: "TrainingTrace | None" = None
        where = f" in round {round_index}" if round_index is not None else ""
        super().__init__(f"non-finite iterate at node {node}{where}")


@dataclass
class TrainConfig:
    """Hyper-parameters shared by both training loops.

    ``batch=None`` means full-batch local steps; ``S=None`` means every node
    participates each round.  ``K_l`` caps local iterations; the surrogate
    loop may stop earlier once its gradient-norm target is met.
    """

    eta: float
    theta: float
    K_g: int
    K_l: int
    h: float
    batch: int | None = None
    S: int | None = None
    seed: int = 0

    def validate(self, n_nodes: int) -> None:
        if not 0.0 <= self.theta <= 1.0:
            raise ValueError(f"need 0 <= theta <= 1, got {self.theta}")
        if self.eta < 0.0:
            raise ValueError(f"need eta >= 0, got {self.eta}")
        if self.K_g < 1 or self.K_l < 1:
            raise ValueError("need K_g >= 1 and K_l >= 1")
        if self.h <= 0.0:
            raise ValueError(f"need h > 0, got {self.h}")
        if self.batch is not None and self.batch < 1:
            raise ValueError("batch must be >= 1 or None")
        if self.S is not None and not 1 <= self.S <= n_nodes:
            raise ValueError(f"S must be in [1, {n_nodes}]")


@dataclass
class RoundRecord:
    round: int
    global_loss: float
    test_accuracy: float
    grad_bar_norm: float
    mean_local_iters: float
    elapsed_ms: float
    theta_certified: bool = True


@dataclass
class TrainingTrace:
    """Per-round measurements plus the final parameter vector."""

    algo: str
    records: list[RoundRecord] = field(default_factory=list)
    final_w: np.ndarray | None = None

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.records])

    def write_csv(self, path: str | Path) -> None:
        with Path(path).open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(TRACE_COLUMNS)
            for r in self.records:
                writer.writerow(
                    [r.round]
                    + [repr(float(getattr(r, c))) for c in TRACE_COLUMNS[1:-1]]
                    + [repr(float(r.elapsed_ms))]
                )


@dataclass(frozen=True)
class LocalFit:
    """Outcome of one node's local solve."""

    w: np.ndarray
    iterations: int
    certified: bool


def surrogate_grad(
    model: LossModel,
    ds: UEDataset,
    w: np.ndarray,
    w_prev: np.ndarray,
    gbar: np.ndarray,
    eta: float,
    batch: np.ndarray | None = None,
) -> np.ndarray:
    """Gradient of the local surrogate at ``w``.

    The surrogate is the local loss plus the linear term
    ``<eta * gbar - grad_local(w_prev), w>``, so its gradient at ``w_prev``
    collapses to ``eta * gbar`` for every node, aligning all local searches
    with the aggregate descent direction.
    """
    shift = eta * gbar - grad(model, w_prev, ds.features, ds.labels)
    return grad(model, w, ds.features, ds.labels, batch=batch) + shift


def local_solve(
    model: LossModel,
    ds: UEDataset,
    w_prev: np.ndarray,
    gbar: np.ndarray,
    *,
    eta: float,
    theta: float,
    max_iters: int,
    h: float,
    batch: int | None = None,
    rng: np.random.Generator | None = None,
    node_id: int = 0,
) -> LocalFit:
    """Descend the surrogate from ``w_prev`` until its gradient norm falls to
    ``theta`` times the starting value, or ``max_iters`` steps elapse.

    The stopping check always uses the full-batch surrogate gradient, even
    when the descent steps are mini-batch.  ``theta >= 1`` is satisfied
    immediately and returns ``w_prev`` untouched.
    """
    shift = eta * gbar - grad(model, w_prev, ds.features, ds.labels)

    def full_grad(z: np.ndarray) -> np.ndarray:
        return grad(model, z, ds.features, ds.labels) + shift

    ref = float(np.linalg.norm(full_grad(w_prev)))
    # an overflowed reference would make the stop test inf <= inf, hiding the blowup
    if not math.isfinite(ref):
        raise DivergenceError(node_id)
    target = theta * ref
    z = w_prev.copy()
    g = full_grad(z)
    if float(np.linalg.norm(g)) <= target:
        return LocalFit(z, 0, True)
    if batch is not None and rng is None:
        rng = np.random.default_rng(0)
    # blowing up is reported through DivergenceError, not as overflow warnings
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(1, max_iters + 1):
            if batch is None:
                step = g
            else:
                size = min(batch, ds.n_samples)
                idx = rng.choice(ds.n_samples, size=size, replace=False)
                step = grad(model, z, ds.features, ds.labels, batch=idx) + shift
            z = z - h * step
            if not np.all(np.isfinite(z)):
                raise DivergenceError(node_id)
            g = full_grad(z)
            if float(np.linalg.norm(g)) <= target:
                return LocalFit(z, k, True)
    return LocalFit(z, max_iters, False)


def aggregate(
    pairs: list[tuple[np.ndarray, np.ndarray]], weights: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Weighted average of (parameters, gradient) pairs.

    Weights are renormalized to sum to one (participating subsets carry only
    part of the total mass).  Accumulation runs in ascending list order so
    repeated runs produce bit-identical results.
    """
    if len(pairs) == 0:
        raise ValueError("nothing to aggregate")
    if len(pairs) != len(weights):
        raise ValueError("weights and pairs disagree")
    scale = np.asarray(weights, dtype=float)
    total = scale.sum()
    if total <= 0:
        raise ValueError("weights must have positive mass")
    scale = scale / total
    w_new = np.zeros_like(pairs[0][0])
    g_new = np.zeros_like(pairs[0][1])
    for (w_n, g_n), p in zip(pairs, scale):
        w_new = w_new + p * w_n
        g_new = g_new + p * g_n
    return w_new, g_new


def _round_rng(seed: int, t: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(_ROUND_STREAM, t)))


def _node_round_rng(seed: int, t: int, n: int) -> np.random.Generator:
    return np.random.default_rng(
        np.random.SeedSequence(entropy=seed, spawn_key=(_NODE_ROUND_STREAM, t, n))
    )


def _sample_nodes(cfg: TrainConfig, n_nodes: int, t: int) -> np.ndarray:
    if cfg.S is None or cfg.S == n_nodes:
        return np.arange(n_nodes)
    rng = _round_rng(cfg.seed, t)
    return np.sort(rng.choice(n_nodes, size=cfg.S, replace=False))


def global_loss(model: LossModel, datasets: list[UEDataset], w: np.ndarray) -> float:
    """Weight-averaged loss over every node's data."""
    return float(
        sum(ds.weight * loss(model, w, ds.features, ds.labels) for ds in datasets)
    )


def test_accuracy(model: LossModel, datasets: list[UEDataset] | None, w: np.ndarray) -> float:
    """Weighted classification accuracy; NaN for regression or missing data."""
    if model.kind != "multinomial-logistic" or not datasets:
        return math.nan
    hits = 0.0
    for ds in datasets:
        wmat = w.reshape(model.classes, ds.dim)
        pred = np.argmax(ds.features @ wmat.T, axis=1)
        hits += ds.weight * float(np.mean(pred == ds.labels.astype(int)))
    return hits


def _finish_round(
    trace: TrainingTrace,
    model: LossModel,
    train: list[UEDataset],
    test: list[UEDataset] | None,
    w: np.ndarray,
    gbar: np.ndarray,
    t: int,
    iters: list[int],
    certified: bool,
    t0: float,
) -> None:
    trace.records.append(
        RoundRecord(
            round=t,
            global_loss=global_loss(model, train, w),
            test_accuracy=test_accuracy(model, test, w),
            grad_bar_norm=float(np.linalg.norm(gbar)),
            mean_local_iters=float(np.mean(iters)),
            elapsed_ms=(time.perf_counter() - t0) * 1e3,
            theta_certified=certified,
        )
    )


def run_fedl(
    cfg: TrainConfig,
    model: LossModel,
    train: list[UEDataset],
    test: list[UEDataset] | None = None,
) -> TrainingTrace:
    """Run the surrogate-based federated solver for ``cfg.K_g`` rounds.

    Starts from the zero vector.  The aggregate gradient fed to round 1 is
    bootstrapped by averaging every node's gradient at the start point.  On
    divergence the partial trace is attached to the raised error.
    """
    cfg.validate(len(train))
    dim = model.dim(train[0].dim)
    weights = np.array([ds.weight for ds in train])
    w = np.zeros(dim)
    gbar = np.zeros(dim)
    for ds, p in zip(train, weights):
        gbar = gbar + p * grad(model, w, ds.features, ds.labels)
    trace = TrainingTrace(algo="fedl")
    try:
        for t in range(1, cfg.K_g + 1):
            t0 = time.perf_counter()
            chosen = _sample_nodes(cfg, len(train), t)
            fits = []
            for n in chosen:
                fits.append(
                    local_solve(
                        model,
                        train[n],
                        w,
                        gbar,
                        eta=cfg.eta,
                        theta=cfg.theta,
                        max_iters=cfg.K_l,
                        h=cfg.h,
                        batch=cfg.batch,
                        rng=_node_round_rng(cfg.seed, t, int(n)),
                        node_id=int(n),
                    )
                )
            pairs = [
                (fit.w, grad(model, fit.w, train[n].features, train[n].labels))
                for n, fit in zip(chosen, fits)
            ]
            w, gbar = aggregate(pairs, weights[chosen])
            _finish_round(
                trace, model, train, test, w, gbar, t,
                [f.iterations for f in fits], all(f.certified for f in fits), t0,
            )
    except DivergenceError as err:
        err.round_index = len(trace.records) + 1
        err.trace = trace
        raise
    trace.final_w = w
    return trace


def run_fedavg(
    cfg: TrainConfig,
    model: LossModel,
    train: list[UEDataset],
    test: list[UEDataset] | None = None,
) -> TrainingTrace:
    """Baseline: ``K_l`` plain descent steps on each local loss, then average
    the parameters.  ``eta`` and ``theta`` are ignored.

    With ``K_l = 1``, full batches, and every node sampled this reduces to
    centralized gradient descent on the weighted global loss.
    """
    cfg.validate(len(train))
    dim = model.dim(train[0].dim)
    weights = np.array([ds.weight for ds in train])
    w = np.zeros(dim)
    trace = TrainingTrace(algo="fedavg")
    try:
        for t in range(1, cfg.K_g + 1):
            t0 = time.perf_counter()
            chosen = _sample_nodes(cfg, len(train), t)
            locals_: list[np.ndarray] = []
            for n in chosen:
                ds = train[n]
                rng = _node_round_rng(cfg.seed, t, int(n))
                z = w.copy()
                # blowups surface as DivergenceError, not overflow warnings
                with np.errstate(over="ignore", invalid="ignore"):
                    for _ in range(cfg.K_l):
                        if cfg.batch is None:
                            idx = None
                        else:
                            size = min(cfg.batch, ds.n_samples)
                            idx = rng.choice(ds.n_samples, size=size, replace=False)
                        z = z - cfg.h * grad(model, z, ds.features, ds.labels, batch=idx)
                        if not np.all(np.isfinite(z)):
                            raise DivergenceError(int(n))
                locals_.append(z)
            pairs = [
                (z, grad(model, z, train[n].features, train[n].labels))
                for n, z in zip(chosen, locals_)
            ]
            w, gbar = aggregate(pairs, weights[chosen])
            _finish_round(
                trace, model, train, test, w, gbar, t,
                [cfg.K_l] * len(chosen), True, t0,
            )
    except DivergenceError as err:
        err.round_index = len(trace.records) + 1
        err.trace = trace
        raise
    trace.final_w = w
    return trace
