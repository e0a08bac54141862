"""Synthetic federated datasets and the delimited on-disk format.

Feature rows for node ``n`` are drawn from N(0, sigma_n * S) where S is a
fixed diagonal with a power-law decay chosen so that the resulting quadratic
objectives have roughly the requested condition number.  Labels come from one
shared hidden linear model plus Gaussian noise, so every node optimizes a
facet of the same ground truth while seeing differently scaled inputs.

On disk a dataset is a directory with ``train/ue_XXX.csv`` and
``test/ue_XXX.csv`` (header ``f0,...,f{d-1},label``) plus a JSON manifest.
Floats are written with ``repr`` so a write/read round trip is bit exact.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

LABEL_NOISE_STD = 0.05

# Spawn-key namespaces so every random stream is a pure function of the seed.
_GLOBAL_STREAM = 0
_NODE_STREAM = 1


class DatasetFormatError(ValueError):
    """Raised when an on-disk dataset file cannot be parsed."""


@dataclass(frozen=True)
class SyntheticSpec:
    """Knobs of the synthetic generator.

    ``size_law`` skews per-node sample counts toward the small end of
    ``size_range`` (counts are ``min + floor((max - min) * u**size_law)``
    for uniform u), mimicking heavy-tailed data ownership.
    """

    n_users: int
    dim: int
    target_rho: float
    size_range: tuple[int, int]
    size_law: float = 3.0
    split: float = 0.75
    seed: int = 0

    def __post_init__(self) -> None:
        lo, hi = self.size_range
        if self.n_users < 1:
            raise ValueError("need n_users >= 1")
        if self.dim < 2:
            raise ValueError("need dim >= 2")
        if self.target_rho < 1.0:
            raise ValueError("need target_rho >= 1")
        if not (2 <= lo <= hi):
            raise ValueError("size_range must satisfy 2 <= min <= max")
        if not 0.0 < self.split < 1.0:
            raise ValueError("split must be in (0, 1)")
        if self.size_law <= 0.0:
            raise ValueError("size_law must be > 0")


@dataclass(frozen=True)
class UEDataset:
    """One node's rows: features (D, d), labels (D,), aggregation weight."""

    features: np.ndarray
    labels: np.ndarray
    weight: float

    def __post_init__(self) -> None:
        if self.features.ndim != 2 or self.features.shape[0] < 1:
            raise ValueError("features must be a non-empty 2-D array")
        if self.labels.shape != (self.features.shape[0],):
            raise ValueError("labels must be 1-D and match the feature rows")
        if not 0.0 < self.weight <= 1.0:
            raise ValueError("weight must be in (0, 1]")

    @property
    def n_samples(self) -> int:
        return self.features.shape[0]

    @property
    def dim(self) -> int:
        return self.features.shape[1]


def _node_rng(seed: int, node: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(_NODE_STREAM, node)))


def _with_weights(parts: list[tuple[np.ndarray, np.ndarray]]) -> list[UEDataset]:
    total = sum(x.shape[0] for x, _ in parts)
    return [UEDataset(x, y, x.shape[0] / total) for x, y in parts]


def generate_synthetic(spec: SyntheticSpec) -> tuple[list[UEDataset], list[UEDataset]]:
    """Draw the corpus; returns (train, test) lists indexed by node."""
    lo, hi = spec.size_range
    decay = math.log(spec.target_rho) / math.log(spec.dim)
    cov_diag = np.arange(1, spec.dim + 1, dtype=float) ** (-decay)
    scale = np.sqrt(cov_diag)

    global_rng = np.random.default_rng(
        np.random.SeedSequence(entropy=spec.seed, spawn_key=(_GLOBAL_STREAM,))
    )
    w_true = global_rng.standard_normal(spec.dim)

    train_parts: list[tuple[np.ndarray, np.ndarray]] = []
    test_parts: list[tuple[np.ndarray, np.ndarray]] = []
    for n in range(spec.n_users):
        rng = _node_rng(spec.seed, n)
        u = rng.uniform()
        count = lo + int((hi - lo) * u**spec.size_law)
        sigma = rng.uniform(1.0, 10.0)
        x = rng.standard_normal((count, spec.dim)) * (math.sqrt(sigma) * scale)
        y = x @ w_true + rng.normal(0.0, LABEL_NOISE_STD, count)
        perm = rng.permutation(count)
        n_train = min(count - 1, max(1, round(spec.split * count)))
        tr, te = perm[:n_train], perm[n_train:]
        train_parts.append((x[tr], y[tr]))
        test_parts.append((x[te], y[te]))
    return _with_weights(train_parts), _with_weights(test_parts)


def _write_rows(path: Path, features: np.ndarray, labels: np.ndarray) -> None:
    dim = features.shape[1]
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"f{j}" for j in range(dim)] + ["label"])
        for row, lab in zip(features, labels):
            writer.writerow([repr(float(v)) for v in row] + [repr(float(lab))])


def save_csv(datasets: list[UEDataset], directory: str | Path) -> list[Path]:
    """Write one CSV per node into ``directory``; returns the paths."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for n, ds in enumerate(datasets):
        path = directory / f"ue_{n:03d}.csv"
        _write_rows(path, ds.features, ds.labels)
        paths.append(path)
    return paths


def load_csv(paths: list[str | Path], label_column: str = "label") -> list[UEDataset]:
    """Read per-node CSVs; weights are recomputed from row counts.

    Raises :class:`DatasetFormatError` with the offending file and line for
    malformed headers, rows of the wrong width, non-numeric fields, or empty
    files.  All files must agree on the feature dimension.
    """
    if not paths:
        raise DatasetFormatError("no dataset files given")
    parts: list[tuple[np.ndarray, np.ndarray]] = []
    expect_dim: int | None = None
    for path in paths:
        path = Path(path)
        with path.open(newline="") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise DatasetFormatError(f"{path}: empty file") from None
            if label_column not in header:
                raise DatasetFormatError(f"{path}:1: no {label_column!r} column in header")
            label_at = header.index(label_column)
            dim = len(header) - 1
            if expect_dim is None:
                expect_dim = dim
            elif dim != expect_dim:
                raise DatasetFormatError(
                    f"{path}:1: {dim} feature columns, other files have {expect_dim}"
                )
            feats: list[list[float]] = []
            labs: list[float] = []
            for lineno, row in enumerate(reader, start=2):
                if len(row) != len(header):
                    raise DatasetFormatError(
                        f"{path}:{lineno}: {len(row)} fields, header has {len(header)}"
                    )
                try:
                    vals = [float(v) for v in row]
                except ValueError as exc:
                    raise DatasetFormatError(f"{path}:{lineno}: {exc}") from None
                labs.append(vals.pop(label_at))
                feats.append(vals)
            if not feats:
                raise DatasetFormatError(f"{path}: no data rows")
        parts.append((np.array(feats), np.array(labs)))
    return _with_weights(parts)


def save_dataset(
    directory: str | Path, spec: SyntheticSpec, train: list[UEDataset], test: list[UEDataset]
) -> dict:
    """Write train/test CSVs plus a manifest; returns the manifest dict."""
    directory = Path(directory)
    train_paths = save_csv(train, directory / "train")
    test_paths = save_csv(test, directory / "test")
    record = {
        "spec": {**asdict(spec), "size_range": list(spec.size_range)},
        "seed": spec.seed,
        "train_sizes": [ds.n_samples for ds in train],
        "test_sizes": [ds.n_samples for ds in test],
        "train_files": [p.name for p in train_paths],
        "test_files": [p.name for p in test_paths],
    }
    with (directory / "manifest.json").open("w") as fh:
        json.dump(record, fh, indent=2)
        fh.write("\n")
    return record


def load_dataset(directory: str | Path) -> tuple[list[UEDataset], list[UEDataset], dict]:
    """Read a dataset directory written by :func:`save_dataset`."""
    directory = Path(directory)
    manifest_path = directory / "manifest.json"
    if not manifest_path.exists():
        raise DatasetFormatError(f"{manifest_path}: not found")
    with manifest_path.open() as fh:
        record = json.load(fh)
    train = load_csv([directory / "train" / name for name in record["train_files"]])
    test = load_csv([directory / "test" / name for name in record["test_files"]])
    return train, test, record
