"""Command-line front end.

Four subcommands cover the full pipeline:

- ``datagen``   synthesize a federated CSV dataset from a config file
- ``train``     run federated training on a dataset directory, write a trace
- ``allocate``  solve the resource allocation for one trade-off weight
- ``pareto``    sweep the weight over a grid and emit the frontier

Every run writes its delimited outputs plus rendered figures into ``--out``
and finishes with a single ``manifest.json`` recording content hashes of all
inputs and outputs.  Exit codes: 0 success, 2 input error, 3 numerical
failure (divergence keeps the partial trace on disk).
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys as _sys
import time
from pathlib import Path

import numpy as np

from .datagen import (
    DatasetFormatError,
    SyntheticSpec,
    generate_synthetic,
    load_dataset,
    save_dataset,
)
from .losses import LOSS_KINDS, LossModel
from .manifest import RunManifest, atomic_write_text, hash_files, write_run_manifest
from .rates import LocalSolverConstants
from .training import DivergenceError, TrainConfig, run_fedavg, run_fedl
from .wireless.combined import heterogeneity, pareto_sweep, solve_fedl_alloc
from .wireless.profiles import load_instance
from .wireless.tuning import InfeasibleError
from .wireless.uplink import power_of_tau
from . import report

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERIC = 3

_MAX_SEED = 2**64


class _InputError(Exception):
    """Bad config, flag, or file content; maps to exit code 2."""


def _fail(msg: str) -> None:
    raise _InputError(msg)


def _load_json(path: str | Path) -> dict:
    with open(path) as fh:
        doc = json.load(fh)
    if not isinstance(doc, dict):
        _fail(f"{path}: expected a JSON object at top level")
    return doc


def _jsonable(x):
    """Recursively make a value JSON-safe; non-finite floats become None."""
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (np.floating, float)):
        v = float(x)
        return v if math.isfinite(v) else None
    if isinstance(x, (np.integer, int)):
        return int(x)
    if isinstance(x, np.ndarray):
        return [_jsonable(v) for v in x.tolist()]
    return x


def _check_keys(doc: dict, allowed: set[str], required: set[str], what: str) -> None:
    unknown = set(doc) - allowed
    if unknown:
        _fail(f"{what}: unknown keys {sorted(unknown)}")
    missing = required - set(doc)
    if missing:
        _fail(f"{what}: missing keys {sorted(missing)}")


def _cell(v) -> str:
    # repr of a plain float: shortest form that round-trips exactly
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_cell(v) for v in row))
    atomic_write_text(path, "\n".join(lines) + "\n")


def _finish_run(
    out: Path,
    command: str,
    config_path: str | None,
    seed: int | None,
    inputs: dict[str, str],
    output_paths: list[Path],
    t0: float,
    extra: dict | None = None,
) -> None:
    outputs = hash_files(sorted(output_paths), root=out)
    man = RunManifest(
        command=command,
        config_path=config_path,
        seed=seed,
        inputs=inputs,
        outputs=outputs,
        wall_time_s=time.perf_counter() - t0,
    )
    write_run_manifest(out, man, extra=extra)


# ---------------------------------------------------------------- datagen


_SPEC_REQUIRED = {"n_users", "dim", "target_rho", "size_range"}
_SPEC_ALLOWED = _SPEC_REQUIRED | {"size_law", "split", "seed"}


def _cmd_datagen(args: argparse.Namespace) -> int:
    t0 = time.perf_counter()
    doc = _load_json(args.config)
    _check_keys(doc, _SPEC_ALLOWED, _SPEC_REQUIRED, args.config)
    if args.seed is not None:
        doc = {**doc, "seed": args.seed}
    sr = doc.get("size_range")
    if not (isinstance(sr, (list, tuple)) and len(sr) == 2):
        _fail(f"{args.config}: size_range must be a [min, max] pair")
    spec = SyntheticSpec(**{**doc, "size_range": (int(sr[0]), int(sr[1]))})

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    train, test = generate_synthetic(spec)
    record = save_dataset(out, spec, train, test)

    written = [out / "train" / n for n in record["train_files"]]
    written += [out / "test" / n for n in record["test_files"]]
    if not args.no_plot:
        written.append(
            report.plot_dataset_sizes(
                record["train_sizes"], record["test_sizes"], out / "sizes.png"
            )
        )
    inputs = hash_files([args.config])
    _finish_run(out, "datagen", args.config, spec.seed, inputs, written, t0, extra=record)
    print(f"datagen: {spec.n_users} nodes, {sum(record['train_sizes'])} train rows -> {out}")
    return EXIT_OK


# ------------------------------------------------------------------ train


_TRAIN_REQUIRED = {"eta", "theta", "K_g", "K_l", "h"}
_TRAIN_ALLOWED = _TRAIN_REQUIRED | {"batch", "S", "seed", "loss"}
_LOSS_ALLOWED = {"kind", "classes", "reg"}


def _train_config(doc: dict, seed_flag: int | None, what: str) -> tuple[TrainConfig, LossModel]:
    _check_keys(doc, _TRAIN_ALLOWED, _TRAIN_REQUIRED, what)
    loss_doc = doc.get("loss", {"kind": "mse-linear"})
    _check_keys(loss_doc, _LOSS_ALLOWED, {"kind"}, f"{what}: loss")
    if loss_doc["kind"] not in LOSS_KINDS:
        _fail(f"{what}: loss kind must be one of {sorted(LOSS_KINDS)}")
    model = LossModel(
        kind=loss_doc["kind"],
        classes=int(loss_doc.get("classes", 0)),
        reg=float(loss_doc.get("reg", 0.0)),
    )
    batch = doc.get("batch")
    if isinstance(batch, str):
        if batch.upper() != "FULL":
            _fail(f'{what}: batch must be an integer, null, or "FULL"')
        batch = None
    sub = doc.get("S")
    cfg = TrainConfig(
        eta=float(doc["eta"]),
        theta=float(doc["theta"]),
        K_g=int(doc["K_g"]),
        K_l=int(doc["K_l"]),
        h=float(doc["h"]),
        batch=None if batch is None else int(batch),
        S=None if sub is None else int(sub),
        seed=int(doc.get("seed", 0)) if seed_flag is None else seed_flag,
    )
    return cfg, model


def _cmd_train(args: argparse.Namespace) -> int:
    t0 = time.perf_counter()
    doc = _load_json(args.config)
    cfg, model = _train_config(doc, args.seed, args.config)
    train, test, record = load_dataset(args.dataset_dir)
    cfg.validate(len(train))

    ds_dir = Path(args.dataset_dir)
    input_paths = [Path(args.config), ds_dir / "manifest.json"]
    input_paths += [ds_dir / "train" / n for n in record["train_files"]]
    input_paths += [ds_dir / "test" / n for n in record["test_files"]]
    inputs = hash_files(input_paths)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    run = run_fedl if args.algo == "fedl" else run_fedavg
    failure: str | None = None
    try:
        trace = run(cfg, model, train, test)
    except DivergenceError as err:
        trace = err.trace
        failure = str(err)

    written: list[Path] = []
    trace_path = out / "trace.csv"
    trace.write_csv(trace_path)
    written.append(trace_path)

    last = trace.records[-1] if trace.records else None
    summary = {
        "algo": trace.algo,
        "rounds_run": len(trace.records),
        "final_loss": last.global_loss if last else None,
        "final_accuracy": last.test_accuracy if last else None,
        "final_grad_bar_norm": last.grad_bar_norm if last else None,
        "diverged": failure is not None,
        "error": failure,
        "n_nodes": len(train),
        "dim": int(train[0].features.shape[1]),
        "config": {**doc, "seed": cfg.seed},
    }
    summary_path = out / "summary.json"
    atomic_write_text(summary_path, json.dumps(_jsonable(summary), indent=2) + "\n")
    written.append(summary_path)

    if not args.no_plot and trace.records:
        written.append(report.plot_trace(trace, out / "trace.png"))

    _finish_run(out, "train", args.config, cfg.seed, inputs, written, t0)
    if failure is not None:
        print(f"error: {failure}; partial trace kept at {trace_path}", file=_sys.stderr)
        return EXIT_NUMERIC
    print(
        f"train[{trace.algo}]: {len(trace.records)} rounds, "
        f"final loss {last.global_loss:.6g} -> {out}"
    )
    return EXIT_OK


# --------------------------------------------------------------- allocate


def _load_alloc_inputs(args: argparse.Namespace):
    ues, sys_params, extras = load_instance(args.instance)
    kappa = getattr(args, "kappa", None)
    if kappa is not None:
        sys_params = dataclasses.replace(sys_params, kappa=kappa)
    rho = args.rho if args.rho is not None else extras.get("rho")
    if rho is None:
        _fail(f"{args.instance}: no curvature ratio on file; pass --rho")
    rho = float(rho)
    if rho < 1.0:
        _fail("--rho must be >= 1")
    consts = LocalSolverConstants.for_gradient_descent(rho)
    return ues, sys_params, consts, rho


_ALLOC_HEADER = [
    "ue", "group", "f_star_hz", "tau_star_s", "energy_cp_j", "energy_co_j", "power_w",
]


def _cmd_allocate(args: argparse.Namespace) -> int:
    t0 = time.perf_counter()
    ues, sys_params, consts, rho = _load_alloc_inputs(args)
    inputs = hash_files([args.instance])
    sol = solve_fedl_alloc(ues, sys_params, consts, rho, gap_ratio=args.gap_ratio)

    group = {}
    for name, members in zip(("N1", "N2", "N3"), sol.sub1.partition):
        for n in members:
            group[n] = name
    rows = []
    for n, ue in enumerate(ues):
        tau = float(sol.sub2.tau_star[n])
        rows.append([
            n,
            group[n],
            float(sol.sub1.f_star[n]),
            tau,
            float(sol.sub1.energy_cp[n]),
            float(sol.sub2.energy_co[n]),
            power_of_tau(ue, sys_params, tau),
        ])

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    alloc_path = out / "allocation.csv"
    _write_csv(alloc_path, _ALLOC_HEADER, rows)
    written.append(alloc_path)

    l_cp, l_co = heterogeneity(ues, sys_params)
    summary = {
        "kappa": sol.kappa,
        "rho": rho,
        "gap_ratio": args.gap_ratio,
        "n_ues": len(ues),
        "region": sol.region.region,
        "kappa_thresholds": {
            "ab": sol.region.kappa_ab,
            "bc": sol.region.kappa_bc,
            "cd": sol.region.kappa_cd,
            "ordered": sol.region.ordered,
        },
        "T_cp_star": sol.sub1.T_cp_star,
        "T_co_star": sol.sub2.T_co_star,
        "theta_star": sol.sub3.theta_star,
        "eta_star": sol.sub3.eta_star,
        "Theta": sol.sub3.Theta,
        "K_l": sol.K_l,
        "K_g": sol.K_g,
        "E_g": sol.E_g,
        "T_g": sol.T_g,
        "total_energy": sol.total_energy,
        "total_time": sol.total_time,
        "objective": sol.objective,
        "L_cp": l_cp,
        "L_co": l_co,
    }
    summary_path = out / "summary.json"
    atomic_write_text(summary_path, json.dumps(_jsonable(summary), indent=2) + "\n")
    written.append(summary_path)

    if not args.no_plot:
        written.append(report.plot_allocation(ues, sys_params, sol, out / "allocation.png"))

    _finish_run(out, "allocate", None, None, inputs, written, t0)
    print(
        f"allocate: region {sol.region.region}, contraction {sol.sub3.Theta:.4g}, "
        f"{sol.K_g:.1f} rounds -> {out}"
    )
    return EXIT_OK


# ----------------------------------------------------------------- pareto


def _parse_kappa_grid(text: str) -> np.ndarray:
    parts = text.split(":")
    if len(parts) not in (3, 4):
        _fail(f"--kappa-grid {text!r}: expected MIN:MAX:COUNT[:log|lin]")
    try:
        lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        _fail(f"--kappa-grid {text!r}: MIN, MAX must be numbers and COUNT an integer")
    scale = parts[3] if len(parts) == 4 else "log"
    if scale not in ("log", "lin"):
        _fail(f"--kappa-grid {text!r}: scale must be log or lin")
    if count <= 0:
        _fail(f"--kappa-grid {text!r}: COUNT must be positive")
    if lo <= 0.0 or hi <= 0.0:
        _fail(f"--kappa-grid {text!r}: weights must be positive")
    if count == 1:
        return np.array([lo])
    if scale == "log":
        return np.geomspace(lo, hi, count)
    return np.linspace(lo, hi, count)


def _cmd_pareto(args: argparse.Namespace) -> int:
    t0 = time.perf_counter()
    ues, sys_params, consts, rho = _load_alloc_inputs(args)
    grid = _parse_kappa_grid(args.kappa_grid)
    inputs = hash_files([args.instance])

    points = pareto_sweep(ues, sys_params, consts, rho, grid, gap_ratio=args.gap_ratio)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    csv_path = out / "pareto.csv"
    _write_csv(
        csv_path,
        ["kappa", "total_time", "total_energy"],
        [[p.kappa, p.total_time, p.total_energy] for p in points],
    )
    written.append(csv_path)
    if not args.no_plot:
        written.append(report.plot_pareto(points, out / "pareto.png"))

    _finish_run(out, "pareto", None, None, inputs, written, t0)
    print(f"pareto: {len(points)} points over weights "
          f"[{points[0].kappa:.3g}, {points[-1].kappa:.3g}] -> {out}")
    return EXIT_OK


# ------------------------------------------------------------------ main


def _seed_arg(text: str) -> int:
    value = int(text)
    # constraint: unsigned 64-bit
    if not 0 <= value < _MAX_SEED:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return value


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fedl-lab",
        description="Federated training and wireless resource allocation toolkit.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--out", required=True, help="output directory (created if missing)")
        p.add_argument("--no-plot", action="store_true", help="skip figure rendering")

    p = sub.add_parser("datagen", help="synthesize a federated CSV dataset")
    p.add_argument("--config", required=True, help="generator config JSON")
    p.add_argument("--seed", type=_seed_arg, default=None, help="override config seed")
    common(p)
    p.set_defaults(func=_cmd_datagen)

    p = sub.add_parser("train", help="run federated training on a dataset directory")
    p.add_argument("dataset_dir", help="directory written by datagen")
    p.add_argument("--config", required=True, help="training config JSON")
    p.add_argument("--algo", choices=("fedl", "fedavg"), default="fedl")
    p.add_argument("--seed", type=_seed_arg, default=None, help="override config seed")
    common(p)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("allocate", help="solve the allocation for one weight")
    p.add_argument("instance", help="instance JSON file")
    p.add_argument("--kappa", type=float, default=None, help="override instance weight")
    p.add_argument("--rho", type=float, default=None, help="curvature ratio (else from file)")
    p.add_argument("--gap-ratio", type=float, default=math.e,
                   help="target initial/final optimality-gap ratio")
    common(p)
    p.set_defaults(func=_cmd_allocate)

    p = sub.add_parser("pareto", help="sweep the weight grid, emit the frontier")
    p.add_argument("instance", help="instance JSON file")
    p.add_argument("--kappa-grid", required=True, metavar="MIN:MAX:COUNT[:log|lin]",
                   help="weight grid, log-spaced by default")
    p.add_argument("--rho", type=float, default=None, help="curvature ratio (else from file)")
    p.add_argument("--gap-ratio", type=float, default=math.e,
                   help="target initial/final optimality-gap ratio")
    common(p)
    p.set_defaults(func=_cmd_pareto)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InfeasibleError as err:
        print(f"error: {err}", file=_sys.stderr)
        return EXIT_NUMERIC
    except ArithmeticError as err:
        print(f"error: numerical failure: {err}", file=_sys.stderr)
        return EXIT_NUMERIC
    except _InputError as err:
        print(f"error: {err}", file=_sys.stderr)
        return EXIT_INPUT
    except json.JSONDecodeError as err:
        print(f"error: bad JSON: {err}", file=_sys.stderr)
        return EXIT_INPUT
    except (DatasetFormatError, ValueError, KeyError, TypeError) as err:
        print(f"error: {err}", file=_sys.stderr)
        return EXIT_INPUT
    except OSError as err:
        print(f"error: {err}", file=_sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    raise SystemExit(main())
