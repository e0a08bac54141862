"""Device and system parameters for the wireless allocation problem.

A profile describes one user equipment (UE): how much work a training round
costs it (cycles per bit times bits), its CPU frequency range and switched
capacitance, and its uplink channel (mean gain, power limits, payload size).
``SystemParams`` carries the shared quantities: bandwidth, noise power, the
energy/time trade weight ``kappa``, and the expected UE count.

``sample_instance`` draws randomized instances at realistic scales:
megabyte-range payloads, GHz CPUs, TDMA uplink over 1 MHz with fourth-power
path loss and exponential small-scale fading.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

MB_BITS = 8e6  # 1 MB = 1e6 bytes

REFERENCE_GAIN = 1e-4  # -40 dB at the 1 m reference distance
PATH_LOSS_EXP = 4.0


@dataclass(frozen=True)
class UEProfile:
    c_n: float      # cycles per bit
    D_n: float      # payload, bits
    alpha_n: float  # effective switched capacitance, J / (cycle Hz^2)
    f_min: float    # Hz
    f_max: float    # Hz
    hbar_n: float   # mean channel gain (dimensionless)
    p_min: float    # W
    p_max: float    # W
    s_n: float      # uplink payload per round, nats

    def __post_init__(self) -> None:
        if min(self.c_n, self.D_n, self.alpha_n, self.hbar_n, self.s_n) <= 0:
            raise ValueError("c_n, D_n, alpha_n, hbar_n, s_n must all be > 0")
        if not 0 < self.f_min <= self.f_max:
            raise ValueError("need 0 < f_min <= f_max")
        if not 0 < self.p_min <= self.p_max:
            raise ValueError("need 0 < p_min <= p_max")

    @property
    def cycles(self) -> float:
        """Total CPU work per round, cycles."""
        return self.c_n * self.D_n


@dataclass(frozen=True)
class SystemParams:
    B: float      # uplink bandwidth, Hz
    N0: float     # noise power, W
    kappa: float  # energy cost of one second of training time, J/s
    N: int        # UE count

    def __post_init__(self) -> None:
        if self.B <= 0 or self.N0 <= 0:
            raise ValueError("need B > 0 and N0 > 0")
        if self.kappa <= 0:
            raise ValueError("need kappa > 0")
        if self.N < 1:
            raise ValueError("need N >= 1")


def mean_gain(distance_m: float) -> float:
    """Mean channel gain at the given distance under the path-loss model."""
    return REFERENCE_GAIN * distance_m**-PATH_LOSS_EXP


def sample_instance(
    n_ues: int = 5,
    seed: int = 0,
    kappa: float = 0.5,
    *,
    payload_mb: tuple[float, float] = (5.0, 10.0),
    cycles_per_bit: tuple[float, float] = (10.0, 30.0),
    f_max_ghz: tuple[float, float] = (1.0, 2.0),
    f_min_ghz: float = 0.3,
    distance_m: tuple[float, float] = (2.0, 50.0),
    alpha: float = 2e-28,
    power_w: tuple[float, float] = (0.2, 1.0),
    payload_nats: float = 25_000.0,
    bandwidth: float = 1e6,
    noise: float = 1e-10,
) -> tuple[list[UEProfile], SystemParams]:
    """Randomized instance: uniform payloads/cycle counts/CPU caps, UEs
    scattered uniformly in distance with exponentially faded channel gains."""
    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(10,)))
    ues = []
    for _ in range(n_ues):
        dist = rng.uniform(*distance_m)
        gain = rng.exponential(mean_gain(dist))
        ues.append(
            UEProfile(
                c_n=rng.uniform(*cycles_per_bit),
                D_n=rng.uniform(*payload_mb) * MB_BITS,
                alpha_n=alpha,
                f_min=f_min_ghz * 1e9,
                f_max=rng.uniform(*f_max_ghz) * 1e9,
                hbar_n=gain,
                p_min=power_w[0],
                p_max=power_w[1],
                s_n=payload_nats,
            )
        )
    return ues, SystemParams(B=bandwidth, N0=noise, kappa=kappa, N=n_ues)


def _ratio_spread(mean: float, ratio: float, n: int) -> np.ndarray:
    """n values evenly spaced between lo and hi with hi/lo fixed by ``ratio``
    (lo = ratio * hi) and the arithmetic mean pinned to ``mean``."""
    if not 0 < ratio <= 1:
        raise ValueError("ratio must be in (0, 1]")
    hi = 2.0 * mean / (1.0 + ratio)
    lo = ratio * hi
    return np.linspace(lo, hi, n)


def heterogeneous_instance(
    n_ues: int = 50,
    kappa: float = 0.5,
    *,
    payload_ratio: float = 1.0,
    distance_ratio: float = 1.0,
    payload_mean_mb: float = 7.5,
    distance_mean_m: float = 26.0,
    cycles_per_bit: float = 20.0,
    f_max_ghz: float = 2.0,
    f_min_ghz: float = 0.3,
    alpha: float = 2e-28,
    power_w: tuple[float, float] = (0.2, 1.0),
    payload_nats: float = 25_000.0,
    bandwidth: float = 1e6,
    noise: float = 1e-10,
) -> tuple[list[UEProfile], SystemParams]:
    """Deterministic instance with controlled heterogeneity levels.

    ``payload_ratio`` fixes min/max of the per-UE payload spread (CPU-side
    heterogeneity); ``distance_ratio`` fixes min/max of the UE distances
    (channel-side heterogeneity).  Gains use the mean path loss with no
    fading so the spread is exactly the requested one.
    """
    payloads = _ratio_spread(payload_mean_mb, payload_ratio, n_ues) * MB_BITS
    dists = _ratio_spread(distance_mean_m, distance_ratio, n_ues)
    ues = [
        UEProfile(
            c_n=cycles_per_bit,
            D_n=float(d),
            alpha_n=alpha,
            f_min=f_min_ghz * 1e9,
            f_max=f_max_ghz * 1e9,
            hbar_n=mean_gain(float(r)),
            p_min=power_w[0],
            p_max=power_w[1],
            s_n=payload_nats,
        )
        for d, r in zip(payloads, dists)
    ]
    return ues, SystemParams(B=bandwidth, N0=noise, kappa=kappa, N=n_ues)


def save_instance(
    path: str | Path, ues: list[UEProfile], sys: SystemParams, *, rho: float | None = None
) -> None:
    """Write an instance as JSON: {"system": ..., "ues": [...], "rho": ...}."""
    doc: dict = {"system": asdict(sys), "ues": [asdict(u) for u in ues]}
    if rho is not None:
        doc["rho"] = rho
    with Path(path).open("w") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def load_instance(path: str | Path) -> tuple[list[UEProfile], SystemParams, dict]:
    """Read an instance JSON; returns (ues, system, extras).

    ``extras`` holds any top-level keys beyond the two required ones (for
    example ``rho``).  The declared UE count must match the array length.
    """
    with Path(path).open() as fh:
        doc = json.load(fh)
    try:
        sys = SystemParams(**doc["system"])
        ues = [UEProfile(**u) for u in doc["ues"]]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"{path}: malformed instance file ({exc})") from None
    if sys.N != len(ues):
        raise ValueError(f"{path}: system.N = {sys.N} but {len(ues)} UEs listed")
    extras = {k: v for k, v in doc.items() if k not in ("system", "ues")}
    return ues, sys, extras
