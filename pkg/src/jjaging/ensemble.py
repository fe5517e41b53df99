"""Chip-level Monte Carlo: junction-to-junction variability and aggregates.

A test chip carries 16 nominally identical junctions.  Device-to-device
spread enters through the initial resistance (normal, truncated positive),
the aging amplitude and early-time offset (normal, truncated positive), and
the aging timescale (log-normal: normal in ln tau, matching the asymmetric
timescale histograms seen across a chip).  Timescale heterogeneity is
carried as a per-junction scale factor applied to every environment, i.e.
it is attributed to the environment-coupled channel, which is what makes
the resistance spread grow under ambient storage.

Fabrication failures are modeled as open junctions (Bernoulli per
junction): they report no resistance and are excluded from aggregates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import InsufficientDataError, ParameterError, ValidationError
from .model import AgingParams
from .trajectory import (
    AnnealEvent,
    JunctionProfile,
    SimConfig,
    StorageSchedule,
    simulate_trajectory,
)

__all__ = [
    "OPEN_RESISTANCE_THRESHOLD_OHM",
    "ChipSpec",
    "MeasurementRecord",
    "ChipDataset",
    "DrawnChip",
    "draw_chip",
    "simulate_chip",
    "coefficient_of_variation",
    "aggregate_series",
]

# Ingestion rule for real data: resistances above this (or non-finite
# slopes) are treated as open junctions.
OPEN_RESISTANCE_THRESHOLD_OHM = 1.0e6

FLAGS = ("ok", "open", "excluded")


@dataclass(frozen=True)
class ChipSpec:
    """Statistical description of one chip's junction population."""

    r0_mean_ohm: float
    r0_cv: float
    a_mean: float
    a_sd: float = 0.0
    log_tau_mean: float = math.log(1.2e4)
    log_tau_sd: float = 0.0
    b_mean: float = 1.0
    b_sd: float = 0.0
    n_junctions: int = 16
    open_prob: float = 0.0
    noise_sigma: float = 0.003

    def __post_init__(self):
        if self.n_junctions < 1:
            raise ValidationError("n_junctions must be >= 1")
        if self.r0_mean_ohm <= 0:
            raise ParameterError("r0_mean_ohm must be > 0")
        if self.a_mean < 0 or self.b_mean <= 0:
            raise ParameterError("a_mean must be >= 0 and b_mean > 0")
        for name in ("r0_cv", "a_sd", "log_tau_sd", "b_sd", "noise_sigma"):
            if getattr(self, name) < 0:
                raise ParameterError(f"{name} must be >= 0")
        if not 0.0 <= self.open_prob < 1.0:
            raise ParameterError("open_prob must be in [0, 1)")


@dataclass(frozen=True)
class MeasurementRecord:
    """One timestamped resistance measurement of one junction."""

    chip_id: str
    junction_id: int
    t_s: float
    r_ohm: float | None
    env_label: str = "unknown"
    flag: str = "ok"

    def __post_init__(self):
        if self.flag not in FLAGS:
            raise ValidationError(f"unknown flag {self.flag!r}")
        if self.flag != "open":
            if self.r_ohm is None or not (np.isfinite(self.r_ohm) and self.r_ohm > 0):
                raise ValidationError(
                    f"junction {self.junction_id} at t={self.t_s}: resistance must be "
                    "finite and > 0 unless flagged open"
                )


@dataclass(frozen=True)
class ChipDataset:
    """Measurement records sorted by (junction_id, t_s)."""

    records: tuple[MeasurementRecord, ...]
    spec: ChipSpec | None = None
    schedule: StorageSchedule | None = None

    def __post_init__(self):
        ordered = tuple(sorted(self.records, key=lambda r: (r.junction_id, r.t_s)))
        object.__setattr__(self, "records", ordered)

    def junction_ids(self) -> list[int]:
        return sorted({r.junction_id for r in self.records})

    def for_junction(self, junction_id: int) -> list[MeasurementRecord]:
        return [r for r in self.records if r.junction_id == junction_id]


@dataclass(frozen=True)
class DrawnChip:
    """Per-junction aging parameters plus open flags realized from a ChipSpec."""

    junctions: tuple[tuple[AgingParams, bool], ...]
    spec: ChipSpec

    def __iter__(self):
        return iter(self.junctions)

    def __len__(self):
        return len(self.junctions)


def _truncated_normal(rng: np.random.Generator, mean: float, sd: float) -> float:
    """Normal draw redrawn until positive; degenerate sd returns the mean."""
    if sd == 0.0:
        return mean
    for _ in range(10_000):
        v = mean + sd * float(rng.standard_normal())
        if v > 0:
            return v
    raise ParameterError(
        f"truncated normal(mean={mean}, sd={sd}) failed to produce a positive draw"
    )


def draw_chip(spec: ChipSpec, seed: int) -> DrawnChip:
    """Realize per-junction parameters from the chip population.

    Draw order per junction is fixed (r0, a, ln tau, b, open) so results are
    reproducible for a given seed.  With all spreads zero every junction
    equals the population means.
    """
    rng = np.random.default_rng(seed)
    junctions = []
    for _ in range(spec.n_junctions):
        r0 = _truncated_normal(rng, spec.r0_mean_ohm, spec.r0_cv * spec.r0_mean_ohm)
        a = spec.a_mean if spec.a_sd == 0 else _truncated_normal(rng, spec.a_mean, spec.a_sd)
        tau = math.exp(spec.log_tau_mean + spec.log_tau_sd * float(rng.standard_normal()))
        b = _truncated_normal(rng, spec.b_mean, spec.b_sd)
        is_open = bool(rng.random() < spec.open_prob)
        junctions.append((AgingParams(a=a, tau_s=tau, b=b, r0_ohm=r0), is_open))
    return DrawnChip(junctions=tuple(junctions), spec=spec)


def _junction_seed(seed: int, junction_id: int, stream: int) -> int:
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(stream, junction_id))
    return int(ss.generate_state(1)[0])


def simulate_chip(
    chip: DrawnChip,
    schedule: StorageSchedule,
    events: Sequence[AnnealEvent],
    sample_t_s: Sequence[float],
    cfg: SimConfig,
    seed: int,
    chip_id: str = "chip",
) -> ChipDataset:
    """Simulate every junction of a drawn chip through a shared schedule.

    The drawn per-junction timescale is interpreted in the first segment's
    environment and carried to the others as a common scale factor.  Records
    get independent multiplicative measurement noise (1 + eta), eta normal
    with sd ``chip.spec.noise_sigma``; open junctions yield flag="open" rows
    with no resistance.  Events carrying ``junction_ids`` apply only to
    those junctions.
    """
    home_kind = schedule.segments[0][1].kind
    if home_kind not in cfg.env_tau_s:
        raise ValidationError(f"config lacks a timescale for {home_kind.value!r}")
    tau_home = cfg.env_tau_s[home_kind]
    noise_sigma = chip.spec.noise_sigma

    records: list[MeasurementRecord] = []
    for j, (params, is_open) in enumerate(chip.junctions):
        if is_open:
            for t in sample_t_s:
                records.append(
                    MeasurementRecord(
                        chip_id=chip_id, junction_id=j, t_s=float(t), r_ohm=None,
                        env_label=schedule.environment_at(float(t)).kind.value,
                        flag="open",
                    )
                )
            continue
        profile = JunctionProfile(a=params.a, b=params.b, tau_scale=params.tau_s / tau_home)
        ev_j = [ev for ev in events if ev.junction_ids is None or j in ev.junction_ids]
        traj = simulate_trajectory(
            schedule, ev_j, cfg, params.r0_ohm, sample_t_s,
            seed=_junction_seed(seed, j, 0), profile=profile,
        )
        noise_rng = np.random.default_rng(_junction_seed(seed, j, 1))
        eta = noise_sigma * noise_rng.standard_normal(len(traj))
        for (t, r), e in zip(traj, eta):
            records.append(
                MeasurementRecord(
                    chip_id=chip_id, junction_id=j, t_s=t, r_ohm=r * (1.0 + e),
                    env_label=schedule.environment_at(t).kind.value, flag="ok",
                )
            )
    return ChipDataset(records=tuple(records), spec=chip.spec, schedule=schedule)


def coefficient_of_variation(values: Iterable) -> float:
    """Sample standard deviation over mean, ignoring open/excluded entries.

    Accepts plain resistances (None/NaN dropped) or MeasurementRecords
    (non-"ok" flags dropped).  Needs at least two usable values.
    """
    xs = []
    for v in values:
        if isinstance(v, MeasurementRecord):
            if v.flag != "ok":
                continue
            v = v.r_ohm
        if v is None:
            continue
        v = float(v)
        if not np.isfinite(v):
            continue
        xs.append(v)
    if len(xs) < 2:
        raise InsufficientDataError(
            f"coefficient of variation needs >= 2 usable values, got {len(xs)}"
        )
    arr = np.asarray(xs)
    return float(np.std(arr, ddof=1) / np.mean(arr))


def aggregate_series(
    ds: ChipDataset, window_s: float = 600.0
) -> list[tuple[float, float, float, int]]:
    """Per-time aggregates (t_s, mean R, CV, n_used) over usable records.

    Records are grouped by sample time: times within ``window_s`` of a
    group's first time belong to that group.  Groups with a single usable
    record report CV = nan with n_used = 1.
    """
    usable = [r for r in ds.records if r.flag == "ok"]
    if not usable:
        raise InsufficientDataError("dataset has no usable records")
    usable.sort(key=lambda r: r.t_s)
    groups: list[list[MeasurementRecord]] = []
    anchor = None
    for rec in usable:
        if anchor is None or rec.t_s - anchor > window_s:
            groups.append([rec])
            anchor = rec.t_s
        else:
            groups[-1].append(rec)
    out = []
    for grp in groups:
        rs = np.asarray([r.r_ohm for r in grp])
        t = float(np.mean([r.t_s for r in grp]))
        mean = float(np.mean(rs))
        cv = float(np.std(rs, ddof=1) / mean) if len(rs) >= 2 else float("nan")
        out.append((t, mean, cv, len(rs)))
    return out
