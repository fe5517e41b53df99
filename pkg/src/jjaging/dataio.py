"""File formats: measurement CSV, schedule files, fit reports, plot data.

All files are plain UTF-8 text, newline-terminated, and byte-stable for
identical inputs (no timestamps, sorted keys).  Times are stored in days at
the file surface and converted to seconds internally.

Measurement CSV (header required)::

    chip_id,junction_id,t_seconds,resistance_ohms,environment,flag

with environment in {ambient, glovebox, vacuum, unknown} and flag optional
(ok, open, excluded; default ok).  The resistance field may be empty only
for open rows; resistances above 1 MOhm or non-finite are coerced to open.

Schedule file: one segment per line ``start_days,environment`` plus event
lines ``event,t_days,voltage,...`` / ``event,t_days,thermal,...`` with
``key=value`` arguments, e.g.::

    0,ambient
    4,glovebox
    event,56,voltage,n_pulses=30,amplitude_v=0.9,pulse_duration_s=1,junctions=0-7
    event,85,thermal,temp_c=200,env=glovebox,hold_min=10

Lines starting with ``#`` and blank lines are ignored.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import warnings
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import InsufficientDataError, ParameterError, ParseError, ValidationError
from .ensemble import (
    OPEN_RESISTANCE_THRESHOLD_OHM,
    ChipDataset,
    MeasurementRecord,
)
from .model import AgingParams, Environment, TwoLogParams
from .trajectory import (
    DAY_S,
    AnnealEvent,
    StorageSchedule,
    ThermalAnneal,
    VoltageAnneal,
)

__all__ = [
    "IVSweep",
    "resistance_from_iv",
    "MEASUREMENT_HEADER",
    "load_measurements",
    "save_measurements",
    "load_schedule",
    "load_events",
    "FitReport",
    "build_fit_report",
    "write_report",
    "read_report",
    "export_plot_data",
    "sha256_of_file",
]

TOOL_VERSION = "0.1.0"

MEASUREMENT_HEADER = [
    "chip_id",
    "junction_id",
    "t_seconds",
    "resistance_ohms",
    "environment",
    "flag",
]

_ENV_NAMES = {"ambient", "glovebox", "vacuum", "unknown"}
_FLAG_NAMES = {"ok", "open", "excluded"}


@dataclass(frozen=True)
class IVSweep:
    """A current-biased I-V sweep: (current_A, voltage_V) pairs."""

    points: tuple[tuple[float, float], ...]
    compliance_a: float = 1e-6

    def __post_init__(self):
        if len(self.points) < 2:
            raise ValidationError("an I-V sweep needs at least 2 points")
        for i, v in self.points:
            if not (np.isfinite(i) and np.isfinite(v)):
                raise ValidationError("sweep points must be finite")
            if abs(i) > self.compliance_a:
                raise ParameterError(
                    f"current {i} A exceeds the compliance window +-{self.compliance_a} A"
                )


def resistance_from_iv(sweep: IVSweep, full_output: bool = False):
    """Junction resistance as the least-squares slope of V against I.

    The intercept absorbs any voltage offset and is reported as a
    diagnostic with ``full_output=True`` (together with a ``suspect`` flag
    for non-positive slopes).  Permutation of points and voltage offsets do
    not change the result.
    """
    pts = np.asarray(sweep.points, dtype=float)
    i, v = pts[:, 0], pts[:, 1]
    if np.unique(i).size < 2:
        raise InsufficientDataError("sweep needs at least 2 distinct currents")
    A = np.column_stack([i, np.ones_like(i)])
    (slope, offset), *_ = np.linalg.lstsq(A, v, rcond=None)
    suspect = slope <= 0
    if suspect:
        warnings.warn(f"non-positive I-V slope ({slope} ohm); flagged suspect", stacklevel=2)
    if full_output:
        return float(slope), {"offset_v": float(offset), "suspect": bool(suspect)}
    return float(slope)


def save_measurements(ds: ChipDataset, path) -> None:
    """Write a dataset in the measurement CSV schema (open rows keep an empty
    resistance field)."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(MEASUREMENT_HEADER)
        for r in ds.records:
            res = "" if r.r_ohm is None else repr(float(r.r_ohm))
            w.writerow([r.chip_id, r.junction_id, repr(float(r.t_s)), res, r.env_label, r.flag])


def load_measurements(path) -> ChipDataset:
    """Parse, validate, and sort a measurement CSV.

    Malformed rows are collected and raised together as a ParseError naming
    the offending 1-based line numbers; a header-only file yields an empty
    dataset.  Resistances above the open threshold (or non-finite) are
    flagged open.
    """
    records: list[MeasurementRecord] = []
    problems: list[tuple[int, str]] = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(f"{path}: empty file (header required)")
        if [h.strip() for h in header] != MEASUREMENT_HEADER:
            raise ParseError(
                f"{path}: bad header {header!r}; expected {','.join(MEASUREMENT_HEADER)}",
                lines=[1],
            )
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) not in (5, 6):
                problems.append((lineno, f"expected 5 or 6 fields, got {len(row)}"))
                continue
            chip_id = row[0].strip()
            try:
                junction_id = int(row[1])
                t_s = float(row[2])
            except ValueError:
                problems.append((lineno, "junction_id must be an integer and t_seconds a number"))
                continue
            raw_r = row[3].strip()
            env = row[4].strip().lower()
            flag = row[5].strip().lower() if len(row) == 6 and row[5].strip() else "ok"
            if env not in _ENV_NAMES:
                problems.append((lineno, f"unknown environment {env!r}"))
                continue
            if flag not in _FLAG_NAMES:
                problems.append((lineno, f"unknown flag {flag!r}"))
                continue
            if t_s < 0:
                problems.append((lineno, "t_seconds must be >= 0"))
                continue
            if raw_r == "":
                if flag != "open":
                    problems.append((lineno, "empty resistance only allowed for open rows"))
                    continue
                r_ohm = None
            else:
                try:
                    r_ohm = float(raw_r)
                except ValueError:
                    problems.append((lineno, f"bad resistance {raw_r!r}"))
                    continue
                if not math.isfinite(r_ohm) or r_ohm > OPEN_RESISTANCE_THRESHOLD_OHM:
                    r_ohm, flag = None, "open"
                elif r_ohm <= 0:
                    problems.append((lineno, "resistance must be > 0"))
                    continue
            records.append(
                MeasurementRecord(
                    chip_id=chip_id, junction_id=junction_id, t_s=t_s,
                    r_ohm=r_ohm, env_label=env, flag=flag,
                )
            )
    if problems:
        details = "; ".join(f"line {ln}: {msg}" for ln, msg in problems)
        raise ParseError(f"{path}: {details}", lines=[ln for ln, _ in problems])
    return ChipDataset(records=tuple(records))


def _parse_kv(parts: Sequence[str], lineno: int, problems) -> dict[str, str]:
    kv = {}
    for part in parts:
        if "=" not in part:
            problems.append((lineno, f"expected key=value, got {part!r}"))
            return {}
        k, v = part.split("=", 1)
        kv[k.strip()] = v.strip()
    return kv


def _parse_junctions(text: str) -> tuple[int, ...]:
    ids: list[int] = []
    for chunk in text.split("+"):
        if "-" in chunk:
            lo, hi = chunk.split("-", 1)
            ids.extend(range(int(lo), int(hi) + 1))
        else:
            ids.append(int(chunk))
    return tuple(sorted(set(ids)))


def load_schedule(path) -> tuple[StorageSchedule, list[AnnealEvent]]:
    """Parse a schedule file into a StorageSchedule plus sorted anneal events."""
    schedule, events = _parse_schedule_text(path, require_segments=True)
    return schedule, events


def load_events(path) -> list[AnnealEvent]:
    """Parse only the event lines of a schedule-format file (segments optional)."""
    _, events = _parse_schedule_text(path, require_segments=False)
    return events


def _parse_schedule_text(path, require_segments: bool):
    segments: list[tuple[float, Environment]] = []
    events: list[AnnealEvent] = []
    problems: list[tuple[int, str]] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = [p.strip() for p in line.split(",")]
            if parts[0].lower() == "event":
                if len(parts) < 3:
                    problems.append((lineno, "event line needs at least a time and a kind"))
                    continue
                try:
                    t_s = float(parts[1]) * DAY_S
                except ValueError:
                    problems.append((lineno, f"bad event time {parts[1]!r}"))
                    continue
                kind_name = parts[2].lower()
                kv = _parse_kv(parts[3:], lineno, problems)
                try:
                    junctions = _parse_junctions(kv["junctions"]) if "junctions" in kv else None
                    if kind_name == "voltage":
                        kind = VoltageAnneal(
                            n_pulses=int(kv.get("n_pulses", 30)),
                            amplitude_v=float(kv.get("amplitude_v", 0.9)),
                            pulse_duration_s=float(kv.get("pulse_duration_s", 1.0)),
                        )
                    elif kind_name == "thermal":
                        kind = ThermalAnneal(
                            temp_c=float(kv["temp_c"]),
                            env=Environment.from_kind(kv.get("env", "glovebox")),
                            hold_min=float(kv.get("hold_min", 10.0)),
                        )
                    else:
                        problems.append((lineno, f"unknown event kind {kind_name!r}"))
                        continue
                    events.append(AnnealEvent(t_s=t_s, kind=kind, junction_ids=junctions))
                except (KeyError, ValueError, ValidationError) as exc:
                    problems.append((lineno, f"bad event arguments: {exc}"))
            else:
                if len(parts) != 2:
                    problems.append((lineno, "segment line must be start_days,environment"))
                    continue
                try:
                    start_s = float(parts[0]) * DAY_S
                    env = Environment.from_kind(parts[1].lower())
                except ValueError:
                    problems.append((lineno, f"bad segment line {line!r}"))
                    continue
                segments.append((start_s, env))
    if problems:
        details = "; ".join(f"line {ln}: {msg}" for ln, msg in problems)
        raise ParseError(f"{path}: {details}", lines=[ln for ln, _ in problems])
    events.sort(key=lambda ev: ev.t_s)
    if not segments:
        if require_segments:
            raise ParseError(f"{path}: schedule has no storage segments")
        return None, events
    try:
        schedule = StorageSchedule(segments=tuple(segments))
    except ValidationError as exc:
        raise ParseError(f"{path}: {exc}")
    return schedule, events


def _params_to_dict(p) -> dict:
    if isinstance(p, AgingParams):
        return {"kind": "single-log", "a": p.a, "tau_s": p.tau_s, "b": p.b,
                "r0_ohm": p.r0_ohm}
    if isinstance(p, TwoLogParams):
        return {"kind": "two-log", "a_int": p.a_int, "tau_int_s": p.tau_int_s,
                "a_ext": p.a_ext, "tau_ext_s": p.tau_ext_s, "r0_ohm": p.r0_ohm}
    raise ValidationError(f"cannot serialize params of type {type(p)!r}")


def _fit_to_dict(res) -> dict:
    return {
        "params": _params_to_dict(res.params),
        "stderr": {k: _num(v) for k, v in sorted(res.stderr.items())},
        "rss": res.rss,
        "converged": res.converged,
        "n_points": res.n_points,
        "iterations": res.iterations,
        "at_bounds": list(res.at_bounds),
        "messages": list(res.messages),
        "degenerate_timescales": res.degenerate_timescales,
    }


def _num(v):
    # JSON has no NaN/inf; store as null.
    if v is None or (isinstance(v, float) and not math.isfinite(v)):
        return None
    return v


@dataclass(frozen=True)
class FitReport:
    """Structured fit output: per-junction and average results plus aggregates.

    ``provenance`` carries the input digest, tool version, seed, and config
    digest so a report is reproducible from its inputs alone.
    """

    chip_id: str
    junction_ids: tuple[int, ...]
    per_junction: dict[int, dict]
    average: dict
    r0_ohm: dict[int, float]
    average_r0_ohm: float
    cv_series: tuple[tuple[float, float | None, int], ...]  # (t_days, cv, n_used)
    histograms: dict[str, dict]
    skipped: dict[int, str]
    provenance: dict
    last_t_s: float
    last_env: str
    schema_version: int = 1

    def __post_init__(self):
        missing = [j for j in self.per_junction if j not in self.junction_ids]
        if missing:
            raise ValidationError(
                f"report mentions junctions {missing} absent from the input dataset"
            )

    def to_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "chip_id": self.chip_id,
            "junction_ids": list(self.junction_ids),
            "per_junction": {str(j): self.per_junction[j] for j in sorted(self.per_junction)},
            "average": self.average,
            "r0_ohm": {str(j): self.r0_ohm[j] for j in sorted(self.r0_ohm)},
            "average_r0_ohm": self.average_r0_ohm,
            "cv_series": [[t, _num(cv), n] for t, cv, n in self.cv_series],
            "histograms": self.histograms,
            "skipped": {str(j): msg for j, msg in sorted(self.skipped.items())},
            "provenance": self.provenance,
            "last_t_s": self.last_t_s,
            "last_env": self.last_env,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FitReport":
        return cls(
            chip_id=d["chip_id"],
            junction_ids=tuple(d["junction_ids"]),
            per_junction={int(j): v for j, v in d["per_junction"].items()},
            average=d["average"],
            r0_ohm={int(j): v for j, v in d["r0_ohm"].items()},
            average_r0_ohm=d["average_r0_ohm"],
            cv_series=tuple((t, cv, n) for t, cv, n in d["cv_series"]),
            histograms=d["histograms"],
            skipped={int(j): msg for j, msg in d["skipped"].items()},
            provenance=d["provenance"],
            last_t_s=d["last_t_s"],
            last_env=d["last_env"],
            schema_version=d["schema_version"],
        )


def build_fit_report(
    ds: ChipDataset,
    chip_fit,
    chip_id: str,
    provenance: Mapping,
    window_s: float = 600.0,
) -> FitReport:
    """Assemble a FitReport from a dataset and its ChipFitResult."""
    from .ensemble import aggregate_series
    from .fitting import parameter_histogram

    agg = aggregate_series(ds, window_s=window_s)
    cv_series = tuple(
        (t / DAY_S, (None if math.isnan(cv) else cv), n) for t, _, cv, n in agg
    )
    histograms = {}
    single = [r for r in chip_fit.per_junction.values()
              if isinstance(r.params, AgingParams)]
    if single:
        for field_name in ("a", "tau", "log_tau", "b"):
            counts, edges = parameter_histogram(single, field_name, n_bins=8)
            histograms[field_name] = {
                "counts": [int(c) for c in counts],
                "edges": [float(e) for e in edges],
            }
    ok_records = [r for r in ds.records if r.flag == "ok"]
    last = max(ok_records, key=lambda r: r.t_s)
    return FitReport(
        chip_id=chip_id,
        junction_ids=tuple(ds.junction_ids()),
        per_junction={j: _fit_to_dict(res) for j, res in chip_fit.per_junction.items()},
        average=_fit_to_dict(chip_fit.average),
        r0_ohm=dict(chip_fit.r0_ohm),
        average_r0_ohm=chip_fit.average_r0_ohm,
        cv_series=cv_series,
        histograms=histograms,
        skipped=dict(chip_fit.skipped),
        provenance=dict(provenance),
        last_t_s=last.t_s,
        last_env=last.env_label,
    )


def write_report(report: FitReport, path) -> None:
    """Serialize a report as canonical JSON (sorted keys, newline-terminated);
    byte-stable for identical inputs."""
    text = json.dumps(report.to_dict(), sort_keys=True, indent=2, allow_nan=False)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text + "\n")


def read_report(path) -> FitReport:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            d = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}: invalid report JSON ({exc})")
    try:
        return FitReport.from_dict(d)
    except (KeyError, TypeError) as exc:
        raise ParseError(f"{path}: report missing field {exc}")


def export_plot_data(series: Mapping[str, Sequence], path) -> None:
    """Write tidy plot data: one row per point, columns series_id,t_days,value.

    ``series`` maps a series id to a sequence of (t_s, value) pairs.
    """
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["series_id", "t_days", "value"])
        for sid in sorted(series):
            for t_s, value in series[sid]:
                w.writerow([sid, repr(float(t_s) / DAY_S), repr(float(value))])


def sha256_of_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()
