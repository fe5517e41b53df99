"""Command-line front end: simulate, fit, predict, anneal.

Exit codes: 0 success, 2 input/validation problems, 3 numerical
non-convergence (the report is still written).  Every subcommand is
reproducible from its arguments plus --seed; summaries embed a digest of
the resolved configuration.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .dataio import (
    FitReport,
    build_fit_report,
    load_events,
    load_measurements,
    load_schedule,
    read_report,
    save_measurements,
    sha256_of_file,
    write_report,
    TOOL_VERSION,
)
from .ensemble import ChipDataset, ChipSpec, MeasurementRecord, aggregate_series, draw_chip, simulate_chip
from .errors import JJAgingError, ValidationError
from .fitting import FitOptions, fit_chip
from .model import (
    AgingParams,
    Environment,
    EnvironmentKind,
    PhysicalConstants,
    TwoLogParams,
    critical_current_from_resistance,
    effective_tau,
    eval_single_log,
    qubit_frequency_shift,
)
from .presets import PRESET_NAMES, chip_preset
from .trajectory import (
    DAY_S,
    JunctionProfile,
    SimConfig,
    StorageSchedule,
    ThermalAnneal,
    TrajectoryState,
    VoltageAnneal,
    apply_thermal_anneal,
    apply_voltage_anneal,
    resume_trajectory,
)


def _digest(obj) -> str:
    text = json.dumps(obj, sort_keys=True, default=str)
    return hashlib.sha256(text.encode()).hexdigest()[:16]


def _sim_config_from_dict(d: dict) -> SimConfig:
    kwargs = dict(d)
    if "env_tau_s" in kwargs:
        kwargs["env_tau_s"] = {
            EnvironmentKind(k): float(v) for k, v in kwargs["env_tau_s"].items()
        }
    if "thermal_response" in kwargs:
        table = {}
        for key, v in kwargs["thermal_response"].items():
            temp, env = key.split(",")
            table[(float(temp), EnvironmentKind(env.strip()))] = float(v)
        kwargs["thermal_response"] = table
    return SimConfig(**kwargs)


def _resolve_chip(args):
    """Preset or spec file -> (ChipSpec, SimConfig, default schedule, config dict)."""
    if args.preset:
        p = chip_preset(args.preset)
        cfg_desc = {"preset": p.name}
        return p.spec, p.sim, p.schedule, cfg_desc
    if not args.spec:
        raise ValidationError("either --preset or --spec is required")
    with open(args.spec, "r", encoding="utf-8") as fh:
        d = json.load(fh)
    if "chip" not in d:
        raise ValidationError(f"{args.spec}: spec file needs a 'chip' section")
    spec = ChipSpec(**d["chip"])
    sim = _sim_config_from_dict(d.get("sim", {}))
    env = Environment.from_kind(d.get("environment", "ambient"))
    return spec, sim, StorageSchedule.single(env), {"spec_file": d}


def cmd_simulate(args) -> int:
    spec, cfg, schedule, cfg_desc = _resolve_chip(args)
    events = []
    if args.schedule:
        schedule, events = load_schedule(args.schedule)
    if args.events:
        events = load_events(args.events)
    target_s = args.target_days * DAY_S
    step_s = args.sample_days * DAY_S
    samples = list(np.arange(0.0, target_s + 1e-9, step_s))
    if samples[-1] < target_s:
        samples.append(target_s)

    chip = draw_chip(spec, args.seed)
    ds = simulate_chip(chip, schedule, events, samples, cfg, args.seed,
                       chip_id=args.chip_id)
    save_measurements(ds, args.out)

    agg = aggregate_series(ds)
    t_f, mean_f, cv_f, n_f = agg[-1]
    frac = []
    for j in ds.junction_ids():
        recs = [r for r in ds.for_junction(j) if r.flag == "ok"]
        if recs:
            # fractional aging against the drawn reference resistance
            frac.append(recs[-1].r_ohm / chip.junctions[j][0].r0_ohm)
    summary = {
        "config_digest": _digest({**cfg_desc, "seed": args.seed,
                                  "target_days": args.target_days,
                                  "sample_days": args.sample_days}),
        "final_t_days": t_f / DAY_S,
        "final_mean_r_ohm": mean_f,
        "final_cv": None if math.isnan(cv_f) else cv_f,
        "final_mean_fractional_aging": float(np.mean(frac)) if frac else None,
        "n_junctions": spec.n_junctions,
        "n_used_final": n_f,
        "seed": args.seed,
        "tool_version": TOOL_VERSION,
    }
    summary_path = Path(args.out).with_suffix(".summary.json")
    with open(summary_path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(summary, sort_keys=True, indent=2) + "\n")
    print(
        f"simulated {spec.n_junctions} junctions to day {t_f / DAY_S:g}: "
        f"mean R = {mean_f:.1f} ohm, CV = {cv_f if not math.isnan(cv_f) else float('nan'):.4f}, "
        f"mean R/R0 = {summary['final_mean_fractional_aging']:.4f}"
    )
    print(f"wrote {args.out} and {summary_path}")
    return 0


def cmd_fit(args) -> int:
    ds = load_measurements(args.data)
    opts = FitOptions(model=args.model)
    chip_fit = fit_chip(ds, opts, share_b=args.share_b, window_s=args.window_s)
    chip_id = ds.records[0].chip_id if ds.records else "chip"
    provenance = {
        "input_sha256": sha256_of_file(args.data),
        "tool_version": TOOL_VERSION,
        "seed": args.seed,
        "config_digest": _digest({"model": args.model, "share_b": args.share_b,
                                  "window_s": args.window_s}),
    }
    report = build_fit_report(ds, chip_fit, chip_id, provenance, window_s=args.window_s)
    write_report(report, args.out)

    n_bad = sum(1 for r in chip_fit.per_junction.values() if not r.converged)
    if not chip_fit.average.converged:
        n_bad += 1
    p = chip_fit.average.params
    print(
        f"fitted {len(chip_fit.per_junction)} junctions "
        f"(skipped {len(chip_fit.skipped)}); average: "
        + (
            f"a={p.a:.4f} tau={p.tau_s:.4g} s b={p.b:.4f}"
            if isinstance(p, AgingParams)
            else f"a_int={p.a_int:.4f} tau_int={p.tau_int_s:.4g} s "
                 f"a_ext={p.a_ext:.4f} tau_ext={p.tau_ext_s:.4g} s"
        )
    )
    print(f"wrote {args.out}")
    if n_bad:
        print(f"warning: {n_bad} fit(s) did not converge", file=sys.stderr)
        return 3
    return 0


def _params_from_report(report: FitReport) -> AgingParams:
    d = report.average["params"]
    if d["kind"] == "single-log":
        return AgingParams(a=d["a"], tau_s=d["tau_s"], b=d["b"],
                           r0_ohm=report.average_r0_ohm)
    two = TwoLogParams(a_int=d["a_int"], tau_int_s=d["tau_int_s"],
                       a_ext=d["a_ext"], tau_ext_s=d["tau_ext_s"], r0_ohm=1.0)
    # Two-channel fits predict through their equivalent single-log curve.
    return AgingParams(a=two.a_int + two.a_ext, tau_s=effective_tau(two), b=1.0,
                       r0_ohm=report.average_r0_ohm)


def cmd_predict(args) -> int:
    if args.report:
        report = read_report(args.report)
        params = _params_from_report(report)
        from_days = args.from_days if args.from_days is not None else report.last_t_s / DAY_S
        env_name = report.last_env if report.last_env in ("ambient", "glovebox", "vacuum") else "ambient"
        cfg = None
    elif args.preset:
        p = chip_preset(args.preset)
        params = p.aging
        from_days = args.from_days if args.from_days is not None else 0.0
        env_name = p.home_env.kind.value
        cfg = p.sim
    else:
        raise ValidationError("predict needs --report or --preset")

    if args.target_days is None:
        raise ValidationError("--target-days is required")
    if args.target_days <= from_days:
        raise ValidationError(
            f"target day {args.target_days} is not after the last measurement "
            f"(day {from_days:g})"
        )

    if args.schedule:
        schedule, _ = load_schedule(args.schedule)
    else:
        schedule = StorageSchedule.single(Environment.from_kind(env_name))
    if cfg is None:
        cfg = SimConfig(fab_a=params.a)

    t_from = from_days * DAY_S
    t_target = args.target_days * DAY_S
    # The fitted timescale belongs to the environment the data came from;
    # anchor the per-junction scale there, not to the future schedule.
    anchor = Environment.from_kind(env_name)
    profile = JunctionProfile(
        a=params.a, b=params.b,
        tau_scale=params.tau_s / cfg.env_tau_s[anchor.kind],
    )
    y_from = float(eval_single_log(params, t_from)) - 1.0
    y_end = resume_trajectory(y_from, t_from, schedule, cfg, t_target, profile)

    r_from = params.r0_ohm * (1.0 + y_from)
    r_pred = params.r0_ohm * (1.0 + y_end)
    dr_over_r = r_pred / r_from - 1.0
    constants = PhysicalConstants(
        gap_delta_J=args.delta_uev * 1e-6 * 1.602176634e-19
    )
    ic = critical_current_from_resistance(r_pred, constants)
    shift = qubit_frequency_shift(dr_over_r)

    result = {
        "from_days": from_days,
        "target_days": args.target_days,
        "r_from_ohm": r_from,
        "r_predicted_ohm": r_pred,
        "dr_over_r": dr_over_r,
        "critical_current_a": ic,
        "freq_shift_fraction": shift,
        "delta_uev": args.delta_uev,
        "config_digest": _digest({"params": repr(params), "target": args.target_days,
                                  "from": from_days, "seed": args.seed}),
        "tool_version": TOOL_VERSION,
    }
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(json.dumps(result, sort_keys=True, indent=2) + "\n")
    print(
        f"day {from_days:g} -> {args.target_days:g}: R {r_from:.1f} -> {r_pred:.1f} ohm "
        f"({dr_over_r * 100:+.2f}%), I_c = {ic * 1e9:.2f} nA, df/f = {shift * 100:+.3f}%"
    )
    return 0


def cmd_anneal(args) -> int:
    ds = load_measurements(args.data)
    events = load_events(args.events)
    p = chip_preset(args.preset) if args.preset else None
    cfg = p.sim if p else SimConfig()
    if args.no_floor:
        cfg = replace(cfg, floor_at_r0=False)
    if any(isinstance(ev.kind, VoltageAnneal) for ev in events) and args.seed is None:
        raise ValidationError("--seed is required when the event list contains "
                              "voltage anneals")
    seed = args.seed if args.seed is not None else 0

    tau_amb = cfg.env_tau_s[EnvironmentKind.AMBIENT]
    junctions = {}
    for j in ds.junction_ids():
        recs = [r for r in ds.for_junction(j) if r.flag == "ok"]
        if not recs:
            continue
        r0 = recs[0].r_ohm
        last = recs[-1]
        y0 = last.r_ohm / r0 - 1.0
        # Each junction continues its own aging trend during session waits:
        # amplitude inferred from its current state, state placed on that
        # curve so waits add pure (strictly positive) aging increments.
        a_eff = (
            max(y0, 0.0) / math.log(last.t_s / tau_amb + 1.0) if last.t_s > 0 else 0.0
        )
        junctions[j] = {
            "r0": r0,
            "a_eff": a_eff,
            "state": TrajectoryState(t_s=last.t_s, y_env=y0),
            "last_r": last.r_ohm,
        }
    if not junctions:
        raise ValidationError("dataset has no usable junctions")
    t_latest = max(info["state"].t_s for info in junctions.values())
    for ev in events:
        if ev.t_s < t_latest:
            raise ValidationError(
                f"event at day {ev.t_s / DAY_S:g} precedes the last measurement "
                f"(day {t_latest / DAY_S:g})"
            )

    chip_id = ds.records[0].chip_id
    new_records = list(ds.records)
    steps = []
    min_r_over_r0 = min(
        info["last_r"] / info["r0"] for info in junctions.values()
    )
    for k, ev in enumerate(events):
        hold_s = ev.kind.hold_min * 60.0 if isinstance(ev.kind, ThermalAnneal) else 0.0
        t_meas = ev.t_s + hold_s
        changes = []
        for j, info in junctions.items():
            state = _advance_ambient(info["state"], ev.t_s, cfg, info["a_eff"])
            if ev.junction_ids is None or j in ev.junction_ids:
                if isinstance(ev.kind, ThermalAnneal):
                    state = apply_thermal_anneal(state, ev, cfg)
                else:
                    seed_jk = int(
                        np.random.SeedSequence(entropy=seed, spawn_key=(k, j)).generate_state(1)[0]
                    )
                    state = apply_voltage_anneal(state, ev, cfg, seed_jk)
            state = _advance_ambient(state, t_meas, cfg, info["a_eff"])
            r_now = info["r0"] * (1.0 + state.y)
            changes.append(r_now / info["last_r"] - 1.0)
            min_r_over_r0 = min(min_r_over_r0, r_now / info["r0"])
            info["state"] = state
            info["last_r"] = r_now
            new_records.append(
                MeasurementRecord(chip_id=chip_id, junction_id=j, t_s=t_meas,
                                  r_ohm=r_now, env_label="ambient", flag="ok")
            )
        kind_name = "thermal" if isinstance(ev.kind, ThermalAnneal) else "voltage"
        steps.append({
            "step": k + 1,
            "t_days": ev.t_s / DAY_S,
            "kind": kind_name,
            "mean_fractional_change": float(np.mean(changes)),
        })
        print(f"step {k + 1} ({kind_name} @ day {ev.t_s / DAY_S:g}): "
              f"mean change {np.mean(changes) * 100:+.3f}%")

    out_ds = ChipDataset(records=tuple(new_records))
    save_measurements(out_ds, args.out)
    steps_path = Path(args.out).with_suffix(".steps.json")
    with open(steps_path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps({
            "steps": steps,
            "min_r_over_r0": min_r_over_r0,
            "floor_at_r0": cfg.floor_at_r0,
            "seed": seed,
            "tool_version": TOOL_VERSION,
        }, sort_keys=True, indent=2) + "\n")
    print(f"min R/R0 across the sequence: {min_r_over_r0:.4f}")
    print(f"wrote {args.out} and {steps_path}")
    return 0


def _advance_ambient(
    state: TrajectoryState, t_to: float, cfg: SimConfig, a_eff: float
) -> TrajectoryState:
    """March a state forward along its own ambient-timescale aging curve."""
    from .trajectory import _advance

    if t_to <= state.t_s:
        return state
    tau = cfg.env_tau_s[EnvironmentKind.AMBIENT]
    y_env = _advance(state.y_env, state.t_s, t_to, a_eff, tau, 1.0,
                     cfg.relax_gas_to_gas_s, cfg.integration_dt_s)
    return replace(state, t_s=t_to, y_env=y_env,
                   virtual_age_s=state.virtual_age_s + (t_to - state.t_s))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="jjaging",
        description="Josephson junction aging simulation, fitting, and prediction",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="simulate a chip through a storage schedule")
    sim.add_argument("--preset", choices=PRESET_NAMES)
    sim.add_argument("--spec", help="chip spec JSON file")
    sim.add_argument("--schedule", help="schedule file (segments + events)")
    sim.add_argument("--events", help="extra events file")
    sim.add_argument("--target-days", type=float, default=56.0)
    sim.add_argument("--sample-days", type=float, default=2.0)
    sim.add_argument("--seed", type=int, required=True)
    sim.add_argument("--chip-id", default="chip")
    sim.add_argument("--out", required=True)
    sim.set_defaults(func=cmd_simulate)

    fit = sub.add_parser("fit", help="fit measurement CSV to the aging models")
    fit.add_argument("data", help="measurement CSV")
    fit.add_argument("--model", choices=("single-log", "two-log"), default="single-log")
    fit.add_argument("--share-b", action="store_true",
                     help="fix every junction's b at the average-curve value")
    fit.add_argument("--window-s", type=float, default=600.0)
    fit.add_argument("--seed", type=int, default=0)
    fit.add_argument("--out", required=True)
    fit.set_defaults(func=cmd_fit)

    pred = sub.add_parser("predict", help="predict R, I_c, and df/f at a future time")
    pred.add_argument("--report", help="fit report JSON")
    pred.add_argument("--preset", choices=PRESET_NAMES)
    pred.add_argument("--schedule", help="future storage schedule file")
    pred.add_argument("--from-days", type=float, default=None)
    pred.add_argument("--target-days", type=float, required=True)
    pred.add_argument("--delta-uev", type=float, default=180.0,
                      help="superconducting gap in micro-eV")
    pred.add_argument("--seed", type=int, default=0)
    pred.add_argument("--out")
    pred.set_defaults(func=cmd_predict)

    ann = sub.add_parser("anneal", help="apply an anneal event sequence to a dataset")
    ann.add_argument("data", help="measurement CSV")
    ann.add_argument("--events", required=True, help="event list file")
    ann.add_argument("--preset", choices=PRESET_NAMES)
    ann.add_argument("--no-floor", action="store_true",
                     help="disable the initial-resistance floor")
    ann.add_argument("--seed", type=int, default=None)
    ann.add_argument("--out", required=True)
    ann.set_defaults(func=cmd_anneal)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except JJAgingError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
