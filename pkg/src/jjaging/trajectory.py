"""Single-junction resistance trajectories through storage schedules and anneals.

A junction in a fixed environment follows that environment's *bound curve*,
the single-log aging law with the environment's timescale.  When the storage
environment changes, the junction does not jump onto the new bound; it
relaxes toward it first-order:

    dy/dt = y_bound'(t) + (y_bound(t) - y) / T_relax

where ``y = R/R0 - 1`` and ``y_bound`` is the active environment's bound
curve evaluated at wall time (the virtual age is kept synchronized with the
wall clock, never reset per segment).  Because an environment swap changes
which bound curve is active, the target value steps at the swap, which is
what produces the observed transients: moving from lab air into a nitrogen
glovebox puts the target *below* the current state and the resistance
transiently decreases (deaging); leaving high vacuum puts the target above
and the state is pulled up quickly.

Discrete anneal events live in a separate multiplicative channel stacked on
top of the relaxation state, so a voltage-annealed junction keeps its new
resistance instead of relaxing back: the anneal changes the junction's
internal configuration rather than accelerating the environmental aging.

Integration is fixed-step and explicit (reproducibility over adaptive
stepping): the bound-curve feedforward is applied exactly per step and the
relaxation term with a forward Euler update, so a trajectory starting on its
bound in an unchanged environment reproduces the closed form to rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

import numpy as np

from .errors import ConfigurationError, ParameterError, ValidationError
from .model import AgingParams, Environment, EnvironmentKind

__all__ = [
    "StorageSchedule",
    "VoltageAnneal",
    "ThermalAnneal",
    "AnnealEvent",
    "SimConfig",
    "JunctionProfile",
    "TrajectoryState",
    "bound_curve",
    "simulate_trajectory",
    "resume_trajectory",
    "apply_voltage_anneal",
    "apply_thermal_anneal",
    "measurement_exposure",
]

DAY_S = 86_400.0


@dataclass(frozen=True)
class StorageSchedule:
    """Piecewise storage timeline: ordered (start time, environment) segments."""

    segments: tuple[tuple[float, Environment], ...]

    def __post_init__(self):
        if not self.segments:
            raise ValidationError("schedule needs at least one segment")
        starts = [s for s, _ in self.segments]
        if starts[0] != 0.0:
            raise ValidationError("first schedule segment must start at t = 0")
        if any(b <= a for a, b in zip(starts, starts[1:])):
            raise ValidationError("segment start times must be strictly increasing")

    @classmethod
    def single(cls, env: Environment) -> "StorageSchedule":
        return cls(segments=((0.0, env),))

    def environment_at(self, t_s: float) -> Environment:
        env = self.segments[0][1]
        for start, e in self.segments:
            if t_s >= start:
                env = e
        return env


@dataclass(frozen=True)
class VoltageAnneal:
    """Alternating-bias pulse train applied at the probe station."""

    n_pulses: int = 30
    amplitude_v: float = 0.9
    pulse_duration_s: float = 1.0

    def __post_init__(self):
        if self.n_pulses <= 0:
            raise ValidationError("n_pulses must be > 0")
        if self.amplitude_v <= 0 or self.pulse_duration_s <= 0:
            raise ValidationError("pulse amplitude and duration must be > 0")


@dataclass(frozen=True)
class ThermalAnneal:
    """One oven step: peak temperature, oven atmosphere, post-step wait."""

    temp_c: float
    env: Environment
    hold_min: float = 10.0

    def __post_init__(self):
        if self.hold_min < 0:
            raise ValidationError("hold_min must be >= 0")


@dataclass(frozen=True)
class AnnealEvent:
    """A discrete anneal at time ``t_s``.

    ``junction_ids`` restricts a chip-level event to a subset of junctions
    (None means all junctions).
    """

    t_s: float
    kind: VoltageAnneal | ThermalAnneal
    junction_ids: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.t_s < 0:
            raise ValidationError("event time must be >= 0")
        if not isinstance(self.kind, (VoltageAnneal, ThermalAnneal)):
            raise ValidationError(f"unknown anneal kind: {self.kind!r}")


# Qualitative sign/magnitude defaults for oven steps; the nitrogen ovens
# decrease resistance at both temperatures, ambient air increases it at
# 200 C and gives a smaller decrease than nitrogen at 250 C.
DEFAULT_THERMAL_RESPONSE: dict[tuple[float, EnvironmentKind], float] = {
    (200.0, EnvironmentKind.NITROGEN_GLOVEBOX): -0.05,
    (250.0, EnvironmentKind.NITROGEN_GLOVEBOX): -0.12,
    (200.0, EnvironmentKind.AMBIENT): +0.06,
    (250.0, EnvironmentKind.AMBIENT): -0.06,
}

DEFAULT_ENV_TAU_S: dict[EnvironmentKind, float] = {
    EnvironmentKind.AMBIENT: 1.2e4,
    EnvironmentKind.NITROGEN_GLOVEBOX: 4.3e4,
    EnvironmentKind.HIGH_VACUUM: 6.9e4,
}


@dataclass(frozen=True)
class SimConfig:
    """Kinetics and response configuration for trajectory simulation."""

    env_tau_s: Mapping[EnvironmentKind, float] = field(
        default_factory=lambda: dict(DEFAULT_ENV_TAU_S)
    )
    fab_a: float = 0.21
    relax_gas_to_gas_s: float = 3.0 * DAY_S
    relax_vacuum_to_gas_s: float = 0.5 * DAY_S
    thermal_response: Mapping[tuple[float, EnvironmentKind], float] = field(
        default_factory=lambda: dict(DEFAULT_THERMAL_RESPONSE)
    )
    voltage_jump_mean: float = 0.16
    voltage_jump_sd: float = 0.02
    voltage_drift_a: float = 0.05
    voltage_drift_tau_s: float = 5.0e4
    floor_at_r0: bool = True
    integration_dt_s: float = 600.0

    def __post_init__(self):
        if self.fab_a < 0:
            raise ParameterError("fab_a must be >= 0")
        for kind, tau in self.env_tau_s.items():
            if tau <= 0:
                raise ParameterError(f"env tau for {kind} must be > 0")
        if self.relax_gas_to_gas_s <= 0 or self.relax_vacuum_to_gas_s <= 0:
            raise ParameterError("relaxation times must be > 0")
        if not 0 < self.integration_dt_s <= 3600.0:
            raise ParameterError("integration_dt_s must be in (0, 3600]")
        if self.voltage_jump_sd < 0 or self.voltage_drift_a < 0:
            raise ParameterError("voltage response parameters must be >= 0")
        if self.voltage_drift_tau_s <= 0:
            raise ParameterError("voltage_drift_tau_s must be > 0")

    def relax_time_s(self, old: Environment, new: Environment) -> float:
        """Relaxation time for the transition class old -> new."""
        if (
            old.kind is EnvironmentKind.HIGH_VACUUM
            and new.kind is not EnvironmentKind.HIGH_VACUUM
        ):
            return self.relax_vacuum_to_gas_s
        return self.relax_gas_to_gas_s


@dataclass(frozen=True)
class JunctionProfile:
    """Per-junction deviation from the chip-level config.

    ``a`` and ``b`` replace the bound-curve amplitude and early-time offset;
    ``tau_scale`` multiplies every environment timescale, so a junction that
    ages 20% slower than nominal does so in every environment.
    """

    a: float
    b: float = 1.0
    tau_scale: float = 1.0

    def __post_init__(self):
        if self.a < 0 or self.b <= 0 or self.tau_scale <= 0:
            raise ParameterError("profile requires a >= 0, b > 0, tau_scale > 0")


@dataclass(frozen=True)
class TrajectoryState:
    """Integrator state at time ``t_s``.

    ``y_env`` is the environment-relaxation component of the fractional
    aging; voltage/thermal anneals contribute through ``anneal_gain`` and
    the optional ``post_anneal`` drift.  ``y`` exposes the observable total
    R/R0 - 1 at the state's own time.
    """

    t_s: float = 0.0
    y_env: float = 0.0
    virtual_age_s: float = 0.0
    anneal_gain: float = 1.0
    post_anneal: AgingParams | None = None
    post_anneal_t0_s: float = 0.0

    def __post_init__(self):
        if self.y_env < -1.0:
            raise ParameterError("fractional aging cannot go below -1")
        if self.virtual_age_s < 0:
            raise ParameterError("virtual age must be >= 0")

    def drift_factor(self, t_s: float | None = None) -> float:
        """Multiplicative post-anneal drift factor at time ``t_s``."""
        if self.post_anneal is None:
            return 1.0
        dt = max((self.t_s if t_s is None else t_s) - self.post_anneal_t0_s, 0.0)
        p = self.post_anneal
        return 1.0 + p.a * math.log(dt / p.tau_s + p.b)

    @property
    def y(self) -> float:
        """Observable fractional aging R/R0 - 1 at the state's time."""
        return (1.0 + self.y_env) * self.anneal_gain * self.drift_factor() - 1.0


def bound_curve(env: Environment, cfg: SimConfig, r0_ohm: float) -> AgingParams:
    """Aging curve a junction follows if stored permanently in ``env``."""
    if env.kind not in cfg.env_tau_s:
        raise ConfigurationError(f"no timescale configured for environment {env.kind.value!r}")
    return AgingParams(a=cfg.fab_a, tau_s=cfg.env_tau_s[env.kind], b=1.0, r0_ohm=r0_ohm)


def _bound_y(a: float, tau: float, b: float, t: float) -> float:
    return a * math.log(t / tau + b)


def _advance(
    y_env: float,
    t_a: float,
    t_b: float,
    a: float,
    tau: float,
    b: float,
    relax_s: float,
    dt_s: float,
) -> float:
    """March y_env from t_a to t_b under one environment.

    The bound-curve increment is applied exactly per substep; the pull
    toward the bound uses forward Euler.  Substeps never exceed dt_s.
    """
    span = t_b - t_a
    if span <= 0:
        return y_env
    n = max(1, math.ceil(span / dt_s - 1e-12))
    h = span / n
    t = t_a
    yb_lo = _bound_y(a, tau, b, t)
    for _ in range(n):
        t_next = t + h
        yb_hi = _bound_y(a, tau, b, t_next)
        y_env = y_env + (yb_hi - yb_lo) + h * (yb_lo - y_env) / relax_s
        t, yb_lo = t_next, yb_hi
    return y_env


def apply_voltage_anneal(
    state: TrajectoryState, ev: AnnealEvent, cfg: SimConfig, rng_seed: int
) -> TrajectoryState:
    """Apply an alternating-bias anneal: multiplicative jump plus fresh drift.

    The jump fraction is drawn from the configured response distribution
    (deterministic for sd = 0).  Any drift from a previous anneal is frozen
    into the gain and a new drift with origin ``ev.t_s`` is installed; the
    drift parameters are in fractional units (reference resistance 1).
    """
    if not isinstance(ev.kind, VoltageAnneal):
        raise TypeError("apply_voltage_anneal requires a voltage event")
    rng = np.random.default_rng(rng_seed)
    jump = cfg.voltage_jump_mean + cfg.voltage_jump_sd * float(rng.standard_normal())
    if jump <= -1.0:
        raise ParameterError(f"drawn voltage response {jump} would zero the resistance")
    gain = state.anneal_gain * state.drift_factor(ev.t_s) * (1.0 + jump)
    drift = AgingParams(a=cfg.voltage_drift_a, tau_s=cfg.voltage_drift_tau_s, b=1.0, r0_ohm=1.0)
    return replace(
        state,
        anneal_gain=gain,
        post_anneal=drift,
        post_anneal_t0_s=ev.t_s,
    )


def apply_thermal_anneal(
    state: TrajectoryState, ev: AnnealEvent, cfg: SimConfig
) -> TrajectoryState:
    """Apply one oven step from the configured response table.

    With ``floor_at_r0`` set the observable resistance is clamped at its
    initial-time value: annealing can relax the junction toward its
    as-fabricated state but not below it.
    """
    if not isinstance(ev.kind, ThermalAnneal):
        raise TypeError("apply_thermal_anneal requires a thermal event")
    key = (ev.kind.temp_c, ev.kind.env.kind)
    if key not in cfg.thermal_response:
        raise ConfigurationError(
            f"no thermal response configured for {ev.kind.temp_c} C in "
            f"{ev.kind.env.kind.value!r}"
        )
    step = cfg.thermal_response[key]
    gain = state.anneal_gain * (1.0 + step)
    drift = state.drift_factor(ev.t_s)
    if cfg.floor_at_r0:
        total = (1.0 + state.y_env) * gain * drift
        if total < 1.0:
            gain = 1.0 / ((1.0 + state.y_env) * drift)
    return replace(state, anneal_gain=gain)


def measurement_exposure(
    state: TrajectoryState,
    duration_s: float,
    cfg: SimConfig,
    from_env: Environment | None = None,
    profile: JunctionProfile | None = None,
) -> TrajectoryState:
    """Advance the state under the ambient bound for a probe-station visit.

    ``from_env`` selects the relaxation class for the excursion (vacuum
    storage relaxes fast on exposure); the caller restores the scheduled
    environment afterwards simply by resuming the schedule.  Zero duration
    is the identity.
    """
    if duration_s < 0:
        raise ValidationError("exposure duration must be >= 0")
    if duration_s == 0:
        return state
    prof = profile or JunctionProfile(a=cfg.fab_a)
    ambient = Environment.from_kind(EnvironmentKind.AMBIENT)
    if ambient.kind not in cfg.env_tau_s:
        raise ConfigurationError("ambient timescale missing from config")
    tau = cfg.env_tau_s[ambient.kind] * prof.tau_scale
    relax = cfg.relax_time_s(from_env or ambient, ambient)
    y_env = _advance(
        state.y_env, state.t_s, state.t_s + duration_s,
        prof.a, tau, prof.b, relax, cfg.integration_dt_s,
    )
    return replace(
        state,
        t_s=state.t_s + duration_s,
        y_env=y_env,
        virtual_age_s=state.virtual_age_s + duration_s,
    )


def resume_trajectory(
    y_start: float,
    t_start_s: float,
    schedule: StorageSchedule,
    cfg: SimConfig,
    t_end_s: float,
    profile: JunctionProfile | None = None,
) -> float:
    """Advance fractional aging from (t_start, y_start) to t_end, no events.

    Used for forward prediction from a fitted state; a state lying on the
    active bound continues along it exactly.
    """
    if t_end_s < t_start_s:
        raise ValidationError("t_end_s must be >= t_start_s")
    prof = profile or JunctionProfile(a=cfg.fab_a)
    env = schedule.environment_at(t_start_s)
    if env.kind not in cfg.env_tau_s:
        raise ConfigurationError(f"no timescale configured for {env.kind.value!r}")
    relax = cfg.relax_gas_to_gas_s
    y, t = y_start, t_start_s
    for start, nxt in schedule.segments:
        if start <= t_start_s or start >= t_end_s:
            continue
        tau = cfg.env_tau_s[env.kind] * prof.tau_scale
        y = _advance(y, t, start, prof.a, tau, prof.b, relax, cfg.integration_dt_s)
        relax = cfg.relax_time_s(env, nxt)
        env, t = nxt, start
        if nxt.kind not in cfg.env_tau_s:
            raise ConfigurationError(f"no timescale configured for {nxt.kind.value!r}")
    tau = cfg.env_tau_s[env.kind] * prof.tau_scale
    return _advance(y, t, t_end_s, prof.a, tau, prof.b, relax, cfg.integration_dt_s)


def _event_seed(seed: int, index: int) -> int:
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(index,))
    return int(ss.generate_state(1)[0])


def simulate_trajectory(
    schedule: StorageSchedule,
    events: Sequence[AnnealEvent],
    cfg: SimConfig,
    r0_ohm: float,
    sample_t_s: Sequence[float],
    seed: int = 0,
    profile: JunctionProfile | None = None,
) -> list[tuple[float, float]]:
    """Simulate one junction through a storage schedule with anneal events.

    Parameters
    ----------
    schedule : StorageSchedule
        Environment timeline starting at t = 0.
    events : sequence of AnnealEvent
        Sorted by time; applied atomically at their timestamps (before any
        sample at the same instant).
    cfg : SimConfig
        Kinetics, anneal responses, and integration step.
    r0_ohm : float
        Initial-time resistance; output resistances are r0 * (1 + y).
    sample_t_s : sequence of float
        Nondecreasing times at which to record (t_s, R_ohm) pairs.
    seed : int
        Drives the voltage-anneal response draws; identical inputs and seed
        give bit-identical trajectories.
    profile : JunctionProfile, optional
        Per-junction bound-curve override used by ensemble simulation.

    Returns
    -------
    list of (t_s, R_ohm)
    """
    if r0_ohm <= 0:
        raise ParameterError("r0_ohm must be > 0")
    samples = [float(t) for t in sample_t_s]
    if any(t < 0 for t in samples):
        raise ValidationError("sample times must be >= 0")
    if any(b < a for a, b in zip(samples, samples[1:])):
        raise ValidationError("sample times must be nondecreasing")
    ev_times = [ev.t_s for ev in events]
    if any(b < a for a, b in zip(ev_times, ev_times[1:])):
        raise ValidationError("events must be sorted by time")

    prof = profile or JunctionProfile(a=cfg.fab_a)
    for _, env in schedule.segments:
        if env.kind not in cfg.env_tau_s:
            raise ConfigurationError(
                f"no timescale configured for environment {env.kind.value!r}"
            )

    # Action stream ordered by (time, kind): segment swaps, then events,
    # then sample emissions.
    actions: list[tuple[float, int, object]] = []
    for start, env in schedule.segments[1:]:
        actions.append((start, 0, env))
    for k, ev in enumerate(events):
        actions.append((ev.t_s, 1, (k, ev)))
    for t in samples:
        actions.append((t, 2, None))
    actions.sort(key=lambda item: (item[0], item[1]))

    # A junction with early-time offset b starts on its bound, slightly
    # pre-aged: y(0) = a ln(b).
    state = TrajectoryState(y_env=prof.a * math.log(prof.b))
    env = schedule.segments[0][1]
    relax = cfg.relax_gas_to_gas_s
    out: list[tuple[float, float]] = []

    for t_act, kind, payload in actions:
        if t_act > state.t_s:
            tau = cfg.env_tau_s[env.kind] * prof.tau_scale
            y_env = _advance(
                state.y_env, state.t_s, t_act,
                prof.a, tau, prof.b, relax, cfg.integration_dt_s,
            )
            state = replace(
                state, t_s=t_act, y_env=y_env,
                virtual_age_s=state.virtual_age_s + (t_act - state.t_s),
            )
        if kind == 0:
            relax = cfg.relax_time_s(env, payload)
            env = payload
        elif kind == 1:
            k, ev = payload
            if isinstance(ev.kind, VoltageAnneal):
                state = apply_voltage_anneal(state, ev, cfg, _event_seed(seed, k))
            else:
                state = apply_thermal_anneal(state, ev, cfg)
        else:
            out.append((state.t_s, r0_ohm * (1.0 + state.y)))
    return out
