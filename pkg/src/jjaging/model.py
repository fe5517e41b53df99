"""Closed-form junction aging models and the resistance -> qubit observable chain.

The resistance of an Al/AlOx/Al tunnel junction drifts upward after
fabrication, approximately logarithmically in time.  This module evaluates
the two phenomenological forms used throughout the package:

* single-channel:  ``R(t)/R0 = 1 + a * ln(t/tau + b)``
* two-channel:     ``R(t)/R0 = 1 + a_int * ln(1 + t/tau_int)
  + a_ext * ln(1 + t/tau_ext)``

where the "internal" channel is insensitive to the storage environment and
the "external" channel carries the environment-dependent kinetics.  All
logarithms are natural logarithms and all times are seconds.

It also provides the tunnel-barrier sensitivity relation
``R ~ exp(2 kappa d)`` (exposed as resistance *ratios* only, since the
proportionality prefactor is not modeled), the zero-temperature
Ambegaokar-Baratoff mapping from normal-state resistance to critical
current, and a transmon-style fractional frequency shift for a given
fractional resistance change.

Everything here is pure and stateless; scalar or ndarray time inputs are
accepted and the output follows the input shape.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import ParameterError

__all__ = [
    "EnvironmentKind",
    "Environment",
    "AMBIENT",
    "GLOVEBOX",
    "VACUUM",
    "AgingParams",
    "TwoLogParams",
    "BarrierParams",
    "PhysicalConstants",
    "DEFAULT_CONSTANTS",
    "eval_single_log",
    "eval_two_log",
    "effective_tau",
    "barrier_kappa",
    "resistance_ratio_from_barrier",
    "critical_current_from_resistance",
    "qubit_frequency_shift",
]


class EnvironmentKind(str, Enum):
    """Storage environment classes distinguished by the kinetics config."""

    AMBIENT = "ambient"
    NITROGEN_GLOVEBOX = "glovebox"
    HIGH_VACUUM = "vacuum"


# Default atmosphere composition per environment kind:
# (O2 fraction, relative humidity).
_ENV_DEFAULTS = {
    EnvironmentKind.AMBIENT: (0.21, 0.60),
    EnvironmentKind.NITROGEN_GLOVEBOX: (0.00, 0.01),
    EnvironmentKind.HIGH_VACUUM: (0.0, 0.0),
}


@dataclass(frozen=True)
class Environment:
    """A storage environment: kind plus its atmosphere composition."""

    kind: EnvironmentKind
    o2_fraction: float
    rel_humidity: float
    label: str = ""

    def __post_init__(self):
        if not 0.0 <= self.o2_fraction <= 1.0:
            raise ParameterError(f"o2_fraction must be in [0, 1], got {self.o2_fraction}")
        if not 0.0 <= self.rel_humidity <= 1.0:
            raise ParameterError(f"rel_humidity must be in [0, 1], got {self.rel_humidity}")

    @classmethod
    def from_kind(cls, kind: EnvironmentKind | str, label: str = "") -> "Environment":
        """Build an environment with the default composition for ``kind``."""
        kind = EnvironmentKind(kind)
        o2, rh = _ENV_DEFAULTS[kind]
        return cls(kind=kind, o2_fraction=o2, rel_humidity=rh, label=label or kind.value)


AMBIENT = Environment.from_kind(EnvironmentKind.AMBIENT)
GLOVEBOX = Environment.from_kind(EnvironmentKind.NITROGEN_GLOVEBOX)
VACUUM = Environment.from_kind(EnvironmentKind.HIGH_VACUUM)


@dataclass(frozen=True)
class AgingParams:
    """Single-channel aging parameters.

    Attributes
    ----------
    a : float
        Fractional aging amplitude (dimensionless, >= 0).
    tau_s : float
        Aging timescale in seconds (> 0).
    b : float
        Offset inside the logarithm (> 0); keeps the value finite at t = 0
        and is ~1 for freshly fabricated junctions.
    r0_ohm : float
        Reference resistance at t ~ 0 in ohms (> 0).
    """

    a: float
    tau_s: float
    b: float = 1.0
    r0_ohm: float = 1.0

    def __post_init__(self):
        if not (np.isfinite(self.a) and self.a >= 0):
            raise ParameterError(f"amplitude a must be finite and >= 0, got {self.a}")
        if not (np.isfinite(self.tau_s) and self.tau_s > 0):
            raise ParameterError(f"tau_s must be finite and > 0, got {self.tau_s}")
        if not (np.isfinite(self.b) and self.b > 0):
            raise ParameterError(f"b must be finite and > 0, got {self.b}")
        if not (np.isfinite(self.r0_ohm) and self.r0_ohm > 0):
            raise ParameterError(f"r0_ohm must be finite and > 0, got {self.r0_ohm}")


@dataclass(frozen=True)
class TwoLogParams:
    """Two-channel (internal + external reservoir) aging parameters."""

    a_int: float
    tau_int_s: float
    a_ext: float
    tau_ext_s: float
    r0_ohm: float = 1.0

    def __post_init__(self):
        for name in ("a_int", "a_ext"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v >= 0):
                raise ParameterError(f"{name} must be finite and >= 0, got {v}")
        for name in ("tau_int_s", "tau_ext_s", "r0_ohm"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v > 0):
                raise ParameterError(f"{name} must be finite and > 0, got {v}")


@dataclass(frozen=True)
class BarrierParams:
    """Effective rectangular tunnel-barrier parameters (SI units)."""

    thickness_d_m: float
    height_U_J: float
    mass_m_kg: float

    def __post_init__(self):
        for name in ("thickness_d_m", "height_U_J", "mass_m_kg"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v > 0):
                raise ParameterError(f"{name} must be finite and > 0, got {v}")


@dataclass(frozen=True)
class PhysicalConstants:
    """Physical constants plus the superconducting gap.

    The gap is a configuration input (it depends on the film), defaulting
    to 180 ueV, a typical value for thin-film aluminum.
    """

    hbar_Js: float = 1.054571817e-34
    electron_charge_C: float = 1.602176634e-19
    gap_delta_J: float = 180e-6 * 1.602176634e-19

    def __post_init__(self):
        for name in ("hbar_Js", "electron_charge_C", "gap_delta_J"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v > 0):
                raise ParameterError(f"{name} must be finite and > 0, got {v}")


DEFAULT_CONSTANTS = PhysicalConstants()


def _check_times(t_s):
    t = np.asarray(t_s, dtype=float)
    if np.any(t < 0) or not np.all(np.isfinite(t)):
        raise ParameterError("times must be finite and >= 0")
    return t


def _as_input_shape(value: np.ndarray, like) -> float | np.ndarray:
    if np.ndim(like) == 0:
        return float(value)
    return value


def eval_single_log(p: AgingParams, t_s) -> float | np.ndarray:
    """Fractional resistance ``R(t)/R0 = 1 + a ln(t/tau + b)``.

    Parameters
    ----------
    p : AgingParams
        Model parameters; validated at construction.
    t_s : float or array_like
        Time since fabrication in seconds, >= 0.

    Returns
    -------
    float or ndarray
        Dimensionless fractional resistance, strictly increasing in t for
        a > 0 and constant (== 1 + a ln b) for a = 0 only when b = 1.
    """
    t = _check_times(t_s)
    out = 1.0 + p.a * np.log(t / p.tau_s + p.b)
    return _as_input_shape(out, t_s)


def eval_two_log(p: TwoLogParams, t_s) -> float | np.ndarray:
    """Fractional resistance of the two-channel model.

    ``R(t)/R0 = 1 + a_int ln(1 + t/tau_int) + a_ext ln(1 + t/tau_ext)``;
    equals 1 exactly at t = 0 and reduces to the single-channel form with
    b = 1 when one amplitude vanishes.
    """
    t = _check_times(t_s)
    out = (
        1.0
        + p.a_int * np.log1p(t / p.tau_int_s)
        + p.a_ext * np.log1p(t / p.tau_ext_s)
    )
    return _as_input_shape(out, t_s)


def effective_tau(p: TwoLogParams) -> float:
    """Amplitude-weighted geometric mean of the two channel timescales.

    Returns ``tau_int**(a_int/a) * tau_ext**(a_ext/a)`` with
    ``a = a_int + a_ext``, computed in log space.  This is the single-log
    timescale that best approximates the two-channel curve over a limited
    dynamic range.
    """
    a = p.a_int + p.a_ext
    if a <= 0:
        raise ParameterError("effective_tau requires a_int + a_ext > 0")
    log_tau = (p.a_int * math.log(p.tau_int_s) + p.a_ext * math.log(p.tau_ext_s)) / a
    return math.exp(log_tau)


def barrier_kappa(bp: BarrierParams, c: PhysicalConstants = DEFAULT_CONSTANTS) -> float:
    """Tunneling decay constant ``kappa = sqrt(2 m U) / hbar`` in 1/m."""
    return math.sqrt(2.0 * bp.mass_m_kg * bp.height_U_J) / c.hbar_Js


def resistance_ratio_from_barrier(
    b1: BarrierParams, b2: BarrierParams, c: PhysicalConstants = DEFAULT_CONSTANTS
) -> float:
    """Resistance ratio ``R2/R1 = exp(2 (kappa2 d2 - kappa1 d1))``.

    Only ratios are exposed: the absolute-resistance prefactor of the
    rectangular-barrier picture is not modeled.  Monotonically increasing
    in d and U, equal to 1 for identical barriers, and composes
    multiplicatively across intermediate barriers.
    """
    k1 = barrier_kappa(b1, c)
    k2 = barrier_kappa(b2, c)
    return math.exp(2.0 * (k2 * b2.thickness_d_m - k1 * b1.thickness_d_m))


def critical_current_from_resistance(
    r_ohm: float, c: PhysicalConstants = DEFAULT_CONSTANTS
) -> float:
    """Zero-temperature critical current ``I_c = pi Delta / (2 e R)`` in A."""
    if not (np.isfinite(r_ohm) and r_ohm > 0):
        raise ParameterError(f"resistance must be finite and > 0, got {r_ohm}")
    return math.pi * c.gap_delta_J / (2.0 * c.electron_charge_C * r_ohm)


def qubit_frequency_shift(dr_over_r) -> float | np.ndarray:
    """Fractional transmon frequency shift for a fractional resistance change.

    The qubit frequency scales as 1/sqrt(R) through the Josephson energy,
    so ``df/f = (1 + dR/R)**(-1/2) - 1``, which is ~ -dR/R / 2 for small
    changes.  Requires dR/R > -1.
    """
    x = np.asarray(dr_over_r, dtype=float)
    if np.any(x <= -1.0):
        raise ParameterError("fractional resistance change must be > -1")
    out = (1.0 + x) ** -0.5 - 1.0
    return _as_input_shape(out, dr_over_r)
