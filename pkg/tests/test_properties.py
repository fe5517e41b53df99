"""Property-based checks on model invariants and fitter consistency."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from jjaging import (
    AgingParams,
    BarrierParams,
    TwoLogParams,
    coefficient_of_variation,
    critical_current_from_resistance,
    effective_tau,
    eval_single_log,
    eval_two_log,
    fit_single_log,
    qubit_frequency_shift,
    resistance_ratio_from_barrier,
)

amps = st.floats(min_value=0.0, max_value=1.0, allow_nan=False, allow_subnormal=False)
pos_amps = st.floats(min_value=1e-3, max_value=1.0)
taus = st.floats(min_value=1e2, max_value=1e8)
offsets = st.floats(min_value=1e-3, max_value=10.0)
times = st.floats(min_value=0.0, max_value=1e8)


@given(a=pos_amps, tau=taus, b=offsets, t1=times, t2=times)
def test_single_log_strictly_increasing(a, tau, b, t1, t2):
    p = AgingParams(a=a, tau_s=tau, b=b)
    lo, hi = sorted((t1, t2))
    v_lo, v_hi = eval_single_log(p, lo), eval_single_log(p, hi)
    assert v_hi >= v_lo
    if hi / tau + b > lo / tau + b:  # gap resolvable in float
        assert v_hi > v_lo


@given(tau=taus, b=offsets, t=times)
def test_single_log_constant_for_zero_amplitude(tau, b, t):
    p = AgingParams(a=0.0, tau_s=tau, b=b)
    assert eval_single_log(p, t) == eval_single_log(p, 0.0)


@given(a=pos_amps, tau=taus, t=times)
def test_two_log_degenerates_to_single_log(a, tau, t):
    two = TwoLogParams(a_int=a, tau_int_s=tau, a_ext=0.0, tau_ext_s=1e3)
    one = AgingParams(a=a, tau_s=tau, b=1.0)
    assert eval_two_log(two, t) == pytest.approx(eval_single_log(one, t), rel=1e-12)


@given(ai=amps, ae=amps, ti=taus, te=taus)
def test_effective_tau_between_channel_timescales(ai, ae, ti, te):
    if ai + ae == 0:
        return
    p = TwoLogParams(a_int=ai, tau_int_s=ti, a_ext=ae, tau_ext_s=te)
    teff = effective_tau(p)
    lo, hi = sorted((ti, te))
    assert lo * (1 - 1e-9) <= teff <= hi * (1 + 1e-9)


EV = 1.602176634e-19
ME = 9.1093837015e-31
barriers = st.builds(
    BarrierParams,
    thickness_d_m=st.floats(min_value=5e-10, max_value=3e-9),
    height_U_J=st.floats(min_value=0.5 * EV, max_value=4 * EV),
    mass_m_kg=st.floats(min_value=0.3 * ME, max_value=3 * ME),
)


@given(b1=barriers, b2=barriers, b3=barriers)
def test_barrier_ratio_composes_multiplicatively(b1, b2, b3):
    r13 = resistance_ratio_from_barrier(b1, b3)
    r12 = resistance_ratio_from_barrier(b1, b2)
    r23 = resistance_ratio_from_barrier(b2, b3)
    assert r13 == pytest.approx(r12 * r23, rel=1e-9)
    assert resistance_ratio_from_barrier(b1, b1) == 1.0


@given(r=st.floats(min_value=10.0, max_value=1e6))
def test_critical_current_product_constant(r):
    assert critical_current_from_resistance(r) * r == pytest.approx(
        critical_current_from_resistance(1e4) * 1e4, rel=1e-12
    )


@given(x=st.floats(min_value=-0.9, max_value=10.0))
def test_frequency_shift_sign_opposes_resistance_change(x):
    shift = qubit_frequency_shift(x)
    if x > 1e-12:
        assert shift < 0
    elif x < -1e-12:
        assert shift > 0
    else:
        assert abs(shift) < 1e-11


@given(
    values=st.lists(st.floats(min_value=1.0, max_value=1e6), min_size=2, max_size=30),
)
def test_cv_nonnegative_and_scale_invariant(values):
    cv = coefficient_of_variation(values)
    assert cv >= 0
    scaled = [7.5 * v for v in values]
    assert coefficient_of_variation(scaled) == pytest.approx(cv, rel=1e-9, abs=1e-12)


@given(
    values=st.lists(st.floats(min_value=1.0, max_value=1e6), min_size=2, max_size=15),
)
def test_cv_ignores_none_entries(values):
    padded = list(values) + [None, float("nan")]
    assert coefficient_of_variation(padded) == coefficient_of_variation(values)


@settings(max_examples=25, deadline=None)
@given(
    a=st.floats(min_value=0.05, max_value=0.5),
    log_tau=st.floats(min_value=math.log(1e3), max_value=math.log(1e6)),
    b=st.floats(min_value=0.5, max_value=2.0),
)
def test_fit_round_trip_inside_bounds(a, log_tau, b):
    # Noiseless generator anywhere inside the box comes back with tau > 0
    # and a faithful curve.
    p = AgingParams(a=a, tau_s=math.exp(log_tau), b=b)
    t = np.logspace(2.5, 7, 30)
    series = np.column_stack([t, eval_single_log(p, t)])
    res = fit_single_log(series)
    assert res.params.tau_s > 0
    fit_curve = eval_single_log(res.params, t)
    np.testing.assert_allclose(fit_curve, series[:, 1], atol=5e-4)


@settings(max_examples=15, deadline=None)
@given(
    y0=st.floats(min_value=0.0, max_value=1.0),
    y1=st.floats(min_value=0.0, max_value=1.0),
    steps=st.integers(min_value=1, max_value=40),
)
def test_relaxation_contracts_state_pairs(y0, y1, steps):
    from jjaging.trajectory import _advance

    t, dt, relax = 5 * 86400.0, 600.0, 3 * 86400.0
    gap = abs(y1 - y0)
    for _ in range(steps):
        y0 = _advance(y0, t, t + dt, 0.21, 1.2e4, 1.0, relax, dt)
        y1 = _advance(y1, t, t + dt, 0.21, 1.2e4, 1.0, relax, dt)
        t += dt
        new_gap = abs(y1 - y0)
        assert new_gap <= gap + 1e-15
        gap = new_gap
