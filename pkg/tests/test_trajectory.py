import numpy as np
import pytest

from jjaging import (
    AMBIENT,
    GLOVEBOX,
    VACUUM,
    AgingParams,
    AnnealEvent,
    ConfigurationError,
    JunctionProfile,
    ParameterError,
    SimConfig,
    StorageSchedule,
    ThermalAnneal,
    TrajectoryState,
    ValidationError,
    VoltageAnneal,
    apply_thermal_anneal,
    apply_voltage_anneal,
    bound_curve,
    eval_single_log,
    measurement_exposure,
    resume_trajectory,
    simulate_trajectory,
)
from jjaging.model import EnvironmentKind

DAY = 86400.0


def chip1_cfg(**over):
    defaults = dict(fab_a=0.21, voltage_jump_mean=0.142, voltage_jump_sd=0.0)
    defaults.update(over)
    return SimConfig(**defaults)


class TestSchedule:
    def test_must_start_at_zero(self):
        with pytest.raises(ValidationError):
            StorageSchedule(segments=((5.0, AMBIENT),))

    def test_strictly_increasing(self):
        with pytest.raises(ValidationError):
            StorageSchedule(segments=((0.0, AMBIENT), (4 * DAY, GLOVEBOX), (4 * DAY, AMBIENT)))

    def test_environment_lookup(self):
        sched = StorageSchedule(segments=((0.0, AMBIENT), (4 * DAY, GLOVEBOX)))
        assert sched.environment_at(0.0) is AMBIENT
        assert sched.environment_at(3.9 * DAY) is AMBIENT
        assert sched.environment_at(4 * DAY) is GLOVEBOX


class TestBoundCurve:
    def test_ambient_reference_chip(self):
        p = bound_curve(AMBIENT, chip1_cfg(), 22_800.0)
        assert (p.a, p.tau_s, p.b) == (0.21, 1.2e4, 1.0)

    def test_glovebox_and_vacuum_timescales(self):
        cfg = chip1_cfg()
        assert bound_curve(GLOVEBOX, cfg, 1.0).tau_s == pytest.approx(4.3e4)
        assert bound_curve(VACUUM, cfg, 1.0).tau_s == pytest.approx(6.9e4)

    def test_unknown_environment_rejected(self):
        cfg = chip1_cfg(env_tau_s={EnvironmentKind.AMBIENT: 1.2e4})
        with pytest.raises(ConfigurationError):
            bound_curve(GLOVEBOX, cfg, 1.0)


class TestSingleEnvironment:
    def test_matches_closed_form_to_rounding(self):
        # On-bound start: the exact-feedforward scheme reproduces the bound.
        cfg = chip1_cfg()
        samples = np.linspace(0, 56 * DAY, 57)
        traj = simulate_trajectory(StorageSchedule.single(AMBIENT), [], cfg, 22_800.0, samples)
        ref = 22_800.0 * eval_single_log(AgingParams(a=0.21, tau_s=1.2e4, b=1.0), samples)
        np.testing.assert_allclose([r for _, r in traj], ref, rtol=1e-12)

    def test_within_half_percent_of_fitted_curve_with_offset(self):
        cfg = chip1_cfg()
        samples = np.linspace(0, 56 * DAY, 113)
        traj = simulate_trajectory(StorageSchedule.single(AMBIENT), [], cfg, 22_800.0, samples)
        ref = 22_800.0 * eval_single_log(AgingParams(a=0.21, tau_s=1.2e4, b=1.01), samples)
        rel = np.abs(np.array([r for _, r in traj]) / ref - 1)
        assert rel.max() < 5e-3

    def test_validation_errors(self):
        cfg = chip1_cfg()
        sched = StorageSchedule.single(AMBIENT)
        with pytest.raises(ValidationError):
            simulate_trajectory(sched, [], cfg, 1.0, [2.0, 1.0])
        ev = [
            AnnealEvent(t_s=5 * DAY, kind=VoltageAnneal()),
            AnnealEvent(t_s=1 * DAY, kind=VoltageAnneal()),
        ]
        with pytest.raises(ValidationError):
            simulate_trajectory(sched, ev, cfg, 1.0, [0.0])


class TestSwapDynamics:
    def test_deaging_after_move_into_glovebox(self):
        cfg = chip1_cfg(fab_a=0.05)
        sched = StorageSchedule(segments=((0.0, AMBIENT), (4 * DAY, GLOVEBOX)))
        samples = np.arange(4 * DAY, 6 * DAY, 0.1 * DAY)
        traj = simulate_trajectory(sched, [], cfg, 1.0, samples)
        rs = np.array([r for _, r in traj])
        first_incr = np.diff(rs)[:5]
        assert np.all(first_incr < 0), "expected an initial resistance decrease"
        # and the transient flattens: late increments are small and positive
        late = np.diff(rs)[-3:]
        assert np.all(np.abs(late) < np.abs(first_incr[0]))

    def test_faster_aging_after_move_into_ambient(self):
        cfg = chip1_cfg(fab_a=0.05)
        sched = StorageSchedule(segments=((0.0, GLOVEBOX), (4 * DAY, AMBIENT)))
        samples = [3.5 * DAY, 4 * DAY, 4.5 * DAY, 5 * DAY]
        traj = simulate_trajectory(sched, [], cfg, 1.0, samples)
        before = traj[1][1] - traj[0][1]
        after = traj[3][1] - traj[2][1]
        assert after > before

    def test_vacuum_exit_rapid_relaxation(self):
        cfg = chip1_cfg(fab_a=0.12)
        sched = StorageSchedule(segments=((0.0, VACUUM), (7 * DAY, GLOVEBOX)))
        samples = np.arange(7 * DAY, 9 * DAY, 0.05 * DAY)
        traj = simulate_trajectory(sched, [], cfg, 1.0, samples)
        gb = eval_single_log(AgingParams(a=0.12, tau_s=4.3e4, b=1.0), samples) - 1.0
        y = np.array([r for _, r in traj]) - 1.0
        rel = np.abs(y - gb) / gb
        hit = samples[rel <= 0.10]
        assert hit.size and hit[0] - 7 * DAY < 1 * DAY

    def test_contraction_same_environment(self):
        # Two states in one environment converge monotonically in |dy|.
        from jjaging.trajectory import _advance

        cfg = chip1_cfg()
        y1, y2 = 0.30, 0.80
        gaps = []
        t = 10 * DAY
        for _ in range(20):
            y1 = _advance(y1, t, t + DAY / 4, 0.21, 1.2e4, 1.0, cfg.relax_gas_to_gas_s, 600.0)
            y2 = _advance(y2, t, t + DAY / 4, 0.21, 1.2e4, 1.0, cfg.relax_gas_to_gas_s, 600.0)
            t += DAY / 4
            gaps.append(abs(y2 - y1))
        assert all(b < a for a, b in zip(gaps, gaps[1:]))

    def test_determinism(self):
        cfg = chip1_cfg(voltage_jump_sd=0.02)
        sched = StorageSchedule(segments=((0.0, AMBIENT), (10 * DAY, GLOVEBOX)))
        ev = [AnnealEvent(t_s=20 * DAY, kind=VoltageAnneal())]
        samples = np.linspace(0, 30 * DAY, 61)
        t1 = simulate_trajectory(sched, ev, cfg, 9e3, samples, seed=42)
        t2 = simulate_trajectory(sched, ev, cfg, 9e3, samples, seed=42)
        assert t1 == t2
        t3 = simulate_trajectory(sched, ev, cfg, 9e3, samples, seed=43)
        assert t3 != t1


class TestVoltageAnneal:
    def test_jump_is_exactly_configured_mean_when_sd_zero(self):
        cfg = chip1_cfg()
        state = TrajectoryState(t_s=56 * DAY, y_env=1.26)
        ev = AnnealEvent(t_s=56 * DAY, kind=VoltageAnneal())
        out = apply_voltage_anneal(state, ev, cfg, rng_seed=1)
        assert (1 + out.y) / (1 + state.y) == pytest.approx(1.142, rel=1e-15)

    def test_chip2_like_jump_and_drift_tau(self):
        cfg = SimConfig(fab_a=0.15, voltage_jump_mean=0.181, voltage_jump_sd=0.0,
                        voltage_drift_tau_s=1.6e4)
        state = TrajectoryState(t_s=56 * DAY, y_env=0.71)
        out = apply_voltage_anneal(state, AnnealEvent(t_s=56 * DAY, kind=VoltageAnneal()), cfg, 7)
        assert (1 + out.y) / (1 + state.y) == pytest.approx(1.181, rel=1e-15)
        assert out.post_anneal.tau_s == 1.6e4

    def test_zero_response_leaves_trajectory_unchanged(self):
        cfg = chip1_cfg(voltage_jump_mean=0.0, voltage_jump_sd=0.0, voltage_drift_a=0.0)
        state = TrajectoryState(t_s=10 * DAY, y_env=0.5)
        out = apply_voltage_anneal(state, AnnealEvent(t_s=10 * DAY, kind=VoltageAnneal()), cfg, 3)
        assert out.y == state.y
        assert out.drift_factor(20 * DAY) == 1.0
        assert out.post_anneal is not None  # event bookkeeping retained

    def test_wrong_kind_rejected(self):
        cfg = chip1_cfg()
        ev = AnnealEvent(t_s=0.0, kind=ThermalAnneal(temp_c=200.0, env=GLOVEBOX))
        with pytest.raises(TypeError):
            apply_voltage_anneal(TrajectoryState(), ev, cfg, 0)

    def test_post_anneal_drift_grows_then_slows(self):
        cfg = chip1_cfg()
        state = TrajectoryState(t_s=0.0, y_env=0.0)
        out = apply_voltage_anneal(state, AnnealEvent(t_s=0.0, kind=VoltageAnneal()), cfg, 0)
        f1 = out.drift_factor(1 * DAY)
        f2 = out.drift_factor(2 * DAY)
        f4 = out.drift_factor(4 * DAY)
        assert 1.0 < f1 < f2 < f4
        assert (f2 - f1) > (f4 - f2) / 2  # log-like slowing


class TestThermalAnneal:
    def test_sign_conventions(self):
        cfg = chip1_cfg()
        base = TrajectoryState(t_s=85 * DAY, y_env=0.30)

        def step(temp, env):
            ev = AnnealEvent(t_s=85 * DAY, kind=ThermalAnneal(temp_c=temp, env=env))
            return apply_thermal_anneal(base, ev, cfg).y - base.y

        assert step(200.0, GLOVEBOX) < 0
        assert step(250.0, GLOVEBOX) < 0
        assert step(200.0, AMBIENT) > 0
        assert step(250.0, AMBIENT) < 0
        assert abs(step(250.0, AMBIENT)) < abs(step(250.0, GLOVEBOX))

    def test_floor_clamps_at_initial_resistance(self):
        cfg = chip1_cfg()
        state = TrajectoryState(t_s=85 * DAY, y_env=0.05)
        ev = AnnealEvent(t_s=85 * DAY, kind=ThermalAnneal(temp_c=250.0, env=GLOVEBOX))
        out = apply_thermal_anneal(state, ev, cfg)
        assert 1.0 + out.y == pytest.approx(1.0, abs=1e-15)

    def test_floor_disabled_allows_below_r0(self):
        cfg = chip1_cfg(floor_at_r0=False)
        state = TrajectoryState(t_s=85 * DAY, y_env=0.05)
        ev = AnnealEvent(t_s=85 * DAY, kind=ThermalAnneal(temp_c=250.0, env=GLOVEBOX))
        out = apply_thermal_anneal(state, ev, cfg)
        assert 1.0 + out.y == pytest.approx(1.05 * 0.88, rel=1e-12)

    def test_decrease_from_aged_state_stays_above_floor(self):
        cfg = chip1_cfg()
        state = TrajectoryState(t_s=85 * DAY, y_env=0.30)
        ev = AnnealEvent(t_s=85 * DAY, kind=ThermalAnneal(temp_c=250.0, env=GLOVEBOX))
        out = apply_thermal_anneal(state, ev, cfg)
        assert out.y < state.y
        assert 1.0 + out.y >= 1.0

    def test_zero_step_identity(self):
        cfg = chip1_cfg(thermal_response={(150.0, EnvironmentKind.AMBIENT): 0.0})
        state = TrajectoryState(t_s=1 * DAY, y_env=0.2)
        ev = AnnealEvent(t_s=1 * DAY, kind=ThermalAnneal(temp_c=150.0, env=AMBIENT))
        assert apply_thermal_anneal(state, ev, cfg).y == state.y

    def test_missing_table_entry(self):
        cfg = chip1_cfg()
        ev = AnnealEvent(t_s=0.0, kind=ThermalAnneal(temp_c=300.0, env=AMBIENT))
        with pytest.raises(ConfigurationError):
            apply_thermal_anneal(TrajectoryState(), ev, cfg)


class TestMeasurementExposure:
    def test_zero_duration_identity(self):
        cfg = chip1_cfg()
        state = TrajectoryState(t_s=30 * DAY, y_env=0.5)
        assert measurement_exposure(state, 0.0, cfg) == state

    def test_20_minutes_on_glovebox_stored_junction_is_tiny(self):
        cfg = chip1_cfg()
        y_gb = float(eval_single_log(AgingParams(a=0.21, tau_s=4.3e4, b=1.0), 30 * DAY)) - 1
        state = TrajectoryState(t_s=30 * DAY, y_env=y_gb)
        out = measurement_exposure(state, 20 * 60.0, cfg, from_env=GLOVEBOX)
        change = (1 + out.y) / (1 + state.y) - 1
        assert 0 < change < 1e-3

    def test_90_minutes_larger_than_20(self):
        cfg = chip1_cfg()
        y_gb = float(eval_single_log(AgingParams(a=0.21, tau_s=4.3e4, b=1.0), 30 * DAY)) - 1
        state = TrajectoryState(t_s=30 * DAY, y_env=y_gb)
        c20 = (1 + measurement_exposure(state, 20 * 60.0, cfg, from_env=GLOVEBOX).y) / (1 + state.y) - 1
        c90 = (1 + measurement_exposure(state, 90 * 60.0, cfg, from_env=GLOVEBOX).y) / (1 + state.y) - 1
        assert c90 > c20 > 0


class TestResume:
    def test_on_bound_continuation_matches_closed_form(self):
        cfg = chip1_cfg()
        p = AgingParams(a=0.21, tau_s=1.2e4, b=1.01)
        prof = JunctionProfile(a=p.a, b=p.b, tau_scale=1.0)
        y56 = float(eval_single_log(p, 56 * DAY)) - 1
        y63 = resume_trajectory(y56, 56 * DAY, StorageSchedule.single(AMBIENT), cfg, 63 * DAY, prof)
        assert y63 == pytest.approx(float(eval_single_log(p, 63 * DAY)) - 1, rel=1e-10)

    def test_crosses_swaps(self):
        cfg = chip1_cfg(fab_a=0.05)
        sched = StorageSchedule(segments=((0.0, AMBIENT), (4 * DAY, GLOVEBOX)))
        full = simulate_trajectory(sched, [], cfg, 1.0, [2 * DAY, 6 * DAY])
        y2 = full[0][1] - 1.0
        y6 = resume_trajectory(y2, 2 * DAY, sched, cfg, 6 * DAY)
        assert y6 == pytest.approx(full[1][1] - 1.0, rel=1e-12)


class TestConfigValidation:
    def test_dt_ceiling(self):
        with pytest.raises(ParameterError):
            SimConfig(integration_dt_s=7200.0)

    def test_relax_times_positive(self):
        with pytest.raises(ParameterError):
            SimConfig(relax_gas_to_gas_s=0.0)

    def test_relax_class_selection(self):
        cfg = chip1_cfg()
        assert cfg.relax_time_s(VACUUM, GLOVEBOX) == cfg.relax_vacuum_to_gas_s
        assert cfg.relax_time_s(AMBIENT, GLOVEBOX) == cfg.relax_gas_to_gas_s
        assert cfg.relax_time_s(GLOVEBOX, AMBIENT) == cfg.relax_gas_to_gas_s
