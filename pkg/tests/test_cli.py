import json
import math

import numpy as np
import pytest

from jjaging import AgingParams, eval_single_log, load_measurements
from jjaging.cli import main

DAY = 86400.0


def run(*argv):
    return main(list(argv))


def write_flat_spec(tmp_path, n_junctions=16, env="ambient"):
    spec = {
        "chip": {
            "r0_mean_ohm": 22_800.0, "r0_cv": 0.0, "a_mean": 0.21, "a_sd": 0.0,
            "log_tau_mean": math.log(1.2e4), "log_tau_sd": 0.0,
            "b_mean": 1.01, "b_sd": 0.0, "n_junctions": n_junctions,
            "noise_sigma": 0.0,
        },
        "sim": {"fab_a": 0.21},
        "environment": env,
    }
    path = tmp_path / "spec.json"
    path.write_text(json.dumps(spec))
    return path


class TestSimulate:
    def test_flat_chip_matches_closed_form(self, tmp_path, capsys):
        spec = write_flat_spec(tmp_path)
        out = tmp_path / "data.csv"
        code = run("simulate", "--spec", str(spec), "--target-days", "56",
                   "--seed", "1", "--out", str(out))
        assert code == 0
        summary = json.loads(out.with_suffix(".summary.json").read_text())
        expected = float(eval_single_log(AgingParams(a=0.21, tau_s=1.2e4, b=1.01), 56 * DAY))
        assert summary["final_mean_fractional_aging"] == pytest.approx(expected, rel=1e-6)
        assert "config_digest" in summary

    def test_zero_junction_spec_exits_2(self, tmp_path, capsys):
        spec = write_flat_spec(tmp_path, n_junctions=0)
        code = run("simulate", "--spec", str(spec), "--seed", "1",
                   "--out", str(tmp_path / "d.csv"))
        assert code == 2

    def test_same_seed_byte_identical(self, tmp_path, capsys):
        o1, o2, o3 = (tmp_path / n for n in ("a.csv", "b.csv", "c.csv"))
        for o in (o1, o2):
            assert run("simulate", "--preset", "chip1", "--target-days", "20",
                       "--seed", "7", "--out", str(o)) == 0
        assert run("simulate", "--preset", "chip1", "--target-days", "20",
                   "--seed", "8", "--out", str(o3)) == 0
        assert o1.read_bytes() == o2.read_bytes()
        assert o1.read_bytes() != o3.read_bytes()
        s1 = o1.with_suffix(".summary.json").read_bytes()
        s2 = o2.with_suffix(".summary.json").read_bytes()
        assert s1 == s2

    def test_chip1_preset_final_aging_near_oracle(self, tmp_path, capsys):
        # With device spread the 16-junction mean lands near the closed form.
        out = tmp_path / "c1.csv"
        assert run("simulate", "--preset", "chip1", "--target-days", "56",
                   "--seed", "2", "--out", str(out)) == 0
        summary = json.loads(out.with_suffix(".summary.json").read_text())
        assert summary["final_mean_fractional_aging"] == pytest.approx(2.26, abs=0.1)

    def test_preset_with_schedule_file(self, tmp_path, capsys):
        sched = tmp_path / "sched.txt"
        sched.write_text("0,ambient\n4,glovebox\n")
        out = tmp_path / "d.csv"
        code = run("simulate", "--preset", "chip3", "--schedule", str(sched),
                   "--target-days", "10", "--seed", "3", "--out", str(out))
        assert code == 0
        ds = load_measurements(out)
        labels = {r.env_label for r in ds.records}
        assert labels == {"ambient", "glovebox"}


class TestFit:
    def _simulate(self, tmp_path, preset="chip2", days="56"):
        out = tmp_path / "data.csv"
        assert run("simulate", "--preset", preset, "--target-days", days,
                   "--seed", "11", "--out", str(out)) == 0
        return out

    def test_fit_chip2_recovers_amplitude(self, tmp_path, capsys):
        data = self._simulate(tmp_path)
        report_path = tmp_path / "report.json"
        code = run("fit", str(data), "--model", "single-log", "--out", str(report_path))
        assert code in (0, 3)
        report = json.loads(report_path.read_text())
        a = report["average"]["params"]["a"]
        assert abs(a - 0.15) <= 0.02
        assert report["provenance"]["tool_version"]
        assert report["histograms"]["a"]["counts"]

    def test_too_few_time_points_exits_2(self, tmp_path, capsys):
        out = tmp_path / "short.csv"
        assert run("simulate", "--preset", "chip1", "--target-days", "4",
                   "--sample-days", "2", "--seed", "1", "--out", str(out)) == 0
        code = run("fit", str(out), "--out", str(tmp_path / "r.json"))
        assert code == 2

    def test_two_log_model_canonical_order(self, tmp_path, capsys):
        # Synthetic two-channel data fit through the CLI: channels come back
        # in canonical (slow, fast) order.
        from jjaging import TwoLogParams, eval_two_log

        gen = TwoLogParams(a_int=0.10, tau_int_s=3.9e5, a_ext=0.11, tau_ext_s=1.2e3)
        t = np.logspace(2.5, 7, 30)
        rows = ["chip_id,junction_id,t_seconds,resistance_ohms,environment,flag"]
        for j in range(2):
            for tt in t:
                rows.append(
                    f"twolog,{j},{float(tt)!r},{8000.0 * float(eval_two_log(gen, tt))!r},ambient,ok"
                )
        data = tmp_path / "twolog.csv"
        data.write_text("\n".join(rows) + "\n")
        report_path = tmp_path / "r2.json"
        code = run("fit", str(data), "--model", "two-log", "--out", str(report_path))
        assert code in (0, 3)
        p = json.loads(report_path.read_text())["average"]["params"]
        assert p["kind"] == "two-log"
        assert p["tau_int_s"] >= p["tau_ext_s"]
        assert p["a_int"] + p["a_ext"] == pytest.approx(0.21, abs=0.02)

    def test_parse_error_exits_2(self, tmp_path, capsys):
        bad = tmp_path / "bad.csv"
        bad.write_text("not,a,measurement\n")
        assert run("fit", str(bad), "--out", str(tmp_path / "r.json")) == 2


class TestPredict:
    def test_flat_amplitude_prediction_equals_last_resistance(self, tmp_path, capsys):
        spec = write_flat_spec(tmp_path)
        # a = 0: no aging; prediction equals the reference resistance
        sp = json.loads(spec.read_text())
        sp["chip"]["a_mean"] = 0.0
        sp["chip"]["b_mean"] = 1.0
        sp["sim"]["fab_a"] = 0.0
        spec.write_text(json.dumps(sp))
        data = tmp_path / "d.csv"
        assert run("simulate", "--spec", str(spec), "--target-days", "30",
                   "--seed", "2", "--out", str(data)) == 0
        report = tmp_path / "r.json"
        assert run("fit", str(data), "--out", str(report)) in (0, 3)
        pred = tmp_path / "p.json"
        code = run("predict", "--report", str(report), "--target-days", "60",
                   "--out", str(pred))
        assert code == 0
        p = json.loads(pred.read_text())
        assert p["r_predicted_ohm"] == pytest.approx(p["r_from_ohm"], rel=1e-9)
        assert p["dr_over_r"] == pytest.approx(0.0, abs=1e-9)
        assert p["freq_shift_fraction"] == pytest.approx(0.0, abs=1e-9)

    def test_chip1_week_ahead_matches_closed_form_increment(self, tmp_path, capsys):
        pred = tmp_path / "p.json"
        code = run("predict", "--preset", "chip1", "--from-days", "56",
                   "--target-days", "63", "--out", str(pred))
        assert code == 0
        p = json.loads(pred.read_text())
        params = AgingParams(a=0.21, tau_s=1.2e4, b=1.01, r0_ohm=22_800.0)
        want = float(eval_single_log(params, 63 * DAY)) / float(eval_single_log(params, 56 * DAY)) - 1
        assert p["dr_over_r"] == pytest.approx(want, rel=1e-6)
        # critical current and frequency shift come along
        assert p["critical_current_a"] > 0
        assert p["freq_shift_fraction"] < 0

    def test_ambient_forward_larger_than_glovebox(self, tmp_path, capsys):
        outs = {}
        for env in ("ambient", "glovebox"):
            sched = tmp_path / f"{env}.txt"
            sched.write_text(f"0,{env}\n")
            out = tmp_path / f"{env}.json"
            assert run("predict", "--preset", "chip1", "--from-days", "56",
                       "--target-days", "70", "--schedule", str(sched),
                       "--out", str(out)) == 0
            outs[env] = json.loads(out.read_text())["r_predicted_ohm"]
        assert outs["ambient"] > outs["glovebox"]

    def test_target_before_last_measurement_exits_2(self, tmp_path, capsys):
        code = run("predict", "--preset", "chip1", "--from-days", "56",
                   "--target-days", "40")
        assert code == 2


OVEN_SEQUENCE = (
    "event,85.0,thermal,temp_c=200,env=glovebox,hold_min=10\n"
    "event,85.2,thermal,temp_c=250,env=glovebox,hold_min=10\n"
    "event,85.4,thermal,temp_c=200,env=ambient,hold_min=40\n"
    "event,85.6,thermal,temp_c=250,env=ambient,hold_min=10\n"
    "event,85.8,thermal,temp_c=200,env=ambient,hold_min=10\n"
)


class TestAnneal:
    def _dataset(self, tmp_path, preset="chip3", days="85"):
        out = tmp_path / "aged.csv"
        assert run("simulate", "--preset", preset, "--target-days", days,
                   "--seed", "5", "--out", str(out)) == 0
        return out

    def test_five_step_sign_pattern(self, tmp_path, capsys):
        data = self._dataset(tmp_path)
        events = tmp_path / "steps.txt"
        events.write_text(OVEN_SEQUENCE)
        out = tmp_path / "annealed.csv"
        code = run("anneal", str(data), "--events", str(events), "--preset", "chip3",
                   "--out", str(out))
        assert code == 0
        steps = json.loads(out.with_suffix(".steps.json").read_text())["steps"]
        signs = [math.copysign(1, s["mean_fractional_change"]) for s in steps]
        assert signs == [-1, -1, +1, -1, +1]
        assert steps[4]["mean_fractional_change"] < steps[2]["mean_fractional_change"]

    def test_floor_keeps_ratio_at_least_one(self, tmp_path, capsys):
        data = self._dataset(tmp_path, days="20")
        events = tmp_path / "steps.txt"
        events.write_text(
            "event,20.5,thermal,temp_c=250,env=glovebox,hold_min=10\n"
            "event,20.7,thermal,temp_c=250,env=glovebox,hold_min=10\n"
            "event,20.9,thermal,temp_c=250,env=glovebox,hold_min=10\n"
        )
        out = tmp_path / "annealed.csv"
        assert run("anneal", str(data), "--events", str(events), "--preset", "chip3",
                   "--out", str(out)) == 0
        info = json.loads(out.with_suffix(".steps.json").read_text())
        assert info["min_r_over_r0"] >= 1.0 - 1e-12

    def test_empty_event_list_is_identity(self, tmp_path, capsys):
        data = self._dataset(tmp_path, days="20")
        events = tmp_path / "none.txt"
        events.write_text("# nothing here\n")
        out = tmp_path / "same.csv"
        assert run("anneal", str(data), "--events", str(events), "--preset", "chip3",
                   "--out", str(out)) == 0
        assert out.read_bytes() == data.read_bytes()

    def test_unknown_thermal_entry_exits_2(self, tmp_path, capsys):
        data = self._dataset(tmp_path, days="20")
        events = tmp_path / "steps.txt"
        events.write_text("event,20.5,thermal,temp_c=300,env=ambient,hold_min=10\n")
        code = run("anneal", str(data), "--events", str(events), "--preset", "chip3",
                   "--out", str(tmp_path / "x.csv"))
        assert code == 2

    def test_voltage_events_require_seed(self, tmp_path, capsys):
        data = self._dataset(tmp_path, days="20")
        events = tmp_path / "v.txt"
        events.write_text("event,20.5,voltage,n_pulses=30,amplitude_v=0.9,pulse_duration_s=1\n")
        code = run("anneal", str(data), "--events", str(events), "--preset", "chip1",
                   "--out", str(tmp_path / "x.csv"))
        assert code == 2
        code = run("anneal", str(data), "--events", str(events), "--preset", "chip1",
                   "--seed", "4", "--out", str(tmp_path / "x.csv"))
        assert code == 0


class TestParser:
    def test_unknown_command(self, capsys):
        assert run("frobnicate") == 2

    def test_missing_required(self, capsys):
        assert run("simulate", "--preset", "chip1") == 2
