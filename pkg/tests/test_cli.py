"""CLI subcommands: exit codes, determinism, config handling."""

import math

import pytest

from spinbus import config as cfg
from spinbus.cli import load_run_config, main
from spinbus.errors import InputError

TRANSPORT_CONFIG = """\
# half-space drift test
[parameters]
sigma_cap = 5

[scenario]
geometry = half-space
nx = 16
ny = 16
nz = 24
dx = 1.0
dy = 1.0
dz = 1.0
e_drive = 0.004
initial = gaussian
gaussian_center_x = 8.0
gaussian_center_y = 8.0
gaussian_center_z = 10.0
gaussian_width = 1.5
t_end = 0.2
snapshot_times = 0.0,0.2
coulomb = false

[output]
directory = out
"""


class TestConfigFormat:
    def test_parse_sections_and_comments(self):
        sections = cfg.parse_config_text("# top\n[a]\nx = 1 # inline\n\n[b]\ny = two\n")
        assert sections == {"a": {"x": "1"}, "b": {"y": "two"}}

    def test_duplicate_key_rejected(self):
        with pytest.raises(InputError):
            cfg.parse_config_text("[a]\nx = 1\nx = 2\n")

    def test_missing_equals_rejected(self):
        with pytest.raises(InputError):
            cfg.parse_config_text("[a]\njust a line\n")

    def test_format_is_fixed_point(self):
        sections = {"b": {"z": 1.5, "a": "text"}, "a": {"k": True}}
        text = cfg.format_config(sections)
        parsed = cfg.parse_config_text(text)
        assert cfg.format_config({s: dict(kv) for s, kv in parsed.items()}) == text

    def test_run_config_rejects_unknown(self, tmp_path):
        bad = tmp_path / "bad.cfg"
        bad.write_text("[scenario]\nwarp_factor = 9\n")
        with pytest.raises(InputError):
            load_run_config(str(bad))
        bad.write_text("[mystery]\nx = 1\n")
        with pytest.raises(InputError):
            load_run_config(str(bad))

    def test_typed_value_errors(self, tmp_path):
        bad = tmp_path / "bad.cfg"
        bad.write_text("[scenario]\nnx = lots\n")
        with pytest.raises(InputError):
            load_run_config(str(bad))
        bad.write_text("[scenario]\ncoulomb = maybe\n")
        with pytest.raises(InputError):
            load_run_config(str(bad))
        bad.write_text("[parameters]\nmu_n = fast\n")
        with pytest.raises(InputError):
            load_run_config(str(bad))


class TestFidelityCurveCommand:
    def test_bundled_tables_monotone(self, capsys):
        assert main(["fidelity-curve"]) == 0
        rows = capsys.readouterr().out.strip().splitlines()
        assert rows[0] == "lambda_nm,sigma_ion,sigma_opt,fidelity"
        fid = [float(r.split(",")[3]) for r in rows[1:]]
        lam = [float(r.split(",")[0]) for r in rows[1:]]
        assert all(0.0 <= f <= 1.0 for f in fid)
        assert all(a > b for a, b in zip(fid, fid[1:]))  # toward short wavelength
        assert fid[lam.index(440.0)] >= 0.9

    def test_identical_tables_give_half(self, tmp_path, capsys):
        table = tmp_path / "t.txt"
        table.write_text("ionization relative demo\n500 1.0\n600 4.0\n")
        code = main(["fidelity-curve", "--ion-table", str(table),
                     "--opt-table", str(table)])
        assert code == 0
        rows = capsys.readouterr().out.strip().splitlines()[1:]
        assert all(float(r.split(",")[3]) == 0.5 for r in rows)

    def test_out_of_range_wavelength_exits_2(self, capsys):
        assert main(["fidelity-curve", "--lambda-min", "300", "--lambda-max",
                     "310", "--step", "5"]) == 2

    def test_writes_csv_file(self, tmp_path, capsys):
        out = tmp_path / "curve.csv"
        assert main(["fidelity-curve", "--out", str(out)]) == 0
        assert out.read_text().startswith("lambda_nm,sigma_ion,sigma_opt,fidelity")

    def test_missing_file_exits_2(self, capsys):
        assert main(["fidelity-curve", "--ion-table", "/nonexistent.txt"]) == 2


class TestTransportCommand:
    def _run(self, tmp_path, name, text=TRANSPORT_CONFIG):
        cfg_path = tmp_path / "run.cfg"
        cfg_path.write_text(text)
        out_dir = tmp_path / name
        code = main(["transport", "--config", str(cfg_path), "--out-dir", str(out_dir)])
        return code, out_dir

    def test_drift_mean_and_conservation(self, tmp_path, capsys):
        code, out = self._run(tmp_path, "a")
        assert code == 0
        rows = (out / "trajectory.csv").read_text().strip().splitlines()
        header = rows[0].split(",")
        first = dict(zip(header, map(float, rows[1].split(","))))
        last = dict(zip(header, map(float, rows[-1].split(","))))
        drift = 450.0 * 0.004 * 0.2
        assert last["mean_z"] - first["mean_z"] == pytest.approx(drift, rel=0.02)
        for row in rows[1:]:
            total = float(row.split(",")[-1])
            assert abs(1.0 - total) < 1e-6
        assert (out / "snapshot_000.txt").exists()
        assert (out / "snapshot_001.txt").exists()
        assert (out / "resolved.cfg").exists()

    def test_zero_field_spread_grows_as_root_t(self, tmp_path, capsys):
        text = TRANSPORT_CONFIG.replace("e_drive = 0.004", "e_drive = 0.0")
        code, out = self._run(tmp_path, "z", text)
        assert code == 0
        rows = (out / "trajectory.csv").read_text().strip().splitlines()
        header = rows[0].split(",")
        first = dict(zip(header, map(float, rows[1].split(","))))
        last = dict(zip(header, map(float, rows[-1].split(","))))
        assert last["mean_z"] == pytest.approx(first["mean_z"], abs=1e-3)
        expected = math.sqrt(2 * 11.0 * 0.2 + first["spread"] ** 2)
        assert last["spread"] == pytest.approx(expected, rel=0.03)

    def test_byte_identical_reruns(self, tmp_path, capsys):
        _, out_a = self._run(tmp_path, "a")
        _, out_b = self._run(tmp_path, "b")
        for name in ("trajectory.csv", "snapshot_000.txt", "snapshot_001.txt"):
            assert (out_a / name).read_bytes() == (out_b / name).read_bytes()

    def test_rerun_from_echoed_config(self, tmp_path, capsys):
        _, out_a = self._run(tmp_path, "a")
        echo = out_a / "resolved.cfg"
        out_c = tmp_path / "c"
        assert main(["transport", "--config", str(echo), "--out-dir", str(out_c)]) == 0
        assert (out_a / "trajectory.csv").read_bytes() == (out_c / "trajectory.csv").read_bytes()

    def test_invalid_config_exits_2(self, tmp_path, capsys):
        bad = TRANSPORT_CONFIG + "typo_key = 1\n"
        code, _ = self._run(tmp_path, "bad", bad)
        assert code == 2

    def test_forced_unstable_step_exits_1(self, tmp_path, capsys):
        text = TRANSPORT_CONFIG.replace("t_end = 0.2", "t_end = 0.2\ndt = 5.0")
        code, _ = self._run(tmp_path, "cfl", text)
        assert code == 1

    def test_env_var_output_override(self, tmp_path, capsys, monkeypatch):
        cfg_path = tmp_path / "run.cfg"
        cfg_path.write_text(TRANSPORT_CONFIG)
        env_dir = tmp_path / "env_out"
        monkeypatch.setenv("SPINBUS_OUTDIR", str(env_dir))
        assert main(["transport", "--config", str(cfg_path)]) == 0
        assert (env_dir / "trajectory.csv").exists()

    def test_injector_initial_mode(self, tmp_path, capsys):
        text = """\
[scenario]
geometry = free-space
nx = 6
ny = 6
nz = 6
dx = 0.5
dy = 0.5
dz = 0.5
injector_x = 1.5
injector_y = 1.5
injector_z = 1.5
initial = injector
k_injection_rate = 1.0
k_injection_duration = 2.0
capture = false
coulomb = false
t_end = 4.0
"""
        code, out = self._run(tmp_path, "inj", text)
        assert code == 0
        rows = (out / "trajectory.csv").read_text().strip().splitlines()
        last = dict(zip(rows[0].split(","), map(float, rows[-1].split(","))))
        assert last["n_injector"] == pytest.approx(math.exp(-2.0), rel=1e-6)
        assert abs(last["total_probability"] - 1.0) < 1e-9


class TestFeasibilityCommand:
    def test_anchor_row(self, tmp_path, capsys):
        out = tmp_path / "f"
        code = main(["feasibility", "--l-min", "0.2", "--l-max", "0.4",
                     "--n-side", "3", "--out-dir", str(out)])
        assert code == 0
        rows = (out / "boundary.csv").read_text().strip().splitlines()
        side, e_lo, e_hi = (float(tok) for tok in rows[1].split(","))
        assert side == 0.2
        assert abs(e_lo - 0.063) / 0.063 < 0.05
        assert e_hi == pytest.approx(0.62, abs=0.01)
        map_rows = (out / "feasibility_map.csv").read_text().strip().splitlines()
        assert len(map_rows) == 1 + 3 * 64

    def test_zero_rho_min_full_region(self, tmp_path, capsys):
        out = tmp_path / "f0"
        code = main(["feasibility", "--rho-min", "0", "--l-min", "0.1",
                     "--l-max", "0.2", "--n-side", "2", "--n-e", "4",
                     "--out-dir", str(out)])
        assert code == 0
        rows = (out / "boundary.csv").read_text().strip().splitlines()[1:]
        for row in rows:
            _, e_lo, e_hi = row.split(",")
            assert float(e_lo) == 0.0 and math.isinf(float(e_hi))

    def test_bad_ranges_exit_2(self, capsys):
        assert main(["feasibility", "--l-min", "0.3", "--l-max", "0.1"]) == 2
        assert main(["feasibility", "--e-min", "-0.1"]) == 2

    def test_parameter_override_shifts_boundary(self, tmp_path, capsys):
        # halving the mobility doubles the field window exactly
        cfg_path = tmp_path / "p.cfg"
        cfg_path.write_text("[parameters]\nmu_n = 225\n")
        out = tmp_path / "fb"
        code = main(["feasibility", "--l-min", "0.2", "--l-max", "0.3",
                     "--n-side", "2", "--e-max", "2.0", "--config", str(cfg_path),
                     "--out-dir", str(out)])
        assert code == 0
        row = (out / "boundary.csv").read_text().strip().splitlines()[1]
        _, e_lo, _ = (float(tok) for tok in row.split(","))
        assert e_lo == pytest.approx(2 * 0.06335, rel=1e-3)


class TestProtocolCommands:
    def test_entangle_defaults_pass(self, capsys):
        assert main(["entangle"]) == 0
        out = capsys.readouterr().out
        assert "verdict: PASS" in out
        assert "fidelity factors:" in out

    def test_detect_overlong_transport_fails(self, capsys):
        assert main(["detect", "--transport-ns", "120"]) == 1
        assert "FAIL" in capsys.readouterr().out

    def test_entangle_forced_gate_fails(self, capsys):
        assert main(["entangle", "--gate-ns", "300"]) == 1

    def test_entangle_weak_coupling_fails(self, capsys):
        assert main(["entangle", "--coupling-nv-logic", "1"]) == 1

    def test_inject_pair_slow_coupling_exits_1(self, capsys):
        assert main(["inject-pair", "--coupling-mhz", "1"]) == 1

    def test_inject_nv_incoherent_verdict(self, capsys):
        assert main(["inject-nv", "--alpha", "1", "--beta", "0",
                     "--blue-ns", "1"]) == 0
        assert "incoherent" in capsys.readouterr().out

    def test_inject_nv_balanced_coherent(self, capsys):
        assert main(["inject-nv", "--alpha", "1", "--beta", "1"]) == 0
        out = capsys.readouterr().out
        assert "verdict: coherent" in out or "coherence verdict: coherent" in out

    def test_malformed_option_exits_2(self, capsys):
        assert main(["detect", "--transport-ns", "-5"]) == 2
        assert main(["no-such-command"]) == 2

    def test_timeline_files_written(self, tmp_path, capsys):
        out = tmp_path / "proto"
        assert main(["entangle", "--out-dir", str(out)]) == 0
        assert (out / "entangle_timeline.csv").exists()
        assert (out / "entangle_report.txt").exists()

    def test_reports_deterministic(self, capsys):
        main(["entangle"])
        one = capsys.readouterr().out
        main(["entangle"])
        two = capsys.readouterr().out
        assert one == two

    def test_physics_flags_adjust_fidelity(self, capsys):
        main(["detect", "--capture-gamma", "1e9", "--flip-rate-mhz", "0"])
        rich = capsys.readouterr().out
        main(["detect", "--capture-gamma", "1e-6", "--flip-rate-mhz", "0"])
        starved = capsys.readouterr().out
        def fid(text):
            for line in text.splitlines():
                if line.startswith("fidelity:"):
                    return float(line.split()[1])
        assert fid(starved) < fid(rich)

    def test_bad_injection_fidelity_exits_2(self, capsys):
        assert main(["detect", "--injection-fidelity", "1.5"]) == 2
