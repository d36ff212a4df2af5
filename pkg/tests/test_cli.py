"""Config resolution, subcommands, artifacts, and exit codes."""

import json

import numpy as np
import pytest

from talbotsim.cli import DEFAULTS, main, parse_config
from talbotsim.errors import ConfigError
from talbotsim.svgplot import render_plots


class TestParseConfig:
    def test_defaults(self):
        cli = parse_config()
        for key, value in DEFAULTS.items():
            assert cli[key] == value

    def test_file_overrides_defaults(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text(
            "# comment line\n"
            "comb.f_r = 1e7\n"
            "grid.oversampling = 16\n"
            "analysis.offsets = 1e4, 1e6\n"
            "noise.term = {alpha = 0, b = 1e-11}\n"
            "noise.term = {alpha = -2, b = 1e-1}\n"
        )
        cli = parse_config(path)
        assert cli["comb.f_r"] == 1e7
        assert cli["grid.oversampling"] == 16
        assert cli["analysis.offsets"] == [1e4, 1e6]
        assert cli["noise.term"] == [{"alpha": 0, "b": 1e-11}, {"alpha": -2, "b": 1e-1}]

    def test_flag_overrides_file(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("grid.oversampling = 16\n")
        cli = parse_config(path, {"grid.oversampling": 32})
        assert cli["grid.oversampling"] == 32

    def test_unknown_key_rejected(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("comb.frequency = 1e7\n")
        with pytest.raises(ConfigError, match="unknown key 'comb.frequency'"):
            parse_config(path)

    def test_error_names_location(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("comb.f_r = 1e7\ncomb.width = broad\n")
        with pytest.raises(ConfigError, match=r"run\.cfg:2"):
            parse_config(path)

    def test_type_mismatch_rejected(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("grid.oversampling = 16.5\n")
        with pytest.raises(ConfigError, match="integer"):
            parse_config(path)

    def test_duplicate_scalar_rejected(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("comb.f_r = 1e7\ncomb.f_r = 2e7\n")
        with pytest.raises(ConfigError, match="duplicate"):
            parse_config(path)

    def test_window_snapping_rule_named(self):
        cli = parse_config(None, {"grid.t_sig": 1.23e-7, "comb.f_r": 1e7})
        with pytest.raises(ConfigError, match="integer number of carrier periods"):
            cli.experiment_config()

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="does not exist"):
            parse_config(tmp_path / "nope.cfg")


class TestEstimateMemorySubcommand:
    def test_full_band_figure_and_refusal(self, capsys):
        code = main(
            [
                "estimate-memory",
                "--representation",
                "full",
                "--width",
                "3e12",
                "--t-sig",
                "1e-2",
                "--f-r",
                "1e8",
            ]
        )
        out = capsys.readouterr()
        assert "447.0 GiB" in out.out
        assert code == 3
        assert "budget refusal" in out.err

    def test_reduced_within_budget(self, capsys):
        code = main(
            [
                "estimate-memory",
                "--representation",
                "reduced",
                "--oversampling",
                "2",
                "--t-sig",
                "1e-2",
                "--f-r",
                "1e8",
            ]
        )
        out = capsys.readouterr()
        assert code == 0
        assert "15.3 MiB" in out.out


class TestDispersionEvalSubcommand:
    def test_prints_center_dispersion(self, tmp_path, capsys):
        code = main(
            [
                "dispersion-eval",
                "--kind",
                "ideal",
                "--f-r",
                "1e8",
                "--width",
                "2e8",
                "--t-sig",
                "1e-5",
                "--oversampling",
                "64",
                "--out",
                str(tmp_path),
            ]
        )
        out = capsys.readouterr().out
        assert code == 0
        assert "1.248e+07 ps/nm" in out
        csv = (tmp_path / "dispersion_eval.csv").read_text().splitlines()
        assert csv[0] == "line_index,lambda_nm,d_ps_per_nm,offset_samples"
        assert len(csv) == 4


class TestOffsetsDiffSubcommand:
    def test_linear_column_zero_at_100ghz(self, tmp_path):
        code = main(
            [
                "offsets-diff",
                "--f-r",
                "1e8",
                "--t-sig",
                "1e-5",
                "--oversampling",
                "64",
                "--width",
                "1e11",
                "--out",
                str(tmp_path),
            ]
        )
        assert code == 0
        csv = (tmp_path / "offsets_diff_1e+11.csv").read_text().splitlines()
        assert csv[0] == "line_index,lambda_nm,diff_linear_samples,diff_constant_samples"
        diffs = [int(line.split(",")[2]) for line in csv[1:]]
        assert all(d == 0 for d in diffs)
        manifest = json.loads((tmp_path / "manifest.json").read_text())
        assert manifest["versions"]["talbotsim"]


class TestSimulateSubcommand:
    def test_writes_spectrum_and_jitter(self, tmp_path):
        code = main(
            [
                "simulate",
                "--kind",
                "ideal",
                "--width",
                "2e8",
                "--t-sig",
                "2e-4",
                "--seed",
                "9",
                "--points",
                "40",
                "--jitter-band",
                "2e4:2e6",
                "--out",
                str(tmp_path),
            ]
        )
        assert code == 0
        spectrum = (tmp_path / "spectrum.csv").read_text().splitlines()
        assert spectrum[0] == "offset_hz,L_dbc_hz"
        assert len(spectrum) > 30
        jitter_row = (tmp_path / "jitter.csv").read_text().splitlines()[1].split(",")
        assert float(jitter_row[0]) == 2e4
        assert float(jitter_row[2]) > 0

    def test_pure_tone_flag(self, tmp_path):
        code = main(
            [
                "simulate",
                "--kind",
                "none",
                "--pure-tone",
                "--t-sig",
                "2e-4",
                "--points",
                "20",
                "--out",
                str(tmp_path),
            ]
        )
        assert code == 0
        rows = (tmp_path / "spectrum.csv").read_text().splitlines()[1:]
        levels = [float(r.split(",")[1]) for r in rows]
        assert max(levels) < -200.0

    def test_budget_refusal_exit_code(self, tmp_path):
        code = main(
            [
                "simulate",
                "--kind",
                "none",
                "--t-sig",
                "2e-4",
                "--memory-budget",
                "1000",
                "--out",
                str(tmp_path),
            ]
        )
        assert code == 3

    def test_config_error_exit_code(self, tmp_path):
        code = main(["simulate", "--t-sig", "1.23e-7", "--out", str(tmp_path)])
        assert code == 2


class TestSweepSubcommands:
    def test_sweep_oversampling_csv_and_svg(self, tmp_path):
        code = main(
            [
                "sweep-oversampling",
                "--ratios",
                "4,8",
                "--t-sig",
                "2e-4",
                "--seeds",
                "2",
                "--format",
                "csv+svg",
                "--out",
                str(tmp_path),
            ]
        )
        assert code == 0
        assert (tmp_path / "sweep_oversampling.csv").exists()
        svgs = sorted(p.name for p in tmp_path.glob("*.svg"))
        assert len(svgs) == 2  # one chart per offset of interest

    def test_sweep_comb_width_runs(self, tmp_path):
        code = main(
            [
                "sweep-comb-width",
                "--widths",
                "1e8,5e8",
                "--t-sig",
                "2e-4",
                "--seeds",
                "2",
                "--out",
                str(tmp_path),
            ]
        )
        assert code == 0
        lines = (tmp_path / "sweep_comb_width.csv").read_text().splitlines()
        assert len(lines) == 1 + 2 * 3 * 2


class TestTabulatedDispersion:
    def table_file(self, tmp_path):
        # Dense sampling of the one-period-per-line characteristic at
        # 100 MHz around 1550 nm, in the documented two-column format.
        lam_nm = np.linspace(1549.0, 1551.0, 201)
        c = 2.99792458e8
        d_ps_nm = c / ((lam_nm * 1e-9) ** 2 * 1e8**2) * 1e3
        rows = ["# lambda_nm  D_ps_per_nm"]
        rows += [f"{lam:.6f}  {d:.6f}" for lam, d in zip(lam_nm, d_ps_nm)]
        path = tmp_path / "element.txt"
        path.write_text("\n".join(rows) + "\n")
        return path

    def test_dispersion_eval_tabulated(self, tmp_path, capsys):
        table = self.table_file(tmp_path)
        code = main(
            [
                "dispersion-eval",
                "--kind",
                "tabulated",
                "--table",
                str(table),
                "--f-r",
                "1e8",
                "--width",
                "2e8",
                "--t-sig",
                "1e-5",
                "--oversampling",
                "64",
                "--out",
                str(tmp_path),
            ]
        )
        assert code == 0
        out = capsys.readouterr().out
        assert "1.248e+07 ps/nm" in out
        # The dense table reproduces the ideal plan: one period per line.
        offsets = [
            int(line.split(",")[3])
            for line in (tmp_path / "dispersion_eval.csv").read_text().splitlines()[1:]
        ]
        assert sorted(offsets) == [0, 64, 128]

    def test_tabulated_requires_table(self, tmp_path, capsys):
        code = main(
            [
                "simulate",
                "--kind",
                "tabulated",
                "--t-sig",
                "2e-4",
                "--out",
                str(tmp_path),
            ]
        )
        assert code == 2
        assert "dispersion.table" in capsys.readouterr().err


class TestExitCodes:
    def test_runtime_failure_is_one(self, tmp_path, capsys):
        # A degenerate jitter band fails inside the run: runtime error,
        # not a config or budget problem.
        code = main(
            [
                "simulate",
                "--kind",
                "none",
                "--t-sig",
                "2e-4",
                "--jitter-band",
                "5e6:5e6",
                "--points",
                "10",
                "--out",
                str(tmp_path),
            ]
        )
        assert code == 1
        assert "error" in capsys.readouterr().err

    def test_bad_flag_value_is_config_error(self, tmp_path):
        code = main(["simulate", "--t-sig", "1.23e-7", "--out", str(tmp_path)])
        assert code == 2


class TestNoiseConfig:
    def test_noise_terms_from_file(self, tmp_path):
        cfg_file = tmp_path / "run.cfg"
        cfg_file.write_text(
            "noise.term = {alpha = 0, b = 1e-9}\n"
            "noise.f_low = 1e3\n"
            "grid.t_sig = 2e-4\n"
        )
        cli = parse_config(cfg_file)
        profile = cli.experiment_config().resolved_noise()
        assert profile.psd(1e4) == pytest.approx(1e-9)
        assert profile.f_low == 1e3

    def test_noise_disabled_gives_pure_tone(self, tmp_path):
        cfg_file = tmp_path / "run.cfg"
        cfg_file.write_text("noise.enabled = false\ngrid.t_sig = 2e-4\n")
        code = main(
            [
                "simulate",
                "--kind",
                "none",
                "--config",
                str(cfg_file),
                "--points",
                "20",
                "--out",
                str(tmp_path),
            ]
        )
        assert code == 0
        rows = (tmp_path / "spectrum.csv").read_text().splitlines()[1:]
        assert max(float(r.split(",")[1]) for r in rows) < -200.0

    def test_manifest_echoes_resolved_config(self, tmp_path):
        code = main(
            [
                "sweep-oversampling",
                "--ratios",
                "4,8",
                "--t-sig",
                "2e-4",
                "--seeds",
                "2",
                "--oversampling",
                "8",
                "--out",
                str(tmp_path),
            ]
        )
        assert code == 0
        manifest = json.loads((tmp_path / "manifest.json").read_text())
        assert manifest["config"]["ratios"] == [4, 8]
        assert manifest["config"]["n_seeds"] == 2
        assert manifest["config"]["oversampling"] == 8


class TestRenderPlots:
    def test_sweep_csv_three_curves(self, tmp_path):
        csv = tmp_path / "sweep_comb_width.csv"
        rows = ["x_value,dispersion_kind,offset_hz,mean_L_dbc_hz,std_L_db,n_seeds"]
        for kind in ("ideal", "linear", "constant"):
            for off in (1e4, 1e6):
                for x in (1e8, 1e9, 1e10):
                    rows.append(f"{x},{kind},{off},-100,-0.5,2")
        csv.write_text("\n".join(rows) + "\n")
        written = render_plots([csv], tmp_path)
        assert len(written) == 2
        for path in written:
            svg = path.read_text()
            assert svg.count("<polyline") == 3
            for kind in ("ideal", "linear", "constant"):
                assert kind in svg

    def test_empty_csv_rejected(self, tmp_path):
        csv = tmp_path / "sweep_x.csv"
        csv.write_text("x_value,dispersion_kind,offset_hz,mean_L_dbc_hz,std_L_db,n_seeds\n")
        with pytest.raises(ValueError, match="no data rows"):
            render_plots([csv], tmp_path)
        assert not list(tmp_path.glob("*.svg"))

    def test_deterministic_svg(self, tmp_path):
        csv = tmp_path / "offsets_diff_1e+11.csv"
        body = ["line_index,lambda_nm,diff_linear_samples,diff_constant_samples"]
        for i in range(-5, 6):
            body.append(f"{i},{1550 + 0.01 * i:.4f},0,{abs(i)}")
        csv.write_text("\n".join(body) + "\n")
        (a,) = render_plots([csv], tmp_path / "a")
        (b,) = render_plots([csv], tmp_path / "b")
        assert a.read_bytes() == b.read_bytes()

    def test_unrecognized_header(self, tmp_path):
        csv = tmp_path / "weird.csv"
        csv.write_text("a,b\n1,2\n")
        with pytest.raises(ValueError, match="unrecognized"):
            render_plots([csv], tmp_path)
