"""Chart tool tests, including the smoothing equivalence gate.

fixtures/samples.csv and fixtures/samples_smoothed.csv come from one
simulator run (`parsim simulate --seed 4242 --horizon 400`); the smoothed
file is the simulator's own 10-sample moving-average export and is the
reference the chart tool must reproduce.
"""

from pathlib import Path

import pytest

from parsim_plot.cli import main
from parsim_plot.core import SchemaError, moving_average, read_samples
from parsim_plot.render import build_figure

FIXTURES = Path(__file__).parent / "fixtures"
SAMPLES = FIXTURES / "samples.csv"
SMOOTHED = FIXTURES / "samples_smoothed.csv"


def write_constant_csv(path, w=25, n=40):
    lines = ["time_s,w,error,p,p_wanted,p_out,trigger"]
    for i in range(n):
        lines.append(f"{float(i)!r},{w},0.0,5,5,0.0,arrival")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


class TestReader:
    def test_reads_fixture(self):
        samples = read_samples(SAMPLES)
        assert len(samples) == 1916
        assert samples.time_s == sorted(samples.time_s)

    def test_schema_mismatch_names_offending_column(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("time_s,w,error,p,wanted,p_out,trigger\n", encoding="utf-8")
        with pytest.raises(SchemaError, match="'wanted'"):
            read_samples(bad)

    def test_missing_column_named(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("time_s,w,error\n", encoding="utf-8")
        with pytest.raises(SchemaError, match="'p'"):
            read_samples(bad)


class TestMovingAverage:
    def test_window_one_is_identity(self):
        assert moving_average([4.0, 2.0, 9.0], 1) == [4.0, 2.0, 9.0]

    def test_partial_leading_windows(self):
        assert moving_average([0.0, 10.0, 20.0], 10) == [0.0, 5.0, 10.0]

    def test_matches_simulator_smoothed_export(self):
        """Ten-sample smoothing must agree elementwise with the export."""
        samples = read_samples(SAMPLES)
        w_ma = moving_average(samples.w, 10)
        p_ma = moving_average(samples.p, 10)
        with open(SMOOTHED, encoding="utf-8") as fh:
            assert fh.readline().rstrip("\n") == "time_s,w_ma,p_ma"
            rows = [line.rstrip("\n").split(",") for line in fh]
        assert len(rows) == len(samples)
        worst = 0.0
        for i, (t, w_ref, p_ref) in enumerate(rows):
            assert float(t) == samples.time_s[i]
            worst = max(worst, abs(float(w_ref) - w_ma[i]), abs(float(p_ref) - p_ma[i]))
        assert worst <= 1e-9
        print(f"ACCEPTANCE 6: PASS - smoothing matches the simulator export, "
              f"max |diff| = {worst:.2e} (<= 1e-9) over {len(rows)} samples")


class TestRender:
    def test_smoke_writes_nonempty_image(self, tmp_path):
        out = tmp_path / "fig.png"
        assert main(["--input", str(SAMPLES), "--out", str(out),
                     "--window", "10", "--target", "25"]) == 0
        assert out.exists() and out.stat().st_size > 0

    def test_window_one_curve_equals_raw(self):
        samples = read_samples(SAMPLES)
        fig = build_figure(samples, window=1, target=25.0)
        lines = {line.get_label(): line for line in fig.axes[0].get_lines()}
        smoothed = lines["W (moving avg, 1)"].get_ydata()
        assert list(smoothed) == samples.w

    def test_constant_w_coincides_with_target_line(self, tmp_path):
        path = tmp_path / "flat.csv"
        write_constant_csv(path, w=25)
        samples = read_samples(path)
        fig = build_figure(samples, window=10, target=25.0)
        lines = {line.get_label(): line for line in fig.axes[0].get_lines()}
        w_curve = lines["W (moving avg, 10)"].get_ydata()
        target_y = lines["target T=25"].get_ydata()
        assert all(y == 25.0 for y in w_curve)
        assert all(y == 25.0 for y in target_y)

    def test_bad_schema_exits_nonzero_naming_column(self, tmp_path, capsys):
        bad = tmp_path / "bad.csv"
        bad.write_text("time_s,w,error,p,p_wanted,pout,trigger\n1.0,1,0,1,1,0,x\n",
                       encoding="utf-8")
        code = main(["--input", str(bad), "--out", str(tmp_path / "x.png")])
        assert code == 2
        assert "'pout'" in capsys.readouterr().err

    def test_missing_input_exits_nonzero(self, tmp_path, capsys):
        code = main(["--input", str(tmp_path / "nope.csv"),
                     "--out", str(tmp_path / "x.png")])
        assert code == 2
        assert "no such file" in capsys.readouterr().err
