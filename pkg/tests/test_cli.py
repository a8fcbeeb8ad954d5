import numpy as np
import pandas as pd
import pytest

from models.models import GrwParams
from src import cli
from src.emh import simulate_grw


def run(*argv):
    return cli.main([str(a) for a in argv])


class TestSimulate:
    def test_row_count(self, tmp_path):
        out = tmp_path / "grw.csv"
        assert run("simulate", "--seed", 1, "--t-max", 10, "--output", out) == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "Date,Close"
        assert len(lines) == 12

    def test_same_seed_same_file(self, tmp_path):
        first, second = tmp_path / "a.csv", tmp_path / "b.csv"
        run("simulate", "--seed", 8, "--t-max", 200, "--output", first)
        run("simulate", "--seed", 8, "--t-max", 200, "--output", second)
        assert first.read_bytes() == second.read_bytes()

    def test_tiny_sigma_keeps_price(self, tmp_path):
        out = tmp_path / "flat.csv"
        run("simulate", "--seed", 2, "--t-max", 10, "--sigma", 1e-12, "--output", out)
        closes = pd.read_csv(out)["Close"].to_numpy()
        assert len(closes) == 11
        np.testing.assert_allclose(closes, 100.0, rtol=1e-10)

    def test_persistent_walk(self, tmp_path):
        assert run("simulate", "--seed", 3, "--t-max", 50, "--persistence", 0.9, "--out-dir", tmp_path) == 0
        assert (tmp_path / "simulated.csv").exists()

    def test_seed_required(self, tmp_path, capsys):
        assert run("simulate", "--t-max", 10, "--out-dir", tmp_path) == 2
        assert "--seed" in capsys.readouterr().err

    @pytest.mark.parametrize("flags", [["--sigma", 0], ["--sigma", -0.1], ["--t-max", 1]])
    def test_invalid_parameters(self, tmp_path, flags):
        assert run("simulate", "--seed", 1, "--out-dir", tmp_path, *flags) == 2


class TestDeflate:
    @pytest.fixture
    def prices(self, write_file):
        return write_file("prices.csv", "Date,Close\n2000-01-03,10\n2000-01-20,11\n2000-02-01,12\n")

    def test_constant_cpi(self, prices, write_file, tmp_path, capsys):
        cpi = write_file("cpi.csv", "2000-01,150\n2000-02,150\n")
        out = tmp_path / "real.csv"
        assert run("deflate", "--prices", prices, "--cpi", cpi, "--output", out) == 0
        assert out.read_text() == prices.read_text()
        assert "3 rows" in capsys.readouterr().out

    def test_missing_month_names_it(self, prices, write_file, capsys):
        cpi = write_file("cpi.csv", "2000-01,150\n")
        assert run("deflate", "--prices", prices, "--cpi", cpi) == 2
        assert "2000-02" in capsys.readouterr().err

    def test_format_error_names_file_and_line(self, write_file, capsys):
        prices = write_file("broken.csv", "Date,Close\n2000-01-03,10\n2000-01-04,null\n")
        cpi = write_file("cpi.csv", "2000-01,150\n2000-02,150\n")
        assert run("deflate", "--prices", prices, "--cpi", cpi) == 2
        err = capsys.readouterr().err
        assert "broken.csv" in err
        assert "line 3" in err

    def test_missing_file(self, tmp_path, write_file):
        cpi = write_file("cpi.csv", "2000-01,150\n")
        assert run("deflate", "--prices", tmp_path / "nope.csv", "--cpi", cpi) == 2


class TestUpRatio:
    def test_increasing_series(self, make_prices, prices_file, tmp_path):
        path = prices_file(make_prices(np.arange(1, 1011)))
        assert run("upratio", "--prices", path, "--out-dir", tmp_path) == 0
        frame = pd.read_csv(tmp_path / "upratio.csv")
        assert list(frame.columns) == ["start_date", "up_ratio", "band_low", "band_high"]
        assert len(frame) == 11
        assert (frame["up_ratio"] == 1.0).all()
        assert frame["band_high"].iloc[0] - 0.5 == pytest.approx(3 * np.sqrt(0.25 / 999), abs=1e-11)

    def test_zero_band(self, make_prices, prices_file, tmp_path):
        path = prices_file(make_prices(np.arange(1, 1001)))
        run("upratio", "--prices", path, "--z", 0, "--out-dir", tmp_path)
        frame = pd.read_csv(tmp_path / "upratio.csv")
        assert (frame["band_low"] == 0.5).all()
        assert (frame["band_high"] == 0.5).all()

    def test_output_round_trips(self, make_prices, prices_file, tmp_path):
        path = prices_file(make_prices(np.exp(np.linspace(0, 1, 1000))))
        run("upratio", "--prices", path, "--window", 500, "--step", 100, "--out-dir", tmp_path)
        frame = pd.read_csv(tmp_path / "upratio.csv")
        assert frame["start_date"].iloc[1] == "2000-04-12"


class TestAnalyze:
    ANALYZE_FLAGS = ("--replicates", 99, "--points", 100, "--step", 50)

    @pytest.fixture
    def grw_file(self, prices_file):
        return prices_file(simulate_grw(GrwParams(sigma=0.01, t_max=1099), 31))

    def test_monotone_file_is_degenerate(self, monotone_prices, prices_file, tmp_path, capsys):
        path = prices_file(monotone_prices)
        assert run("analyze", "--prices", path, "--seed", 1, "--out-dir", tmp_path, *self.ANALYZE_FLAGS) == 3
        report = pd.read_csv(tmp_path / "report.csv")
        assert len(report) == 1
        assert report["skipped"].tolist() == [1]
        assert "1 skipped" in capsys.readouterr().out

    def test_outputs(self, grw_file, tmp_path, capsys):
        assert run(
            "analyze", "--prices", grw_file, "--seed", 5, "--out-dir", tmp_path, "--histograms", *self.ANALYZE_FLAGS
        ) == 0
        report = pd.read_csv(tmp_path / "report.csv")
        assert list(report.columns) == ["start_date", "up_ratio", "up_a2", "up_pi", "down_a2", "down_pi", "skipped"]
        assert len(report) == 3
        assert len(pd.read_csv(tmp_path / "results.csv")) == 6
        assert (tmp_path / "yearly_summary.csv").exists()
        assert len(list((tmp_path / "histograms").glob("*.csv"))) == 6
        assert "3 analyzed" in capsys.readouterr().out

    def _outputs(self, grw_file, out, threads):
        run("analyze", "--prices", grw_file, "--seed", 11, "--threads", threads, "--out-dir", out, *self.ANALYZE_FLAGS)
        return [(out / name).read_bytes() for name in ("report.csv", "results.csv", "yearly_summary.csv")]

    @pytest.mark.parametrize("threads", [1, 4, 8])
    def test_byte_identical_across_runs_and_threads(self, grw_file, tmp_path, threads):
        serial = self._outputs(grw_file, tmp_path / "serial", 1)
        assert self._outputs(grw_file, tmp_path / f"threads{threads}", threads) == serial

    def test_seed_required(self, grw_file, tmp_path):
        assert run("analyze", "--prices", grw_file, "--out-dir", tmp_path) == 2

    def test_series_shorter_than_window(self, make_prices, prices_file, tmp_path):
        path = prices_file(make_prices(np.arange(1, 500)))
        assert run("analyze", "--prices", path, "--seed", 1, "--out-dir", tmp_path) == 2


class TestGof:
    def test_all_equal_durations(self, write_file, capsys):
        path = write_file("durations.csv", "duration\n" + "7\n" * 100)
        assert run("gof", "--durations", path, "--theta", 0.5, "--seed", 4, "--replicates", 99) == 0
        out = capsys.readouterr().out
        assert "pi_value=0.01 " in out
        assert "n=100" in out
        assert "M=99" in out

    def test_geometric_sample_not_rejected(self, write_file, capsys):
        draws = np.random.default_rng(6).geometric(0.5, size=400) - 1
        path = write_file("durations.csv", "\n".join(map(str, draws)) + "\n")
        assert run("gof", "--durations", path, "--theta", 0.5, "--seed", 4, "--replicates", 199) == 0
        fields = dict(item.split("=") for item in capsys.readouterr().out.split())
        assert 0 < float(fields["pi_value"]) <= 1
        assert fields["theta"] == "0.5"

    def test_theta_from_sign_file(self, write_file, prices_file, capsys):
        prices = prices_file(simulate_grw(GrwParams(sigma=0.01, t_max=999), 77))
        draws = np.random.default_rng(6).geometric(0.5, size=200) - 1
        path = write_file("durations.csv", "\n".join(map(str, draws)) + "\n")
        assert run("gof", "--durations", path, "--signs-from", prices, "--seed", 4, "--replicates", 99) == 0
        assert "n=200" in capsys.readouterr().out

    def test_too_few_observations(self, write_file):
        path = write_file("durations.csv", "1\n" * 29)
        assert run("gof", "--durations", path, "--theta", 0.5, "--seed", 4) == 2

    def test_empty_file(self, write_file):
        path = write_file("durations.csv", "")
        assert run("gof", "--durations", path, "--theta", 0.5, "--seed", 4) == 2

    def test_needs_a_parameter_source(self, write_file):
        path = write_file("durations.csv", "1\n" * 40)
        assert run("gof", "--durations", path, "--seed", 4) == 2


def test_config_flag(write_file, tmp_path, make_prices, prices_file):
    config = write_file("alt.yaml", "window:\n  length: 200\n  step: 100\n")
    path = prices_file(make_prices(np.arange(1, 401)))
    assert run("upratio", "--prices", path, "--config", config, "--out-dir", tmp_path) == 0
    assert len(pd.read_csv(tmp_path / "upratio.csv")) == 3
