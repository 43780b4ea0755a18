"""Tests for chart rendering: data fidelity, schema checks, filters."""

import csv

import pytest

from c2st_plots import NoDataError, PlotSpec, SchemaError, load_rows, render
from c2st_plots.cli import main
from c2st_plots.render import REQUIRED_COLUMNS, build_series, select_rows


def write_csv(path, rows, columns=REQUIRED_COLUMNS):
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(columns), extrasaction="ignore")
        writer.writeheader()
        for row in rows:
            writer.writerow(row)


def row(method="c2st", hypothesis="H1", n=1000, rate=0.5, stderr=0.05, d=10,
        dataset="hdgm-hard"):
    return {
        "method": method, "dataset": dataset, "hypothesis": hypothesis,
        "d": d, "N": n, "unlabeled_fraction": 1.0, "trials": 100,
        "alpha": 0.05, "rate": rate, "stderr": stderr, "seed": 7,
        "runtime_s": 1.5,
    }


@pytest.fixture
def sweep_csv(tmp_path):
    path = tmp_path / "results.csv"
    write_csv(path, [
        row(method="c2st", n=1000, rate=0.21),
        row(method="c2st", n=2000, rate=0.48),
        row(method="ssl-c2st", n=1000, rate=0.33),
        row(method="ssl-c2st", n=2000, rate=0.71),
        row(method="c2st", hypothesis="H0", n=1000, rate=0.04),
        row(method="c2st", hypothesis="H0", n=2000, rate=0.06),
    ])
    return path


class TestRender:
    def test_two_point_line_chart(self, sweep_csv, tmp_path):
        out = tmp_path / "fig.png"
        result = render(PlotSpec(csv_path=sweep_csv, facet="power_vs_N",
                                 out_path=str(out), d=10))
        assert out.exists()
        assert result.series["c2st"]["N"] == [1000, 2000]
        assert len(result.series["c2st"]["rate"]) == 2

    def test_series_match_csv_rates_exactly(self, sweep_csv, tmp_path):
        result = render(PlotSpec(csv_path=sweep_csv, facet="power_vs_N",
                                 out_path=str(tmp_path / "fig.png")))
        assert result.series["c2st"]["rate"] == [0.21, 0.48]
        assert result.series["ssl-c2st"]["rate"] == [0.33, 0.71]
        assert result.series["c2st"]["stderr"] == [0.05, 0.05]

    def test_bar_heights_equal_rates(self, sweep_csv, tmp_path):
        result = render(PlotSpec(csv_path=sweep_csv, facet="method_bars",
                                 out_path=str(tmp_path / "bars.png")))
        assert result.series["ssl-c2st"]["rate"] == [0.33, 0.71]

    def test_type1_facet_selects_null_rows_and_alpha(self, sweep_csv, tmp_path):
        result = render(PlotSpec(csv_path=sweep_csv, facet="type1_vs_N",
                                 out_path=str(tmp_path / "t1.png")))
        assert list(result.series) == ["c2st"]
        assert result.series["c2st"]["rate"] == [0.04, 0.06]
        assert result.alpha == 0.05

    def test_rerender_is_data_stable(self, sweep_csv, tmp_path):
        spec = PlotSpec(csv_path=sweep_csv, facet="power_vs_N",
                        out_path=str(tmp_path / "a.png"))
        first = render(spec)
        second = render(PlotSpec(csv_path=sweep_csv, facet="power_vs_N",
                                 out_path=str(tmp_path / "b.png")))
        assert first.series == second.series

    def test_svg_output(self, sweep_csv, tmp_path):
        out = tmp_path / "fig.svg"
        render(PlotSpec(csv_path=sweep_csv, facet="power_vs_N", out_path=str(out)))
        assert out.read_bytes().lstrip().startswith(b"<?xml")


class TestSchema:
    def test_missing_stderr_column_reported(self, tmp_path):
        path = tmp_path / "bad.csv"
        columns = [c for c in REQUIRED_COLUMNS if c != "stderr"]
        write_csv(path, [row()], columns=columns)
        with pytest.raises(SchemaError) as info:
            load_rows(path)
        assert info.value.missing == ["stderr"]

    def test_render_propagates_schema_error(self, tmp_path):
        path = tmp_path / "bad.csv"
        write_csv(path, [row()], columns=["method", "rate"])
        out = tmp_path / "fig.png"
        with pytest.raises(SchemaError):
            render(PlotSpec(csv_path=path, facet="power_vs_N", out_path=str(out)))
        assert not out.exists()

    def test_facet_validated(self, sweep_csv):
        with pytest.raises(ValueError):
            PlotSpec(csv_path=sweep_csv, facet="scatter", out_path="x.png")


class TestFilters:
    def test_dimension_filter(self, tmp_path):
        path = tmp_path / "multi.csv"
        write_csv(path, [row(d=2, rate=0.9), row(d=10, rate=0.2)])
        rows = select_rows(load_rows(path), PlotSpec(
            csv_path=path, facet="power_vs_N", out_path="x.png", d=2))
        assert [r["rate"] for r in rows] == [0.9]

    def test_empty_after_filter_writes_nothing(self, sweep_csv, tmp_path):
        out = tmp_path / "never.png"
        with pytest.raises(NoDataError):
            render(PlotSpec(csv_path=sweep_csv, facet="power_vs_N",
                            out_path=str(out), d=99))
        assert not out.exists()

    def test_series_sorted_by_sample_size(self, tmp_path):
        path = tmp_path / "unsorted.csv"
        write_csv(path, [row(n=4000, rate=0.8), row(n=1000, rate=0.2)])
        series = build_series(select_rows(load_rows(path), PlotSpec(
            csv_path=path, facet="power_vs_N", out_path="x.png")))
        assert series["c2st"]["N"] == [1000, 4000]
        assert series["c2st"]["rate"] == [0.2, 0.8]


class TestCli:
    def test_cli_writes_figure(self, sweep_csv, tmp_path, capsys):
        out = tmp_path / "cli.png"
        code = main(["--csv", str(sweep_csv), "--facet", "power_vs_N",
                     "--d", "10", "--out", str(out)])
        assert code == 0
        assert out.exists()
        assert "wrote" in capsys.readouterr().out

    def test_cli_schema_error_exit_code(self, tmp_path, capsys):
        path = tmp_path / "bad.csv"
        write_csv(path, [row()], columns=["method", "rate"])
        code = main(["--csv", str(path), "--facet", "power_vs_N",
                     "--out", str(tmp_path / "x.png")])
        assert code == 2
        assert "missing required columns" in capsys.readouterr().err
