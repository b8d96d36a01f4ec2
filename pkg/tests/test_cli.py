import csv
import io
import json
import re

import pytest
from click.testing import CliRunner

from tcantilever.cli import COMPARE_COLUMNS, FIT_COLUMNS, PREDICT_COLUMNS, cli
from tcantilever.devices import dump_catalog, dump_measurements, shipped_catalog, synthetic_measurements


@pytest.fixture
def runner():
    return CliRunner()


def run(runner, *args):
    return runner.invoke(cli, list(args), catch_exceptions=False)


def csv_body(text):
    lines = [line for line in text.splitlines() if not line.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(lines))))


class TestPredict:
    def test_device4(self, runner):
        res = run(runner, "predict", "--device", "4")
        assert res.exit_code == 0
        data = json.loads(res.output)
        by_model = {p["model"]: p for p in data["predictions"]}
        assert by_model["lumped"]["frequency_hz"] == pytest.approx(92.6e3, rel=1e-3)
        assert by_model["fem"]["frequency_hz"] > by_model["lumped"]["frequency_hz"]
        assert data["material"] == {"youngs_modulus_gpa": 169.0, "density_kg_m3": 2330.0}
        assert data["geometry"]["n_beams"] == 3
        assert by_model["lumped"]["total_spring_constant_n_m"] == pytest.approx(3 * by_model["lumped"]["spring_constant_n_m"])

    def test_rectangular_inline(self, runner):
        res = run(runner, "predict", "--l1", "400", "--l2", "0", "--w1", "64", "--h", "15", "--model", "lumped")
        (row,) = json.loads(res.output)["predictions"]
        assert row["spring_constant_n_m"] == pytest.approx(142.59375, rel=1e-12)

    def test_csv_schema(self, runner):
        res = run(runner, "predict", "--device", "1", "--format", "csv", "--model", "lumped", "--classical")
        assert res.output.startswith("# material: E = 169 GPa, rho = 2330 kg/m^3\n")
        assert "beam_mass_coeff = 0.2427" in res.output
        rows = csv_body(res.output)
        assert tuple(rows[0]) == PREDICT_COLUMNS

    def test_material_override(self, runner):
        base = json.loads(run(runner, "predict", "--device", "4", "--model", "lumped").output)
        stiff = json.loads(run(runner, "predict", "--device", "4", "--model", "lumped", "--E-gpa", "676").output)
        ratio = stiff["predictions"][0]["frequency_hz"] / base["predictions"][0]["frequency_hz"]
        assert ratio == pytest.approx(2.0, rel=1e-12)

    def test_unknown_device(self, runner):
        res = run(runner, "predict", "--device", "99")
        assert res.exit_code != 0
        assert "unknown device id 99" in res.output

    def test_two_geometry_sources(self, runner):
        res = run(runner, "predict", "--device", "4", "--l1", "100")
        assert res.exit_code != 0

    def test_invalid_geometry(self, runner):
        res = run(runner, "predict", "--l1", "400", "--w1", "-64")
        assert res.exit_code == 1
        assert "Error" in res.output

    def test_custom_catalog(self, runner, tmp_path):
        path = tmp_path / "cat.csv"
        path.write_text("id,chip,l_um,w1_um,l2_um,w2_um,h_um\n42,9,400,64,0,0,15\n", encoding="utf-8")
        res = run(runner, "predict", "--device", "42", "--catalog", str(path), "--model", "lumped")
        assert json.loads(res.output)["predictions"][0]["spring_constant_n_m"] == pytest.approx(142.59375)

    def test_byte_identical(self, runner):
        for fmt in ("json", "csv"):
            a = run(runner, "predict", "--device", "2", "--format", fmt, "--elements", "32").output
            b = run(runner, "predict", "--device", "2", "--format", fmt, "--elements", "32").output
            assert a == b

    def test_out_file(self, runner, tmp_path):
        path = tmp_path / "p.json"
        res = run(runner, "predict", "--device", "4", "--out", str(path))
        assert res.output == ""
        assert json.loads(path.read_text())["device"] == 4


class TestDeflect:
    def test_device4_tip(self, runner):
        data = json.loads(run(runner, "deflect", "--device", "4").output)
        assert len(data["points"]) == 201
        assert data["points"][-1]["y_m"] == pytest.approx(data["tip_deflection_m"], rel=1e-12)
        assert data["tip_deflection_m"] == pytest.approx(7.0e-9, rel=0.01)
        assert data["points"][0] == {"x_m": 0.0, "y_m": 0.0}

    def test_zero_force(self, runner):
        rows = csv_body(run(runner, "deflect", "--device", "1", "--force", "0", "--format", "csv").output)
        assert all(float(r["y_m"]) == 0.0 for r in rows)

    def test_points(self, runner):
        rows = csv_body(run(runner, "deflect", "--device", "1", "--points", "11", "--format", "csv").output)
        assert len(rows) == 11
        assert float(rows[-1]["x_m"]) == pytest.approx(400e-6)

    def test_rectangular_rejected(self, runner):
        res = run(runner, "deflect", "--l1", "400", "--w1", "64")
        assert res.exit_code == 1

    def test_svg(self, runner):
        svg = run(runner, "deflect", "--device", "4", "--format", "svg", "--no-timestamp").output
        assert svg.startswith("<?xml") and 'viewBox="0 0 800 500"' in svg
        assert svg.count('class="series"') == 1
        assert "generated" not in svg

    def test_svg_timestamp(self, runner):
        assert "<!-- generated" in run(runner, "deflect", "--device", "4", "--format", "svg").output


class TestSweep:
    def test_lumped_json(self, runner):
        data = json.loads(run(runner, "sweep", "--device", "3", "--model", "lumped").output)
        (s,) = data["sweeps"]
        assert 0.75 <= s["transition"]["fraction"] <= 0.90
        assert len(s["points"]) == 64
        assert s["points"][0]["regime"] == "mass-dominated"
        assert s["points"][-1]["regime"] == "stiffness-dominated"

    def test_fem_below_lumped(self, runner):
        data = json.loads(run(runner, "sweep", "--device", "3", "--points", "16", "--elements", "32").output)
        frac = {s["model"]: s["transition"]["fraction"] for s in data["sweeps"]}
        assert frac["fem"] < frac["lumped"]

    def test_svg_marks_both_minima(self, runner):
        svg = run(runner, "sweep", "--device", "3", "--points", "12", "--elements", "16", "--format", "svg",
                  "--no-timestamp").output
        assert svg.count('class="series"') == 2
        assert svg.count('class="marker"') == 2
        assert svg == run(runner, "sweep", "--device", "3", "--points", "12", "--elements", "16", "--format",
                          "svg", "--no-timestamp").output

    def test_no_transition(self, runner):
        res = runner.invoke(cli, ["sweep", "--l1", "300", "--l2", "100", "--w1", "64", "--w2", "64", "--fmax", "0.3",
                                  "--points", "9", "--model", "lumped", "--format", "csv"])
        assert res.exit_code == 0
        assert res.stderr == "lumped: no transition in range l2/l = [0.01, 0.3]\n"
        assert "# lumped: no transition in range" in res.stdout
        assert all(r["regime"] == "" for r in csv_body(res.stdout))

    def test_invalid_grid(self, runner):
        res = run(runner, "sweep", "--device", "3", "--points", "5")
        assert res.exit_code == 1


class TestModal:
    def test_uniform_beam(self, runner):
        data = json.loads(run(runner, "modal", "--l1", "400", "--w1", "64", "--elements", "64").output)
        assert data["f1_hz"] == pytest.approx(129.0e3, rel=1e-3)
        assert data["residual"] <= 1e-8
        assert data["static_tip_stiffness_n_m"] == pytest.approx(data["spring_constant_n_m"], rel=1e-9)
        assert len(data["mode_shape"]) == 65
        assert data["mode_shape"][-1]["deflection"] == pytest.approx(1.0)

    def test_refinement(self, runner):
        a = json.loads(run(runner, "modal", "--device", "2", "--elements", "64").output)["f1_hz"]
        b = json.loads(run(runner, "modal", "--device", "2", "--elements", "128").output)["f1_hz"]
        assert abs(a - b) / b < 1e-3

    def test_too_few_elements(self, runner):
        res = run(runner, "modal", "--device", "4", "--elements", "3")
        assert res.exit_code == 1

    def test_csv(self, runner):
        out = run(runner, "modal", "--device", "4", "--elements", "16", "--format", "csv").output
        assert re.search(r"# n_elements = 16, f1 = [\d.]+ Hz", out)
        assert len(csv_body(out)) == 17


class TestCompareAndFit:
    def test_compare_json(self, runner):
        data = json.loads(run(runner, "compare", "--elements", "32").output)
        assert {a["chip"]: a["device"] for a in data["measured_argmin"]} == {1: 3, 2: 7}
        assert data["nominal_boundary_fraction"] == 0.6
        assert len(data["rows"]) == 16
        assert set(data["rows"][0]) == set(COMPARE_COLUMNS)

    def test_compare_csv(self, runner):
        out = run(runner, "compare", "--model", "lumped", "--format", "csv").output
        assert "# chip 1: measured minimum at device 3" in out
        rows = csv_body(out)
        assert tuple(rows[0]) == COMPARE_COLUMNS and len(rows) == 8

    def test_orphan_id(self, runner, tmp_path):
        path = tmp_path / "m.csv"
        path.write_text("id,fr_khz,q\n1,98,680\n77,100,10\n", encoding="utf-8")
        res = run(runner, "compare", "--measurements", str(path))
        assert res.exit_code == 1
        assert res.stdout == ""
        assert "ids [77]" in res.stderr

    def test_fit_synthetic(self, runner, tmp_path):
        cat = shipped_catalog()
        (tmp_path / "c.csv").write_text(dump_catalog(cat), encoding="utf-8")
        (tmp_path / "m.csv").write_text(dump_measurements(synthetic_measurements(cat, 0.24, 0.7)), encoding="utf-8")
        data = json.loads(run(runner, "fit", "--catalog", str(tmp_path / "c.csv"),
                              "--measurements", str(tmp_path / "m.csv")).output)
        # the CSV keeps 12 significant digits of each frequency
        assert data["alpha"] == pytest.approx(0.24, abs=1e-6)
        assert data["beta"] == pytest.approx(0.7, abs=1e-6)

    def test_fit_table2(self, runner):
        data = json.loads(run(runner, "fit").output)
        assert set(FIT_COLUMNS) <= set(data)
        assert data["beta"] < 1.0 and data["physical"] is True
        out = run(runner, "fit", "--format", "csv").output
        assert tuple(csv_body(out)[0]) == FIT_COLUMNS

    def test_missing_file(self, runner):
        res = runner.invoke(cli, ["compare", "--catalog", "/nonexistent.csv"])
        assert res.exit_code != 0


def test_version(runner):
    assert "0.1.0" in run(runner, "--version").output
