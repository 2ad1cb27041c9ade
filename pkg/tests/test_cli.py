import csv
import io
import json
import subprocess
import sys

import pytest

from confmom.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def json_lines(text):
    return [json.loads(line) for line in text.splitlines() if line]


class TestTransform:
    def test_inversion(self, capsys):
        code, out, _ = run(capsys, "transform", "--el", "inv", "--q", "2,0,0,0", "--M", "1")
        rec = json_lines(out)[0]
        assert code == 0
        assert rec["q_out"] == [-0.5, 0, 0, 0]
        assert (rec["region_in"], rec["region_out"]) == ("II", "I")
        assert rec["element"] == "inv"

    def test_trivial_dilatation(self, capsys):
        code, out, _ = run(capsys, "transform", "--el", "dil:0", "--q", "1,0,0,0")
        assert code == 0 and json_lines(out)[0]["q_out"] == [1, 0, 0, 0]

    def test_negative_components(self, capsys):
        code, out, _ = run(capsys, "transform", "--el", "trans:-1,0,0,0", "--q", "-1,0.5,0,0")
        assert code == 0 and json_lines(out)[0]["q_out"] == [-2, 0.5, 0, 0]

    @pytest.mark.parametrize("argv", [["--q", "1,2", "--el", "inv"], ["--q", "1,0,0,0", "--el", "bogus"],
                                      ["--q", "1,0,0,0"]])
    def test_usage_errors(self, capsys, argv):
        code, _, err = run(capsys, "transform", *argv)
        assert code == 2 and err

    def test_lightlike_is_domain_error(self, capsys):
        code, out, err = run(capsys, "transform", "--el", "inv", "--q", "1,1,0,0")
        assert code == 3 and out == "" and "domain error" in err


class TestOtherCommands:
    def test_lift(self, capsys):
        code, out, _ = run(capsys, "lift", "--q", "0.5,0.1,0,0", "--kplus", "2")
        rec = json_lines(out)[0]
        assert code == 0 and rec["kappa_plus"] == pytest.approx(2.0)
        assert rec["projected"] == pytest.approx([0.5, 0.1, 0, 0])

    def test_classify(self, capsys):
        code, out, _ = run(capsys, "classify", "--q2", "0.25")
        rec = json_lines(out)[0]
        assert rec["region"] == "I" and rec["q5"] == pytest.approx(0.75 ** 0.5)
        assert rec["inverted_region"] == "II"

    def test_orbit(self, capsys):
        code, out, _ = run(capsys, "orbit", "--el", "dil:0.1", "--q", "1,0,0,0", "--steps", "3")
        rows = json_lines(out)
        assert len(rows) == 4 and rows[1]["region"] == "II"

    def test_series_csv(self, capsys):
        code, out, _ = run(capsys, "series", "--format", "csv")
        rows = list(csv.DictReader(io.StringIO(out)))
        assert code == 0
        assert {r["coefficient"] for r in rows} >= {"c_const", "c_inv", "c_2", "c_4"}

    def test_masses(self, capsys):
        code, out, _ = run(capsys, "masses")
        vals = {r["quantity"]: r["value"] for r in json_lines(out)}
        assert vals["higgs_mass_sq"] == pytest.approx(9 / 8, abs=1e-6)
        assert vals["higgs_raw_curvature"] == pytest.approx(9 / 4, rel=1e-6)
        assert vals["pion_mass_sq_external"] == pytest.approx(138.0 ** 2, rel=1e-3)


class TestScan:
    def test_higgs_rows_and_antisymmetry(self, capsys):
        code, out, _ = run(capsys, "scan", "--model", "higgs", "--f", "1", "--M", "1", "--range", "-3:3:0.01",
                           "--format", "csv")
        lines = out.splitlines()
        assert lines[0].startswith("# ")
        rows = list(csv.DictReader(io.StringIO("\n".join(lines[1:]))))
        assert code == 0 and len(rows) == 601
        for r in rows:
            assert float(r["L_int_internal"]) == -float(r["L_int_external"])

    def test_phi4_minimum(self, capsys):
        _, out, _ = run(capsys, "scan", "--model", "phi4", "--g", "1", "--eta", "1")
        rows = json_lines(out)[1:]
        best = min(rows, key=lambda r: r["L_int_internal"])
        assert best["field"] == pytest.approx(-1.5, abs=1e-9)

    def test_zero_width_range(self, capsys):
        _, out, _ = run(capsys, "scan", "--model", "phi4", "--range", "0.5:0.5:0.1")
        assert len(json_lines(out)) == 2

    def test_sigma_pole_flag(self, capsys):
        _, out, _ = run(capsys, "scan", "--model", "sigma", "--range", "-1:1:1")
        rows = json_lines(out)[1:]
        assert rows[1]["flag"] == "pole" and rows[1]["L_int_internal"] is None
        assert rows[0]["flag"] == ""

    def test_unknown_model(self, capsys):
        code, _, _ = run(capsys, "scan", "--model", "yukawa")
        assert code == 2


class TestConfig:
    def test_config_file_and_override(self, capsys, tmp_path):
        path = tmp_path / "run.json"
        path.write_text(json.dumps({"M": 2.0, "format": "csv"}))
        _, out, _ = run(capsys, "classify", "--q2", "3", "--config", str(path))
        assert out.startswith("q2,")
        _, out, _ = run(capsys, "classify", "--q2", "5", "--config", str(path), "--format", "json")
        assert json_lines(out)[0]["region"] == "II"

    def test_unknown_key(self, capsys, tmp_path):
        path = tmp_path / "run.json"
        path.write_text(json.dumps({"bogus": 1}))
        code, _, err = run(capsys, "classify", "--q2", "1", "--config", str(path))
        assert code == 2 and "bogus" in err


class TestUnits:
    def test_masses_unit_column(self, capsys, tmp_path):
        path = tmp_path / "run.json"
        path.write_text(json.dumps({"units": "GeV"}))
        _, out, _ = run(capsys, "masses", "--config", str(path))
        units = {r["quantity"]: r["unit"] for r in json_lines(out)}
        assert units["M_from_pion_mass"] == "GeV" and units["higgs_mass_sq"] == "GeV^2"


class TestVerify:
    def test_single_suite(self, capsys):
        code, out, _ = run(capsys, "verify", "--suite", "cone")
        rec = json_lines(out)[0]
        assert code == 0 and rec["suite"] == "cone" and rec["failures"] == 0
        assert rec["max_residual"] < 1e-9

    def test_deterministic(self, capsys):
        _, a, _ = run(capsys, "verify", "--suite", "atlas", "--seed", "7")
        _, b, _ = run(capsys, "verify", "--suite", "atlas", "--seed", "7")
        assert a == b

    def test_tolerance_override_fails_check(self, capsys, tmp_path):
        path = tmp_path / "run.json"
        path.write_text(json.dumps({"tolerances": {"cone.equivariance_special_conformal": 1e-300}}))
        code, out, _ = run(capsys, "verify", "--suite", "cone", "--config", str(path))
        assert code == 1 and json_lines(out)[0]["failed"] == ["equivariance_special_conformal"]

    def test_unknown_tolerance_name(self, capsys, tmp_path):
        path = tmp_path / "run.json"
        path.write_text(json.dumps({"tolerances": {"no_such_check": 1.0}}))
        code, _, err = run(capsys, "verify", "--suite", "cone", "--config", str(path))
        assert code == 2 and "no_such_check" in err

    def test_coarse_grid_loosens_chain(self, capsys, tmp_path):
        path = tmp_path / "run.json"
        path.write_text(json.dumps({"grid_points": 65, "grid_half_width": 20.0, "t5": 1.5}))
        code, out, _ = run(capsys, "verify", "--suite", "fifthdim", "--config", str(path))
        assert code == 1 and "phi4_chain_internal" in json_lines(out)[0]["failed"]

    def test_module_entry_point(self):
        proc = subprocess.run([sys.executable, "-m", "confmom", "classify", "--q2", "-0.5"],
                              capture_output=True, text=True, check=True)
        assert json.loads(proc.stdout)["region"] == "IV"
