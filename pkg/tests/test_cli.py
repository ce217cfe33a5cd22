import json

import numpy as np
import pytest

from levyheat import __version__
from levyheat.cli import main, parse_grid
from levyheat.errors import InvalidInputError


def write(tmp_path, name, doc):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


@pytest.fixture
def configs(tmp_path):
    return {
        "gauss": write(tmp_path, "gauss.json",
                       {"variant": "closed_form", "dim": 1, "closed_form_psi": "gaussian"}),
        "semi": write(tmp_path, "semistable.json",
                      {"variant": "semi_stable", "dim": 1, "alpha": 1.0}),
        "cp1": write(tmp_path, "cp1.json",
                     {"variant": "discrete_atoms", "dim": 1,
                      "atoms": [{"point": 1, "mass": 0.5}]}),
        "psi1": write(tmp_path, "psi1.json",
                      {"variant": "radial_density", "dim": 1,
                       "bernstein": {"kind": "power", "alpha": 0.75}}),
        "temp": write(tmp_path, "temp.json", {"variant": "tempered_tail", "dim": 1, "beta": 2}),
        "cauchy": write(tmp_path, "cauchy.json",
                        {"variant": "closed_form", "dim": 1, "closed_form_psi": "stable(1)"}),
    }


def read_csv(path):
    lines = open(path).read().splitlines()
    meta = [ln for ln in lines if ln.startswith("#")]
    body = [ln.split(",") for ln in lines if not ln.startswith("#")]
    return meta, body[0], body[1:]


class TestGrid:
    def test_inclusive_range(self):
        assert parse_grid("0:6:0.5") == [0.5 * k for k in range(13)]

    def test_mixed(self):
        assert parse_grid("1,2:4:1,8") == [1.0, 2.0, 3.0, 4.0, 8.0]

    @pytest.mark.parametrize("bad", ["", "1:2", "a", "3:1:1", "0:1:0"])
    def test_bad(self, bad):
        with pytest.raises(InvalidInputError):
            parse_grid(bad)


class TestCommands:
    def test_density_example(self, configs, tmp_path, capsys):
        out = tmp_path / "p.csv"
        assert main(["density", "--config", configs["gauss"], "--t", "1",
                     "--out", str(out)]) == 0
        meta, cols, rows = read_csv(out)
        assert cols == ["x", "p"]
        table = {float(a): float(b) for a, b in rows}
        assert table[0.0] == pytest.approx(0.2820947918, abs=1e-10)
        assert meta[0] == f"# levyheat {__version__}"
        assert meta[1].startswith("# config_sha256=")
        summary = json.loads(capsys.readouterr().out)
        assert summary["p0"] == pytest.approx(0.2820947918, abs=1e-10)

    def test_off_diagonal_example(self, configs, tmp_path, capsys):
        code = main(["bounds", "off-diagonal", "--config", configs["semi"], "--t", "1",
                     "--x", "0:6:0.5", "--out", str(tmp_path / "b.csv")])
        assert code == 0
        assert json.loads(capsys.readouterr().out)["verdict"] == "pass"
        _, cols, rows = read_csv(tmp_path / "b.csv")
        assert cols[:3] == ["bound_id", "t", "point"] and len(rows) == 13

    def test_rate_example(self, configs, tmp_path, capsys):
        out = tmp_path / "r.csv"
        assert main(["rate", "--config", configs["cp1"], "--t", "1", "--x", "1",
                     "--out", str(out)]) == 0
        _, cols, rows = read_csv(out)
        rec = dict(zip(cols, rows[0]))
        assert float(rec["D_sq"]) == pytest.approx(0.4671600246, abs=1e-10)
        assert rec["status"] == "converged"
        assert len(rec["D_sq"].replace("0.", "")) >= 15  # 17 significant digits

    def test_validate(self, configs, capsys):
        assert main(["validate", "--config", configs["psi1"]]) == 0
        assert json.loads(capsys.readouterr().out)["checks"]["psi_even"]

    def test_exponent(self, configs, tmp_path):
        out = tmp_path / "e.csv"
        assert main(["exponent", "--config", configs["cauchy"], "--xi", "0:2:1",
                     "--out", str(out)]) == 0
        _, cols, rows = read_csv(out)
        assert cols == ["xi", "psi", "Lambda"]
        assert [float(r[1]) for r in rows] == [0.0, 1.0, 2.0]
        assert rows[0][2] == "nan"

    def test_on_diagonal(self, configs, capsys):
        assert main(["bounds", "on-diagonal", "--config", configs["cauchy"],
                     "--f", "power(0.5)"]) == 0
        s = json.loads(capsys.readouterr().out)
        assert s["c"] == pytest.approx(1 / np.pi, rel=1e-6)

    def test_combined(self, configs):
        assert main(["bounds", "combined", "--config", configs["psi1"], "--t", "0.5",
                     "--x", "0:3:1"]) == 0

    def test_asymptotics_reports_rate_bound(self, configs, capsys):
        code = main(["bounds", "asymptotics", "--config", configs["temp"]])
        s = json.loads(capsys.readouterr().out)
        assert s["ratio_trend_ok"] and s["last_deviation"] <= 0.15
        assert code == (0 if s["rate_bound_ok"] else 1)

    def test_nash(self, configs, capsys):
        assert main(["nash", "--config", configs["psi1"], "--count", "4", "--refine"]) == 0
        s = json.loads(capsys.readouterr().out)
        assert s["relative_change"] <= 0.1

    def test_ldp(self, configs, capsys):
        assert main(["ldp", "--config", configs["gauss"], "--threshold", "0.2"]) == 0
        s = json.loads(capsys.readouterr().out)
        assert s["strictly_decreasing"]

    def test_ldp_failing_verdict(self, configs):
        assert main(["ldp", "--config", configs["gauss"], "--threshold", "0.01"]) == 1

    def test_simulate_byte_identical(self, configs, tmp_path, capsys):
        a, b = tmp_path / "a.bin", tmp_path / "b.bin"
        args = ["simulate", "--config", configs["semi"], "--t", "1", "--n", "5000",
                "--seed", "3", "--eps", str(2.0**-12), "--compare", "--ks-max", "0.05"]
        assert main(args + ["--out", str(a)]) == 0
        assert main(args + ["--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()
        side = json.loads((tmp_path / "a.bin.json").read_text())
        assert side["version"] == __version__ and side["seed"] == 3

    def test_reports_are_byte_identical(self, configs, tmp_path):
        for name in ("x.csv", "y.csv"):
            main(["bounds", "off-diagonal", "--config", configs["semi"], "--t", "0.5",
                  "--x", "0:2:1", "--out", str(tmp_path / name)])
        assert (tmp_path / "x.csv").read_bytes() == (tmp_path / "y.csv").read_bytes()

    def test_summary_file(self, configs, tmp_path):
        path = tmp_path / "s.json"
        main(["rate", "--config", configs["cp1"], "--t", "1", "--x", "1", "--summary",
              str(path)])
        assert json.loads(path.read_text())["command"] == "rate"


class TestExitCodes:
    def err(self, capsys):
        return json.loads(capsys.readouterr().err.strip().splitlines()[-1])

    def test_missing_config(self, tmp_path, capsys):
        assert main(["rate", "--config", str(tmp_path / "nope.json"), "--t", "1",
                     "--x", "1"]) == 2
        assert self.err(capsys)["exit_code"] == 2

    def test_bad_config(self, tmp_path, capsys):
        path = write(tmp_path, "bad.json", {"variant": "semi_stable", "dim": 1})
        assert main(["validate", "--config", path]) == 2
        assert "alpha" in self.err(capsys)["message"]

    def test_usage(self, capsys):
        assert main(["rate"]) == 2
        assert self.err(capsys)["error"] == "usage"

    def test_numeric(self, configs, capsys):
        assert main(["density", "--config", configs["cp1"], "--t", "1"]) == 3
        assert self.err(capsys)["error"] == "no_density"

    def test_feature_unavailable(self, configs, capsys):
        assert main(["rate", "--config", configs["cauchy"], "--t", "1", "--x", "1"]) == 2
        assert self.err(capsys)["error"] == "feature_unavailable"
