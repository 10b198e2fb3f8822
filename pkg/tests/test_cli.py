import json
import subprocess
import sys

import pytest

from hphc import artifacts
from hphc.cli import EXIT_OK, EXIT_SIZE, EXIT_USAGE, EXIT_VERIFY, main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def table(text):
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    header = lines[0].split(",")
    return [dict(zip(header, ln.split(","))) for ln in lines[1:]]


class TestReturnProb:
    def test_exact_anchor(self, capsys):
        code, out, _ = run(capsys, "return-prob", "--n", "1", "--mode", "exact")
        assert code == EXIT_OK
        (row,) = table(out)
        assert (row["exact_num"], row["exact_den"]) == ("5", "16")

    def test_log_grid(self, capsys):
        code, out, _ = run(capsys, "return-prob", "--grid", "100,1000,10000", "--mode", "log")
        rows = table(out)
        assert code == EXIT_OK and len(rows) == 3
        gaps = [abs(float(r["scaled"]) - 1) for r in rows]
        assert gaps[0] > gaps[1] > gaps[2]
        assert rows[0]["exact_num"] == ""

    def test_size_error(self, capsys):
        code, out, err = run(capsys, "return-prob", "--n", "100000", "--mode", "exact")
        assert code == EXIT_SIZE and out == "" and "512" in err

    def test_floats_have_17_digits(self, capsys):
        _, out, _ = run(capsys, "return-prob", "--n", "3", "--mode", "log")
        assert float(table(out)[0]["scaled"]) == pytest.approx(0.6, abs=0.2)
        assert table(out)[0]["scaled"] == format(float(table(out)[0]["scaled"]), ".17g")

    def test_usage_errors(self, capsys):
        assert run(capsys, "return-prob")[0] == EXIT_USAGE
        assert run(capsys, "return-prob", "--grid", "10,5")[0] == EXIT_USAGE
        with pytest.raises(SystemExit) as e:
            main(["return-prob", "--mode", "fast"])
        assert e.value.code == EXIT_USAGE


class TestOtherCommands:
    def test_simulate_zero_steps(self, capsys):
        code, out, _ = run(capsys, "simulate", "--profile", "hphc", "--steps", "0", "--seed", "7")
        assert code == EXIT_OK
        assert table(out) == [{"step": "0", "k": "0", "j": "0"}]

    def test_simulate_bad_profile(self, capsys):
        assert run(capsys, "simulate", "--profile", "hex", "--steps", "3")[0] == EXIT_USAGE
        assert run(capsys, "simulate", "--profile", "periodic:1/2", "--steps", "3")[0] == EXIT_USAGE
        assert run(capsys, "simulate", "--steps", "3", "--method", "construction", "--profile", "simple")[0] == EXIT_USAGE

    def test_simulate_endpoints(self, capsys):
        code, out, _ = run(capsys, "simulate", "--steps", "2", "--replicas", "1000", "--seed", "3")
        assert code == EXIT_OK
        assert sum(int(r["count"]) for r in table(out)) == 1000

    def test_compare(self, capsys):
        code, out, _ = run(capsys, "compare", "--models", "simple,hphc", "--n", "1000")
        (row,) = table(out)
        assert float(row["hphc"]) == pytest.approx(2 * float(row["simple"]))
        assert run(capsys, "compare", "--models", "periodic", "--n", "10")[0] == EXIT_USAGE

    def test_exact_tables(self, capsys):
        _, out, _ = run(capsys, "exact", "--quantity", "p2n", "--n", "1")
        assert [(r["g"], r["num"], r["den"]) for r in table(out)] == [("1", "1", "4"), ("2", "1", "4")]
        _, out, _ = run(capsys, "exact", "--quantity", "negbin", "--k", "1", "--r-max", "1")
        assert table(out)[1]["cdf_num"] == "3"

    def test_local_time_residual(self, capsys):
        code, out, _ = run(capsys, "local-time", "--residual", "--radius", "3")
        assert code == EXIT_OK
        assert all(r["residual_num"] == "0" for r in table(out))
        _, out, _ = run(capsys, "local-time", "--residual", "--radius", "2", "--mu", "constant:1")
        assert {r["j"] for r in table(out) if r["residual_num"] != "0"} == {"-1", "0"}

    def test_local_time_ratio(self, capsys):
        code, out, _ = run(capsys, "local-time", "--ratio", "0,1:0,-1", "--steps", "2000", "--replicas", "6")
        assert code == EXIT_OK
        (row,) = table(out)
        assert row["N"] == "2000" and row["replicas"] == "6"
        assert run(capsys, "local-time", "--ratio", "0,1", "--steps", "20")[0] == EXIT_USAGE

    def test_green_exact(self, capsys):
        _, out, _ = run(capsys, "local-time", "--green", "--grid", "2,4", "--mode", "exact")
        rows = table(out)
        assert (rows[0]["g_num"], rows[0]["g_den"]) == ("21", "16")


class TestVerify:
    def test_all_pass(self, capsys):
        code, out, _ = run(capsys, "verify", "--max-n", "6")
        assert code == EXIT_OK
        assert {r["status"] for r in table(out)} == {"pass"}

    def test_injected_fault_names_identity(self, capsys):
        code, out, err = run(capsys, "verify", "--max-n", "4", "--inject-fault", "sparre_andersen")
        assert code == EXIT_VERIFY
        failed = [r["check"] for r in table(out) if r["status"] == "FAIL"]
        assert failed == ["sparre_andersen"]
        assert "sparre_andersen" in err

    def test_fault_flag_is_hidden(self, capsys):
        with pytest.raises(SystemExit):
            main(["verify", "--help"])
        assert "inject" not in capsys.readouterr().out


class TestArtifacts:
    def test_config_roundtrip(self, tmp_path, capsys):
        a = tmp_path / "a.csv"
        b = tmp_path / "b.csv"
        assert main(["simulate", "--steps", "500", "--seed", "11", "-o", str(a)]) == EXIT_OK
        assert main(["simulate", "--config", str(a), "-o", str(b)]) == EXIT_OK
        assert a.read_bytes() == b.read_bytes()
        cfg = artifacts.read_config(a)
        assert cfg["seed"] == 11 and cfg["command"] == "simulate"
        assert "output" not in cfg and "workers" not in cfg

    def test_config_overrides_flags(self, tmp_path):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"n": 2, "mode": "exact"}))
        out = tmp_path / "o.csv"
        assert main(["return-prob", "--n", "5", "--config", str(cfg), "-o", str(out)]) == EXIT_OK
        assert table(out.read_text())[0]["N"] == "2"

    def test_config_for_other_command_rejected(self, tmp_path):
        a = tmp_path / "a.csv"
        main(["compare", "--n", "10", "-o", str(a)])
        assert main(["simulate", "--config", str(a)]) == EXIT_USAGE

    def test_json_output(self, tmp_path):
        out = tmp_path / "r.json"
        main(["return-prob", "--n", "1", "--format", "json", "-o", str(out)])
        doc = json.loads(out.read_text())
        assert doc["rows"][0][:3] == [1, 5, 16]
        assert artifacts.read_config(out)["format"] == "json"

    def test_output_dir_env(self, tmp_path, monkeypatch):
        monkeypatch.setenv("HPHC_OUTPUT_DIR", str(tmp_path / "outs"))
        assert main(["compare", "--n", "10"]) == EXIT_OK
        assert (tmp_path / "outs" / "compare.csv").exists()

    def test_console_entry_point(self):
        res = subprocess.run([sys.executable, "-m", "hphc", "return-prob", "--n", "1"],
                             capture_output=True, text=True, check=False)
        assert res.returncode == 0 and "5,16" in res.stdout
