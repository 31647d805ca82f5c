import csv
import io
import json
import subprocess
import sys


from qsphere.cli import SCHEMA_VERSION, main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_verify_relations_passes(capsys):
    code, out, _ = run(capsys, "verify", "relations", "--q", "0.5", "--ell", "2", "--cutoff", "6")
    rep = json.loads(out)
    assert code == 0 and rep["pass"] and rep["schema_version"] == SCHEMA_VERSION
    assert all({"check", "params", "max_deviation", "pass"} <= set(r) for r in rep["results"])


def test_verify_decompositions_q0_exact(capsys):
    code, out, _ = run(capsys, "verify", "decompositions", "--q", "0", "--ell", "2", "--cutoff", "5")
    rep = json.loads(out)
    assert code == 0 and all(r["max_deviation"] == 0 for r in rep["results"])


def test_cutoff_below_minimum_is_usage_error(capsys):
    code, _, err = run(capsys, "verify", "relations", "--cutoff", "1")
    assert code == 2 and err


def test_check_failure_exit_code(capsys):
    # an impossible tolerance on an inexact family fails the check, not the invocation
    code, out, _ = run(capsys, "verify", "relations", "--q", "0.5", "--ell", "1", "--cutoff", "6", "--tol", "1e-40")
    assert code == 1 and json.loads(out)["pass"] is False


def test_bad_choices_are_usage_errors(capsys):
    assert run(capsys, "verify", "nonsense")[0] == 2
    assert run(capsys, "operator-dump", "--op", "W1")[0] == 2
    assert run(capsys, "cg-table", "--ell", "2", "--i", "9")[0] == 2


def test_config_precedence(tmp_path, capsys):
    cfg = tmp_path / "run.ini"
    cfg.write_text("[common]\nq = 0.3\nell = 1\ncutoff = 5\n[verify]\nsamples = 3\n")
    _, out, _ = run(capsys, "verify", "relations", "--config", str(cfg), "--cutoff", "6")
    p = json.loads(out)["params"]
    assert p["q"] == 0.3 and p["ell"] == 1 and p["cutoff"] == 6
    cfg.write_text("[common]\nbogus = 1\n")
    code, _, err = run(capsys, "verify", "relations", "--config", str(cfg))
    assert code == 2 and "bogus" in err


def test_dimension_spectrum_ell1(capsys):
    code, out, _ = run(capsys, "dimension-spectrum", "--ell", "1")
    rep = json.loads(out)
    rows = [r for r in rep["results"] if r["source"].startswith("|D_eq|")]
    assert code == 0 and {r["pole"]: r["residue"] for r in rows} == {1: "1", 2: "2", 3: "1"}


def test_dimension_spectrum_torus_identity(capsys):
    _, out, _ = run(capsys, "dimension-spectrum", "--ell", "2", "--torus-identity")
    rows = [r for r in json.loads(out)["results"] if not r["source"].startswith("|D_eq|")]
    assert {r["pole"]: r["residue"] for r in rows}[3] == "1"


def test_symbol_file_parse_error_location(tmp_path, capsys):
    f = tmp_path / "sym.json"
    f.write_text('{"kind": "torus",\n "ell": 2,\n "levels": {0: 1}}')
    code, _, err = run(capsys, "dimension-spectrum", "--ell", "2", "--symbol", str(f))
    assert code == 2 and "sym.json:3:" in err
    f.write_text('{"kind": "torus", "ell": 2, "levels": {"0": {"": "x"}}}')
    code, _, err = run(capsys, "dimension-spectrum", "--ell", "2", "--symbol", str(f))
    assert code == 2 and "$." in err


def test_symbol_file_residue(tmp_path, capsys):
    f = tmp_path / "sym.json"
    f.write_text(json.dumps({"kind": "torus", "ell": 2, "name": "top", "levels": {"2": {"1,0": "1/2", "0,3": "1/2"}}}))
    code, out, _ = run(capsys, "dimension-spectrum", "--ell", "2", "--symbol", str(f))
    rows = [r for r in json.loads(out)["results"] if r["source"] == "top"]
    assert code == 0 and {r["pole"]: r["residue"] for r in rows}[1] == "2"


def test_cg_table_row_counts(capsys):
    code, out, _ = run(capsys, "cg-table", "--ell", "3", "--i", "3", "--format", "csv", "--q", "0.5")
    rows = list(csv.reader(io.StringIO(out)))
    assert code == 0 and rows[0][:3] == ["i", "M", "valid"] and len(rows) - 1 == 24
    _, out, _ = run(capsys, "cg-table", "--ell", "2", "--format", "csv", "--q", "0.5")
    assert len(list(csv.reader(io.StringIO(out)))) - 1 == 6


def test_operator_dump_q0_pattern(capsys):
    code, out, _ = run(capsys, "operator-dump", "--op", "Y2", "--q", "0", "--ell", "1", "--cutoff", "4",
                       "--format", "csv")
    rows = list(csv.reader(io.StringIO(out)))
    assert code == 0 and rows[0] == ["row_gamma", "col_gamma", "value"]
    assert rows[1:] and {float(r[2]) for r in rows[1:]} == {1.0}
    assert out.endswith("\r\n")


def test_decay_command(capsys):
    code, out, _ = run(capsys, "decay", "--q", "0.3", "--ell", "2", "--j", "1")
    rep = json.loads(out)
    assert code == 0 and all(r["alpha_fit"] >= 0.98 and r["certified"] for r in rep["results"])


def test_out_file(tmp_path, capsys):
    dest = tmp_path / "r.json"
    code, out, _ = run(capsys, "dimension-spectrum", "--ell", "1", "--out", str(dest))
    assert code == 0 and out == ""
    assert json.loads(dest.read_text())["command"] == "dimension-spectrum"


def test_deterministic_reports(capsys):
    args = ("verify", "seminorms", "--seed", "7", "--samples", "5", "--cutoff", "4")
    a, b = run(capsys, *args)[1], run(capsys, *args)[1]
    assert a == b
    c = run(capsys, *args[:3], "8", *args[4:])[1]
    assert json.loads(c)["params"]["seed"] == 8


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "qsphere", "dimension-spectrum", "--ell", "1"],
                       capture_output=True, text=True, timeout=120)
    assert r.returncode == 0 and json.loads(r.stdout)["pass"]
