import json

import pytest

from rspin.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_extended_correlator_json(capsys):
    code, out, _ = run(capsys, "correlator", "--r", "3", "--ins", "1:0,1:0")
    doc = json.loads(out)
    assert code == 0
    assert doc["schema_version"] == 1
    assert doc["value"] == {"num": "1", "den": "1"}
    assert doc["provenance"] == "both-agree"


def test_extended_three_point(capsys):
    code, out, _ = run(capsys, "correlator", "--r", "3", "--ins", "1:0,2:0,2:0")
    assert code == 0 and json.loads(out)["value"] == {"num": "-1", "den": "3"}


@pytest.mark.parametrize("pipeline", ["recursion", "hierarchy"])
def test_single_pipeline(capsys, pipeline):
    code, out, _ = run(capsys, "correlator", "--r", "2", "--ins", "1:0,1:0,1:0", "--pipeline", pipeline, "--format", "text")
    assert code == 0 and out.strip() == "-1/2"


def test_closed_and_open(capsys):
    code, out, _ = run(capsys, "correlator", "--r", "2", "--sector", "closed", "--ins", "0:0,0:0,0:0", "--format", "text")
    assert (code, out.strip()) == (0, "1")
    code, out, _ = run(capsys, "correlator", "--r", "2", "--sector", "open", "--boundary", "3", "--format", "text")
    assert (code, out.strip()) == (0, "-2")


def test_bad_key_exit_2(capsys):
    assert run(capsys, "correlator", "--r", "3", "--ins", "9:0")[0] == 2
    assert run(capsys, "correlator", "--r", "3", "--ins", "x")[0] == 2
    assert run(capsys, "correlator", "--r", "1", "--ins", "0:0")[0] == 2
    assert run(capsys, "verify", "--suite", "bogus")[0] == 2


def test_cap_exit_3(capsys):
    code, _, err = run(capsys, "correlator", "--r", "3", "--ins", ",".join(["2:0"] * 7))
    assert code == 3 and err


def test_io_exit_4(capsys, tmp_path):
    bad = tmp_path / "missing" / "out.json"
    assert run(capsys, "correlator", "--r", "2", "--ins", "1:0,0:0", "--output", str(bad))[0] == 4
    assert run(capsys, "table", "--config", str(tmp_path / "none.cfg"))[0] == 4


def test_verify_pass_and_fail(capsys):
    code, out, _ = run(capsys, "verify", "--r", "2", "--suite", "strings")
    assert code == 0 and out.startswith("PASS strings")
    code, out, _ = run(capsys, "verify", "--r", "3", "--max-n", "5", "--max-d", "1", "--suite", "flows", "--corrupt-jet")
    assert code == 1 and "FAIL flows" in out


def test_verify_json_output(capsys, tmp_path):
    path = tmp_path / "v.json"
    code, _, _ = run(capsys, "verify", "--r", "2", "--suite", "ramond,strings", "--output", str(path))
    doc = json.loads(path.read_text())
    assert code == 0
    assert doc["schema_version"] == 1


def test_lax_text(capsys):
    code, out, _ = run(capsys, "lax", "--r", "2", "--slice")
    assert (code, out.strip()) == (0, "z^2 + 2*T1")
    code, out, _ = run(capsys, "lax", "--r", "3", "--slice", "--dispersive")
    assert (code, out.strip()) == (0, "Dx^3 + 3*e^-3*T1")


def test_table_formats_are_stable(capsys):
    argv = ["table", "--r", "2", "--sector", "ext", "--max-n", "4", "--max-d", "1"]
    code, first, _ = run(capsys, *argv)
    _, second, _ = run(capsys, *argv)
    assert code == 0 and first == second
    doc = json.loads(first)
    assert set(doc) == {"schema_version", "r", "sector", "entries"}
    values = {tuple((i["twist"], i["desc"]) for i in e["insertions"]): e["value"] for e in doc["entries"]}
    assert values[((1, 0), (1, 0), (1, 0))] == {"num": "-1", "den": "2"}
    _, text, _ = run(capsys, *argv, "--format", "text")
    assert "<tau^-1_0 tau^1_0 tau^1_0 tau^1_0> = -1/2" in text
    _, csv_text, _ = run(capsys, *argv, "--format", "csv")
    assert csv_text.splitlines()[0].startswith("schema_version,r,sector")


def test_config_precedence(capsys, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# defaults for this run\nr = 2\nformat = text\n")
    code, out, _ = run(capsys, "correlator", "--config", str(cfg), "--ins", "1:0,1:0,1:0")
    assert (code, out.strip()) == (0, "-1/2")
    code, out, _ = run(capsys, "correlator", "--config", str(cfg), "--r", "3", "--ins", "1:0,2:0,2:0")
    assert (code, out.strip()) == (0, "-1/3")
