import json
import shutil

import pytest

from bffcheck.cli import main
from bffcheck.parser import pretty
from conftest import CORPUS, HERE, ROOT, load
from oracles import REFERENCE_ORACLES, ce_reference


@pytest.fixture(autouse=True)
def at_root(monkeypatch):
    monkeypatch.chdir(ROOT)
    monkeypatch.delenv("BFF_MAX_TIER", raising=False)


@pytest.mark.parametrize("name", ["ce", "add", "neg_doublebody", "neg_expgrowth"])
def test_json_report_matches_golden(name, capsys):
    code = main(["check", f"corpus/{name}.bff", "--json"])
    got = json.loads(capsys.readouterr().out)
    want = json.loads((HERE / "golden" / f"{name}.json").read_text(encoding="utf-8"))
    assert got == want
    assert code == (0 if want["verdict"].endswith("SCP_S") else 1)


def test_check_exit_codes(capsys):
    assert main(["check", "corpus/ce.bff"]) == 0
    assert "SAFE₀∩SCP_S" in capsys.readouterr().out
    assert main(["check", "corpus/neg_expgrowth.bff"]) == 1
    assert "exceeds max tier" in capsys.readouterr().out
    assert main(["check", "corpus/neg_doublebody.bff"]) == 1
    assert "missing-down-thread" in capsys.readouterr().out
    assert main(["check", "corpus/neg_spin.bff"]) == 1


def test_rank0_bar(capsys):
    assert main(["check", "corpus/ce_lambda.bff"]) == 0
    assert main(["check", "corpus/ce_lambda.bff", "--require-rank0"]) == 1


def test_parse_and_wellformedness_failures(tmp_path, capsys):
    bad = tmp_path / "bad.bff"
    bad.write_text("box [w] in declare P(x) { while (x != ")
    assert main(["check", str(bad)]) == 2
    bad.write_text("box [w] in declare P(x) { x := y; return x } in call P(w)")
    assert main(["check", str(bad)]) == 2
    assert "free-variable" in capsys.readouterr().err
    assert main(["check", str(tmp_path / "missing.bff")]) == 2


def test_max_tier_flag_and_env(monkeypatch, capsys):
    # the KS procedure needs innermost tier 2
    assert main(["check", "corpus/ce.bff", "--max-tier", "1"]) == 1
    monkeypatch.setenv("BFF_MAX_TIER", "1")
    assert main(["check", "corpus/ce.bff"]) == 1
    assert main(["check", "corpus/ce.bff", "--max-tier", "2"]) == 0


def test_annotate_adds_loop_tiers(capsys):
    main(["check", "corpus/ce.bff", "--json", "--annotate"])
    (p,) = json.loads(capsys.readouterr().out)["procedures"]
    assert p["mode"] == "WH"
    assert p["loops"]


def test_run(capsys):
    assert main(["run", "corpus/add.bff", "--arg", "111", "--arg", "11"]) == 0
    assert capsys.readouterr().out.strip() == "11111"
    assert main(["run", "corpus/ce.bff", "--oracle", "prepend:1", "--arg", "11"]) == 0
    assert capsys.readouterr().out.strip() == ce_reference(REFERENCE_ORACLES["prepend:1"], "11")


def test_run_errors(capsys):
    assert main(["run", "corpus/add.bff", "--arg", "1"]) == 3
    assert "ArityMismatch" in capsys.readouterr().err
    assert main(["run", "corpus/neg_spin.bff", "--arg", "1", "--fuel", "100"]) == 3
    assert "FuelExhausted" in capsys.readouterr().err
    assert main(["run", "corpus/ce.bff", "--oracle", "bogus", "--arg", "1"]) == 2


def test_flatten_is_identity_on_flat_programs(capsys):
    assert main(["flatten", "corpus/ce.bff"]) == 0
    out = capsys.readouterr().out
    assert out == pretty(load("ce.bff"))
    main(["flatten", "corpus/iter.bff"])
    assert "t1 := lmin(u, x)" in capsys.readouterr().out


SEQ_PROGRAM = """box [X, a, b, c] in
  declare p(Y, x, y, z) {
    y := pred(x);
    y := lmin(x, y);
    x := suc1(x);
    x := Y(y |> z);
    return x
  }
  in call p(X, a, b, c)
"""


def test_graphs_of_the_scg_table(tmp_path, capsys):
    src = tmp_path / "seq.bff"
    src.write_text(SEQ_PROGRAM)
    out = tmp_path / "dot"
    assert main(["graphs", str(src), "--dot", str(out), "--vars", "x,y,z"]) == 0
    files = sorted(out.glob("*.dot"))
    assert len(files) == 4
    first = files[0].read_text()
    assert '"L:x" -> "R:y" [label="↓"' in first
    assert '"L:x" -> "R:x"' in first and '"L:z" -> "R:z"' in first
    third = files[2].read_text()
    assert '"R:x"' in third and '-> "R:x"' not in third


def test_graphs_loop_concatenation(tmp_path):
    out = tmp_path / "dot"
    assert main(["graphs", "corpus/ce.bff", "--dot", str(out)]) == 0
    loop = (out / "KS_loop1.dot").read_text()
    assert '"0:v" -> "1:v" [label="↓"' in loop


def test_shipped_corpus(capsys):
    assert main(["corpus", "--dir", "corpus"]) == 0


def test_corrupted_manifest(tmp_path, capsys):
    d = tmp_path / "c"
    shutil.copytree(CORPUS, d)
    m = json.loads((d / "manifest.json").read_text(encoding="utf-8"))
    m["entries"][2]["verdict"] = "rejected"
    (d / "manifest.json").write_text(json.dumps(m), encoding="utf-8")
    assert main(["corpus", "--dir", str(d)]) == 1
    assert "add.bff" in capsys.readouterr().err


def test_empty_corpus(tmp_path, capsys):
    assert main(["corpus", "--dir", str(tmp_path)]) == 0
    assert "warning" in capsys.readouterr().err


def test_bench_writes_csv_and_plot(tmp_path, capsys):
    assert main(["bench", "--sizes", "300", "600", "--out", str(tmp_path)]) == 0
    rows = (tmp_path / "bench.csv").read_text().splitlines()
    assert rows[0] == "target,nodes,seconds,verdict"
    assert len(rows) == 3
    assert (tmp_path / "bench.png").stat().st_size > 0
