import subprocess
import sys

import pytest

from localgram.cli import main
from localgram.resources import DEMO, DEMO_DIR, read_text

RES = ["--lexicon", str(DEMO.lexicon), "--rules", str(DEMO.rules), "--graphs", str(DEMO.graphs)]


@pytest.fixture(scope="module")
def artifact(tmp_path_factory):
    out = tmp_path_factory.mktemp("a") / "demo.rtn"
    assert main(["compile", *RES, "--schema", str(DEMO.schema), "--out", str(out)]) == 0
    return out


def test_compile_reports(artifact, capsys):
    assert artifact.read_text(encoding="utf-8").startswith("RTN 1")


def test_annotate_matches_golden(artifact, tmp_path):
    out = tmp_path / "pred.txt"
    rc = main(["annotate", "--lexicon", str(DEMO.lexicon), "--rules", str(DEMO.rules),
               "--artifact", str(artifact), "--in", str(DEMO.corpus), "--out", str(out)])
    assert rc == 0
    assert out.read_text(encoding="utf-8") == read_text(DEMO.golden)


def test_annotate_from_graphs(tmp_path):
    out = tmp_path / "pred.txt"
    assert main(["annotate", *RES, "--in", str(DEMO.corpus), "--out", str(out)]) == 0
    assert out.read_text(encoding="utf-8") == read_text(DEMO.golden)


def test_eval_table(capsys, tmp_path):
    dump = tmp_path / "report.txt"
    rc = main(["eval", "--gold", str(DEMO.golden), "--pred", str(DEMO.golden),
               "--out", str(dump)])
    assert rc == 0
    row = capsys.readouterr().out.splitlines()[1].split()
    assert row == ["EVAD", "1.0000", "1.0000", "1.0000"]
    assert "f1=1.0000" in dump.read_text(encoding="utf-8")


def test_eval_mismatch_exit_one(tmp_path):
    other = tmp_path / "other.txt"
    other.write_text("다른 문장\n", encoding="utf-8")
    assert main(["eval", "--gold", str(DEMO.golden), "--pred", str(other)]) == 1


def test_count(capsys):
    assert main(["count", "--graphs", str(DEMO.graphs)]) == 0
    out = capsys.readouterr().out
    rows = dict(line.rsplit(None, 1) for line in out.splitlines()[1:-1])
    assert rows == {"ENTITY": "5", "UNARY": "160", "BINARY": "388", "MULTIPLE": "141",
                    "ASPECT_VALUE": "694"}
    assert "one pattern" in out.splitlines()[-1]


def test_count_recursive_needs_limit(capsys):
    path = str(DEMO_DIR / "recursion" / "INTENSIFIER.lgg")
    assert main(["count", "--graphs", path, "--main", "INTENSIFIER"]) == 1
    assert main(["count", "--graphs", path, "--main", "INTENSIFIER", "--depth-limit", "2"]) == 0
    assert capsys.readouterr().out.splitlines()[-2].split() == ["INTENSIFIER", "3"]


def test_export(tmp_path):
    src = tmp_path / "in.txt"
    src.write_text("<ENT=CLO_TY>바지</ENT> 좋아요\n", encoding="utf-8")
    out = tmp_path / "out.bio"
    assert main(["export", "--in", str(src), "--out", str(out), "--schema",
                 str(DEMO.schema)]) == 0
    assert out.read_text(encoding="utf-8") == ("바\tB-ENT\n지\tI-ENT\n⌴\tO\n좋\tO\n아\tO\n"
                                               "요\tO\n\n")


def test_export_rejects_unknown_label(tmp_path):
    src = tmp_path / "in.txt"
    src.write_text("<LENGTH-PURPLE>바지</LENGTH-PURPLE>\n", encoding="utf-8")
    assert main(["export", "--in", str(src), "--schema", str(DEMO.schema)]) == 1


def test_export_bad_markup(tmp_path):
    src = tmp_path / "in.txt"
    src.write_text("<A>바지\n", encoding="utf-8")
    assert main(["export", "--in", str(src)]) == 1


def test_suggest(capsys):
    rc = main(["suggest", *RES, "--in", str(DEMO.corpus), "-n", "2", "--top", "3"])
    assert rc == 0
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 3
    counts = [int(line.split("\t")[0]) for line in lines]
    assert counts == sorted(counts, reverse=True)


def test_dot(tmp_path, capsys):
    assert main(["dot", "--graphs", str(DEMO.graphs), "--graph", "LENGTH"]) == 0
    assert capsys.readouterr().out.startswith('digraph "LENGTH"')
    assert main(["dot", "--graphs", str(DEMO.graphs), "--out", str(tmp_path / "d")]) == 0
    assert (tmp_path / "d" / "ENTITY.dot").exists()
    assert main(["dot", "--graphs", str(DEMO.graphs), "--graph", "NOPE"]) == 1


def test_compile_bad_label(tmp_path):
    g = tmp_path / "g.lgg"
    g.write_text('#GRAPH ASPECT_VALUE\n#BOX 0 start\n#BOX 1 end\n#BOX 2 "<E>" OUT "<LENGTH-X>"\n'
                 '#BOX 3 "가"\n#BOX 4 "<E>" OUT "</LENGTH-X>"\n'
                 '#EDGE 0 2\n#EDGE 2 3\n#EDGE 3 4\n#EDGE 4 1\n', encoding="utf-8")
    assert main(["compile", "--graphs", str(g), "--schema", str(DEMO.schema),
                 "--out", str(tmp_path / "x")]) == 1


def test_compile_dangling_call(tmp_path):
    g = tmp_path / "g.lgg"
    g.write_text('#GRAPH ASPECT_VALUE\n#BOX 0 start\n#BOX 1 end\n#BOX 2 ":GONE"\n'
                 '#EDGE 0 2\n#EDGE 2 1\n', encoding="utf-8")
    assert main(["compile", "--graphs", str(g)]) == 1


def test_missing_file_exit_one(tmp_path):
    assert main(["compile", "--graphs", str(tmp_path / "none.lgg")]) == 1


def test_bad_lexicon_exit_one(tmp_path):
    lex = tmp_path / "bad.dic"
    lex.write_text("#POS N\n바지,INV.Q\n", encoding="utf-8")
    assert main(["compile", "--lexicon", str(lex), "--graphs", str(DEMO.graphs)]) == 1


def test_annotate_failure_exit_two(tmp_path):
    g = tmp_path / "g.lgg"
    g.write_text('#GRAPH M\n#BOX 0 start\n#BOX 1 end\n#BOX 2 "<E>" OUT "<X>"\n#BOX 3 "가"\n'
                 '#EDGE 0 2\n#EDGE 2 3\n#EDGE 3 1\n', encoding="utf-8")
    src = tmp_path / "in.txt"
    src.write_text("나\n가\n", encoding="utf-8")
    out = tmp_path / "out.txt"
    rc = main(["annotate", "--graphs", str(g), "--main", "M", "--in", str(src),
               "--out", str(out)])
    assert rc == 2
    assert out.read_text(encoding="utf-8") == "나\n가\n"


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "localgram", "count", "--graphs",
                           str(DEMO.graphs)], capture_output=True, text=True)
    assert proc.returncode == 0 and "694" in proc.stdout
