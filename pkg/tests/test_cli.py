import json

import pytest

from pathforge import parse_path_expr, parse_query
from pathforge.cli import run

YAGO = "tests/data/yago_schema.json"
DB = "tests/data/yago_nodes.csv,tests/data/yago_edges.csv"


@pytest.fixture()
def query_file(tmp_path):
    def write(text):
        path = tmp_path / "q.ucqt"
        path.write_text(text)
        return str(path)

    return write


def test_simplify_command(capsys):
    assert run(["simplify", "((a+)+)+"]) == 0
    assert capsys.readouterr().out == "a+\n"


def test_simplify_json(capsys):
    assert run(["simplify", "--json", "a{1,2}"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc == {"input": "a{1,2}", "normal_form": "a|a/a"}


def test_simplify_parse_error(capsys):
    assert run(["simplify", "a//"]) == 2
    assert "error:" in capsys.readouterr().err


def test_infer_command(capsys):
    assert run(["infer", "--schema", YAGO, "livesIn/isLocatedIn+"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out == [
        "PERSON  --[ livesIn/{CITY}(isLocatedIn/{REGION}isLocatedIn) ]-->  COUNTRY",
        "PERSON  --[ livesIn/{CITY}isLocatedIn ]-->  REGION",
    ]


def test_infer_json_round_trips(capsys):
    assert run(["infer", "--schema", YAGO, "--json", "livesIn/isLocatedIn+"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert parse_path_expr(doc["expr"]) == parse_path_expr("livesIn/isLocatedIn+")
    for triple in doc["triples"]:
        parse_path_expr(triple["expr"])  # must parse back


def test_check_consistent(capsys):
    assert run(["check", "--schema", YAGO, "--db", DB]) == 0
    assert capsys.readouterr().out == "consistent\n"


def test_check_inconsistent(tmp_path, capsys):
    nodes = tmp_path / "nodes.csv"
    nodes.write_text('id,label,props\nn1,BANANA,\n')
    edges = tmp_path / "edges.csv"
    edges.write_text("src,label,trg\n")
    code = run(["check", "--schema", YAGO, "--db", f"{nodes},{edges}"])
    assert code == 3
    assert "unknown_node_label" in capsys.readouterr().out


def test_rewrite_command(query_file, capsys):
    path = query_file("x,y <- (x, livesIn/isLocatedIn+/dealsWith+, y)")
    assert run(["rewrite", "--schema", YAGO, "--query", path]) == 0
    assert capsys.readouterr().out.strip() == (
        "x,y <- (x, livesIn/isLocatedIn, _g1) && (_g1, isLocatedIn/dealsWith+, y)"
        " && _g1:{REGION}"
    )


def test_rewrite_explain_table(query_file, capsys):
    path = query_file("x,y <- (x, livesIn/isLocatedIn+/dealsWith+, y)")
    assert run(["rewrite", "--schema", YAGO, "--query", path, "--explain"]) == 0
    out = capsys.readouterr().out
    assert out.splitlines()[0].split() == ["TERM", "TRIPLES", "RULE"]
    assert "isLocatedIn+" in out and "TPlus" in out and "TConcat" in out


def test_rewrite_json_round_trips(query_file, capsys):
    path = query_file("x,y <- (x, owns|livesIn, y)")
    assert run(["rewrite", "--schema", YAGO, "--query", path, "--json"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert parse_query(doc["enriched"])
    assert doc["reverted"] == {"0.0": False}


def test_rewrite_warning_strict(query_file, capsys):
    path = query_file("x,y <- (x, owns/owns, y)")
    assert run(["rewrite", "--schema", YAGO, "--query", path]) == 0
    assert run(["rewrite", "--schema", YAGO, "--query", path, "--strict"]) == 4
    err = capsys.readouterr().err
    assert "unsatisfiable" in err


def test_eval_command(query_file, capsys):
    path = query_file("x,y <- (x, livesIn/isLocatedIn+, y)")
    assert run(["eval", "--db", DB, "--query", path]) == 0
    rows = capsys.readouterr().out.splitlines()
    assert rows == ["n2\tn5", "n2\tn7", "n3\tn5", "n3\tn7"]


def test_emit_sql_command(query_file, capsys):
    path = query_file("x,y <- (x, dealsWith+, y)")
    assert run(["emit", "--target", "sql:postgres", "--schema", YAGO, "--query", path]) == 0
    out = capsys.readouterr().out
    assert out.startswith("WITH RECURSIVE tc_1(Sr, Tr) AS (")
    assert out.endswith(";\n")


def test_emit_cypher_unsupported(query_file, capsys):
    path = query_file("x,y <- (x, owns&livesIn, y)")
    assert run(["emit", "--target", "cypher", "--schema", YAGO, "--query", path]) == 0
    captured = capsys.readouterr()
    assert "conjunction" in captured.err
    assert run(["emit", "--target", "cypher", "--schema", YAGO, "--query", path, "--strict"]) == 4


def test_emit_as_view(query_file, capsys):
    path = query_file("x,y <- (x, owns, y)")
    assert (
        run(["emit", "--target", "sql:mysql", "--schema", YAGO, "--query", path, "--as-view"]) == 0
    )
    assert capsys.readouterr().out.startswith("CREATE OR REPLACE VIEW query_result AS\n")


def test_gen_then_check_round_trip(tmp_path, capsys):
    out_dir = tmp_path / "db"
    assert (
        run(
            [
                "gen", "--schema", YAGO, "--seed", "7", "--nodes", "3",
                "--prob", "0.5", "--out", str(out_dir), "--json",
            ]
        )
        == 0
    )
    doc = json.loads(capsys.readouterr().out)
    assert doc["nodes"] == 15
    db_arg = f"{doc['nodes_csv']},{doc['edges_csv']}"
    assert run(["check", "--schema", YAGO, "--db", db_arg]) == 0


def test_gen_deterministic(tmp_path):
    for name in ("a", "b"):
        assert (
            run(
                [
                    "gen", "--schema", YAGO, "--seed", "9", "--nodes", "2",
                    "--prob", "0.3", "--out", str(tmp_path / name),
                ]
            )
            == 0
        )
    assert (tmp_path / "a" / "nodes.csv").read_text() == (tmp_path / "b" / "nodes.csv").read_text()
    assert (tmp_path / "a" / "edges.csv").read_text() == (tmp_path / "b" / "edges.csv").read_text()


def test_pipeline_command(query_file, capsys):
    path = query_file("x,y <- (x, livesIn/isLocatedIn+/dealsWith+, y)")
    code = run(
        ["pipeline", "--schema", YAGO, "--query", path, "--target", "sql:postgres", "--target", "cypher"]
    )
    assert code == 0
    out = capsys.readouterr().out
    for section in ("== derivation ==", "== baseline ==", "== enriched ==", "== sql:postgres ==", "== cypher =="):
        assert section in out


def test_config_file_limits(query_file, tmp_path, capsys):
    config = tmp_path / "pathforge.conf"
    config.write_text("disjunct_limit=1\npath_limit=9999\n")
    path = query_file("x,y <- (x, owns|livesIn, y)")
    assert run(["rewrite", "--schema", YAGO, "--query", path, "--config", str(config)]) == 0
    assert capsys.readouterr().out.strip() == "x,y <- (x, owns|livesIn, y)"
    # flags override the file
    assert (
        run(
            [
                "rewrite", "--schema", YAGO, "--query", path,
                "--config", str(config), "--disjunct-limit", "64",
            ]
        )
        == 0
    )
    assert capsys.readouterr().out.strip() == "x,y <- (x, livesIn, y) || (x, owns, y)"


def test_missing_file_is_exit_2(capsys):
    assert run(["rewrite", "--schema", YAGO, "--query", "/nonexistent.ucqt"]) == 2


def test_unknown_flag_exits_2():
    with pytest.raises(SystemExit) as exc:
        run(["simplify", "--bogus", "a"])
    assert exc.value.code == 2


def test_no_color_env(query_file, monkeypatch, capsys):
    monkeypatch.setenv("PATHFORGE_NO_COLOR", "1")
    path = query_file("x,y <- (x, owns/owns, y)")
    run(["rewrite", "--schema", YAGO, "--query", path])
    assert "\x1b[" not in capsys.readouterr().err
