import json

import pytest

from pathforge import FormatError, check_consistency, gen_db, load_db, load_schema
from pathforge.schema import DbEdge, DbNode, GraphDB, value_type


def test_yago_schema_shape(yago_schema):
    assert len(yago_schema.nodes) == 5
    assert len(yago_schema.edges) == 7
    assert ("PERSON", "owns", "PROPERTY") in yago_schema.edge_signatures
    assert ("PROPERTY", "isLocatedIn", "CITY") in yago_schema.edge_signatures
    assert ("COUNTRY", "dealsWith", "COUNTRY") in yago_schema.edge_signatures
    assert yago_schema.source_labels("isLocatedIn") == {"PROPERTY", "CITY", "REGION"}
    assert yago_schema.target_labels("isLocatedIn") == {"CITY", "REGION", "COUNTRY"}
    assert yago_schema.node_by_label["PERSON"].property_types == {"name": "String", "age": "Int"}


def test_empty_schema_is_valid():
    schema = load_schema('{"nodes": [], "edges": []}')
    assert schema.nodes == () and schema.edges == ()


def test_dangling_endpoint_rejected():
    doc = {"nodes": [{"label": "A"}], "edges": [{"label": "e", "src": "A", "trg": "B"}]}
    with pytest.raises(FormatError, match="dangling endpoint"):
        load_schema(json.dumps(doc))


def test_duplicate_node_label_rejected():
    doc = {"nodes": [{"label": "A"}, {"label": "A"}], "edges": []}
    with pytest.raises(FormatError, match="duplicate"):
        load_schema(json.dumps(doc))


def test_duplicate_edge_signature_rejected():
    doc = {
        "nodes": [{"label": "A"}],
        "edges": [
            {"label": "e", "src": "A", "trg": "A"},
            {"label": "e", "src": "A", "trg": "A"},
        ],
    }
    with pytest.raises(FormatError, match="duplicate"):
        load_schema(json.dumps(doc))


def test_shared_namespace_rejected():
    doc = {"nodes": [{"label": "A"}], "edges": [{"label": "A", "src": "A", "trg": "A"}]}
    with pytest.raises(FormatError, match="both a node and an edge"):
        load_schema(json.dumps(doc))


def test_unknown_data_type_rejected():
    doc = {"nodes": [{"label": "A", "properties": {"x": "Decimal"}}], "edges": []}
    with pytest.raises(FormatError, match="unknown data type"):
        load_schema(json.dumps(doc))


def test_db_loading(fig2_db):
    assert len(fig2_db.nodes) == 7
    assert len(fig2_db.edges) == 9
    assert fig2_db.node_label["n2"] == "PERSON"
    assert ("n2", "n1") in fig2_db.edge_pairs["owns"]


def test_db_dangling_edge_rejected():
    with pytest.raises(FormatError, match="dangling endpoint"):
        load_db("id,label,props\nn1,A,\n", "src,label,trg\nn1,e,n9\n")


def test_db_duplicate_node_id_rejected():
    with pytest.raises(FormatError, match="duplicate node id"):
        load_db("id,label,props\nn1,A,\nn1,A,\n", "src,label,trg\n")


def test_value_types():
    assert value_type("hello") == "String"
    assert value_type("2024-05-01") == "Date"
    assert value_type(True) == "Bool"
    assert value_type(7) == "Int"
    assert value_type(1.25) == "Float"


def test_fig2_consistent_with_fig1(yago_schema, fig2_db):
    report = check_consistency(fig2_db, yago_schema)
    assert report.consistent
    assert report.violations == ()


def test_wrong_edge_endpoint_flagged(yago_schema, fig2_db):
    # an owns edge into a CITY has no schema counterpart
    bad = GraphDB(nodes=fig2_db.nodes, edges=fig2_db.edges + (DbEdge("x", "owns", "n2", "n4"),))
    report = check_consistency(bad, yago_schema)
    assert not report.consistent
    assert any(v.kind == "unknown_edge" and v.element == "x" for v in report.violations)


def test_wrong_property_type_flagged(yago_schema, fig2_db):
    nodes = tuple(
        DbNode(n.id, n.label, (("age", "abc"), ("name", "John"))) if n.id == "n2" else n
        for n in fig2_db.nodes
    )
    report = check_consistency(GraphDB(nodes=nodes, edges=fig2_db.edges), yago_schema)
    assert any(
        v.kind == "property_type_mismatch" and v.element == "n2" for v in report.violations
    )


def test_unknown_label_flagged(yago_schema, fig2_db):
    nodes = fig2_db.nodes + (DbNode("n8", "BANANA", ()),)
    report = check_consistency(GraphDB(nodes=nodes, edges=fig2_db.edges), yago_schema)
    assert any(v.kind == "unknown_node_label" and v.element == "n8" for v in report.violations)


def test_gen_db_deterministic_and_consistent(yago_schema):
    first = gen_db(yago_schema, seed=42, nodes_per_label=3, edge_prob=0.5)
    second = gen_db(yago_schema, seed=42, nodes_per_label=3, edge_prob=0.5)
    assert first == second
    assert check_consistency(first, yago_schema).consistent


def test_gen_db_extremes(yago_schema):
    empty = gen_db(yago_schema, seed=1, nodes_per_label=0, edge_prob=0.5)
    assert empty.nodes == () and empty.edges == ()
    assert check_consistency(empty, yago_schema).consistent
    full = gen_db(yago_schema, seed=1, nodes_per_label=2, edge_prob=1.0)
    # every schema edge contributes a complete bipartite pair set
    assert len(full.edges) == len(yago_schema.edges) * 2 * 2
