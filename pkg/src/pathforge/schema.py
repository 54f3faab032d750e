"""Graph schemas, graph databases, their file formats, and the consistency check.

A schema is a strict typed multigraph: at most one schema node per node
label, at most one schema edge per (source label, edge label, target label),
and node/edge label namespaces are disjoint. Databases are concrete labeled
graphs whose nodes carry JSON-scalar property values.

File formats:
  * schema: a single JSON document, see ``load_schema``;
  * database: two CSV files, ``nodes.csv`` with header ``id,label,props``
    (props is a JSON object or empty) and ``edges.csv`` with header
    ``src,label,trg``.
"""

from __future__ import annotations

import csv
import datetime
import io
import json
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

DATA_TYPES = ("String", "Int", "Float", "Bool", "Date")

PropertyValue = str | int | float | bool


class FormatError(ValueError):
    """Malformed schema or database input."""


@dataclass(frozen=True)
class SchemaNode:
    id: str
    label: str
    properties: tuple[tuple[str, str], ...] = ()

    @property
    def property_types(self) -> dict[str, str]:
        return dict(self.properties)


@dataclass(frozen=True)
class SchemaEdge:
    id: str
    label: str
    src: str
    trg: str


@dataclass(frozen=True)
class GraphSchema:
    nodes: tuple[SchemaNode, ...]
    edges: tuple[SchemaEdge, ...]

    @cached_property
    def node_by_label(self) -> dict[str, SchemaNode]:
        return {node.label: node for node in self.nodes}

    @cached_property
    def node_labels(self) -> frozenset[str]:
        return frozenset(node.label for node in self.nodes)

    @cached_property
    def edge_labels(self) -> frozenset[str]:
        return frozenset(edge.label for edge in self.edges)

    @cached_property
    def _node_label_by_id(self) -> dict[str, str]:
        return {node.id: node.label for node in self.nodes}

    @cached_property
    def edge_signatures(self) -> frozenset[tuple[str, str, str]]:
        """(source label, edge label, target label) of every schema edge."""
        by_id = self._node_label_by_id
        return frozenset((by_id[e.src], e.label, by_id[e.trg]) for e in self.edges)

    def source_labels(self, edge_label: str) -> frozenset[str]:
        return frozenset(s for s, lab, _ in self.edge_signatures if lab == edge_label)

    def target_labels(self, edge_label: str) -> frozenset[str]:
        return frozenset(t for _, lab, t in self.edge_signatures if lab == edge_label)


@dataclass(frozen=True)
class DbNode:
    id: str
    label: str
    properties: tuple[tuple[str, PropertyValue], ...] = ()


@dataclass(frozen=True)
class DbEdge:
    id: str
    label: str
    src: str
    trg: str


@dataclass(frozen=True)
class GraphDB:
    nodes: tuple[DbNode, ...]
    edges: tuple[DbEdge, ...]

    @cached_property
    def node_label(self) -> dict[str, str]:
        return {node.id: node.label for node in self.nodes}

    @cached_property
    def edge_pairs(self) -> dict[str, frozenset[tuple[str, str]]]:
        out: dict[str, set[tuple[str, str]]] = {}
        for edge in self.edges:
            out.setdefault(edge.label, set()).add((edge.src, edge.trg))
        return {label: frozenset(pairs) for label, pairs in out.items()}

    @cached_property
    def nodes_by_label(self) -> dict[str, frozenset[str]]:
        out: dict[str, set[str]] = {}
        for node in self.nodes:
            out.setdefault(node.label, set()).add(node.id)
        return {label: frozenset(ids) for label, ids in out.items()}


_ISO_DATE = "%Y-%m-%d"


def value_type(value: PropertyValue) -> str:
    """Data type of a property value; ISO-8601 date strings count as Date."""
    if isinstance(value, bool):
        return "Bool"
    if isinstance(value, int):
        return "Int"
    if isinstance(value, float):
        return "Float"
    if isinstance(value, str):
        try:
            datetime.datetime.strptime(value, _ISO_DATE)
            return "Date"
        except ValueError:
            return "String"
    raise FormatError(f"unsupported property value {value!r}")


def load_schema(source: str | Path) -> GraphSchema:
    """Load a schema from a JSON document (or a path to one).

    Expected shape::

        {"nodes": [{"label": "PERSON", "properties": {"name": "String"}}],
         "edges": [{"label": "owns", "src": "PERSON", "trg": "PROPERTY"}]}
    """
    if isinstance(source, Path):
        text = source.read_text()
    elif source.lstrip().startswith("{"):
        text = source
    else:
        text = Path(source).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"schema is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise FormatError("schema document must be a JSON object")

    nodes = []
    labels_seen = set()
    for entry in doc.get("nodes", []):
        label = entry.get("label")
        if not label:
            raise FormatError("schema node without a label")
        if label in labels_seen:
            raise FormatError(f"duplicate schema node label {label!r}")
        labels_seen.add(label)
        props = entry.get("properties", {})
        for key, type_name in props.items():
            if type_name not in DATA_TYPES:
                raise FormatError(f"unknown data type {type_name!r} for property {key!r}")
        nodes.append(SchemaNode(id=label, label=label, properties=tuple(sorted(props.items()))))

    edges = []
    signatures = set()
    for entry in doc.get("edges", []):
        label, src, trg = entry.get("label"), entry.get("src"), entry.get("trg")
        if not (label and src and trg):
            raise FormatError("schema edge needs label, src and trg")
        if label in labels_seen:
            raise FormatError(f"label {label!r} used for both a node and an edge")
        for endpoint in (src, trg):
            if endpoint not in labels_seen:
                raise FormatError(f"dangling endpoint: no schema node labeled {endpoint!r}")
        signature = (src, label, trg)
        if signature in signatures:
            raise FormatError(f"duplicate schema edge {signature!r}")
        signatures.add(signature)
        edges.append(SchemaEdge(id=f"{src}-{label}->{trg}", label=label, src=src, trg=trg))

    return GraphSchema(nodes=tuple(nodes), edges=tuple(edges))


def _read_csv(source: str | Path, expected_header: list[str], what: str) -> list[dict[str, str]]:
    if isinstance(source, Path) or "\n" not in str(source):
        text = Path(source).read_text()
    else:
        text = str(source)
    reader = csv.reader(io.StringIO(text))
    rows = list(reader)
    if not rows or rows[0] != expected_header:
        raise FormatError(f"{what} must start with header {','.join(expected_header)!r}")
    out = []
    for row in rows[1:]:
        if not row:
            continue
        if len(row) != len(expected_header):
            raise FormatError(f"{what} row has {len(row)} fields, expected {len(expected_header)}")
        out.append(dict(zip(expected_header, row)))
    return out


def load_db(nodes_source: str | Path, edges_source: str | Path) -> GraphDB:
    """Load a database from nodes.csv and edges.csv contents or paths."""
    node_rows = _read_csv(nodes_source, ["id", "label", "props"], "nodes.csv")
    edge_rows = _read_csv(edges_source, ["src", "label", "trg"], "edges.csv")

    nodes = []
    node_labels: dict[str, str] = {}
    for row in node_rows:
        node_id, label = row["id"], row["label"]
        if node_id in node_labels:
            raise FormatError(f"duplicate node id {node_id!r}")
        if not node_id or not label:
            raise FormatError("node rows need both id and label")
        props_text = row["props"].strip()
        props: dict[str, PropertyValue] = {}
        if props_text:
            try:
                props = json.loads(props_text)
            except json.JSONDecodeError as exc:
                raise FormatError(f"node {node_id!r} props is not valid JSON: {exc}") from exc
            if not isinstance(props, dict):
                raise FormatError(f"node {node_id!r} props must be a JSON object")
            for value in props.values():
                value_type(value)  # rejects nested containers
        node_labels[node_id] = label
        nodes.append(DbNode(id=node_id, label=label, properties=tuple(sorted(props.items()))))

    node_label_set = set(node_labels.values())
    edges = []
    for index, row in enumerate(edge_rows):
        src, label, trg = row["src"], row["label"], row["trg"]
        if label in node_label_set:
            raise FormatError(f"label {label!r} used for both a node and an edge")
        for endpoint in (src, trg):
            if endpoint not in node_labels:
                raise FormatError(f"dangling endpoint: edge references missing node {endpoint!r}")
        edges.append(DbEdge(id=f"e{index}", label=label, src=src, trg=trg))

    return GraphDB(nodes=tuple(nodes), edges=tuple(edges))


def save_db(db: GraphDB, out_dir: str | Path) -> tuple[Path, Path]:
    """Write nodes.csv and edges.csv under out_dir; returns the two paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    nodes_path = out / "nodes.csv"
    edges_path = out / "edges.csv"
    with nodes_path.open("w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["id", "label", "props"])
        for node in db.nodes:
            props = dict(node.properties)
            writer.writerow([node.id, node.label, json.dumps(props) if props else ""])
    with edges_path.open("w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["src", "label", "trg"])
        for edge in db.edges:
            writer.writerow([edge.src, edge.label, edge.trg])
    return nodes_path, edges_path


@dataclass(frozen=True)
class Violation:
    kind: str
    element: str
    detail: str


@dataclass(frozen=True)
class ConsistencyReport:
    violations: tuple[Violation, ...] = field(default=())

    @property
    def consistent(self) -> bool:
        return not self.violations


def check_consistency(db: GraphDB, schema: GraphSchema) -> ConsistencyReport:
    """Check that the database maps into the schema.

    Under a strict schema the mapping is determined by labels alone: a node
    maps to the unique schema node of its label, an edge to the unique schema
    edge with its (source label, edge label, target label) signature, and
    every property key/value pair must be declared with the value's type.
    Violations are collected, never raised.
    """
    violations: list[Violation] = []
    for node in db.nodes:
        schema_node = schema.node_by_label.get(node.label)
        if schema_node is None:
            violations.append(
                Violation("unknown_node_label", node.id, f"no schema node labeled {node.label!r}")
            )
            continue
        declared = schema_node.property_types
        for key, value in node.properties:
            if key not in declared:
                violations.append(
                    Violation(
                        "unknown_property",
                        node.id,
                        f"property {key!r} not declared for label {node.label!r}",
                    )
                )
            else:
                actual = value_type(value)
                if actual != declared[key]:
                    violations.append(
                        Violation(
                            "property_type_mismatch",
                            node.id,
                            f"property {key!r} has type {actual}, schema wants {declared[key]}",
                        )
                    )
    node_label = db.node_label
    for edge in db.edges:
        signature = (node_label[edge.src], edge.label, node_label[edge.trg])
        if signature not in schema.edge_signatures:
            violations.append(
                Violation(
                    "unknown_edge",
                    edge.id,
                    f"no schema edge ({signature[0]}, {edge.label}, {signature[2]})",
                )
            )
    return ConsistencyReport(violations=tuple(violations))
