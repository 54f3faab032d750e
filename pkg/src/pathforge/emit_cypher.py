"""Cypher emission for the chain-shaped query subset.

A query renders iff every relation atom's expression is a chain of single
relationship steps: edge labels, reversed edge labels, label alternations,
and closures or bounded repetitions of those. Conjunction and branch
operators have no Cypher counterpart and yield a structured report naming
the first offending construct instead of text.
"""

from __future__ import annotations

from dataclasses import dataclass

from .ast import (
    AnnConcat,
    BranchL,
    BranchR,
    Conj,
    Label,
    PathExpr,
    Repeat,
    Reverse,
    TransClos,
    Union,
    flatten_chain,
    to_text,
)
from .emit_sql import EmitError
from .query import UcqtQuery
from .schema import GraphSchema


@dataclass(frozen=True)
class UnsupportedReport:
    construct: str
    detail: str

    def __str__(self) -> str:
        return f"not expressible in Cypher: {self.construct} in {self.detail}"


class _Unsupported(Exception):
    def __init__(self, construct: str, detail: str):
        super().__init__(construct)
        self.report = UnsupportedReport(construct, detail)


def _relationship_types(expr: PathExpr) -> tuple[str, list[str]]:
    """Direction plus type names for a single relationship step."""
    if isinstance(expr, Label):
        return "fwd", [expr.name]
    if isinstance(expr, Reverse):
        return "bwd", [expr.name]
    if isinstance(expr, Union):
        left_dir, left = _relationship_types(expr.left)
        right_dir, right = _relationship_types(expr.right)
        if left_dir != right_dir:
            raise _Unsupported("union of mixed directions", to_text(expr))
        return left_dir, left + right
    raise _Unsupported("union of composite expressions", to_text(expr))


def _step(expr: PathExpr) -> tuple[str, str]:
    """(direction, relationship text) for one chain factor."""
    if isinstance(expr, TransClos):
        direction, types = _relationship_types(expr.inner)
        return direction, "|".join(types) + "*1.."
    if isinstance(expr, Repeat):
        direction, types = _relationship_types(expr.inner)
        return direction, "|".join(types) + f"*{expr.lo}..{expr.hi}"
    if isinstance(expr, Conj):
        raise _Unsupported("conjunction", to_text(expr))
    if isinstance(expr, (BranchR, BranchL)):
        raise _Unsupported("branch", to_text(expr))
    direction, types = _relationship_types(expr)
    return direction, "|".join(types)


def _relationship(expr: PathExpr) -> str:
    direction, text = _step(expr)
    if direction == "fwd":
        return f"-[:{text}]->"
    return f"<-[:{text}]-"


def _node(name: str | None, labels: frozenset[str] | None) -> str:
    label_text = ":" + "|".join(sorted(labels)) if labels else ""
    return f"({name or ''}{label_text})"


def emit_cypher(query: UcqtQuery, schema: GraphSchema) -> str | UnsupportedReport:
    """Cypher text for a chain-shaped query, or a report saying why not."""
    _validate_labels(query, schema)
    if not query.disjuncts:
        columns = ", ".join(f"NULL AS {var}" for var in query.head)
        return f"RETURN DISTINCT {columns} LIMIT 0;\n"
    blocks = []
    try:
        for conjunct in query.disjuncts:
            blocks.append(_render_conjunct(query, conjunct))
    except _Unsupported as exc:
        return exc.report
    return "\nUNION\n".join(blocks) + "\n"


def _render_conjunct(query: UcqtQuery, conjunct) -> str:
    label_map = conjunct.label_map()
    labeled: set[str] = set()

    def node(var: str) -> str:
        if var in labeled or var not in label_map:
            return _node(var, None)
        labeled.add(var)
        return _node(var, label_map[var])

    patterns = []
    mentioned: set[str] = set()
    for rel in conjunct.relations:
        factors, junctions = flatten_chain(rel.expr)
        text = node(rel.src_var)
        for index, factor in enumerate(factors):
            text += _relationship(factor)
            if index < len(factors) - 1:
                junction = junctions[index]
                text += _node(None, junction)
            else:
                text += node(rel.trg_var)
        patterns.append(text)
        mentioned.update((rel.src_var, rel.trg_var))
    for var in sorted(label_map):
        if var not in mentioned:
            patterns.append(node(var))
            mentioned.add(var)
    for var in query.head:
        if var not in mentioned:
            patterns.append(_node(var, None))
            mentioned.add(var)
    head = ", ".join(query.head)
    return "MATCH " + ", ".join(patterns) + f"\nRETURN DISTINCT {head};"


def _validate_labels(query: UcqtQuery, schema: GraphSchema) -> None:
    from .ast import walk

    for conjunct in query.disjuncts:
        for atom in conjunct.labels:
            unknown = atom.labels - schema.node_labels
            if unknown:
                raise EmitError(f"no node label {sorted(unknown)[0]!r} in the schema")
        for rel in conjunct.relations:
            for sub in walk(rel.expr):
                if isinstance(sub, (Label, Reverse)) and sub.name not in schema.edge_labels:
                    raise EmitError(f"no edge label {sub.name!r} in the schema")
                if isinstance(sub, AnnConcat):
                    unknown = sub.labels - schema.node_labels
                    if unknown:
                        raise EmitError(f"no node label {sorted(unknown)[0]!r} in the schema")
