"""Reference evaluator over in-memory graphs, plus a conforming-database generator.

Everything here favors obviousness over speed; it is the ground truth the
rewriter and emitters are checked against. Path expressions evaluate to sets
of (source id, target id) pairs under set semantics, so transitive closure
always terminates.
"""

from __future__ import annotations

import random
import string
from dataclasses import dataclass, field
from itertools import product

from .ast import (
    AnnConcat,
    BranchL,
    BranchR,
    Concat,
    Conj,
    Label,
    PathExpr,
    Repeat,
    Reverse,
    TransClos,
    Union,
    desugar,
)
from .query import Conjunct, UcqtQuery
from .schema import DbEdge, DbNode, GraphDB, GraphSchema

Pair = tuple[str, str]


@dataclass
class EvalStats:
    """Counts pairs materialized across all subexpression evaluations."""

    pairs: int = 0
    per_expr: list[int] = field(default_factory=list)

    def record(self, result: frozenset[Pair]) -> None:
        self.pairs += len(result)
        self.per_expr.append(len(result))


def _compose(
    left: frozenset[Pair], right: frozenset[Pair], junction: frozenset[str] | None, db: GraphDB
) -> frozenset[Pair]:
    by_src: dict[str, set[str]] = {}
    labels = db.node_label
    for src, trg in right:
        by_src.setdefault(src, set()).add(trg)
    out = set()
    for src, mid in left:
        if junction is not None and labels.get(mid) not in junction:
            continue
        for trg in by_src.get(mid, ()):
            out.add((src, trg))
    return frozenset(out)


def eval_path(
    expr: PathExpr, db: GraphDB, stats: EvalStats | None = None, naive_closure: bool = False
) -> frozenset[Pair]:
    """All node pairs connected by the expression."""
    return _eval(expr, db, stats, naive_closure, {})


def _eval(
    expr: PathExpr, db: GraphDB, stats: EvalStats | None, naive: bool, memo: dict
) -> frozenset[Pair]:
    # desugared repetitions alias their subtrees, so identical subterms are
    # evaluated once; keyed by identity (cheaper than deep-tree hashing),
    # with the expression kept alive so the id cannot be recycled
    entry = memo.get(id(expr))
    if entry is not None and entry[0] is expr:
        return entry[1]
    result = _eval_node(expr, db, stats, naive, memo)
    memo[id(expr)] = (expr, result)
    if stats is not None:
        stats.record(result)
    return result


def _eval_node(
    expr: PathExpr, db: GraphDB, stats: EvalStats | None, naive: bool, memo: dict
) -> frozenset[Pair]:
    if isinstance(expr, Label):
        return db.edge_pairs.get(expr.name, frozenset())
    if isinstance(expr, Reverse):
        return frozenset((t, s) for s, t in db.edge_pairs.get(expr.name, frozenset()))
    if isinstance(expr, Concat):
        return _compose(
            _eval(expr.left, db, stats, naive, memo),
            _eval(expr.right, db, stats, naive, memo),
            None,
            db,
        )
    if isinstance(expr, AnnConcat):
        return _compose(
            _eval(expr.left, db, stats, naive, memo),
            _eval(expr.right, db, stats, naive, memo),
            expr.labels,
            db,
        )
    if isinstance(expr, Union):
        return _eval(expr.left, db, stats, naive, memo) | _eval(expr.right, db, stats, naive, memo)
    if isinstance(expr, Conj):
        return _eval(expr.left, db, stats, naive, memo) & _eval(expr.right, db, stats, naive, memo)
    if isinstance(expr, BranchR):
        main = _eval(expr.main, db, stats, naive, memo)
        test_sources = {s for s, _ in _eval(expr.test, db, stats, naive, memo)}
        return frozenset((n, m) for n, m in main if m in test_sources)
    if isinstance(expr, BranchL):
        main = _eval(expr.main, db, stats, naive, memo)
        test_sources = {s for s, _ in _eval(expr.test, db, stats, naive, memo)}
        return frozenset((n, m) for n, m in main if n in test_sources)
    if isinstance(expr, TransClos):
        base = _eval(expr.inner, db, stats, naive, memo)
        return _closure_naive(base, db) if naive else _closure_delta(base, db)
    if isinstance(expr, Repeat):
        return _eval(desugar(expr), db, stats, naive, memo)
    raise TypeError(f"not a path expression: {expr!r}")


def _closure_delta(base: frozenset[Pair], db: GraphDB) -> frozenset[Pair]:
    # semi-naive iteration: only newly discovered pairs are extended
    closure = set(base)
    delta = set(base)
    while delta:
        delta = set(_compose(frozenset(delta), base, None, db)) - closure
        closure |= delta
    return frozenset(closure)


def _closure_naive(base: frozenset[Pair], db: GraphDB) -> frozenset[Pair]:
    # kept as a second, slower oracle for the delta implementation
    closure = frozenset(base)
    while True:
        extended = closure | _compose(closure, base, None, db)
        if extended == closure:
            return closure
        closure = extended


def eval_ucqt(query: UcqtQuery, db: GraphDB, stats: EvalStats | None = None) -> frozenset[tuple]:
    """All head-variable tuples, as the union over the query's conjuncts."""
    out: set[tuple] = set()
    for conjunct in query.disjuncts:
        out |= _eval_conjunct(query.head, conjunct, db, stats)
    return frozenset(out)


def _eval_conjunct(
    head: tuple[str, ...], conjunct: Conjunct, db: GraphDB, stats: EvalStats | None
) -> set[tuple]:
    label_map = conjunct.label_map()
    node_ids = [node.id for node in db.nodes]
    labels = db.node_label

    def allowed(var: str, node: str) -> bool:
        wanted = label_map.get(var)
        return wanted is None or labels[node] in wanted

    atom_pairs = []
    for rel in conjunct.relations:
        pairs = [
            (s, t)
            for s, t in eval_path(rel.expr, db, stats)
            if allowed(rel.src_var, s) and allowed(rel.trg_var, t)
        ]
        atom_pairs.append((rel.src_var, rel.trg_var, pairs))

    solutions: list[dict[str, str]] = [{}]
    # most-constrained-first: repeatedly pick the atom with the fewest
    # tuples compatible with the bindings made so far
    remaining = list(atom_pairs)
    while remaining:
        best_index = None
        best_filtered: list[Pair] = []
        for index, (u, v, pairs) in enumerate(remaining):
            # count against the first partial solution as a cheap estimate
            probe = solutions[0] if solutions else {}
            filtered = [
                (s, t)
                for s, t in pairs
                if probe.get(u, s) == s and probe.get(v, t) == t
            ]
            if best_index is None or len(filtered) < len(best_filtered):
                best_index, best_filtered = index, filtered
        u, v, pairs = remaining.pop(best_index)
        next_solutions = []
        for solution in solutions:
            for s, t in pairs:
                # bind one endpoint at a time so (x, e, x) only takes loops
                extended = dict(solution)
                if extended.get(u, s) != s:
                    continue
                extended[u] = s
                if extended.get(v, t) != t:
                    continue
                extended[v] = t
                next_solutions.append(extended)
        solutions = next_solutions
        if not solutions:
            return set()

    # variables constrained only by a label atom, or not at all, range over nodes
    bound = frozenset(solutions[0]) if solutions else frozenset()
    unbound = [var for var in sorted(conjunct.variables() | frozenset(head)) if var not in bound]
    candidates = [[n for n in node_ids if allowed(var, n)] for var in unbound]
    out = set()
    for solution in solutions:
        for combo in product(*candidates):
            full = dict(solution)
            full.update(zip(unbound, combo))
            out.add(tuple(full[h] for h in head))
    return out


_WORDS = ("ada", "bo", "cy", "dee", "eli", "fay", "gus", "hal", "ivy", "jo")


def _random_value(type_name: str, rng: random.Random):
    if type_name == "String":
        return rng.choice(_WORDS) + rng.choice(string.ascii_lowercase)
    if type_name == "Int":
        return rng.randrange(0, 100)
    if type_name == "Float":
        return round(rng.uniform(0.0, 100.0), 3)
    if type_name == "Bool":
        return rng.random() < 0.5
    if type_name == "Date":
        return f"20{rng.randrange(10, 30):02d}-{rng.randrange(1, 13):02d}-{rng.randrange(1, 29):02d}"
    raise ValueError(f"unknown data type {type_name!r}")


def gen_db(schema: GraphSchema, seed: int, nodes_per_label: int, edge_prob: float) -> GraphDB:
    """A random database that is consistent with the schema by construction.

    For every schema node label, ``nodes_per_label`` nodes are created with
    schema-typed random property values; for every schema edge and every
    (source instance, target instance) pair, an edge is included with
    probability ``edge_prob``. Reproducible for a fixed seed.
    """
    if nodes_per_label < 0:
        raise ValueError("nodes_per_label must be >= 0")
    if not (0.0 <= edge_prob <= 1.0):
        raise ValueError("edge_prob must be within [0, 1]")
    rng = random.Random(seed)
    nodes = []
    instances: dict[str, list[str]] = {}
    for node in sorted(schema.nodes, key=lambda n: n.label):
        ids = []
        for index in range(nodes_per_label):
            node_id = f"{node.label.lower()}_{index}"
            props = tuple(
                (key, _random_value(type_name, rng)) for key, type_name in node.properties
            )
            nodes.append(DbNode(id=node_id, label=node.label, properties=props))
            ids.append(node_id)
        instances[node.label] = ids

    node_label_by_id = {n.id: n.label for n in schema.nodes}
    edges = []
    counter = 0
    for edge in sorted(schema.edges, key=lambda e: e.id):
        src_label = node_label_by_id[edge.src]
        trg_label = node_label_by_id[edge.trg]
        for src in instances[src_label]:
            for trg in instances[trg_label]:
                if rng.random() < edge_prob:
                    edges.append(DbEdge(id=f"e{counter}", label=edge.label, src=src, trg=trg))
                    counter += 1
    return GraphDB(nodes=tuple(nodes), edges=tuple(edges))
