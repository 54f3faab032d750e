"""Schema-aware query rewriting.

Pipeline per relation atom: desugar and simplify the path expression, infer
its compatible label triples, merge triples sharing a plain expression,
drop annotations the schema makes vacuous, then either revert to the
original atom (nothing was gained) or replace it with one conjunct per
merged triple, translated so that surviving junction annotations become
label atoms on fresh variables.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterator

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
    build_chain,
    desugar,
    flatten_chain,
    has_annotations,
    strip_annotations,
    to_text,
)
from .inference import (
    DEFAULT_PATH_LIMIT,
    InferenceLog,
    InferenceOverflow,
    SchemaTriple,
    infer,
)
from .query import Conjunct, LabelAtom, Relation, UcqtQuery, conjunct_to_text, validate_query
from .schema import GraphSchema
from .simplify import simplify

DEFAULT_DISJUNCT_LIMIT = 64


@dataclass(frozen=True, slots=True)
class MergedTriple:
    """Label-set form of a group of triples with one underlying expression.

    Empty source/target sets mean "unconstrained"; they are produced by
    redundancy removal, never by merging itself.
    """

    src_set: frozenset[str]
    expr: PathExpr
    trg_set: frozenset[str]


class MergeShapeError(ValueError):
    """Two triples grouped as equal disagreed on expression structure."""


def merge_triples(triples: tuple[SchemaTriple, ...] | list[SchemaTriple]) -> tuple[MergedTriple, ...]:
    """Group by underlying plain expression and union the label sets."""
    groups: dict[PathExpr, list[SchemaTriple]] = {}
    for triple in triples:
        groups.setdefault(strip_annotations(triple.expr), []).append(triple)
    merged = []
    for group in groups.values():
        merged.append(
            MergedTriple(
                src_set=frozenset(t.src for t in group),
                expr=_merge_exprs([t.expr for t in group]),
                trg_set=frozenset(t.trg for t in group),
            )
        )
    return tuple(sorted(merged, key=lambda m: to_text(m.expr)))


def _merge_exprs(exprs: list[PathExpr]) -> PathExpr:
    first = exprs[0]
    if any(type(e) is not type(first) for e in exprs):
        raise MergeShapeError(f"triples with one plain expression differ in shape: {exprs!r}")
    if isinstance(first, (Label, Reverse)):
        if any(e != first for e in exprs):
            raise MergeShapeError(f"diverging leaves: {exprs!r}")
        return first
    if isinstance(first, AnnConcat):
        labels = frozenset().union(*(e.labels for e in exprs))
        return AnnConcat(
            _merge_exprs([e.left for e in exprs]), labels, _merge_exprs([e.right for e in exprs])
        )
    if isinstance(first, Concat):
        return Concat(_merge_exprs([e.left for e in exprs]), _merge_exprs([e.right for e in exprs]))
    if isinstance(first, Union):
        return Union(_merge_exprs([e.left for e in exprs]), _merge_exprs([e.right for e in exprs]))
    if isinstance(first, Conj):
        return Conj(_merge_exprs([e.left for e in exprs]), _merge_exprs([e.right for e in exprs]))
    if isinstance(first, BranchR):
        return BranchR(_merge_exprs([e.main for e in exprs]), _merge_exprs([e.test for e in exprs]))
    if isinstance(first, BranchL):
        return BranchL(_merge_exprs([e.test for e in exprs]), _merge_exprs([e.main for e in exprs]))
    if isinstance(first, TransClos):
        return TransClos(_merge_exprs([e.inner for e in exprs]))
    raise MergeShapeError(f"cannot merge expression kind {type(first).__name__}")


def source_label_set(expr: PathExpr, schema: GraphSchema) -> frozenset[str]:
    """Schema-permitted labels of nodes a result pair can start from."""
    if isinstance(expr, Label):
        return schema.source_labels(expr.name)
    if isinstance(expr, Reverse):
        return schema.target_labels(expr.name)
    if isinstance(expr, (Concat, AnnConcat)):
        return source_label_set(expr.left, schema)
    if isinstance(expr, Union):
        return source_label_set(expr.left, schema) | source_label_set(expr.right, schema)
    if isinstance(expr, Conj):
        return source_label_set(expr.left, schema) & source_label_set(expr.right, schema)
    if isinstance(expr, BranchR):
        return source_label_set(expr.main, schema)
    if isinstance(expr, BranchL):
        return source_label_set(expr.main, schema)
    if isinstance(expr, (TransClos, Repeat)):
        return source_label_set(expr.inner, schema)
    raise TypeError(f"not a path expression: {expr!r}")


def target_label_set(expr: PathExpr, schema: GraphSchema) -> frozenset[str]:
    """Schema-permitted labels of nodes a result pair can end at."""
    if isinstance(expr, Label):
        return schema.target_labels(expr.name)
    if isinstance(expr, Reverse):
        return schema.source_labels(expr.name)
    if isinstance(expr, (Concat, AnnConcat)):
        return target_label_set(expr.right, schema)
    if isinstance(expr, Union):
        return target_label_set(expr.left, schema) | target_label_set(expr.right, schema)
    if isinstance(expr, Conj):
        return target_label_set(expr.left, schema) & target_label_set(expr.right, schema)
    if isinstance(expr, BranchR):
        return target_label_set(expr.main, schema)
    if isinstance(expr, BranchL):
        return target_label_set(expr.main, schema)
    if isinstance(expr, (TransClos, Repeat)):
        return target_label_set(expr.inner, schema)
    raise TypeError(f"not a path expression: {expr!r}")


def remove_redundant(merged: MergedTriple, schema: GraphSchema) -> MergedTriple:
    """Drop annotations that can never filter anything on conforming data.

    A junction annotation is vacuous when it covers every label the left
    side can deliver, or every label the right side accepts; either way the
    join enforces it again. Endpoint sets are emptied on the same grounds.
    """

    def prune(expr: PathExpr) -> PathExpr:
        if isinstance(expr, AnnConcat):
            left = prune(expr.left)
            right = prune(expr.right)
            delivered = target_label_set(expr.left, schema)
            accepted = source_label_set(expr.right, schema)
            if expr.labels >= delivered or expr.labels >= accepted:
                return Concat(left, right)
            return AnnConcat(left, expr.labels, right)
        if isinstance(expr, Concat):
            return Concat(prune(expr.left), prune(expr.right))
        if isinstance(expr, Union):
            return Union(prune(expr.left), prune(expr.right))
        if isinstance(expr, Conj):
            return Conj(prune(expr.left), prune(expr.right))
        if isinstance(expr, BranchR):
            return BranchR(prune(expr.main), prune(expr.test))
        if isinstance(expr, BranchL):
            return BranchL(prune(expr.test), prune(expr.main))
        if isinstance(expr, TransClos):
            return TransClos(prune(expr.inner))
        return expr

    expr = prune(merged.expr)
    src_set = merged.src_set
    if src_set and src_set >= source_label_set(merged.expr, schema):
        src_set = frozenset()
    trg_set = merged.trg_set
    if trg_set and trg_set >= target_label_set(merged.expr, schema):
        trg_set = frozenset()
    return MergedTriple(src_set=src_set, expr=expr, trg_set=trg_set)


@dataclass
class Fragment:
    """Atoms produced by translating one annotated expression."""

    relations: list[Relation] = field(default_factory=list)
    labels: dict[str, frozenset[str]] = field(default_factory=dict)
    body_vars: list[str] = field(default_factory=list)


def query_of(
    alpha: str, beta: str, expr: PathExpr, used_names: frozenset[str] = frozenset()
) -> Fragment:
    """Translate an annotated expression into atoms between two variables.

    Surviving junction annotations split composition chains into separate
    relation atoms joined by fresh variables carrying label atoms; branch
    and conjunction structure recurses with the endpoints the operators
    dictate. An annotation-free expression stays a single relation atom.
    """
    fragment = Fragment()
    fresh = _fresh_names(used_names | {alpha, beta})
    _translate(alpha, beta, expr, fresh, fragment)
    return fragment


def _fresh_names(used: frozenset[str]) -> Iterator[str]:
    counter = 0
    while True:
        counter += 1
        name = f"_g{counter}"
        if name not in used:
            yield name


def _translate(alpha: str, beta: str, expr: PathExpr, fresh: Iterator[str], out: Fragment) -> None:
    if isinstance(expr, BranchR):
        gamma = next(fresh)
        out.body_vars.append(gamma)
        _translate(alpha, beta, expr.main, fresh, out)
        _translate(beta, gamma, expr.test, fresh, out)
        return
    if isinstance(expr, BranchL):
        gamma = next(fresh)
        out.body_vars.append(gamma)
        _translate(alpha, gamma, expr.test, fresh, out)
        _translate(alpha, beta, expr.main, fresh, out)
        return
    if isinstance(expr, Conj):
        _translate(alpha, beta, expr.left, fresh, out)
        _translate(alpha, beta, expr.right, fresh, out)
        return
    if isinstance(expr, (Concat, AnnConcat)) and has_annotations(expr):
        _translate_chain(alpha, beta, expr, fresh, out)
        return
    if has_annotations(expr):
        raise ValueError(f"annotations in an untranslatable position: {to_text(expr)}")
    out.relations.append(Relation(alpha, expr, beta))


def _translate_chain(
    alpha: str, beta: str, expr: PathExpr, fresh: Iterator[str], out: Fragment
) -> None:
    factors, junctions = flatten_chain(expr)
    # pieces are maximal annotation-free runs; annotated factors (branches
    # holding annotations) are isolated so they can recurse
    pieces: list[tuple[PathExpr | None, frozenset[str] | None]] = []
    run: list[PathExpr] = []

    def flush(junction: frozenset[str] | None) -> None:
        nonlocal run
        if run:
            pieces.append((build_chain(run, [None] * (len(run) - 1)), junction))
            run = []
        elif pieces and junction is not None:
            piece, _ = pieces[-1]
            pieces[-1] = (piece, junction)

    for index, factor in enumerate(factors):
        junction_after = junctions[index] if index < len(junctions) else None
        if has_annotations(factor):
            flush(None)
            pieces.append((factor, junction_after))
        else:
            run.append(factor)
            if junction_after is not None:
                flush(junction_after)
    flush(None)

    var = alpha
    for index, (piece, junction_after) in enumerate(pieces):
        last = index == len(pieces) - 1
        if last:
            nxt = beta
        else:
            nxt = next(fresh)
            out.body_vars.append(nxt)
        assert piece is not None
        if has_annotations(piece):
            _translate(var, nxt, piece, fresh, out)
        else:
            out.relations.append(Relation(var, piece, nxt))
        if junction_after is not None:
            if last:
                raise AssertionError("junction annotation after the last chain factor")
            existing = out.labels.get(nxt)
            out.labels[nxt] = junction_after if existing is None else existing & junction_after
        var = nxt


@dataclass(frozen=True)
class RewriteOutcome:
    """Enriched query plus, per (input disjunct index, relation index),
    whether the relation kept its original expression."""

    enriched: UcqtQuery
    reverted: dict[tuple[int, int], bool]
    warnings: tuple[str, ...]


@dataclass(frozen=True)
class _Alternative:
    relations: tuple[Relation, ...]
    labels: tuple[tuple[str, frozenset[str]], ...]


def rewrite(
    query: UcqtQuery,
    schema: GraphSchema,
    disjunct_limit: int = DEFAULT_DISJUNCT_LIMIT,
    path_limit: int = DEFAULT_PATH_LIMIT,
) -> RewriteOutcome:
    """Schema-enrich every relation atom of a query.

    Atoms whose enrichment adds nothing keep their simplified expression
    ("revert"); so do atoms whose enrichment would exceed ``disjunct_limit``
    alternatives. Atoms unsatisfiable under the schema erase their conjunct
    with a warning; when every conjunct dies the result is the canonical
    empty query.
    """
    warnings: list[str] = []
    used: set[str] = set(query.head)
    for conjunct in query.disjuncts:
        used |= conjunct.variables()
    fresh = _fresh_names(frozenset(used))

    reverted: dict[tuple[int, int], bool] = {}
    out_disjuncts: list[Conjunct] = []
    for d_index, conjunct in enumerate(query.disjuncts):
        per_atom: list[list[_Alternative]] = []
        dead = False
        for a_index, rel in enumerate(conjunct.relations):
            phi = simplify(desugar(rel.expr))
            if has_annotations(phi):
                # the atom already carries junction labels; leave it alone
                reverted[(d_index, a_index)] = True
                per_atom.append(
                    [_Alternative(relations=(Relation(rel.src_var, phi, rel.trg_var),), labels=())]
                )
                continue
            log = InferenceLog()
            key = (d_index, a_index)
            try:
                triples = infer(phi, schema, path_limit, log)
            except InferenceOverflow as exc:
                warnings.append(f"{exc}; reverting ({rel.src_var}, ..., {rel.trg_var})")
                reverted[key] = True
                per_atom.append(
                    [_Alternative(relations=(Relation(rel.src_var, phi, rel.trg_var),), labels=())]
                )
                continue
            warnings.extend(log.warnings)
            if not triples:
                warnings.append(
                    f"unsatisfiable: ({rel.src_var}, {to_text(rel.expr)}, {rel.trg_var}) "
                    "matches nothing under the schema"
                )
                reverted[key] = False
                dead = True
                continue
            merged = [remove_redundant(m, schema) for m in merge_triples(triples)]
            plain_revert = (
                len(merged) == 1
                and not merged[0].src_set
                and not merged[0].trg_set
                and merged[0].expr == phi
            )
            if plain_revert:
                reverted[key] = True
                per_atom.append(
                    [_Alternative(relations=(Relation(rel.src_var, phi, rel.trg_var),), labels=())]
                )
                continue
            if len(merged) > disjunct_limit:
                warnings.append(
                    f"{len(merged)} alternatives for ({rel.src_var}, {to_text(rel.expr)}, "
                    f"{rel.trg_var}) exceed the limit of {disjunct_limit}; reverting"
                )
                reverted[key] = True
                per_atom.append(
                    [_Alternative(relations=(Relation(rel.src_var, phi, rel.trg_var),), labels=())]
                )
                continue
            reverted[key] = False
            alternatives = []
            for m in merged:
                fragment = Fragment()
                _translate(rel.src_var, rel.trg_var, m.expr, fresh, fragment)
                labels = dict(fragment.labels)
                for var, labs in ((rel.src_var, m.src_set), (rel.trg_var, m.trg_set)):
                    if labs:
                        existing = labels.get(var)
                        labels[var] = labs if existing is None else existing & labs
                if any(not labs for labs in labels.values()):
                    # endpoint sets clashed (same variable on both ends);
                    # this alternative can never match
                    continue
                alternatives.append(
                    _Alternative(
                        relations=tuple(fragment.relations), labels=tuple(sorted(labels.items()))
                    )
                )
            per_atom.append(alternatives)
        if dead:
            continue

        generated: list[Conjunct] = []
        for combo in itertools.product(*per_atom):
            relations: list[Relation] = []
            labels: dict[str, frozenset[str]] = {a.var: a.labels for a in conjunct.labels}
            contradiction = None
            for alternative in combo:
                relations.extend(alternative.relations)
                for var, labs in alternative.labels:
                    if var in labels:
                        labels[var] = labels[var] & labs
                        if not labels[var]:
                            contradiction = var
                    else:
                        labels[var] = labs
            if contradiction is not None:
                warnings.append(
                    f"unsatisfiable: label sets for {contradiction!r} have empty intersection"
                )
                continue
            generated.append(
                Conjunct(
                    relations=tuple(relations),
                    labels=tuple(LabelAtom(v, l) for v, l in sorted(labels.items())),
                )
            )
        if not generated and conjunct.relations:
            warnings.append("conjunct dropped: no satisfiable alternative remains")
        generated.sort(key=conjunct_to_text)
        out_disjuncts.extend(generated)

    enriched = UcqtQuery(head=query.head, disjuncts=tuple(out_disjuncts))
    if out_disjuncts:
        validate_query(enriched)
    else:
        warnings.append("query is unsatisfiable under the schema; emitting the empty query")
    return RewriteOutcome(
        enriched=enriched, reverted=reverted, warnings=tuple(dict.fromkeys(warnings))
    )
