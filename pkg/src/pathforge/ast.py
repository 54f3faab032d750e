"""AST node types for path expressions, plus the canonical printer and desugaring.

Expressions are immutable; every operation below returns new nodes. The
concrete syntax uses `/` for composition, `|` for union, `&` for conjunction,
postfix `+` for transitive closure, `{m,n}` for bounded repetition, `-label`
for reversal of a single edge label, `main[test]` / `[test]main` for the two
branch filters, and `/{A,B}` for a composition step constrained to junction
nodes labeled A or B.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator


@dataclass(frozen=True, slots=True)
class Label:
    name: str


@dataclass(frozen=True, slots=True)
class Reverse:
    # reversal is restricted to single edge labels
    name: str


@dataclass(frozen=True, slots=True)
class Concat:
    left: "PathExpr"
    right: "PathExpr"


@dataclass(frozen=True, slots=True)
class AnnConcat:
    """Composition whose junction node must carry one of the given labels."""

    left: "PathExpr"
    labels: frozenset[str]
    right: "PathExpr"


@dataclass(frozen=True, slots=True)
class Union:
    left: "PathExpr"
    right: "PathExpr"


@dataclass(frozen=True, slots=True)
class Conj:
    left: "PathExpr"
    right: "PathExpr"


@dataclass(frozen=True, slots=True)
class BranchR:
    """`main[test]`: keep main pairs whose target has an outgoing test path."""

    main: "PathExpr"
    test: "PathExpr"


@dataclass(frozen=True, slots=True)
class BranchL:
    """`[test]main`: keep main pairs whose source has an outgoing test path."""

    test: "PathExpr"
    main: "PathExpr"


@dataclass(frozen=True, slots=True)
class TransClos:
    inner: "PathExpr"


@dataclass(frozen=True, slots=True)
class Repeat:
    """Bounded repetition `e{m,n}`, pure sugar for a union of compositions."""

    inner: "PathExpr"
    lo: int
    hi: int

    def __post_init__(self) -> None:
        if not (1 <= self.lo <= self.hi):
            raise ValueError(f"repeat bounds must satisfy 1 <= m <= n, got {{{self.lo},{self.hi}}}")


PathExpr = (
    Label | Reverse | Concat | AnnConcat | Union | Conj | BranchR | BranchL | TransClos | Repeat
)

# precedence levels, loosest first; used by the printer to decide parentheses
_PREC_UNION = 0
_PREC_CONJ = 1
_PREC_CONCAT = 2
_PREC_BRANCH = 3
_PREC_POSTFIX = 4
_PREC_ATOM = 5


def precedence(expr: PathExpr) -> int:
    if isinstance(expr, (Label, Reverse)):
        return _PREC_ATOM
    if isinstance(expr, (TransClos, Repeat)):
        return _PREC_POSTFIX
    if isinstance(expr, (BranchR, BranchL)):
        return _PREC_BRANCH
    if isinstance(expr, (Concat, AnnConcat)):
        return _PREC_CONCAT
    if isinstance(expr, Conj):
        return _PREC_CONJ
    return _PREC_UNION


def _label_set(labels: frozenset[str]) -> str:
    return "{" + ",".join(sorted(labels)) + "}"


def to_text(expr: PathExpr) -> str:
    """Canonical concrete syntax; `parse_path_expr(to_text(e)) == e` holds."""
    return _render(expr, 0)


def _render(expr: PathExpr, min_prec: int) -> str:
    text = _render_raw(expr)
    if precedence(expr) < min_prec:
        return "(" + text + ")"
    return text


def _render_raw(expr: PathExpr) -> str:
    if isinstance(expr, Label):
        return expr.name
    if isinstance(expr, Reverse):
        return "-" + expr.name
    if isinstance(expr, TransClos):
        return _render(expr.inner, _PREC_POSTFIX) + "+"
    if isinstance(expr, Repeat):
        return _render(expr.inner, _PREC_POSTFIX) + "{%d,%d}" % (expr.lo, expr.hi)
    if isinstance(expr, BranchR):
        # a main that is itself a left branch would re-parse with the wrong
        # nesting, so it always gets parentheses
        if isinstance(expr.main, BranchL):
            main = "(" + _render_raw(expr.main) + ")"
        else:
            main = _render(expr.main, _PREC_BRANCH)
        return main + "[" + _render(expr.test, 0) + "]"
    if isinstance(expr, BranchL):
        return "[" + _render(expr.test, 0) + "]" + _render(expr.main, _PREC_BRANCH)
    if isinstance(expr, Concat):
        return _render(expr.left, _PREC_CONCAT) + "/" + _render(expr.right, _PREC_BRANCH)
    if isinstance(expr, AnnConcat):
        left = _render(expr.left, _PREC_CONCAT)
        right = _render(expr.right, _PREC_BRANCH)
        return left + "/" + _label_set(expr.labels) + right
    if isinstance(expr, Conj):
        return _render(expr.left, _PREC_CONJ) + "&" + _render(expr.right, _PREC_CONCAT)
    if isinstance(expr, Union):
        return _render(expr.left, _PREC_UNION) + "|" + _render(expr.right, _PREC_CONJ)
    raise TypeError(f"not a path expression: {expr!r}")


def children(expr: PathExpr) -> tuple[PathExpr, ...]:
    if isinstance(expr, (Label, Reverse)):
        return ()
    if isinstance(expr, (TransClos, Repeat)):
        return (expr.inner,)
    if isinstance(expr, BranchR):
        return (expr.main, expr.test)
    if isinstance(expr, BranchL):
        return (expr.test, expr.main)
    return (expr.left, expr.right)


def walk(expr: PathExpr) -> Iterator[PathExpr]:
    """All subexpressions, the node itself included, in pre-order."""
    stack = [expr]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(reversed(children(node)))


def has_repeat(expr: PathExpr) -> bool:
    return any(isinstance(e, Repeat) for e in walk(expr))


def has_annotations(expr: PathExpr) -> bool:
    return any(isinstance(e, AnnConcat) for e in walk(expr))


def edge_labels(expr: PathExpr) -> frozenset[str]:
    return frozenset(e.name for e in walk(expr) if isinstance(e, (Label, Reverse)))


def desugar(expr: PathExpr) -> PathExpr:
    """Expand every bounded repetition into a union of compositions.

    e{m,n} becomes e^m | e^(m+1) | ... | e^n with left-leaning unions and
    compositions, e.g. a{2,3} -> (a/a) | (a/a/a).
    """
    if isinstance(expr, (Label, Reverse)):
        return expr
    if isinstance(expr, Repeat):
        inner = desugar(expr.inner)
        alternatives = [_power(inner, k) for k in range(expr.lo, expr.hi + 1)]
        out = alternatives[0]
        for alt in alternatives[1:]:
            out = Union(out, alt)
        return out
    if isinstance(expr, TransClos):
        return TransClos(desugar(expr.inner))
    if isinstance(expr, BranchR):
        return BranchR(desugar(expr.main), desugar(expr.test))
    if isinstance(expr, BranchL):
        return BranchL(desugar(expr.test), desugar(expr.main))
    if isinstance(expr, Concat):
        return Concat(desugar(expr.left), desugar(expr.right))
    if isinstance(expr, AnnConcat):
        return AnnConcat(desugar(expr.left), expr.labels, desugar(expr.right))
    if isinstance(expr, Union):
        return Union(desugar(expr.left), desugar(expr.right))
    if isinstance(expr, Conj):
        return Conj(desugar(expr.left), desugar(expr.right))
    raise TypeError(f"not a path expression: {expr!r}")


def _power(expr: PathExpr, k: int) -> PathExpr:
    out = expr
    for _ in range(k - 1):
        out = Concat(out, expr)
    return out


def strip_annotations(expr: PathExpr) -> PathExpr:
    """The plain expression underlying an annotated one."""
    if isinstance(expr, (Label, Reverse)):
        return expr
    if isinstance(expr, AnnConcat):
        return Concat(strip_annotations(expr.left), strip_annotations(expr.right))
    if isinstance(expr, Concat):
        return Concat(strip_annotations(expr.left), strip_annotations(expr.right))
    if isinstance(expr, Union):
        return Union(strip_annotations(expr.left), strip_annotations(expr.right))
    if isinstance(expr, Conj):
        return Conj(strip_annotations(expr.left), strip_annotations(expr.right))
    if isinstance(expr, BranchR):
        return BranchR(strip_annotations(expr.main), strip_annotations(expr.test))
    if isinstance(expr, BranchL):
        return BranchL(strip_annotations(expr.test), strip_annotations(expr.main))
    if isinstance(expr, TransClos):
        return TransClos(strip_annotations(expr.inner))
    if isinstance(expr, Repeat):
        return Repeat(strip_annotations(expr.inner), expr.lo, expr.hi)
    raise TypeError(f"not a path expression: {expr!r}")


def flatten_chain(expr: PathExpr) -> tuple[list[PathExpr], list[frozenset[str] | None]]:
    """Flatten the composition spine into factors and junction constraints.

    Returns (factors, junctions) with len(junctions) == len(factors) - 1;
    junction i sits between factor i and factor i+1 and is None when the
    step is unconstrained. Composition is associative, so the original
    grouping is irrelevant to the callers.
    """
    factors: list[PathExpr] = []
    junctions: list[frozenset[str] | None] = []

    def go(node: PathExpr) -> None:
        if isinstance(node, Concat):
            go(node.left)
            junctions.append(None)
            go(node.right)
        elif isinstance(node, AnnConcat):
            go(node.left)
            junctions.append(node.labels)
            go(node.right)
        else:
            factors.append(node)

    go(expr)
    return factors, junctions


def build_chain(factors: list[PathExpr], junctions: list[frozenset[str] | None]) -> PathExpr:
    """Inverse of flatten_chain, rebuilt left-leaning."""
    out = factors[0]
    for junction, factor in zip(junctions, factors[1:]):
        if junction is None:
            out = Concat(out, factor)
        else:
            out = AnnConcat(out, junction, factor)
    return out
