"""Path-expression simplification to a normal form.

Five rewrite rules run to fixpoint, innermost-first with a leftmost
tie-break. Writing `e+` for transitive closure and `main[test]` / `[test]main`
for the branch filters:

  R1  (e+)+          ->  e+
  R2  main[t+]       ->  main[t]        (a branch test is existential, so the
  R4  [t+]main       ->  [t]main         first step of a closed test suffices)
  R3  main[a/b/...]  ->  main[a[b[...]]]
  R5  [a/b/...]main  ->  [a[b[...]]]main

R3 and R5 peel composition chains head-first, so the leading factor of the
test becomes the outer branch step. They fire only when the test's top
operator is a plain composition; junction-annotated steps are left alone.
All five rules preserve the evaluated pair set on every database. A test's
own closures are dropped only at the top of the test: a `+` on the main
expression of a branch is never removed, because the main's pairs, not just
their existence, flow into the result.
"""

from __future__ import annotations

from .ast import (
    AnnConcat,
    BranchL,
    BranchR,
    Concat,
    Conj,
    Label,
    PathExpr,
    Reverse,
    TransClos,
    Union,
    has_repeat,
)


def simplify(expr: PathExpr) -> PathExpr:
    """Normal form of a repeat-free expression under rules R1-R5."""
    if has_repeat(expr):
        raise ValueError("simplify expects a desugared (repeat-free) expression")
    return _normalize(expr)


def _normalize(expr: PathExpr) -> PathExpr:
    expr = _rebuild(expr)
    step = _apply_root(expr)
    while step is not None:
        expr = _normalize(step)
        step = _apply_root(expr)
    return expr


def _rebuild(expr: PathExpr) -> PathExpr:
    if isinstance(expr, (Label, Reverse)):
        return expr
    if isinstance(expr, TransClos):
        return TransClos(_normalize(expr.inner))
    if isinstance(expr, BranchR):
        return BranchR(_normalize(expr.main), _normalize(expr.test))
    if isinstance(expr, BranchL):
        return BranchL(_normalize(expr.test), _normalize(expr.main))
    if isinstance(expr, Concat):
        return Concat(_normalize(expr.left), _normalize(expr.right))
    if isinstance(expr, AnnConcat):
        return AnnConcat(_normalize(expr.left), expr.labels, _normalize(expr.right))
    if isinstance(expr, Union):
        return Union(_normalize(expr.left), _normalize(expr.right))
    if isinstance(expr, Conj):
        return Conj(_normalize(expr.left), _normalize(expr.right))
    raise TypeError(f"not a simplifiable expression: {expr!r}")


def _concat_factors(expr: PathExpr) -> list[PathExpr]:
    if isinstance(expr, Concat):
        return _concat_factors(expr.left) + _concat_factors(expr.right)
    return [expr]


def _rebuild_concat(factors: list[PathExpr]) -> PathExpr:
    out = factors[0]
    for factor in factors[1:]:
        out = Concat(out, factor)
    return out


def _apply_root(expr: PathExpr) -> PathExpr | None:
    """One rule application at the root, or None when none matches."""
    if isinstance(expr, TransClos) and isinstance(expr.inner, TransClos):
        return expr.inner  # R1
    if isinstance(expr, BranchR):
        if isinstance(expr.test, TransClos):
            return BranchR(expr.main, expr.test.inner)  # R2
        if isinstance(expr.test, Concat):
            factors = _concat_factors(expr.test)
            nested = BranchR(factors[0], _rebuild_concat(factors[1:]))
            return BranchR(expr.main, nested)  # R3
    if isinstance(expr, BranchL):
        if isinstance(expr.test, TransClos):
            return BranchL(expr.test.inner, expr.main)  # R4
        if isinstance(expr.test, Concat):
            factors = _concat_factors(expr.test)
            nested = BranchR(factors[0], _rebuild_concat(factors[1:]))
            return BranchL(nested, expr.main)  # R5
    return None
