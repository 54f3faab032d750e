"""Command-line interface.

Subcommands mirror the pipeline stages: simplify, infer, rewrite, eval,
emit, gen, check, plus pipeline for a rewrite-and-emit walkthrough. Every
command accepts --json for machine-readable output. Exit codes: 0 success,
2 bad input, 3 consistency violations from check, 4 warnings under
--strict.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .ast import desugar, to_text
from .emit_cypher import UnsupportedReport, emit_cypher
from .emit_sql import DIALECTS, EmitError, emit_sql
from .evaluator import eval_ucqt, gen_db
from .inference import DEFAULT_PATH_LIMIT, DerivationRow, InferenceLog, derive, infer
from .parser import QuerySyntaxError, parse_path_expr, parse_query
from .query import UcqtQuery, query_to_text
from .rewriter import DEFAULT_DISJUNCT_LIMIT, rewrite
from .schema import FormatError, check_consistency, load_db, load_schema, save_db
from .simplify import simplify


def _color_enabled() -> bool:
    return sys.stderr.isatty() and not os.environ.get("PATHFORGE_NO_COLOR")


def _warn(message: str) -> None:
    text = f"warning: {message}"
    if _color_enabled():
        text = f"\x1b[33m{text}\x1b[0m"
    print(text, file=sys.stderr)


def _read_query(path: str) -> UcqtQuery:
    return parse_query(Path(path).read_text().strip())


def _load_db_arg(spec: str):
    parts = spec.split(",")
    if len(parts) != 2:
        raise FormatError("--db expects two comma-separated paths: nodes.csv,edges.csv")
    return load_db(Path(parts[0]), Path(parts[1]))


def _limits(args) -> tuple[int, int]:
    path_limit = DEFAULT_PATH_LIMIT
    disjunct_limit = DEFAULT_DISJUNCT_LIMIT
    config = getattr(args, "config", None)
    if config:
        for line_no, raw in enumerate(Path(config).read_text().splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise FormatError(f"{config}:{line_no}: expected key=value")
            key, _, value = line.partition("=")
            key, value = key.strip(), value.strip()
            if key == "path_limit":
                path_limit = int(value)
            elif key == "disjunct_limit":
                disjunct_limit = int(value)
            else:
                raise FormatError(f"{config}:{line_no}: unknown key {key!r}")
    if getattr(args, "path_limit", None) is not None:
        path_limit = args.path_limit
    if getattr(args, "disjunct_limit", None) is not None:
        disjunct_limit = args.disjunct_limit
    return path_limit, disjunct_limit


def _finish(args, warnings: list[str]) -> int:
    for message in warnings:
        _warn(message)
    if warnings and getattr(args, "strict", False):
        return 4
    return 0


def _cmd_simplify(args) -> int:
    expr = simplify(desugar(parse_path_expr(args.expr)))
    if args.json:
        print(json.dumps({"input": args.expr, "normal_form": to_text(expr)}))
    else:
        print(to_text(expr))
    return 0


def _triple_json(triple) -> dict:
    return {"src": triple.src, "expr": to_text(triple.expr), "trg": triple.trg}


def _cmd_infer(args) -> int:
    schema = load_schema(Path(args.schema))
    path_limit, _ = _limits(args)
    expr = simplify(desugar(parse_path_expr(args.expr)))
    log = InferenceLog()
    triples = infer(expr, schema, path_limit, log)
    if args.json:
        print(json.dumps({"expr": to_text(expr), "triples": [_triple_json(t) for t in triples]}))
    else:
        for triple in triples:
            print(f"{triple.src}  --[ {to_text(triple.expr)} ]-->  {triple.trg}")
    return _finish(args, log.warnings)


def _derivation_table(rows: list[DerivationRow]) -> str:
    cells = [
        (row.term, "; ".join(f"({t.src}, {to_text(t.expr)}, {t.trg})" for t in row.triples), row.rule)
        for row in rows
    ]
    headers = ("TERM", "TRIPLES", "RULE")
    widths = [
        max(len(headers[i]), max((len(c[i]) for c in cells), default=0)) for i in range(3)
    ]
    lines = ["  ".join(h.ljust(widths[i]) for i, h in enumerate(headers)).rstrip()]
    for cell in cells:
        lines.append("  ".join(cell[i].ljust(widths[i]) for i in range(3)).rstrip())
    return "\n".join(lines)


def _explain_rows(query: UcqtQuery, schema, path_limit: int) -> list[DerivationRow]:
    from .ast import has_annotations

    rows: list[DerivationRow] = []
    seen: set[str] = set()
    for conjunct in query.disjuncts:
        for rel in conjunct.relations:
            expr = simplify(desugar(rel.expr))
            if has_annotations(expr):
                continue  # pre-annotated atoms are passed through, not derived
            for row in derive(expr, schema, path_limit):
                if row.term not in seen:
                    seen.add(row.term)
                    rows.append(row)
    return rows


def _cmd_rewrite(args) -> int:
    schema = load_schema(Path(args.schema))
    path_limit, disjunct_limit = _limits(args)
    query = _read_query(args.query)
    outcome = rewrite(query, schema, disjunct_limit=disjunct_limit, path_limit=path_limit)
    explain = _explain_rows(query, schema, path_limit) if args.explain else None
    if args.json:
        doc = {
            "enriched": query_to_text(outcome.enriched),
            "reverted": {f"{d}.{a}": flag for (d, a), flag in sorted(outcome.reverted.items())},
            "warnings": list(outcome.warnings),
        }
        if explain is not None:
            doc["explain"] = [
                {"term": r.term, "rule": r.rule, "triples": [_triple_json(t) for t in r.triples]}
                for r in explain
            ]
        print(json.dumps(doc))
    else:
        if explain is not None:
            print(_derivation_table(explain))
            print()
        print(query_to_text(outcome.enriched))
    return _finish(args, list(outcome.warnings))


def _cmd_eval(args) -> int:
    db = _load_db_arg(args.db)
    query = _read_query(args.query)
    rows = sorted(eval_ucqt(query, db))
    if args.json:
        print(json.dumps({"rows": [list(row) for row in rows]}))
    else:
        for row in rows:
            print("\t".join(row))
    return 0


def _cmd_emit(args) -> int:
    schema = load_schema(Path(args.schema))
    query = _read_query(args.query)
    warnings: list[str] = []
    if args.target == "cypher":
        result = emit_cypher(query, schema)
        if isinstance(result, UnsupportedReport):
            if args.json:
                print(
                    json.dumps(
                        {
                            "target": args.target,
                            "unsupported": {
                                "construct": result.construct,
                                "detail": result.detail,
                            },
                        }
                    )
                )
            warnings.append(str(result))
            return _finish(args, warnings)
        text = result
    else:
        kind, _, dialect = args.target.partition(":")
        if kind != "sql":
            raise EmitError(f"unknown target {args.target!r}")
        text = emit_sql(query, schema, dialect=dialect or "postgres", as_view=args.as_view)
    if args.json:
        print(json.dumps({"target": args.target, "text": text}))
    else:
        print(text, end="")
    return _finish(args, warnings)


def _cmd_gen(args) -> int:
    schema = load_schema(Path(args.schema))
    db = gen_db(schema, seed=args.seed, nodes_per_label=args.nodes, edge_prob=args.prob)
    nodes_path, edges_path = save_db(db, args.out)
    if args.json:
        print(
            json.dumps(
                {
                    "nodes": len(db.nodes),
                    "edges": len(db.edges),
                    "nodes_csv": str(nodes_path),
                    "edges_csv": str(edges_path),
                }
            )
        )
    else:
        print(f"wrote {nodes_path} ({len(db.nodes)} nodes) and {edges_path} ({len(db.edges)} edges)")
    return 0


def _cmd_check(args) -> int:
    schema = load_schema(Path(args.schema))
    db = _load_db_arg(args.db)
    report = check_consistency(db, schema)
    if args.json:
        print(
            json.dumps(
                {
                    "consistent": report.consistent,
                    "violations": [
                        {"kind": v.kind, "element": v.element, "detail": v.detail}
                        for v in report.violations
                    ],
                }
            )
        )
    elif report.consistent:
        print("consistent")
    else:
        for violation in report.violations:
            print(f"{violation.kind}: {violation.element}: {violation.detail}")
    return 0 if report.consistent else 3


def _cmd_pipeline(args) -> int:
    schema = load_schema(Path(args.schema))
    path_limit, disjunct_limit = _limits(args)
    query = _read_query(args.query)
    outcome = rewrite(query, schema, disjunct_limit=disjunct_limit, path_limit=path_limit)
    explain = _explain_rows(query, schema, path_limit)
    emitted: dict[str, object] = {}
    for target in args.target or ["sql:postgres"]:
        if target == "cypher":
            result = emit_cypher(outcome.enriched, schema)
            if isinstance(result, UnsupportedReport):
                emitted[target] = {"construct": result.construct, "detail": result.detail}
            else:
                emitted[target] = result
        else:
            kind, _, dialect = target.partition(":")
            if kind != "sql":
                raise EmitError(f"unknown target {target!r}")
            emitted[target] = emit_sql(
                outcome.enriched, schema, dialect=dialect or "postgres", as_view=args.as_view
            )
    if args.json:
        print(
            json.dumps(
                {
                    "baseline": query_to_text(query),
                    "enriched": query_to_text(outcome.enriched),
                    "reverted": {
                        f"{d}.{a}": flag for (d, a), flag in sorted(outcome.reverted.items())
                    },
                    "warnings": list(outcome.warnings),
                    "explain": [
                        {
                            "term": r.term,
                            "rule": r.rule,
                            "triples": [_triple_json(t) for t in r.triples],
                        }
                        for r in explain
                    ],
                    "emitted": {
                        k: v if isinstance(v, str) else v for k, v in emitted.items()
                    },
                }
            )
        )
    else:
        print("== derivation ==")
        print(_derivation_table(explain))
        print()
        print("== baseline ==")
        print(query_to_text(query))
        print()
        print("== enriched ==")
        print(query_to_text(outcome.enriched))
        for target, text in emitted.items():
            print()
            print(f"== {target} ==")
            if isinstance(text, str):
                print(text, end="")
            else:
                print(f"not expressible: {text['construct']} in {text['detail']}")
    return _finish(args, list(outcome.warnings))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pathforge",
        description="Schema-aware rewriting, evaluation and emission of graph path queries.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--json", action="store_true", help="machine-readable output")
        p.add_argument("--strict", action="store_true", help="warnings raise the exit code to 4")
        p.set_defaults(func=func)
        return p

    p = add("simplify", _cmd_simplify, "print the normal form of a path expression")
    p.add_argument("expr")

    p = add("infer", _cmd_infer, "print the label triples compatible with an expression")
    p.add_argument("--schema", required=True)
    p.add_argument("--path-limit", type=int, default=None)
    p.add_argument("--config", default=None)
    p.add_argument("expr")

    p = add("rewrite", _cmd_rewrite, "schema-enrich a query")
    p.add_argument("--schema", required=True)
    p.add_argument("--query", required=True)
    p.add_argument("--explain", action="store_true", help="print the triple derivation table")
    p.add_argument("--path-limit", type=int, default=None)
    p.add_argument("--disjunct-limit", type=int, default=None)
    p.add_argument("--config", default=None)

    p = add("eval", _cmd_eval, "evaluate a query on a database")
    p.add_argument("--db", required=True, metavar="NODES,EDGES")
    p.add_argument("--query", required=True)

    p = add("emit", _cmd_emit, "translate a query to SQL or Cypher")
    p.add_argument(
        "--target",
        required=True,
        choices=[f"sql:{d}" for d in DIALECTS] + ["cypher"],
    )
    p.add_argument("--schema", required=True)
    p.add_argument("--query", required=True)
    p.add_argument("--as-view", action="store_true", help="wrap SQL in the dialect's view statement")

    p = add("gen", _cmd_gen, "generate a random schema-conforming database")
    p.add_argument("--schema", required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--nodes", type=int, required=True, help="instances per node label")
    p.add_argument("--prob", type=float, required=True, help="edge inclusion probability")
    p.add_argument("--out", required=True)

    p = add("check", _cmd_check, "check database-schema consistency")
    p.add_argument("--schema", required=True)
    p.add_argument("--db", required=True, metavar="NODES,EDGES")

    p = add("pipeline", _cmd_pipeline, "rewrite, explain and emit in one pass")
    p.add_argument("--schema", required=True)
    p.add_argument("--query", required=True)
    p.add_argument("--target", action="append", help="repeatable; sql:DIALECT or cypher")
    p.add_argument("--as-view", action="store_true")
    p.add_argument("--path-limit", type=int, default=None)
    p.add_argument("--disjunct-limit", type=int, default=None)
    p.add_argument("--config", default=None)

    return parser


def run(argv: list[str] | None = None) -> int:
    """Parse arguments and execute; returns the process exit code."""
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (QuerySyntaxError, FormatError, EmitError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    raise SystemExit(run())


if __name__ == "__main__":
    main()
