#!/usr/bin/env python3
"""Optional integration check: execute emitted SQL on in-memory SQLite.

Not part of the test suite. Generates random schemas, databases and
queries, loads the relational encoding into SQLite, runs the emitted SQL,
and compares the rows against the reference evaluator.

Usage: python3 scripts/sqlite_roundtrip.py [rounds] [seed]
"""

import random
import sqlite3
import sys

sys.path.insert(0, "tests")

from pathforge import eval_ucqt, gen_db, parse_query, rewrite, to_text
from pathforge.emit_sql import emit_sql

from randutil import random_expr, random_schema, schema_edge_alphabet


def run_sqlite(sql, db, schema):
    conn = sqlite3.connect(":memory:")
    for label in schema.edge_labels:
        conn.execute(f"CREATE TABLE {label} (Sr TEXT, Tr TEXT)")
    for label in schema.node_labels:
        conn.execute(f"CREATE TABLE {label} (Sr TEXT)")
    for edge in db.edges:
        conn.execute(f"INSERT INTO {edge.label} VALUES (?, ?)", (edge.src, edge.trg))
    for node in db.nodes:
        conn.execute(f"INSERT INTO {node.label} VALUES (?)", (node.id,))
    rows = conn.execute(sql.rstrip().rstrip(";")).fetchall()
    return frozenset(tuple(row) for row in rows)


def main() -> int:
    rounds = int(sys.argv[1]) if len(sys.argv) > 1 else 100
    seed = int(sys.argv[2]) if len(sys.argv) > 2 else 0
    rng = random.Random(seed)
    failures = 0
    for index in range(rounds):
        schema = random_schema(rng)
        alphabet = schema_edge_alphabet(schema)
        labels = sorted(schema.node_labels)
        e1 = to_text(random_expr(rng, alphabet, depth=4))
        e2 = to_text(random_expr(rng, alphabet, depth=2))
        label = rng.choice(labels)
        text = rng.choice(
            [
                f"x,y <- (x, {e1}, y)",
                f"x,y <- (x, {e1}, y) && (y, {e2}, z) && z:{{{label}}}",
                f"x,y <- (x, {e1}, y) || (x, {e2}, y)",
                f"x,y <- (x, {e1}, x) && (x, {e2}, y)",
            ]
        )
        query = parse_query(text)
        db = gen_db(schema, seed=index, nodes_per_label=3, edge_prob=0.4)
        expected = eval_ucqt(query, db)
        for variant, q in (("baseline", query), ("enriched", rewrite(query, schema).enriched)):
            sql = emit_sql(q, schema, dialect="sqlite")
            try:
                got = run_sqlite(sql, db, schema)
            except sqlite3.Error as exc:
                print(f"[{index}] {variant} SQL error: {exc}\n{text}\n{sql}")
                failures += 1
                continue
            if got != expected:
                print(f"[{index}] {variant} row mismatch for {text}")
                failures += 1
    print(f"{rounds} rounds, {failures} failures")
    return 1 if failures else 0


if __name__ == "__main__":
    raise SystemExit(main())
