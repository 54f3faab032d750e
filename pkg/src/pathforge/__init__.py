"""Schema-aware rewriting, evaluation and emission of graph path queries."""

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
    strip_annotations,
    to_text,
)
from .evaluator import EvalStats, eval_path, eval_ucqt, gen_db
from .inference import SchemaTriple, basic_triples, derive, infer, plus_comp
from .parser import QuerySyntaxError, parse_path_expr, parse_query
from .query import Conjunct, LabelAtom, Relation, UcqtQuery, query_to_text
from .rewriter import (
    MergedTriple,
    RewriteOutcome,
    merge_triples,
    query_of,
    remove_redundant,
    rewrite,
)
from .schema import (
    ConsistencyReport,
    FormatError,
    GraphDB,
    GraphSchema,
    check_consistency,
    load_db,
    load_schema,
    save_db,
)
from .simplify import simplify

__all__ = [
    "AnnConcat",
    "BranchL",
    "BranchR",
    "Concat",
    "Conj",
    "ConsistencyReport",
    "Conjunct",
    "EvalStats",
    "FormatError",
    "GraphDB",
    "GraphSchema",
    "Label",
    "LabelAtom",
    "MergedTriple",
    "PathExpr",
    "QuerySyntaxError",
    "Relation",
    "Repeat",
    "Reverse",
    "RewriteOutcome",
    "SchemaTriple",
    "TransClos",
    "UcqtQuery",
    "Union",
    "basic_triples",
    "check_consistency",
    "derive",
    "desugar",
    "eval_path",
    "eval_ucqt",
    "gen_db",
    "infer",
    "load_db",
    "load_schema",
    "merge_triples",
    "parse_path_expr",
    "parse_query",
    "plus_comp",
    "query_of",
    "query_to_text",
    "remove_redundant",
    "rewrite",
    "save_db",
    "simplify",
    "strip_annotations",
    "to_text",
]
