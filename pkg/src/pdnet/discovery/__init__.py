from .query import Clause, Predicate, QueryFilter, parse_where, query_datasets
from .rwr import RwrParams, WalkGraph, rwr_scores, similar_datasets

__all__ = [
    "Clause",
    "Predicate",
    "QueryFilter",
    "RwrParams",
    "WalkGraph",
    "parse_where",
    "query_datasets",
    "rwr_scores",
    "similar_datasets",
]
