"""Ranked-list evaluation: Precision@k and NDCG@k against graded qrels."""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

__all__ = [
    "EvalFormatError",
    "precision_at_k",
    "dcg_at_k",
    "ndcg_at_k",
    "parse_queries",
    "parse_qrels",
    "read_queries",
    "read_qrels",
    "MetricRow",
]


class EvalFormatError(ValueError):
    pass


def precision_at_k(ranked: Sequence[str], relevant: Mapping[str, int], k: int) -> float:
    """Fraction of the top ``k`` slots holding an entity with grade > 0.

    Missing slots (result list shorter than ``k``) count as non-relevant.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    hits = sum(1 for e in ranked[:k] if relevant.get(e, 0) > 0)
    return hits / k


def dcg_at_k(grades: Sequence[int], k: int) -> float:
    return sum((2.0 ** g - 1.0) / math.log2(i + 2) for i, g in enumerate(grades[:k]))


def ndcg_at_k(ranked: Sequence[str], relevant: Mapping[str, int], k: int) -> float:
    if k < 1:
        raise ValueError("k must be >= 1")
    ideal = dcg_at_k(sorted((g for g in relevant.values() if g > 0), reverse=True), k)
    if ideal == 0:
        return 0.0
    return dcg_at_k([relevant.get(e, 0) for e in ranked], k) / ideal


def parse_queries(text: str) -> dict[str, str]:
    """``query_id<TAB>query text`` per line."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        if not raw.strip() or raw.startswith("#"):
            continue
        qid, sep, q = raw.partition("\t")
        if not sep or not qid.strip() or not q.strip():
            raise EvalFormatError(f"queries line {lineno}: expected 'query_id<TAB>query'")
        if qid.strip() in out:
            raise EvalFormatError(f"queries line {lineno}: duplicate query id {qid.strip()!r}")
        out[qid.strip()] = q.strip()
    return out


def parse_qrels(text: str) -> dict[str, dict[str, int]]:
    """``query_id entity_id grade`` per line (tab or space separated)."""
    out: dict[str, dict[str, int]] = defaultdict(dict)
    for lineno, raw in enumerate(text.splitlines(), start=1):
        if not raw.strip() or raw.startswith("#"):
            continue
        parts = raw.split()
        if len(parts) != 3:
            raise EvalFormatError(f"qrels line {lineno}: expected 'query_id entity_id grade'")
        try:
            grade = int(parts[2])
        except ValueError:
            raise EvalFormatError(f"qrels line {lineno}: grade {parts[2]!r} is not an integer") from None
        out[parts[0]][parts[1]] = grade
    return dict(out)


def read_queries(path: str | Path) -> dict[str, str]:
    return parse_queries(Path(path).read_text(encoding="utf-8"))


def read_qrels(path: str | Path) -> dict[str, dict[str, int]]:
    return parse_qrels(Path(path).read_text(encoding="utf-8"))


@dataclass(frozen=True)
class MetricRow:
    name: str
    system: float
    baseline: float | None = None
