"""Query parsing, tiered aspect matching and BM25 ordering.

An entity is first placed in a tier by how well its aspect profile matches every
query aspect (aspect + orientation + strength > aspect + orientation > aspect
only); BM25 over the entity's concatenated reviews then orders entities inside
each tier.
"""

from __future__ import annotations

import enum
import math
import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .crf import CrfModel
from .fuzzy import FuzzyConfig, Granularity, Orientation
from .profile import EntityProfile, analyze_text
from .text import OpinionLexicon, tokenize

__all__ = [
    "Tier",
    "TierMode",
    "QueryAspect",
    "Query",
    "Bm25Params",
    "CorpusStats",
    "RankedResult",
    "EmptyQueryError",
    "parse_query",
    "aspect_level",
    "tier",
    "bm25",
    "rank",
    "sort_key",
    "query_terms",
]


class EmptyQueryError(ValueError):
    pass


class Tier(enum.IntEnum):
    NO_MATCH = 0
    LOW = 1
    MODERATE = 2
    HIGH = 3

    @property
    def label(self) -> str:
        return {0: "NoMatch", 1: "Low", 2: "Moderate", 3: "High"}[int(self)]

    @classmethod
    def from_label(cls, label: str) -> "Tier":
        return {"NoMatch": cls.NO_MATCH, "Low": cls.LOW, "Moderate": cls.MODERATE, "High": cls.HIGH}[label]


class TierMode(str, enum.Enum):
    ALL = "all"  # every query aspect must reach the tier's level
    AVERAGE = "average"  # floor of the mean per-aspect level


@dataclass(frozen=True)
class QueryAspect:
    aspect: str
    orientation: Orientation | None  # None: no orientation preference
    granularity: Granularity | None = None

    @property
    def strength_specified(self) -> bool:
        return self.granularity is not None

    def to_token(self) -> str:
        pol = {Orientation.POSITIVE: "pos", Orientation.NEGATIVE: "neg", None: "any"}.get(self.orientation, "any")
        tok = f"{self.aspect.replace(' ', '_')}:{pol}"
        if self.granularity is not None:
            tok += f":{self.granularity.value}"
        return tok


@dataclass(frozen=True)
class Query:
    raw: str
    aspects: tuple[QueryAspect, ...]
    extra_terms: tuple[str, ...] = ()

    @property
    def terms(self) -> tuple[str, ...]:
        return query_terms(self)

    def to_structured(self) -> str:
        """Equivalent structured query string (parses back to the same aspects and terms)."""
        return " ".join([qa.to_token() for qa in self.aspects] + list(self.extra_terms))


@dataclass(frozen=True)
class Bm25Params:
    k1: float = 1.2
    b: float = 0.75

    def __post_init__(self):
        if not self.k1 > 0:
            raise ValueError(f"k1 must be > 0, got {self.k1}")
        if not 0 <= self.b <= 1:
            raise ValueError(f"b must be in [0, 1], got {self.b}")


@dataclass(frozen=True)
class CorpusStats:
    n: int
    avgdl: float
    df: Mapping[str, int] = field(default_factory=dict)


@dataclass(frozen=True)
class RankedResult:
    entity_id: str
    tier: Tier
    bm25: float
    matched_aspects: tuple[tuple[str, int], ...] = ()


_STRUCTURED = re.compile(
    r"^(?P<aspect>[\w'-]+):(?P<pol>pos|neg|any)(?::(?P<gran>very_weak|weak|moderate|strong|very_strong))?$",
    re.IGNORECASE,
)
_POLARITY = {"pos": Orientation.POSITIVE, "neg": Orientation.NEGATIVE, "any": None}


def _dedupe(items: Iterable[str]) -> tuple[str, ...]:
    return tuple(dict.fromkeys(items))


def query_terms(query: Query) -> tuple[str, ...]:
    words = [w for qa in query.aspects for w in qa.aspect.split()]
    return _dedupe(words + list(query.extra_terms))


def parse_query(
    text: str,
    model: CrfModel | None = None,
    lexicon: OpinionLexicon | None = None,
    config: FuzzyConfig | None = None,
) -> Query:
    """Parse structured ``aspect:pos|neg|any[:granularity]`` tokens or free text.

    A query containing any ``:`` is structured; its plain words become extra
    BM25 terms. Otherwise the review pipeline runs over the text: aspects come
    from the CRF, and those paired with an opinion get its orientation and
    granularity. Opinion words are kept as extra BM25 terms.
    """
    if not text or not text.strip():
        raise EmptyQueryError("query is empty")
    if ":" in text:
        aspects, extra = [], []
        for tok in text.split():
            m = _STRUCTURED.match(tok)
            if m:
                gran = m.group("gran")
                aspects.append(
                    QueryAspect(
                        m.group("aspect").replace("_", " ").lower(),
                        _POLARITY[m.group("pol").lower()],
                        Granularity(gran.lower()) if gran else None,
                    )
                )
            elif ":" in tok:
                raise EmptyQueryError(f"malformed structured query token {tok!r}")
            else:
                extra.extend(w.lower() for sent in tokenize(tok) for w in (t.surface for t in sent))
        aspects = _unique_aspects(aspects)
        if not aspects:
            raise EmptyQueryError(f"no aspect found in query {text!r}")
        return Query(text, tuple(aspects), _dedupe(extra))

    if model is None:
        raise ValueError("free-text queries need a trained CRF model")
    lexicon = lexicon if lexicon is not None else OpinionLexicon.default()
    config = config or FuzzyConfig()
    analysis = analyze_text(text, model, lexicon, config)
    paired = {op.aspect: op for op in analysis.opinions}
    aspects = []
    for asp in analysis.aspects:
        op = paired.get(asp.phrase)
        if op is None:
            aspects.append(QueryAspect(asp.phrase, None, None))
        else:
            aspects.append(QueryAspect(asp.phrase, op.orientation, op.granularity))
    aspects = _unique_aspects(aspects)
    if not aspects:
        raise EmptyQueryError(f"no aspect found in query {text!r}")
    extra = [w for unit in analysis.units for w in unit.words()]
    return Query(text, tuple(aspects), _dedupe(extra))


def _unique_aspects(aspects: list[QueryAspect]) -> list[QueryAspect]:
    seen, out = set(), []
    for qa in aspects:
        if qa.aspect not in seen:
            seen.add(qa.aspect)
            out.append(qa)
    return out


def aspect_level(profile: EntityProfile, qa: QueryAspect, strength_tolerance: int = 1) -> int:
    """3: aspect, orientation and strength match; 2: aspect and orientation; 1: aspect only; 0: absent."""
    summary = profile.aspects.get(qa.aspect)
    if summary is None:
        return 0
    if qa.orientation is not None and summary.orientation != qa.orientation:
        return 1
    if qa.granularity is None or abs(summary.granularity.rank - qa.granularity.rank) <= strength_tolerance:
        return 3
    return 2


def tier(
    profile: EntityProfile,
    query: Query,
    mode: TierMode | str = TierMode.ALL,
    strength_tolerance: int = 1,
) -> Tier:
    levels = [aspect_level(profile, qa, strength_tolerance) for qa in query.aspects]
    if not levels:
        return Tier.NO_MATCH
    if TierMode(mode) is TierMode.ALL:
        return Tier(min(levels))
    return Tier(math.floor(sum(levels) / len(levels)))


def bm25(
    doc_counts: Mapping[str, int],
    doc_len: int,
    terms: Iterable[str],
    stats: CorpusStats,
    params: Bm25Params = Bm25Params(),
) -> float:
    """Sum over distinct query terms t present in the document of

        k1 * c(t, D) / (c(t, D) + k1 * (1 - b + b * |D| / avgdl)) * ln((n + 1) / n_t)
    """
    k1, b = params.k1, params.b
    norm = k1 * (1.0 - b + b * doc_len / stats.avgdl) if stats.avgdl > 0 else k1
    score = 0.0
    for t in _dedupe(terms):
        c = doc_counts.get(t, 0)
        if c <= 0:
            continue
        n_t = stats.df.get(t, 0)
        if n_t <= 0:
            continue
        score += (k1 * c) / (c + norm) * math.log((stats.n + 1) / n_t)
    return score


def sort_key(result: RankedResult, use_tiers: bool = True):
    if use_tiers:
        return (-int(result.tier), -result.bm25, result.entity_id)
    return (-result.bm25, result.entity_id)


def rank(
    profiles: Mapping[str, EntityProfile],
    documents: Mapping[str, Mapping[str, int]],
    doc_lengths: Mapping[str, int],
    stats: CorpusStats,
    query: Query,
    params: Bm25Params = Bm25Params(),
    mode: TierMode | str = TierMode.ALL,
    strength_tolerance: int = 1,
    use_tiers: bool = True,
) -> list[RankedResult]:
    """Rank entities for ``query``.

    With tiers, NoMatch entities are dropped and the order is tier, then BM25,
    then entity id. With ``use_tiers=False`` (the BM25-only baseline) entities
    with a positive BM25 score are ordered by score, then id.
    """
    terms = query.terms
    results = []
    for eid in sorted(documents):
        profile = profiles.get(eid) or EntityProfile(eid)
        levels = tuple((qa.aspect, aspect_level(profile, qa, strength_tolerance)) for qa in query.aspects)
        t = tier(profile, query, mode, strength_tolerance)
        score = bm25(documents[eid], doc_lengths[eid], terms, stats, params)
        if use_tiers and t is Tier.NO_MATCH:
            continue
        if not use_tiers and score <= 0:
            continue
        results.append(RankedResult(eid, t, score, levels))
    results.sort(key=lambda r: sort_key(r, use_tiers))
    return results
