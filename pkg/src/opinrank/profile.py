"""Aspect/opinion pairing inside a review and per-entity aggregation."""

from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .crf import Aspect, CrfModel, decode, extract_aspects
from .fuzzy import (
    DEFAULT_BOUNDARIES,
    FuzzyConfig,
    Granularity,
    Orientation,
    SentimentAssessment,
    assess,
    granularity_of,
)
from .text import OpinionLexicon, OpinionUnit, extract_opinion_units, tag, tokenize

__all__ = [
    "Review",
    "AspectOpinion",
    "AspectSummary",
    "EntityProfile",
    "ReviewAnalysis",
    "pair",
    "summarize",
    "analyze_text",
]


@dataclass(frozen=True)
class Review:
    review_id: str
    entity_id: str
    text: str

    def __post_init__(self):
        if not self.review_id or not self.entity_id:
            raise ValueError("review_id and entity_id must be non-empty")


@dataclass(frozen=True)
class AspectOpinion:
    aspect: str
    orientation: Orientation
    strength: float
    granularity: Granularity
    review_id: str = ""
    opinion_words: tuple[str, ...] = ()


@dataclass(frozen=True)
class AspectSummary:
    orientation: Orientation
    mean_strength: float
    granularity: Granularity
    mention_count: int


@dataclass(frozen=True)
class EntityProfile:
    entity_id: str
    aspects: dict[str, AspectSummary] = field(default_factory=dict)
    review_count: int = 0

    def to_dict(self) -> dict:
        return {
            "entity_id": self.entity_id,
            "review_count": self.review_count,
            "aspects": {
                k: [v.orientation.value, v.mean_strength, v.granularity.value, v.mention_count]
                for k, v in sorted(self.aspects.items())
            },
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EntityProfile":
        return cls(
            d["entity_id"],
            {
                k: AspectSummary(Orientation(o), float(s), Granularity(g), int(c))
                for k, (o, s, g, c) in d["aspects"].items()
            },
            int(d["review_count"]),
        )


def _distance(aspect: Aspect, unit: OpinionUnit) -> int:
    p = unit.position
    if p < aspect.start:
        return aspect.start - p
    if p >= aspect.end:
        return p - (aspect.end - 1)
    return 0


def pair(
    aspects: Iterable[Aspect],
    assessed: Sequence[tuple[OpinionUnit, SentimentAssessment]],
    review_id: str = "",
) -> list[AspectOpinion]:
    """Give each aspect the nearest assessed opinion unit of its sentence.

    Distance is counted in tokens from the aspect span to the opinion adjective;
    equal distances go to the earlier unit. Aspects without a unit in their
    sentence are dropped, and a unit may serve several aspects.
    """
    by_sentence: dict[int, list[tuple[OpinionUnit, SentimentAssessment]]] = defaultdict(list)
    for unit, a in assessed:
        by_sentence[unit.sentence_id].append((unit, a))
    out = []
    for asp in aspects:
        cands = by_sentence.get(asp.sentence_id)
        if not cands:
            continue
        unit, a = min(cands, key=lambda ua: (_distance(asp, ua[0]), ua[0].position))
        out.append(AspectOpinion(asp.phrase, a.orientation, a.strength, a.granularity, review_id, tuple(unit.words())))
    return out


def summarize(
    opinions: Iterable[AspectOpinion],
    entity_id: str = "",
    review_count: int = 0,
    boundaries: Sequence[float] = DEFAULT_BOUNDARIES,
) -> EntityProfile:
    """Mean strength and majority orientation per aspect (orientation ties give Neutral)."""
    grouped: dict[str, list[AspectOpinion]] = defaultdict(list)
    for op in opinions:
        grouped[op.aspect].append(op)
    aspects = {}
    for name in sorted(grouped):
        ops = grouped[name]
        mean = sum(op.strength for op in ops) / len(ops)
        votes = Counter(op.orientation for op in ops).most_common()
        if len(votes) > 1 and votes[0][1] == votes[1][1]:
            orientation = Orientation.NEUTRAL
        else:
            orientation = votes[0][0]
        aspects[name] = AspectSummary(orientation, mean, granularity_of(mean, boundaries), len(ops))
    return EntityProfile(entity_id, aspects, review_count)


@dataclass(frozen=True)
class ReviewAnalysis:
    opinions: list[AspectOpinion]
    aspects: list[Aspect]
    units: list[OpinionUnit]


def analyze_text(
    text: str,
    model: CrfModel,
    lexicon: OpinionLexicon,
    config: FuzzyConfig,
    review_id: str = "",
) -> ReviewAnalysis:
    """Run tokenize -> tag -> extract aspects and opinion units -> assess -> pair."""
    aspects: list[Aspect] = []
    assessed: list[tuple[OpinionUnit, SentimentAssessment]] = []
    units: list[OpinionUnit] = []
    for sent in tokenize(text):
        tagged = tag(sent, lexicon)
        aspects.extend(extract_aspects(decode(model, tagged), tagged))
        for unit in extract_opinion_units(tagged, lexicon):
            units.append(unit)
            assessed.append((unit, assess(unit, config)))
    return ReviewAnalysis(pair(aspects, assessed, review_id), aspects, units)
