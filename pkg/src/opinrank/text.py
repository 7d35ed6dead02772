"""Tokenization, lexicon-driven part-of-speech classes and opinion-unit extraction.

The tagger is intentionally small: a word is an adjective or adverb when the
opinion lexicon says so, a negator when it belongs to a fixed closed set, a noun
when it appears in a short list of product/service nouns, and an adverb when it
is an unknown word ending in ``-ly``. Everything else is ``Other``.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping

__all__ = [
    "PosClass",
    "Polarity",
    "Token",
    "TaggedToken",
    "LexiconEntry",
    "OpinionLexicon",
    "OpinionUnit",
    "LexiconFormatError",
    "NEGATORS",
    "MODIFIER_WINDOW",
    "NEGATION_WINDOW",
    "tokenize",
    "tag",
    "tag_text",
    "extract_opinion_units",
    "opinion_units_from_text",
]

MODIFIER_WINDOW = 2
NEGATION_WINDOW = 3

NEGATORS = frozenset({"not", "no", "never", "n't"})

# Closed list used only to mark likely aspect heads as nouns.
KNOWN_NOUNS = frozenset(
    """
    battery life display screen keyboard trackpad touchpad speaker speakers
    price cost performance speed processor memory storage fan fans build
    weight design charger camera webcam sound audio hinge ports port
    room rooms staff location breakfast bed beds bathroom shower pool wifi
    service hygiene cleanliness view channels tv food restaurant lobby
    parking noise value laptop hotel mileage brakes drive engine seats
    """.split()
)

_SENTENCE_END = re.compile(r"[.!?]+")
# "isn't" -> "is", "n't" so that the clitic negator is its own token.
_WORD = re.compile(r"\w+(?=n't\b)|n't\b|\w+(?:'\w+)?", re.IGNORECASE)


class PosClass(str, enum.Enum):
    ADJECTIVE = "Adjective"
    ADVERB = "Adverb"
    NEGATOR = "Negator"
    NOUN = "Noun"
    OTHER = "Other"


class Polarity(str, enum.Enum):
    POSITIVE = "Positive"
    NEGATIVE = "Negative"


class LexiconFormatError(ValueError):
    """Raised when a lexicon file line cannot be parsed."""


@dataclass(frozen=True)
class Token:
    surface: str
    position: int
    sentence_id: int

    @property
    def lower(self) -> str:
        return self.surface.lower()


@dataclass(frozen=True)
class TaggedToken:
    token: Token
    pos_class: PosClass

    @property
    def surface(self) -> str:
        return self.token.surface

    @property
    def lower(self) -> str:
        return self.token.lower

    @property
    def position(self) -> int:
        return self.token.position

    @property
    def sentence_id(self) -> int:
        return self.token.sentence_id


@dataclass(frozen=True)
class LexiconEntry:
    degree: float
    polarity: Polarity
    pos_class: PosClass

    def __post_init__(self):
        if not 0.0 <= self.degree <= 10.0:
            raise ValueError(f"degree must lie in [0, 10], got {self.degree}")
        if self.pos_class not in (PosClass.ADJECTIVE, PosClass.ADVERB):
            raise ValueError(f"lexicon entries are adjectives or adverbs, got {self.pos_class}")


class OpinionLexicon(Mapping[str, LexiconEntry]):
    """Read-only map from lowercase lemma to :class:`LexiconEntry`.

    File format is UTF-8 TSV, one ``lemma<TAB>degree<TAB>polarity<TAB>pos_class``
    entry per line. Blank lines and lines starting with ``#`` are ignored.
    """

    def __init__(self, entries: Mapping[str, LexiconEntry] | Iterable[tuple[str, LexiconEntry]] = ()):
        items = entries.items() if isinstance(entries, Mapping) else entries
        self._entries: dict[str, LexiconEntry] = {}
        for lemma, entry in items:
            key = lemma.lower()
            if key in self._entries:
                raise ValueError(f"duplicate lexicon lemma {key!r}")
            self._entries[key] = entry

    def __getitem__(self, lemma: str) -> LexiconEntry:
        return self._entries[lemma.lower()]

    def __iter__(self):
        return iter(self._entries)

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, lemma) -> bool:
        return isinstance(lemma, str) and lemma.lower() in self._entries

    def __eq__(self, other) -> bool:
        if not isinstance(other, OpinionLexicon):
            return NotImplemented
        return self._entries == other._entries

    def __hash__(self):
        return hash(self.dumps())

    def __repr__(self) -> str:
        return f"OpinionLexicon({len(self)} entries)"

    @classmethod
    def loads(cls, text: str) -> "OpinionLexicon":
        entries = []
        seen = set()
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 4:
                raise LexiconFormatError(f"line {lineno}: expected 4 tab-separated fields, got {len(parts)}")
            lemma, degree, polarity, pos = parts
            lemma = lemma.strip().lower()
            if lemma in seen:
                raise LexiconFormatError(f"line {lineno}: duplicate lemma {lemma!r}")
            seen.add(lemma)
            try:
                entry = LexiconEntry(float(degree), Polarity(polarity.strip()), PosClass(pos.strip()))
            except ValueError as exc:
                raise LexiconFormatError(f"line {lineno}: {exc}") from None
            entries.append((lemma, entry))
        return cls(entries)

    @classmethod
    def load(cls, path: str | Path) -> "OpinionLexicon":
        return cls.loads(Path(path).read_text(encoding="utf-8"))

    @classmethod
    def default(cls) -> "OpinionLexicon":
        """Bundled lexicon, seeded with the degrees like=4, love=5, good=3,
        excellent=6, really=5, extremely=9, enjoy=8, very=5."""
        text = resources.files("opinrank").joinpath("data/lexicon.tsv").read_text(encoding="utf-8")
        return cls.loads(text)

    def dumps(self) -> str:
        lines = []
        for lemma in sorted(self._entries):
            e = self._entries[lemma]
            lines.append(f"{lemma}\t{_fmt_degree(e.degree)}\t{e.polarity.value}\t{e.pos_class.value}")
        return "".join(line + "\n" for line in lines)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.dumps(), encoding="utf-8")

    def to_records(self) -> list[list]:
        return [[k, e.degree, e.polarity.value, e.pos_class.value] for k, e in sorted(self._entries.items())]

    @classmethod
    def from_records(cls, records) -> "OpinionLexicon":
        return cls((k, LexiconEntry(float(d), Polarity(p), PosClass(c))) for k, d, p, c in records)


def _fmt_degree(degree: float) -> str:
    return str(int(degree)) if float(degree).is_integer() else repr(float(degree))


@dataclass(frozen=True)
class OpinionUnit:
    """An opinion adjective with its optional intensifying adverb and negation flag."""

    adjective: TaggedToken
    degree: float
    polarity: Polarity
    modifier: TaggedToken | None = None
    modifier_degree: float | None = None
    negated: bool = False

    @property
    def sentence_id(self) -> int:
        return self.adjective.sentence_id

    @property
    def position(self) -> int:
        return self.adjective.position

    def words(self) -> list[str]:
        out = [self.adjective.lower]
        if self.modifier is not None:
            out.insert(0, self.modifier.lower)
        return out


def tokenize(text: str) -> list[list[Token]]:
    """Split ``text`` into sentences of word tokens.

    Sentences end at ``.``, ``!`` or ``?``; punctuation is dropped and the
    original casing of every surface form is kept.
    """
    sentences: list[list[Token]] = []
    for chunk in _SENTENCE_END.split(text):
        words = _WORD.findall(chunk)
        if not words:
            continue
        sid = len(sentences)
        sentences.append([Token(w, i, sid) for i, w in enumerate(words)])
    return sentences


def _pos_of(word: str, lexicon: OpinionLexicon) -> PosClass:
    w = word.lower()
    if w in lexicon:
        return lexicon[w].pos_class
    if w in NEGATORS:
        return PosClass.NEGATOR
    if w in KNOWN_NOUNS:
        return PosClass.NOUN
    if len(w) > 3 and w.endswith("ly"):
        return PosClass.ADVERB
    return PosClass.OTHER


def tag(sentence: list[Token], lexicon: OpinionLexicon) -> list[TaggedToken]:
    return [TaggedToken(tok, _pos_of(tok.surface, lexicon)) for tok in sentence]


def tag_text(text: str, lexicon: OpinionLexicon) -> list[list[TaggedToken]]:
    return [tag(s, lexicon) for s in tokenize(text)]


def extract_opinion_units(tagged: list[TaggedToken], lexicon: OpinionLexicon) -> list[OpinionUnit]:
    """One unit per lexicon adjective, in sentence order.

    The modifier is the nearest lexicon adverb among the two preceding tokens;
    the unit is negated when a negator occurs among the three preceding tokens.
    """
    units = []
    for i, tt in enumerate(tagged):
        if tt.pos_class is not PosClass.ADJECTIVE or tt.lower not in lexicon:
            continue
        entry = lexicon[tt.lower]
        modifier = None
        for j in range(i - 1, max(-1, i - 1 - MODIFIER_WINDOW), -1):
            cand = tagged[j]
            if cand.pos_class is PosClass.ADVERB and cand.lower in lexicon:
                modifier = cand
                break
        negated = any(
            tagged[j].pos_class is PosClass.NEGATOR for j in range(max(0, i - NEGATION_WINDOW), i)
        )
        units.append(
            OpinionUnit(
                adjective=tt,
                degree=entry.degree,
                polarity=entry.polarity,
                modifier=modifier,
                modifier_degree=lexicon[modifier.lower].degree if modifier is not None else None,
                negated=negated,
            )
        )
    return units


def opinion_units_from_text(text: str, lexicon: OpinionLexicon) -> list[OpinionUnit]:
    units = []
    for sent in tag_text(text, lexicon):
        units.extend(extract_opinion_units(sent, lexicon))
    return units
