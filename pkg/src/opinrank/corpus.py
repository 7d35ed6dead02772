"""Review corpus ingestion, index construction and index persistence."""

from __future__ import annotations

import hashlib
import json
import logging
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .crf import CrfModel
from .fuzzy import FuzzyConfig
from .profile import AspectOpinion, EntityProfile, analyze_text, summarize
from .rank import Bm25Params, CorpusStats, Query, RankedResult, TierMode, parse_query, rank
from .text import OpinionLexicon, tokenize

__all__ = [
    "CorpusRecord",
    "CorpusFormatError",
    "IndexFormatError",
    "IndexVersionError",
    "CorruptIndexError",
    "BuildReport",
    "Index",
    "ingest",
    "parse_corpus",
    "format_corpus",
    "build_index",
    "save_index",
    "load_index",
    "document_terms",
    "INDEX_MAGIC",
]

log = logging.getLogger(__name__)

INDEX_MAGIC = "ORIDX1"


class CorpusFormatError(ValueError):
    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


class IndexFormatError(ValueError):
    pass


class IndexVersionError(IndexFormatError):
    pass


class CorruptIndexError(IndexFormatError):
    pass


@dataclass(frozen=True)
class CorpusRecord:
    entity_id: str
    review_id: str
    text: str


def _unescape(s: str) -> str:
    out, i = [], 0
    while i < len(s):
        ch = s[i]
        if ch == "\\" and i + 1 < len(s) and s[i + 1] in "t\\":
            out.append("\t" if s[i + 1] == "t" else "\\")
            i += 2
        else:
            out.append(ch)
            i += 1
    return "".join(out)


def _escape(s: str) -> str:
    return s.replace("\\", "\\\\").replace("\t", "\\t")


def parse_corpus(text: str, strict: bool = True, problems: list | None = None) -> list[CorpusRecord]:
    """Parse ``entity_id<TAB>review_id<TAB>text`` lines.

    In strict mode the first malformed or duplicate line raises
    :class:`CorpusFormatError`. Otherwise such lines are skipped and appended
    to ``problems`` as ``(lineno, message)``.
    """
    records: list[CorpusRecord] = []
    seen: dict[tuple[str, str], int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        if not raw.strip():
            continue
        parts = raw.split("\t")
        try:
            if len(parts) != 3:
                raise CorpusFormatError(lineno, f"expected 3 tab-separated fields, got {len(parts)}")
            eid, rid, body = parts[0].strip(), parts[1].strip(), _unescape(parts[2])
            if not eid or not rid:
                raise CorpusFormatError(lineno, "entity_id and review_id must be non-empty")
            if (eid, rid) in seen:
                raise CorpusFormatError(lineno, f"duplicate key ({eid}, {rid}), first seen on line {seen[(eid, rid)]}")
        except CorpusFormatError as exc:
            if strict:
                raise
            if problems is not None:
                problems.append((lineno, str(exc)))
            continue
        seen[(eid, rid)] = lineno
        records.append(CorpusRecord(eid, rid, body))
    return records


def ingest(path: str | Path, strict: bool = True, problems: list | None = None) -> list[CorpusRecord]:
    return parse_corpus(Path(path).read_text(encoding="utf-8"), strict=strict, problems=problems)


def format_corpus(records: Iterable[CorpusRecord]) -> str:
    return "".join(f"{r.entity_id}\t{r.review_id}\t{_escape(r.text)}\n" for r in records)


def document_terms(text: str) -> list[str]:
    return [t.surface.lower() for sent in tokenize(text) for t in sent]


@dataclass
class BuildReport:
    records: int = 0
    indexed: int = 0
    skipped: list[tuple[str, str, str]] = field(default_factory=list)  # (entity, review, reason)

    def lines(self) -> list[str]:
        out = [f"records: {self.records}", f"indexed: {self.indexed}", f"skipped: {len(self.skipped)}"]
        out += [f"  skip {e}/{r}: {why}" for e, r, why in self.skipped]
        return out


@dataclass
class Index:
    profiles: dict[str, EntityProfile]
    term_counts: dict[str, dict[str, int]]
    doc_lengths: dict[str, int]
    stats: CorpusStats
    model: CrfModel
    lexicon: OpinionLexicon
    config: FuzzyConfig
    config_digest: str = ""
    version: str = INDEX_MAGIC
    report: BuildReport | None = field(default=None, compare=False)

    @property
    def n(self) -> int:
        return self.stats.n

    @property
    def avgdl(self) -> float:
        return self.stats.avgdl

    def parse_query(self, text: str) -> Query:
        return parse_query(text, self.model, self.lexicon, self.config)

    def search(
        self,
        query: str | Query,
        params: Bm25Params = Bm25Params(),
        mode: TierMode | str = TierMode.ALL,
        strength_tolerance: int = 1,
        use_tiers: bool = True,
    ) -> list[RankedResult]:
        q = self.parse_query(query) if isinstance(query, str) else query
        return rank(
            self.profiles, self.term_counts, self.doc_lengths, self.stats, q,
            params, mode, strength_tolerance, use_tiers,
        )

    def to_dict(self) -> dict:
        return {
            "version": self.version,
            "config_digest": self.config_digest,
            "stats": {"n": self.stats.n, "avgdl": self.stats.avgdl, "df": dict(sorted(self.stats.df.items()))},
            "profiles": {k: self.profiles[k].to_dict() for k in sorted(self.profiles)},
            "term_counts": {k: dict(sorted(v.items())) for k, v in sorted(self.term_counts.items())},
            "doc_lengths": dict(sorted(self.doc_lengths.items())),
            "model": self.model.to_dict(),
            "lexicon": self.lexicon.to_records(),
            "fuzzy_config": self.config.dumps(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Index":
        stats = d["stats"]
        return cls(
            profiles={k: EntityProfile.from_dict(v) for k, v in d["profiles"].items()},
            term_counts={k: {t: int(c) for t, c in v.items()} for k, v in d["term_counts"].items()},
            doc_lengths={k: int(v) for k, v in d["doc_lengths"].items()},
            stats=CorpusStats(int(stats["n"]), float(stats["avgdl"]), {t: int(c) for t, c in stats["df"].items()}),
            model=CrfModel.from_dict(d["model"]),
            lexicon=OpinionLexicon.from_records(d["lexicon"]),
            config=FuzzyConfig.loads(d["fuzzy_config"]),
            config_digest=d["config_digest"],
            version=d["version"],
        )

    def dumps(self) -> str:
        body = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"), allow_nan=False)
        return f"{INDEX_MAGIC}\n{body}\n"


def _digest(model: CrfModel, lexicon: OpinionLexicon, config: FuzzyConfig) -> str:
    h = hashlib.sha256()
    for part in (model.dumps(), lexicon.dumps(), config.dumps()):
        h.update(part.encode("utf-8"))
        h.update(b"\0")
    return h.hexdigest()


def build_index(
    records: Sequence[CorpusRecord],
    model: CrfModel,
    config: FuzzyConfig | None = None,
    lexicon: OpinionLexicon | None = None,
) -> Index:
    """Extract, assess, pair and summarize every review, and gather BM25 term statistics.

    A review that raises during analysis is skipped and listed in ``index.report``.
    """
    config = config or FuzzyConfig()
    if lexicon is None:
        lexicon = model.lexicon if model.lexicon is not None else OpinionLexicon.default()
    report = BuildReport(records=len(records))
    opinions: dict[str, list[AspectOpinion]] = defaultdict(list)
    counts: dict[str, Counter] = {}
    reviews: Counter = Counter()
    for rec in records:
        try:
            analysis = analyze_text(rec.text, model, lexicon, config, rec.review_id)
            terms = document_terms(rec.text)
        except Exception as exc:  # noqa: BLE001 - one bad review must not sink the build
            log.warning("skipping review %s/%s: %s", rec.entity_id, rec.review_id, exc)
            report.skipped.append((rec.entity_id, rec.review_id, f"{type(exc).__name__}: {exc}"))
            continue
        opinions[rec.entity_id].extend(analysis.opinions)
        counts.setdefault(rec.entity_id, Counter()).update(terms)
        reviews[rec.entity_id] += 1
        report.indexed += 1

    entities = sorted(counts)
    profiles = {e: summarize(opinions[e], e, reviews[e], config.boundaries) for e in entities}
    term_counts = {e: dict(sorted(counts[e].items())) for e in entities}
    doc_lengths = {e: sum(counts[e].values()) for e in entities}
    df: Counter = Counter()
    for e in entities:
        df.update(counts[e].keys())
    n = len(entities)
    avgdl = sum(doc_lengths.values()) / n if n else 0.0
    stats = CorpusStats(n, avgdl, dict(sorted(df.items())))
    return Index(profiles, term_counts, doc_lengths, stats, model, lexicon, config,
                 config_digest=_digest(model, lexicon, config), report=report)


def save_index(index: Index, path: str | Path) -> None:
    Path(path).write_text(index.dumps(), encoding="utf-8")


def load_index(path: str | Path) -> Index:
    text = Path(path).read_text(encoding="utf-8")
    head, newline, body = text.partition("\n")
    if head != INDEX_MAGIC:
        if not newline and INDEX_MAGIC.startswith(head):
            raise CorruptIndexError(f"{path}: truncated index file")
        raise IndexVersionError(f"{path}: unsupported index header {head[:16]!r}, expected {INDEX_MAGIC!r}")
    try:
        data = json.loads(body)
        index = Index.from_dict(data)
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise CorruptIndexError(f"{path}: corrupt index: {exc}") from None
    if index.version != INDEX_MAGIC:
        raise IndexVersionError(f"{path}: index version {index.version!r} not supported")
    return index
