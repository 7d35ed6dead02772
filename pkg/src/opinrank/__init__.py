"""Entity ranking from review opinions.

Opinion adjectives and their intensifiers are graded into five strength levels
by Mamdani fuzzy inference, aspects are tagged with a linear-chain CRF, and
entities are ranked against an aspect query by match tier and then BM25.
"""

__version__ = "0.1.0"

from .corpus import CorpusRecord, Index, build_index, ingest, load_index, save_index
from .crf import CrfModel, decode, extract_aspects, train
from .fuzzy import FuzzyConfig, Granularity, Orientation, SentimentAssessment, assess, defuzzify, fuzzify, infer
from .profile import EntityProfile, pair, summarize
from .rank import Bm25Params, Query, RankedResult, Tier, bm25, parse_query, rank, tier
from .text import OpinionLexicon, extract_opinion_units, tag, tokenize

__all__ = [
    "CorpusRecord", "Index", "build_index", "ingest", "load_index", "save_index",
    "CrfModel", "decode", "extract_aspects", "train",
    "FuzzyConfig", "Granularity", "Orientation", "SentimentAssessment", "assess", "defuzzify", "fuzzify", "infer",
    "EntityProfile", "pair", "summarize",
    "Bm25Params", "Query", "RankedResult", "Tier", "bm25", "parse_query", "rank", "tier",
    "OpinionLexicon", "extract_opinion_units", "tag", "tokenize",
]
