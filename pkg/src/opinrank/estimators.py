"""scikit-learn style wrappers around the functional pipeline.

These give the three stages the usual ``fit``/``transform``/``predict`` surface
and ``get_params``/``set_params`` so they can be cloned, grid-searched or
dropped into a :class:`~sklearn.pipeline.Pipeline`.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from . import crf as _crf
from ._validation import check_label_sequences, check_records, check_token_sequences
from .corpus import Index, build_index
from .fuzzy import FuzzyConfig, Orientation, SentimentAssessment, assess
from .rank import Bm25Params, RankedResult, TierMode
from .resources import default_model
from .text import OpinionLexicon, OpinionUnit, opinion_units_from_text

__all__ = ["FuzzyOpinionGrader", "CRFAspectTagger", "EntityRanker"]


class FuzzyOpinionGrader(TransformerMixin, BaseEstimator):
    """Grade opinion strength in raw texts.

    ``transform`` returns one row per text: signed mean strength (negative
    opinions count negative), mean unsigned strength and number of opinion
    units. Texts without opinions get a zero row.
    """

    def __init__(self, lexicon=None, config=None):
        self.lexicon = lexicon
        self.config = config

    def fit(self, X=None, y=None):
        self.lexicon_ = self.lexicon if self.lexicon is not None else OpinionLexicon.default()
        self.config_ = self.config if self.config is not None else FuzzyConfig()
        return self

    def assess_text(self, text: str) -> list[tuple[OpinionUnit, SentimentAssessment]]:
        check_is_fitted(self, "lexicon_")
        return [(u, assess(u, self.config_)) for u in opinion_units_from_text(text, self.lexicon_)]

    def transform(self, X):
        check_is_fitted(self, "lexicon_")
        if isinstance(X, str):
            raise TypeError("X must be a sequence of texts, not a single string")
        rows = []
        for text in X:
            grades = [a for _, a in self.assess_text(text)]
            if not grades:
                rows.append((0.0, 0.0, 0.0))
                continue
            sign = [1.0 if a.orientation is Orientation.POSITIVE else -1.0 for a in grades]
            strengths = np.array([a.strength for a in grades])
            rows.append((float(np.mean(np.multiply(sign, strengths))), float(strengths.mean()), float(len(grades))))
        return np.array(rows, dtype=float).reshape(-1, 3)


class CRFAspectTagger(BaseEstimator):
    """BIO aspect tagger: ``X`` is a list of token lists, ``y`` a list of label lists."""

    def __init__(self, l2=0.1, epochs=50, learning_rate=0.1, batch_size=8, seed=0, constrained=True, lexicon=None):
        self.l2 = l2
        self.epochs = epochs
        self.learning_rate = learning_rate
        self.batch_size = batch_size
        self.seed = seed
        self.constrained = constrained
        self.lexicon = lexicon

    def fit(self, X, y):
        X = check_token_sequences(X)
        y = check_label_sequences(X, y)
        corpus = [_crf.AnnotatedSentence.from_words(xs, ys) for xs, ys in zip(X, y)]
        self.model_ = _crf.train(
            corpus,
            l2=self.l2,
            epochs=self.epochs,
            learning_rate=self.learning_rate,
            batch_size=self.batch_size,
            seed=self.seed,
            lexicon=self.lexicon,
            constrained=self.constrained,
        )
        self.objective_ = self.model_.hyperparams["final_objective"]
        return self

    def predict(self, X):
        check_is_fitted(self, "model_")
        X = check_token_sequences(X)
        return [_crf.decode(self.model_, self.model_.tag_words(xs)) for xs in X]

    def score(self, X, y):
        """Token accuracy."""
        pred = self.predict(X)
        y = [list(s) for s in y]
        total = sum(len(s) for s in y)
        hits = sum(p == g for ps, gs in zip(pred, y) for p, g in zip(ps, gs))
        return hits / total if total else 1.0

    def extract(self, text: str) -> list[_crf.Aspect]:
        check_is_fitted(self, "model_")
        return _crf.aspects_from_text(self.model_, text)


class EntityRanker(BaseEstimator):
    """Index a review corpus with ``fit`` and rank its entities for queries.

    ``X`` holds :class:`~opinrank.corpus.CorpusRecord` objects or
    ``(entity_id, review_id, text)`` triples. Without a ``model`` the tagger
    trained on the bundled annotations is used.
    """

    def __init__(
        self,
        model=None,
        k1=1.2,
        b=0.75,
        tier_mode="all",
        strength_tolerance=1,
        use_tiers=True,
        lexicon=None,
        fuzzy_config=None,
    ):
        self.model = model
        self.k1 = k1
        self.b = b
        self.tier_mode = tier_mode
        self.strength_tolerance = strength_tolerance
        self.use_tiers = use_tiers
        self.lexicon = lexicon
        self.fuzzy_config = fuzzy_config

    def fit(self, X, y=None):
        records = check_records(X)
        Bm25Params(self.k1, self.b)
        TierMode(self.tier_mode)
        model = self.model
        if isinstance(model, CRFAspectTagger):
            model = model.model_
        if model is None:
            model = default_model()
        self.index_: Index = build_index(records, model, self.fuzzy_config, self.lexicon)
        return self

    def rank(self, query) -> list[RankedResult]:
        check_is_fitted(self, "index_")
        return self.index_.search(
            query,
            Bm25Params(self.k1, self.b),
            self.tier_mode,
            self.strength_tolerance,
            self.use_tiers,
        )

    def predict(self, queries) -> list[list[str]]:
        if isinstance(queries, str):
            raise TypeError("queries must be a sequence of query strings")
        return [[r.entity_id for r in self.rank(q)] for q in queries]
