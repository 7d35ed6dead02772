"""Linear-chain CRF for BIO aspect tagging.

Scores are the sum of per-token emission weights (one row per indicator
feature, one column per label) and label-to-label transition weights. When the
model is ``constrained`` the transitions O -> I-ASPECT and start -> I-ASPECT are
fixed at -inf, so both the partition function and Viterbi only ever see
BIO-valid sequences.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy import sparse

from .text import OpinionLexicon, TaggedToken, Token, tag, tokenize

__all__ = [
    "LABELS",
    "O",
    "B",
    "I",
    "AnnotatedSentence",
    "Aspect",
    "CrfModel",
    "CrfFormatError",
    "TrainingDivergenceError",
    "featurize",
    "sentence_features",
    "emission_scores",
    "transition_matrix",
    "sequence_score",
    "forward_log_partition",
    "marginals",
    "objective_and_gradient",
    "train",
    "decode",
    "extract_aspects",
    "aspects_from_text",
    "is_bio_valid",
    "read_conll",
    "parse_conll",
    "MAGIC",
]

MAGIC = "ORCRF1"

# O first: with equal scores the decoder prefers O.
LABELS = ("O", "B-ASPECT", "I-ASPECT")
O, B, I = range(3)
_LABEL_ID = {lab: i for i, lab in enumerate(LABELS)}

WINDOW = 2
_NEG_INF = -math.inf


def logsumexp(a: np.ndarray, axis=None) -> np.ndarray:
    m = np.max(a, axis=axis, keepdims=True)
    m = np.where(np.isfinite(m), m, 0.0)
    with np.errstate(divide="ignore"):
        out = np.log(np.sum(np.exp(a - m), axis=axis, keepdims=True)) + m
    return np.squeeze(out, axis=axis) if axis is not None else out.reshape(())


class CrfFormatError(ValueError):
    """Malformed annotation or model file."""


class TrainingDivergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class AnnotatedSentence:
    tokens: tuple[Token, ...]
    labels: tuple[str, ...]

    def __post_init__(self):
        if len(self.tokens) != len(self.labels):
            raise ValueError("tokens and labels differ in length")
        if not is_bio_valid(self.labels):
            raise ValueError(f"label sequence is not BIO-valid: {self.labels}")

    @classmethod
    def from_words(cls, words: Sequence[str], labels: Sequence[str], sentence_id: int = 0):
        return cls(tuple(Token(w, i, sentence_id) for i, w in enumerate(words)), tuple(labels))


@dataclass(frozen=True)
class Aspect:
    phrase: str
    sentence_id: int
    start: int
    end: int  # exclusive

    @property
    def span(self) -> tuple[int, int]:
        return (self.start, self.end)


def is_bio_valid(labels: Sequence[str]) -> bool:
    prev = "O"
    for lab in labels:
        if lab not in _LABEL_ID:
            return False
        if lab == "I-ASPECT" and prev == "O":
            return False
        prev = lab
    return True


# -- features ---------------------------------------------------------------

def _token_features(tt: TaggedToken, prefix: str) -> list[str]:
    w = tt.lower
    feats = [f"{prefix}word={w}", f"{prefix}pos={tt.pos_class.value}"]
    for k in (1, 2, 3):
        if len(w) >= k:
            feats.append(f"{prefix}prefix{k}={w[:k]}")
            feats.append(f"{prefix}suffix{k}={w[-k:]}")
    return feats


def featurize(sentence: Sequence[TaggedToken], position: int) -> list[str]:
    """Indicator feature names for the token at ``position``.

    Covers word identity, POS class and 1-3 character affixes for the focus
    token and for each neighbour within two positions; neighbours past the
    sentence edge emit a single sentinel feature.
    """
    n = len(sentence)
    if not 0 <= position < n:
        raise IndexError(f"position {position} out of range for sentence of length {n}")
    feats = ["bias"] + _token_features(sentence[position], "")
    for off in range(-WINDOW, WINDOW + 1):
        if off == 0:
            continue
        j = position + off
        tag_ = f"{off:+d}:"
        if j < 0:
            feats.append(f"{tag_}<BOS>")
        elif j >= n:
            feats.append(f"{tag_}<EOS>")
        else:
            feats.extend(_token_features(sentence[j], tag_))
    return feats


def sentence_features(sentence: Sequence[TaggedToken]) -> list[list[str]]:
    return [featurize(sentence, i) for i in range(len(sentence))]


# -- model -------------------------------------------------------------------

@dataclass
class CrfModel:
    features: list[str]
    emission: np.ndarray  # (n_features, n_labels)
    transition: np.ndarray  # (n_labels, n_labels), row = previous label
    labels: tuple[str, ...] = LABELS
    constrained: bool = True
    hyperparams: dict = field(default_factory=dict)
    lexicon: OpinionLexicon | None = None

    def __post_init__(self):
        self.emission = np.asarray(self.emission, dtype=float).reshape(len(self.features), len(self.labels))
        self.transition = np.asarray(self.transition, dtype=float).reshape(len(self.labels), len(self.labels))
        self._index = {f: i for i, f in enumerate(self.features)}
        if len(self._index) != len(self.features):
            raise ValueError("duplicate feature names")

    @classmethod
    def zeros(cls, features: Iterable[str], **kw) -> "CrfModel":
        feats = list(dict.fromkeys(features))
        return cls(feats, np.zeros((len(feats), len(LABELS))), np.zeros((len(LABELS), len(LABELS))), **kw)

    @property
    def n_params(self) -> int:
        return self.emission.size + self.transition.size

    def feature_ids(self, names: Iterable[str]) -> np.ndarray:
        return np.array([self._index[f] for f in names if f in self._index], dtype=np.int64)

    def get_flat(self) -> np.ndarray:
        return np.concatenate([self.emission.ravel(), self.transition.ravel()])

    def set_flat(self, flat: np.ndarray) -> None:
        k = self.emission.size
        self.emission = np.array(flat[:k], dtype=float).reshape(self.emission.shape)
        self.transition = np.array(flat[k:], dtype=float).reshape(self.transition.shape)

    def tag_words(self, words: Sequence[str] | Sequence[Token]) -> list[TaggedToken]:
        lex = self.lexicon if self.lexicon is not None else OpinionLexicon.default()
        toks = [w if isinstance(w, Token) else Token(w, i, 0) for i, w in enumerate(words)]
        return tag(toks, lex)

    # -- persistence: magic line, then one JSON document ------------------
    def to_dict(self) -> dict:
        return {
            "labels": list(self.labels),
            "constrained": self.constrained,
            "hyperparams": self.hyperparams,
            "features": self.features,
            "emission": self.emission.tolist(),
            "transition": self.transition.tolist(),
            "lexicon": self.lexicon.to_records() if self.lexicon is not None else None,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CrfModel":
        if tuple(d["labels"]) != LABELS:
            raise CrfFormatError(f"unsupported label alphabet {d['labels']}")
        return cls(
            features=list(d["features"]),
            emission=np.array(d["emission"], dtype=float).reshape(len(d["features"]), len(LABELS)),
            transition=np.array(d["transition"], dtype=float),
            constrained=bool(d["constrained"]),
            hyperparams=dict(d["hyperparams"]),
            lexicon=OpinionLexicon.from_records(d["lexicon"]) if d.get("lexicon") is not None else None,
        )

    def dumps(self) -> str:
        body = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"), allow_nan=False)
        return f"{MAGIC}\n{body}\n"

    @classmethod
    def loads(cls, text: str) -> "CrfModel":
        head, _, body = text.partition("\n")
        if head != MAGIC:
            raise CrfFormatError(f"not a model file (expected header {MAGIC!r}, got {head[:16]!r})")
        try:
            return cls.from_dict(json.loads(body))
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise CrfFormatError(f"corrupt model file: {exc}") from None

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.dumps(), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "CrfModel":
        return cls.loads(Path(path).read_text(encoding="utf-8"))

    def __eq__(self, other) -> bool:
        if not isinstance(other, CrfModel):
            return NotImplemented
        return self.dumps() == other.dumps()


def transition_matrix(model: CrfModel) -> tuple[np.ndarray, np.ndarray]:
    """Effective (start, transition) scores including the BIO constraint."""
    start = np.zeros(len(LABELS))
    trans = model.transition.copy()
    if model.constrained:
        start[I] = _NEG_INF
        trans[O, I] = _NEG_INF
    return start, trans


def emission_scores(model: CrfModel, sentence: Sequence[TaggedToken] | list[list[str]]) -> np.ndarray:
    """(n_tokens, n_labels) emission scores; accepts tagged tokens or precomputed feature lists."""
    feats = sentence if sentence and isinstance(sentence[0], list) else sentence_features(sentence)
    return np.array([model.emission[model.feature_ids(f)].sum(axis=0) for f in feats]).reshape(-1, len(LABELS))


def sequence_score(model: CrfModel, emissions: np.ndarray, labels: Sequence[int]) -> float:
    start, trans = transition_matrix(model)
    s = start[labels[0]] + emissions[0, labels[0]]
    for t in range(1, len(labels)):
        s += trans[labels[t - 1], labels[t]] + emissions[t, labels[t]]
    return float(s)


def _forward(emissions, start, trans):
    n = len(emissions)
    alpha = np.empty_like(emissions)
    alpha[0] = start + emissions[0]
    for t in range(1, n):
        alpha[t] = logsumexp(alpha[t - 1][:, None] + trans, axis=0) + emissions[t]
    return alpha


def _backward(emissions, trans):
    n = len(emissions)
    beta = np.zeros_like(emissions)
    for t in range(n - 2, -1, -1):
        beta[t] = logsumexp(trans + (emissions[t + 1] + beta[t + 1])[None, :], axis=1)
    return beta


def forward_log_partition(model: CrfModel, sentence) -> float:
    """log Z(x), summed in log space over every label sequence the model allows."""
    emissions = sentence if isinstance(sentence, np.ndarray) else emission_scores(model, sentence)
    if len(emissions) == 0:
        raise ValueError("cannot compute the partition function of an empty sentence")
    start, trans = transition_matrix(model)
    return float(logsumexp(_forward(emissions, start, trans)[-1]))


def marginals(model: CrfModel, emissions: np.ndarray):
    """Return (log Z, node marginals (n, L), edge marginals (n-1, L, L))."""
    start, trans = transition_matrix(model)
    alpha = _forward(emissions, start, trans)
    beta = _backward(emissions, trans)
    log_z = float(logsumexp(alpha[-1]))
    node = np.exp(alpha + beta - log_z)
    edge = np.exp(
        alpha[:-1, :, None] + trans[None, :, :] + (emissions[1:] + beta[1:])[:, None, :] - log_z
    )
    return log_z, node, edge


@dataclass
class _Prepared:
    x: sparse.csr_matrix  # (n_tokens, n_features) binary design matrix
    gold: np.ndarray


def _design(model: CrfModel, feats: list[list[str]]) -> sparse.csr_matrix:
    rows, cols = [], []
    for t, names in enumerate(feats):
        ids = np.unique(model.feature_ids(names))
        rows.append(np.full(len(ids), t))
        cols.append(ids)
    r = np.concatenate(rows) if rows else np.zeros(0, dtype=np.int64)
    c = np.concatenate(cols) if cols else np.zeros(0, dtype=np.int64)
    return sparse.csr_matrix((np.ones(len(r)), (r, c)), shape=(len(feats), len(model.features)))


def _prepare(model: CrfModel, corpus_feats, corpus_labels) -> list[_Prepared]:
    return [
        _Prepared(_design(model, feats), np.array([_LABEL_ID[l] for l in labels]))
        for feats, labels in zip(corpus_feats, corpus_labels)
    ]


def _loglik_grad(model: CrfModel, batch: Iterable[_Prepared]):
    g_em = np.zeros_like(model.emission)
    g_tr = np.zeros_like(model.transition)
    ll = 0.0
    for item in batch:
        em = np.asarray(item.x @ model.emission)
        log_z, node, edge = marginals(model, em)
        y = item.gold
        ll += sequence_score(model, em, y) - log_z
        obs = np.zeros_like(node)
        obs[np.arange(len(y)), y] = 1.0
        g_em += np.asarray(item.x.T @ (obs - node))
        g_tr -= edge.sum(axis=0)
        np.add.at(g_tr, (y[:-1], y[1:]), 1.0)
    return ll, g_em, g_tr


def objective_and_gradient(model: CrfModel, corpus: Sequence[AnnotatedSentence], l2: float):
    """L2-penalised conditional log-likelihood and its gradient as a flat vector."""
    prepared = _prepare_corpus(model, corpus)
    ll, g_em, g_tr = _loglik_grad(model, prepared)
    w = model.get_flat()
    obj = ll - 0.5 * l2 * float(w @ w)
    grad = np.concatenate([g_em.ravel(), g_tr.ravel()]) - l2 * w
    return obj, grad


def _prepare_corpus(model: CrfModel, corpus: Sequence[AnnotatedSentence]) -> list[_Prepared]:
    feats = [sentence_features(model.tag_words(s.tokens)) for s in corpus]
    return _prepare(model, feats, [s.labels for s in corpus])


def train(
    corpus: Sequence[AnnotatedSentence],
    l2: float = 0.1,
    epochs: int = 50,
    learning_rate: float = 0.1,
    batch_size: int = 8,
    seed: int = 0,
    lexicon: OpinionLexicon | None = None,
    constrained: bool = True,
) -> CrfModel:
    """Fit by mini-batch gradient ascent on the L2-penalised log-likelihood.

    Each step moves along the batch-mean gradient of ``loglik - l2/2 * |w|^2``
    scaled to a per-sentence objective. The feature dictionary is every
    feature observed in ``corpus``. Batch order is shuffled with ``seed``.
    """
    if not corpus:
        raise ValueError("cannot train on an empty corpus")
    if l2 < 0 or learning_rate <= 0 or epochs < 0 or batch_size < 1:
        raise ValueError("need l2 >= 0, learning_rate > 0, epochs >= 0, batch_size >= 1")
    lexicon = lexicon if lexicon is not None else OpinionLexicon.default()
    for s in corpus:
        if not is_bio_valid(s.labels):
            raise ValueError(f"label sequence is not BIO-valid: {s.labels}")
    tagged = [tag(list(s.tokens), lexicon) for s in corpus]
    feats = [sentence_features(t) for t in tagged]
    names = [f for sent in feats for tok in sent for f in tok]
    model = CrfModel.zeros(
        names,
        constrained=constrained,
        lexicon=lexicon,
        hyperparams={"l2": l2, "epochs": epochs, "learning_rate": learning_rate, "batch_size": batch_size, "seed": seed},
    )
    data = _prepare(model, feats, [s.labels for s in corpus])
    rng = np.random.default_rng(seed)
    with np.errstate(all="ignore"):  # divergence is detected and raised below
        objective = _fit(model, data, l2, epochs, learning_rate, batch_size, rng)
    if not math.isfinite(objective):
        raise TrainingDivergenceError(f"objective is {objective}")
    model.hyperparams["final_objective"] = objective
    return model


def _fit(model, data, l2, epochs, learning_rate, batch_size, rng) -> float:
    n = len(data)
    for _ in range(epochs):
        order = rng.permutation(n)
        for lo in range(0, n, batch_size):
            batch = [data[i] for i in order[lo:lo + batch_size]]
            _, g_em, g_tr = _loglik_grad(model, batch)
            m = len(batch)
            model.emission += learning_rate * (g_em / m - (l2 / n) * model.emission)
            model.transition += learning_rate * (g_tr / m - (l2 / n) * model.transition)
        if not (np.all(np.isfinite(model.emission)) and np.all(np.isfinite(model.transition))):
            raise TrainingDivergenceError("weights became non-finite; lower the learning rate")
    ll, _, _ = _loglik_grad(model, data)
    w = model.get_flat()
    return ll - 0.5 * l2 * float(w @ w)


def decode(model: CrfModel, sentence) -> list[str]:
    """Viterbi best label sequence; equal scores resolve toward earlier labels."""
    if len(sentence) == 0:
        return []
    emissions = sentence if isinstance(sentence, np.ndarray) else emission_scores(model, sentence)
    start, trans = transition_matrix(model)
    n = len(emissions)
    delta = start + emissions[0]
    back = np.zeros((n, len(LABELS)), dtype=np.int64)
    for t in range(1, n):
        cand = delta[:, None] + trans
        back[t] = np.argmax(cand, axis=0)
        delta = cand[back[t], np.arange(len(LABELS))] + emissions[t]
    path = [int(np.argmax(delta))]
    for t in range(n - 1, 0, -1):
        path.append(int(back[t][path[-1]]))
    return [LABELS[i] for i in reversed(path)]


def extract_aspects(labels: Sequence[str], sentence: Sequence[Token | TaggedToken]) -> list[Aspect]:
    """Turn maximal B-I runs into lowercased aspect phrases."""
    aspects = []
    start = None

    def close(end):
        words = [sentence[k].surface.lower() for k in range(start, end)]
        sid = sentence[start].sentence_id
        aspects.append(Aspect(" ".join(words), sid, start, end))

    for i, lab in enumerate(labels):
        if lab == "B-ASPECT":
            if start is not None:
                close(i)
            start = i
        elif lab == "I-ASPECT" and start is not None:
            continue
        else:
            if start is not None:
                close(i)
            start = None
    if start is not None:
        close(len(labels))
    return aspects


def aspects_from_text(model: CrfModel, text: str) -> list[Aspect]:
    out = []
    for sent in tokenize(text):
        tagged = model.tag_words(sent)
        out.extend(extract_aspects(decode(model, tagged), tagged))
    return out


# -- CoNLL annotations ---------------------------------------------------------

def parse_conll(text: str) -> list[AnnotatedSentence]:
    """``token<TAB>label`` per line, blank line between sentences."""
    sentences: list[AnnotatedSentence] = []
    words: list[str] = []
    labels: list[str] = []
    first_line = 0

    def flush():
        if not words:
            return
        if not is_bio_valid(labels):
            raise CrfFormatError(f"line {first_line}: sentence is not BIO-valid: {' '.join(labels)}")
        sentences.append(AnnotatedSentence.from_words(words, labels, len(sentences)))

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.rstrip("\r\n")
        if not line.strip():
            flush()
            words, labels = [], []
            continue
        parts = line.split("\t")
        if len(parts) != 2 or not parts[0]:
            raise CrfFormatError(f"line {lineno}: expected 'token<TAB>label'")
        if parts[1] not in _LABEL_ID:
            raise CrfFormatError(f"line {lineno}: unknown label {parts[1]!r}")
        if not words:
            first_line = lineno
        words.append(parts[0])
        labels.append(parts[1])
    flush()
    return sentences


def read_conll(path: str | Path) -> list[AnnotatedSentence]:
    return parse_conll(Path(path).read_text(encoding="utf-8"))
