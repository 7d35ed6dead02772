"""Input checks shared by the estimator wrappers."""

from __future__ import annotations

from typing import Iterable

from .corpus import CorpusRecord
from .crf import LABELS, is_bio_valid


def check_token_sequences(X, name: str = "X") -> list[list[str]]:
    if isinstance(X, str):
        raise TypeError(f"{name} must be a sequence of token sequences, not a string")
    out = []
    for i, seq in enumerate(X):
        if isinstance(seq, str):
            raise TypeError(f"{name}[{i}] is a string; pass a list of tokens")
        toks = [str(getattr(t, "surface", t)) for t in seq]
        if any(not t for t in toks):
            raise ValueError(f"{name}[{i}] contains an empty token")
        out.append(toks)
    return out


def check_label_sequences(X: list[list[str]], y) -> list[list[str]]:
    y = [list(seq) for seq in y]
    if len(y) != len(X):
        raise ValueError(f"X and y have different lengths ({len(X)} != {len(y)})")
    for i, (xs, ys) in enumerate(zip(X, y)):
        if len(xs) != len(ys):
            raise ValueError(f"sentence {i}: {len(xs)} tokens but {len(ys)} labels")
        bad = set(ys) - set(LABELS)
        if bad:
            raise ValueError(f"sentence {i}: unknown labels {sorted(bad)}")
        if not is_bio_valid(ys):
            raise ValueError(f"sentence {i}: labels are not BIO-valid")
    return y


def check_records(X: Iterable) -> list[CorpusRecord]:
    out = []
    seen = set()
    for i, rec in enumerate(X):
        if not isinstance(rec, CorpusRecord):
            try:
                eid, rid, text = rec
            except (TypeError, ValueError):
                raise TypeError(f"record {i} must be a CorpusRecord or an (entity_id, review_id, text) triple") from None
            rec = CorpusRecord(str(eid), str(rid), str(text))
        if not rec.entity_id or not rec.review_id:
            raise ValueError(f"record {i} has an empty id")
        key = (rec.entity_id, rec.review_id)
        if key in seen:
            raise ValueError(f"record {i} duplicates key {key}")
        seen.add(key)
        out.append(rec)
    return out
