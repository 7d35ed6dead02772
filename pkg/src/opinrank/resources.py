"""Access to the bundled lexicon, annotations and review fixtures."""

from __future__ import annotations

import functools
from importlib import resources
from pathlib import Path

from .crf import CrfModel, parse_conll, train

FIXTURES = (
    "lexicon.tsv",
    "aspects.conll",
    "toy.conll",
    "laptops.tsv",
    "laptop_queries.tsv",
    "laptop_qrels.tsv",
    "hotels.tsv",
    "hotel_queries.tsv",
    "hotel_qrels.tsv",
)


def fixture_text(name: str) -> str:
    if name not in FIXTURES:
        raise KeyError(f"unknown fixture {name!r}; choose from {', '.join(FIXTURES)}")
    return resources.files("opinrank").joinpath(f"data/{name}").read_text(encoding="utf-8")


def fixture_path(name: str) -> Path:
    """Filesystem path of a bundled fixture (the package is installed unzipped)."""
    if name not in FIXTURES:
        raise KeyError(f"unknown fixture {name!r}; choose from {', '.join(FIXTURES)}")
    return Path(str(resources.files("opinrank").joinpath(f"data/{name}")))


@functools.lru_cache(maxsize=1)
def _default_model_text() -> str:
    return train(parse_conll(fixture_text("aspects.conll"))).dumps()


def default_model() -> CrfModel:
    """Aspect tagger trained on the bundled annotations with default settings.

    Training is deterministic, so the result is cached per process.
    """
    return CrfModel.loads(_default_model_text())
