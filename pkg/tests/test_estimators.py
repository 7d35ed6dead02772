import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from opinrank.estimators import CRFAspectTagger, EntityRanker, FuzzyOpinionGrader


def test_grader_transform():
    g = FuzzyOpinionGrader().fit()
    X = g.transform(["extremely good battery", "not good keys", "the fan"])
    assert X.shape == (3, 3)
    assert X[0, 0] > 0 and X[1, 0] < 0
    assert X[0, 1] > abs(X[1, 0])
    np.testing.assert_array_equal(X[2], [0, 0, 0])
    with pytest.raises(TypeError):
        g.transform("one string")


def test_grader_not_fitted():
    with pytest.raises(NotFittedError):
        FuzzyOpinionGrader().transform(["good"])


def test_tagger(toy_corpus):
    X = [[t.surface for t in s.tokens] for s in toy_corpus]
    y = [list(s.labels) for s in toy_corpus]
    tagger = CRFAspectTagger(seed=7).fit(X, y)
    assert tagger.score(X, y) == 1.0
    assert tagger.predict([["battery", "is", "good"]]) == [["B-ASPECT", "O", "O"]]
    assert [a.phrase for a in tagger.extract("The battery is good.")] == ["battery"]
    params = clone(tagger).get_params()
    assert params["seed"] == 7 and params["epochs"] == 50


def test_tagger_validates():
    with pytest.raises(ValueError):
        CRFAspectTagger().fit([["a", "b"]], [["O"]])
    with pytest.raises(ValueError):
        CRFAspectTagger().fit([["a"]], [["I-ASPECT"]])


def test_ranker(laptop_records, aspect_model):
    ranker = EntityRanker(model=aspect_model).fit(laptop_records)
    (top,) = [r[:1] for r in ranker.predict(["good battery life and clear display"])]
    assert top == ["lap-aero"]
    base = EntityRanker(model=aspect_model, use_tiers=False).fit(laptop_records)
    assert base.predict(["good battery life and clear display"])[0][0] != "lap-aero"


def test_ranker_accepts_triples(aspect_model):
    ranker = EntityRanker(model=aspect_model).fit([("e1", "r1", "The battery life is good.")])
    assert ranker.predict(["battery_life:pos"]) == [["e1"]]
    with pytest.raises(ValueError):
        EntityRanker(model=aspect_model, tier_mode="best").fit([("e1", "r1", "x")])
