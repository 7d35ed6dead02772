import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from opinrank.evaluation import EvalFormatError, ndcg_at_k, parse_qrels, parse_queries, precision_at_k


def test_precision():
    rel = {"a": 2, "b": 0, "c": 1}
    assert precision_at_k(["a", "b", "c"], rel, 1) == 1.0
    assert precision_at_k(["a", "b", "c"], rel, 3) == pytest.approx(2 / 3)
    assert precision_at_k(["a"], rel, 4) == 0.25


def test_ndcg_hand_computed():
    rel = {"a": 2, "c": 1}
    # ranked b, a: dcg = 3/log2(3); ideal = 3 + 1/log2(3)
    expected = (3 / math.log2(3)) / (3 + 1 / math.log2(3))
    assert ndcg_at_k(["b", "a"], rel, 2) == pytest.approx(expected)
    assert ndcg_at_k(["a", "c"], rel, 2) == pytest.approx(1.0)
    assert ndcg_at_k(["x"], {}, 3) == 0.0


@given(st.dictionaries(st.sampled_from("abcdef"), st.integers(0, 3)), st.permutations(list("abcdef")), st.integers(1, 6))
def test_ndcg_bounds(rel, ranking, k):
    assert 0.0 <= ndcg_at_k(ranking, rel, k) <= 1.0 + 1e-12
    ideal = sorted(ranking, key=lambda e: -rel.get(e, 0))
    if any(v > 0 for v in rel.values()):
        assert ndcg_at_k(ideal, rel, k) == pytest.approx(1.0)


def test_k_validated():
    with pytest.raises(ValueError):
        precision_at_k([], {}, 0)


def test_parsers():
    assert parse_queries("q1\tgood battery\n# note\n") == {"q1": "good battery"}
    assert parse_qrels("q1 a 2\nq1\tb\t0\n") == {"q1": {"a": 2, "b": 0}}
    for bad in ("q1 a\n", "q1 a x\n"):
        with pytest.raises(EvalFormatError, match="line 1"):
            parse_qrels(bad)
    with pytest.raises(EvalFormatError):
        parse_queries("q1\ta\nq1\tb\n")
