import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from opinrank.fuzzy import Granularity, Orientation
from opinrank.profile import AspectSummary, EntityProfile
from opinrank.rank import (
    Bm25Params,
    CorpusStats,
    EmptyQueryError,
    Query,
    QueryAspect,
    Tier,
    TierMode,
    aspect_level,
    bm25,
    parse_query,
    rank,
    tier,
)

POS, NEG = Orientation.POSITIVE, Orientation.NEGATIVE


def profile(**aspects):
    return EntityProfile("e", {k.replace("_", " "): AspectSummary(o, 5.0, g, 1) for k, (o, g) in aspects.items()})


def bm25_oracle(c, n, n_t, dl, avgdl, k1, b):
    return k1 * c / (c + k1 * (1 - b + b * dl / avgdl)) * math.log((n + 1) / n_t)


class TestParseQuery:
    def test_structured(self):
        q = parse_query("battery:pos:strong display:pos")
        assert q.aspects == (QueryAspect("battery", POS, Granularity.STRONG), QueryAspect("display", POS, None))
        assert [qa.strength_specified for qa in q.aspects] == [True, False]

    def test_structured_multiword_and_extra(self):
        q = parse_query("battery_life:neg quiet")
        assert q.aspects == (QueryAspect("battery life", NEG),)
        assert q.terms == ("battery", "life", "quiet")

    @pytest.mark.parametrize("text", ["", "   ", "battery:maybe", "quiet :pos"])
    def test_errors(self, text):
        with pytest.raises(EmptyQueryError):
            parse_query(text)

    def test_free_text(self, aspect_model, lexicon, config):
        q = parse_query("good battery life and clear display", aspect_model, lexicon, config)
        assert [qa.aspect for qa in q.aspects] == ["battery life", "display"]
        assert all(qa.orientation is POS and qa.strength_specified for qa in q.aspects)
        assert {"good", "clear"} <= set(q.extra_terms)

    def test_free_text_without_aspect(self, aspect_model):
        with pytest.raises(EmptyQueryError):
            parse_query("really good", aspect_model)

    def test_structured_round_trip(self, aspect_model):
        q = parse_query("not good keyboard and extremely bright display", aspect_model)
        again = parse_query(q.to_structured())
        assert (again.aspects, again.terms) == (q.aspects, q.terms)


class TestTier:
    def test_high(self):
        assert tier(profile(battery=(POS, Granularity.STRONG)), Query("", (QueryAspect("battery", POS, Granularity.STRONG),))) is Tier.HIGH

    def test_moderate_strength_far(self):
        q = Query("", (QueryAspect("battery", POS, Granularity.STRONG),))
        assert tier(profile(battery=(POS, Granularity.VERY_WEAK)), q) is Tier.MODERATE

    def test_within_tolerance(self):
        q = Query("", (QueryAspect("battery", POS, Granularity.STRONG),))
        assert tier(profile(battery=(POS, Granularity.MODERATE)), q) is Tier.HIGH
        assert tier(profile(battery=(POS, Granularity.MODERATE)), q, strength_tolerance=0) is Tier.MODERATE

    def test_low(self):
        q = Query("", (QueryAspect("battery", POS, Granularity.STRONG),))
        assert tier(profile(battery=(NEG, Granularity.STRONG)), q) is Tier.LOW

    def test_absent(self):
        q = Query("", (QueryAspect("battery", POS),))
        assert tier(profile(display=(POS, Granularity.STRONG)), q) is Tier.NO_MATCH

    def test_any_orientation(self):
        q = Query("", (QueryAspect("battery", None),))
        assert tier(profile(battery=(NEG, Granularity.WEAK)), q) is Tier.HIGH

    def test_modes(self):
        q = Query("", (QueryAspect("battery", POS), QueryAspect("display", POS)))
        p = profile(battery=(POS, Granularity.STRONG), display=(NEG, Granularity.STRONG))
        assert tier(p, q, TierMode.ALL) is Tier.LOW
        assert tier(p, q, "average") is Tier.MODERATE  # floor(4/2)

    def test_labels(self):
        assert [t.label for t in Tier] == ["NoMatch", "Low", "Moderate", "High"]
        assert Tier.from_label("Moderate") is Tier.MODERATE

    @given(st.sampled_from(list(Orientation)), st.sampled_from(list(Granularity)),
           st.sampled_from([POS, NEG, None]), st.sampled_from([None, *Granularity]))
    def test_level_ladder(self, po, pg, qo, qg):
        level = aspect_level(profile(battery=(po, pg)), QueryAspect("battery", qo, qg))
        orient_ok = qo is None or qo == po
        strength_ok = qg is None or abs(pg.rank - qg.rank) <= 1
        assert level == (3 if orient_ok and strength_ok else 2 if orient_ok else 1)


class TestBm25:
    def test_point(self):
        stats = CorpusStats(2, 10.0, {"battery": 1})
        assert bm25({"battery": 2}, 10, ["battery"], stats) == pytest.approx(0.823959, abs=1e-6)

    def test_absent_term(self):
        assert bm25({"x": 3}, 10, ["battery"], CorpusStats(2, 10.0, {"x": 1})) == 0.0

    def test_distinct_terms(self):
        stats = CorpusStats(2, 10.0, {"battery": 1})
        assert bm25({"battery": 2}, 10, ["battery", "battery"], stats) == bm25({"battery": 2}, 10, ["battery"], stats)

    def test_params_validated(self):
        with pytest.raises(ValueError):
            Bm25Params(k1=0)
        with pytest.raises(ValueError):
            Bm25Params(b=1.5)

    @given(st.integers(1, 50), st.integers(1, 20), st.integers(1, 200), st.floats(1, 200),
           st.floats(0.1, 3), st.floats(0, 1))
    def test_oracle_and_properties(self, c, n, dl, avgdl, k1, b):
        n_t = max(1, n // 2)
        stats = CorpusStats(n, avgdl, {"t": n_t})
        p = Bm25Params(k1, b)
        s = bm25({"t": c}, dl, ["t"], stats, p)
        assert s == pytest.approx(bm25_oracle(c, n, n_t, dl, avgdl, k1, b), rel=1e-12)
        assert bm25({"t": c + 1}, dl, ["t"], stats, p) >= s
        assert bm25({"t": c}, dl + 10, ["t"], stats, p) <= s
        if b == 0:
            assert bm25({"t": c}, dl + 10, ["t"], stats, p) == s


def _corpus():
    profiles = {
        "a": profile(battery=(POS, Granularity.STRONG)),
        "b": profile(battery=(NEG, Granularity.STRONG)),
        "c": profile(display=(POS, Granularity.STRONG)),
    }
    docs = {"a": {"battery": 1}, "b": {"battery": 9}, "c": {"display": 4}}
    lengths = {"a": 20, "b": 10, "c": 10}
    stats = CorpusStats(3, 40 / 3, {"battery": 2, "display": 1})
    return profiles, docs, lengths, stats


class TestRank:
    def test_tier_beats_bm25(self):
        q = Query("", (QueryAspect("battery", POS, Granularity.STRONG),))
        res = rank(*_corpus(), q)
        assert [(r.entity_id, r.tier) for r in res] == [("a", Tier.HIGH), ("b", Tier.LOW)]
        assert res[0].bm25 < res[1].bm25
        assert res[0].matched_aspects == (("battery", 3),)

    def test_baseline_is_bm25_only(self):
        q = Query("", (QueryAspect("battery", POS, Granularity.STRONG),))
        res = rank(*_corpus(), q, use_tiers=False)
        assert [r.entity_id for r in res] == ["b", "a"]

    def test_within_tier_bm25_then_id(self):
        profiles = {k: profile(battery=(NEG, Granularity.WEAK)) for k in "xyz"}
        docs = {"x": {"battery": 1}, "y": {"battery": 3}, "z": {"battery": 1}}
        lengths = dict.fromkeys(docs, 10)
        q = Query("", (QueryAspect("battery", POS),))
        res = rank(profiles, docs, lengths, CorpusStats(3, 10, {"battery": 3}), q)
        assert [r.entity_id for r in res] == ["y", "x", "z"]
        assert {r.tier for r in res} == {Tier.LOW}

    def test_deterministic(self):
        q = Query("", (QueryAspect("battery", None),))
        assert rank(*_corpus(), q) == rank(*_corpus(), q)
