import pytest
from hypothesis import given
from hypothesis import strategies as st

from opinrank.crf import Aspect
from opinrank.fuzzy import Granularity, Orientation, SentimentAssessment, assess
from opinrank.profile import AspectOpinion, EntityProfile, analyze_text, pair, summarize
from opinrank.text import opinion_units_from_text


def op(strength, orientation=Orientation.POSITIVE, aspect="battery"):
    return AspectOpinion(aspect, orientation, strength, Granularity.MODERATE)


class TestPair:
    def test_single_candidate(self, aspect_model, lexicon, config):
        text = "battery life is extremely good"
        res = analyze_text(text, aspect_model, lexicon, config, "r1")
        (o,) = res.opinions
        (unit,) = opinion_units_from_text(text, lexicon)
        expected = assess(unit, config)
        assert (o.aspect, o.orientation, o.strength) == ("battery life", Orientation.POSITIVE, expected.strength)
        assert o.review_id == "r1"
        assert o.opinion_words == ("extremely", "good")

    def test_no_units_drops_aspect(self, aspect_model, lexicon, config):
        assert analyze_text("the battery life", aspect_model, lexicon, config).opinions == []

    def test_equidistant_unit_serves_both(self, lexicon):
        # positions: keys=0 good=1 fan=2
        units = opinion_units_from_text("keys good fan", lexicon)
        assessed = [(u, assess(u)) for u in units]
        got = pair([Aspect("keys", 0, 0, 1), Aspect("fan", 0, 2, 3)], assessed)
        assert [o.aspect for o in got] == ["keys", "fan"]
        assert got[0].strength == got[1].strength

    def test_tie_goes_to_earlier_unit(self, lexicon):
        # good=0 keys=1 bad=2
        units = opinion_units_from_text("good keys bad", lexicon)
        (o,) = pair([Aspect("keys", 0, 1, 2)], [(u, assess(u)) for u in units])
        assert o.orientation is Orientation.POSITIVE

    def test_nearest_wins(self, lexicon):
        units = opinion_units_from_text("good the old keys are bad", lexicon)
        (o,) = pair([Aspect("keys", 0, 3, 4)], [(u, assess(u)) for u in units])
        assert o.orientation is Orientation.NEGATIVE

    def test_other_sentence_ignored(self, lexicon):
        units = opinion_units_from_text("good. keys", lexicon)
        assert pair([Aspect("keys", 1, 0, 1)], [(u, assess(u)) for u in units]) == []

    def test_neutral_assessment_passes_through(self, lexicon):
        (u,) = opinion_units_from_text("good keys", lexicon)
        (o,) = pair([Aspect("keys", 0, 1, 2)], [(u, SentimentAssessment.neutral())])
        assert o.orientation is Orientation.NEUTRAL


class TestSummarize:
    def test_identity(self):
        s = summarize([op(6.0)], "e").aspects["battery"]
        assert (s.orientation, s.mean_strength, s.granularity, s.mention_count) == (
            Orientation.POSITIVE, 6.0, Granularity.STRONG, 1)

    def test_mean(self):
        s = summarize([op(4.0), op(6.0)]).aspects["battery"]
        assert (s.orientation, s.mean_strength, s.granularity, s.mention_count) == (
            Orientation.POSITIVE, 5.0, Granularity.MODERATE, 2)

    def test_tie_is_neutral(self):
        s = summarize([op(5.0), op(5.0, Orientation.NEGATIVE)]).aspects["battery"]
        assert s.orientation is Orientation.NEUTRAL

    def test_majority(self):
        s = summarize([op(5.0), op(5.0), op(5.0, Orientation.NEGATIVE)]).aspects["battery"]
        assert s.orientation is Orientation.POSITIVE

    def test_empty(self):
        assert summarize([], "e").aspects == {}

    @given(st.lists(st.tuples(st.sampled_from(["a", "b", "c"]), st.floats(0, 10), st.sampled_from(list(Orientation))), max_size=20))
    def test_properties(self, rows):
        ops = [op(s, o, a) for a, s, o in rows]
        prof = summarize(ops)
        assert sum(v.mention_count for v in prof.aspects.values()) == len(ops)
        for name, v in prof.aspects.items():
            strengths = [s for a, s, _ in rows if a == name]
            assert min(strengths) - 1e-9 <= v.mean_strength <= max(strengths) + 1e-9
        assert summarize(list(reversed(ops))).aspects.keys() == prof.aspects.keys()

    def test_dict_round_trip(self):
        prof = summarize([op(4.0), op(7.0, aspect="fan")], "lap", 3)
        assert EntityProfile.from_dict(prof.to_dict()) == prof
