import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from opinrank.text import (
    LexiconEntry,
    LexiconFormatError,
    OpinionLexicon,
    PosClass,
    Polarity,
    Token,
    extract_opinion_units,
    opinion_units_from_text,
    tag,
    tag_text,
    tokenize,
)


def words(sentences):
    return [[t.surface for t in s] for s in sentences]


class TestTokenize:
    def test_empty(self):
        assert tokenize("") == []

    def test_two_sentences_drop_punctuation(self):
        sents = tokenize("Battery is good. Display is dim.")
        assert words(sents) == [["Battery", "is", "good"], ["Display", "is", "dim"]]
        assert [t.sentence_id for t in sents[1]] == [1, 1, 1]

    def test_positions(self):
        (sent,) = tokenize("extremely good battery")
        assert [t.position for t in sent] == [0, 1, 2]

    def test_surface_preserved_lower_for_lookup(self):
        (sent,) = tokenize("EXTREMELY Good")
        assert [t.surface for t in sent] == ["EXTREMELY", "Good"]
        assert [t.lower for t in sent] == ["extremely", "good"]

    def test_clitic_negation_split(self):
        (sent,) = tokenize("It isn't good")
        assert [t.surface for t in sent] == ["It", "is", "n't", "good"]

    def test_terminators(self):
        assert len(tokenize("Good! Bad? Fine.")) == 3

    @given(st.text(max_size=200))
    @settings(max_examples=200)
    def test_invariants(self, text):
        sents = tokenize(text)
        for sid, sent in enumerate(sents):
            assert sent, "no empty sentences"
            assert [t.position for t in sent] == list(range(len(sent)))
            assert all(t.sentence_id == sid and t.surface for t in sent)
        assert tokenize(text) == sents


class TestTag:
    def test_lexicon_adjective(self, lexicon):
        assert [t.pos_class for t in tag(tokenize("good")[0], lexicon)] == [PosClass.ADJECTIVE]

    def test_lexicon_adverb(self, lexicon):
        assert [t.pos_class for t in tag(tokenize("very good")[0], lexicon)] == [PosClass.ADVERB, PosClass.ADJECTIVE]

    def test_negator(self, lexicon):
        assert [t.pos_class for t in tag(tokenize("not good")[0], lexicon)] == [PosClass.NEGATOR, PosClass.ADJECTIVE]

    @pytest.mark.parametrize("word", ["not", "no", "never", "n't"])
    def test_negator_set(self, lexicon, word):
        assert tag([Token(word, 0, 0)], lexicon)[0].pos_class is PosClass.NEGATOR

    def test_heuristics(self, lexicon):
        tagged = tag(tokenize("the battery oddly hums")[0], lexicon)
        assert [t.pos_class for t in tagged] == [PosClass.OTHER, PosClass.NOUN, PosClass.ADVERB, PosClass.OTHER]

    def test_lexicon_beats_suffix(self, lexicon):
        # "friendly" ends in -ly but is a lexicon adjective
        assert tag([Token("friendly", 0, 0)], lexicon)[0].pos_class is PosClass.ADJECTIVE


class TestOpinionUnits:
    def test_extremely_good(self, lexicon):
        (u,) = opinion_units_from_text("extremely good", lexicon)
        assert (u.adjective.lower, u.degree, u.polarity) == ("good", 3, Polarity.POSITIVE)
        assert u.modifier.lower == "extremely" and u.modifier_degree == 9
        assert not u.negated

    def test_bare_good(self, lexicon):
        (u,) = opinion_units_from_text("good", lexicon)
        assert u.modifier is None and u.modifier_degree is None and not u.negated

    def test_not_very_good(self, lexicon):
        (u,) = opinion_units_from_text("not very good", lexicon)
        assert u.modifier.lower == "very" and u.modifier_degree == 5
        assert u.negated

    def test_modifier_window_is_two(self, lexicon):
        (u,) = opinion_units_from_text("very battery life good", lexicon)
        assert u.modifier is None
        (u,) = opinion_units_from_text("very battery good", lexicon)
        assert u.modifier.lower == "very"

    def test_negation_window_is_three(self, lexicon):
        assert opinion_units_from_text("not the battery is good", lexicon)[0].negated is False
        assert opinion_units_from_text("not battery is good", lexicon)[0].negated is True

    def test_nearest_adverb_wins(self, lexicon):
        (u,) = opinion_units_from_text("very extremely good", lexicon)
        assert u.modifier.lower == "extremely"

    def test_no_adjective(self, lexicon):
        assert extract_opinion_units(tag(tokenize("the battery")[0], lexicon), lexicon) == []

    def test_order_and_completeness(self, lexicon):
        units = opinion_units_from_text("good screen and bad fan. great keys", lexicon)
        assert [(u.sentence_id, u.adjective.lower) for u in units] == [(0, "good"), (0, "bad"), (1, "great")]

    @given(st.lists(st.sampled_from(["very", "good", "not", "bad", "battery", "extremely", "the", "n't", "clear"]), max_size=15))
    def test_properties(self, lexicon, ws):
        text = " ".join(ws)
        units = opinion_units_from_text(text, lexicon)
        tagged = [t for s in tag_text(text, lexicon) for t in s]
        adjectives = [t for t in tagged if t.pos_class is PosClass.ADJECTIVE]
        assert [u.adjective for u in units] == adjectives
        for u in units:
            if u.modifier is not None:
                assert u.modifier.position < u.position <= u.modifier.position + 2
                assert u.modifier.pos_class is PosClass.ADVERB
        assert opinion_units_from_text(text, lexicon) == units


class TestLexicon:
    def test_seed_values(self, lexicon):
        seeds = {"like": 4, "love": 5, "good": 3, "excellent": 6, "really": 5, "extremely": 9, "enjoy": 8, "very": 5}
        for lemma, degree in seeds.items():
            assert lexicon[lemma].degree == degree
        assert lexicon["very"].pos_class is PosClass.ADVERB
        assert lexicon["good"].pos_class is PosClass.ADJECTIVE

    def test_round_trip(self, lexicon, tmp_path):
        path = tmp_path / "lex.tsv"
        lexicon.save(path)
        again = OpinionLexicon.load(path)
        assert again == lexicon
        assert again.dumps() == lexicon.dumps()

    def test_degree_bounds(self):
        with pytest.raises(ValueError):
            LexiconEntry(11, Polarity.POSITIVE, PosClass.ADJECTIVE)

    @pytest.mark.parametrize(
        "text",
        ["good\t3\tPositive", "good\tx\tPositive\tAdjective", "good\t3\tUp\tAdjective", "good\t3\tPositive\tNoun",
         "good\t3\tPositive\tAdjective\ngood\t4\tPositive\tAdjective"],
    )
    def test_bad_lines(self, text):
        with pytest.raises(LexiconFormatError, match="line"):
            OpinionLexicon.loads(text)

    @given(st.dictionaries(
        st.text(alphabet="abcdefghijklmnopqrstuvwxyz", min_size=1, max_size=8),
        st.tuples(st.floats(0, 10, allow_nan=False), st.sampled_from(list(Polarity)),
                  st.sampled_from([PosClass.ADJECTIVE, PosClass.ADVERB])),
        max_size=10,
    ))
    def test_round_trip_property(self, entries):
        lex = OpinionLexicon({k: LexiconEntry(*v) for k, v in entries.items()})
        assert OpinionLexicon.loads(lex.dumps()) == lex
