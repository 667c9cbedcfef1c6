import pytest
from hypothesis import given, strategies as st

from synq.corpus import build_sentence
from synq.enhance import (
    LabelMap,
    apply_rules,
    canonicalize,
    default_rule_set,
    expand_np,
    load_rule_set,
)
from synq.errors import ConfigError, InvalidIndex


def smixut_sentence():
    # Construct-state compound: the deprel carries the Hebrew-specific label.
    return build_sentence("h#s1", [
        ("beit", "beit", "NOUN", 2, "compound:smixut"),
        ("sefer", "sefer", "NOUN", 0, "root"),
    ])


def test_canonicalize_smixut():
    s = canonicalize(smixut_sentence(), LabelMap({"compound:smixut": "compound"}))
    assert (2, 1, "compound") in s.base_edges
    assert all("smixut" not in rel for _, _, rel in s.base_edges)


def test_canonicalize_empty_map_is_identity():
    s = smixut_sentence()
    assert canonicalize(s, LabelMap({})) == s


def test_canonicalize_unmapped_label_unchanged():
    s = build_sentence("h#s2", [
        ("she", "she", "PRON", 2, "nsubj"),
        ("ran", "run", "VERB", 0, "root"),
    ])
    out = canonicalize(s, LabelMap({"compound:smixut": "compound"}))
    assert out == s


def test_canonicalize_applies_to_upos():
    s = build_sentence("h#s3", [("x", "x", "OLDTAG", 0, "root")])
    out = canonicalize(s, LabelMap({"OLDTAG": "NOUN"}))
    assert out.token(1).upos == "NOUN"


def test_canonicalize_idempotent():
    m = LabelMap({"compound:smixut": "compound", "OLDTAG": "NOUN"})
    s = smixut_sentence()
    once = canonicalize(s, m)
    assert canonicalize(once, m) == once


def test_label_map_rejects_chained_substitution():
    with pytest.raises(ConfigError):
        LabelMap({"a": "b", "b": "c"})


@given(st.dictionaries(
    st.sampled_from(["aa", "bb", "cc", "dd"]),
    st.sampled_from(["xx", "yy", "zz"]), max_size=4))
def test_canonicalize_idempotent_property(pairs):
    m = LabelMap(pairs)
    s = build_sentence("h#p", [
        ("w1", "w1", "aa", 2, "bb"),
        ("w2", "w2", "cc", 0, "dd"),
    ])
    once = canonicalize(s, m)
    assert canonicalize(once, m) == once


def want_sentence():
    return build_sentence("c#s1", [
        ("I", "I", "PRON", 2, "nsubj"),
        ("want", "want", "VERB", 0, "root"),
        ("to", "to", "PART", 4, "mark"),
        ("dance", "dance", "VERB", 2, "xcomp"),
    ])


def told_sentence():
    return build_sentence("c#s2", [
        ("I", "I", "PRON", 2, "nsubj"),
        ("told", "tell", "VERB", 0, "root"),
        ("him", "he", "PRON", 2, "obj"),
        ("to", "to", "PART", 5, "mark"),
        ("dance", "dance", "VERB", 2, "xcomp"),
    ])


def test_subject_control_adds_edge():
    out = apply_rules(want_sentence(), default_rule_set())
    assert (4, 1, "nsubj") in out.enhanced_edges


def test_object_control_links_object_not_subject():
    out = apply_rules(told_sentence(), default_rule_set())
    assert (5, 3, "nsubj") in out.enhanced_edges
    assert (5, 1, "nsubj") not in out.enhanced_edges


def test_non_control_verb_untouched():
    s = build_sentence("c#s3", [
        ("I", "I", "PRON", 2, "nsubj"),
        ("hesitate", "hesitate", "VERB", 0, "root"),
        ("to", "to", "PART", 4, "mark"),
        ("dance", "dance", "VERB", 2, "xcomp"),
    ])
    out = apply_rules(s, default_rule_set())
    assert out.enhanced_edges == frozenset()


def test_no_xcomp_is_identity():
    s = build_sentence("c#s4", [
        ("She", "she", "PRON", 2, "nsubj"),
        ("ran", "run", "VERB", 0, "root"),
    ])
    out = apply_rules(s, default_rule_set())
    assert out.enhanced_edges == frozenset()
    assert out == s


def test_apply_rules_monotone(control_corpus):
    rs = default_rule_set()
    for s in control_corpus.sentences():
        out = apply_rules(s, rs)
        assert out.base_edges == s.base_edges
        assert out.enhanced_edges >= s.enhanced_edges


def test_rules_loaded_from_file(fixtures_dir, control_corpus):
    rs = load_rule_set(str(fixtures_dir / "control_verbs.txt"))
    out = apply_rules(control_corpus.sentence("ctl01#s1"), rs)
    assert (4, 1, "nsubj") in out.enhanced_edges


def test_expand_np_postnominal_modifier():
    # Post-nominal adjective, the order the rule exists for.
    s = build_sentence("n#s1", [
        ("edut", "edut", "NOUN", 0, "root"),
        ("amina", "amin", "ADJ", 1, "amod"),
    ])
    assert expand_np(s, 1) == (0, len("edut amina"))


def test_expand_np_bare_noun():
    s = build_sentence("n#s2", [
        ("saw", "see", "VERB", 0, "root"),
        ("courts", "court", "NOUN", 1, "obj"),
    ])
    tok = s.token(2)
    assert expand_np(s, 2) == (tok.char_start, tok.char_end)


def test_expand_np_det_noun_amod():
    s = build_sentence("n#s3", [
        ("the", "the", "DET", 2, "det"),
        ("testimony", "testimony", "NOUN", 4, "nsubj"),
        ("reliable", "reliable", "ADJ", 2, "amod"),
        ("stood", "stand", "VERB", 0, "root"),
    ])
    # det at i-1, noun at i, amod at i+1 -> one contiguous span.
    assert expand_np(s, 2) == (0, len("the testimony reliable"))


def test_expand_np_gap_truncates():
    s = build_sentence("n#s4", [
        ("old", "old", "ADJ", 3, "amod"),
        ("very", "very", "ADV", 3, "advmod"),
        ("records", "record", "NOUN", 0, "root"),
    ])
    # The amod at position 1 is separated by a non-modifier: span stays
    # on the contiguous run containing the noun.
    start, end = expand_np(s, 3)
    assert (start, end) == (s.token(3).char_start, s.token(3).char_end)


def test_expand_np_contains_head_and_contiguous(main_corpus):
    for s in main_corpus.sentences():
        for t in s.tokens:
            start, end = expand_np(s, t.index)
            assert start <= t.char_start and end >= t.char_end
            covered = [x for x in s.tokens
                       if x.char_start >= start and x.char_end <= end]
            assert [x.index for x in covered] == list(
                range(covered[0].index, covered[-1].index + 1))


def test_expand_np_invalid_index():
    s = build_sentence("n#s5", [("x", "x", "X", 0, "root")])
    with pytest.raises(InvalidIndex):
        expand_np(s, 2)
