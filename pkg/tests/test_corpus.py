import pytest

from synq.corpus import (
    build_sentence,
    context_window,
    corpus_to_conllu,
    load_conllu,
    load_corpus_text,
    sentence_text,
)
from synq.errors import (
    CyclicTree,
    HeadOutOfRange,
    MalformedLine,
    MultipleRoots,
    UnknownSentence,
)

MINIMAL = (
    "1\tShe\tshe\tPRON\t_\t_\t2\tnsubj\t_\t_\n"
    "2\tran\trun\tVERB\t_\t_\t0\troot\t_\t_\n"
)


def test_minimal_block():
    doc = load_conllu(MINIMAL, doc_id="d")
    assert len(doc.sentences) == 1
    s = doc.sentences[0]
    assert len(s.tokens) == 2
    assert s.token(2).deprel == "root" and s.token(2).head == 0
    assert s.sentence_id == "d#s1"


def test_head_out_of_range():
    text = (
        "1\ta\ta\tX\t_\t_\t2\tdep\t_\t_\n"
        "2\tb\tb\tX\t_\t_\t5\tdep\t_\t_\n"
        "3\tc\tc\tX\t_\t_\t0\troot\t_\t_\n"
    )
    with pytest.raises(HeadOutOfRange):
        load_conllu(text, doc_id="d")


def test_cyclic_tree():
    text = (
        "1\ta\ta\tX\t_\t_\t2\tdep\t_\t_\n"
        "2\tb\tb\tX\t_\t_\t1\tdep\t_\t_\n"
    )
    with pytest.raises(CyclicTree):
        load_conllu(text, doc_id="d")


def test_multiple_roots():
    text = (
        "1\ta\ta\tX\t_\t_\t0\troot\t_\t_\n"
        "2\tb\tb\tX\t_\t_\t0\troot\t_\t_\n"
    )
    with pytest.raises(MultipleRoots):
        load_conllu(text, doc_id="d")


def test_malformed_line_names_location():
    text = "1\tonly\tfour\tcolumns\n"
    with pytest.raises(MalformedLine) as exc:
        load_conllu(text, doc_id="d")
    assert exc.value.line_number == 1
    assert exc.value.sentence_ordinal == 1


def test_multiword_ranges_and_empty_nodes_skipped():
    text = (
        "1-2\tDon't\t_\t_\t_\t_\t_\t_\t_\t_\n"
        "1\tDo\tdo\tAUX\t_\t_\t0\troot\t_\tSpaceAfter=No\n"
        "2\tn't\tnot\tPART\t_\t_\t1\tadvmod\t_\t_\n"
        "2.1\tghost\t_\t_\t_\t_\t_\t_\t_\t_\n"
    )
    doc = load_conllu(text, doc_id="d")
    s = doc.sentences[0]
    assert [t.form for t in s.tokens] == ["Do", "n't"]
    assert s.text() == "Don't"


def test_three_document_fixture_unique_ids(fixtures_dir, main_corpus):
    # Oracle: an independent line scan over the fixture file.
    raw = (fixtures_dir / "main_corpus" / "docs.conllu").read_text()
    newdocs = [l for l in raw.splitlines() if l.startswith("# newdoc id =")]
    blocks = [b for b in raw.split("\n\n")
              if any(line and line[0].isdigit() for line in b.splitlines())]
    assert len(main_corpus.documents) == len(newdocs)
    assert len(main_corpus.sentence_ids) == len(blocks)
    assert len(set(main_corpus.sentence_ids)) == len(main_corpus.sentence_ids)


def test_metadata_manifest(main_corpus):
    d01 = main_corpus.documents[0]
    assert d01.doc_id == "d01"
    assert d01.metadata == {"court": "magistrate", "year": "1999"}


def test_sentence_text_space_after():
    s = build_sentence("x#s1", [
        ("Don", "don", "X", 2, "dep", False),
        ("'t", "'t", "X", 0, "root"),
    ])
    assert sentence_text(s) == "Don't"


def test_sentence_text_empty():
    s = build_sentence("x#s1", [])
    assert sentence_text(s) == ""


def test_sentence_text_matches_text_comments(fixtures_dir, main_corpus):
    # Every '# text =' comment in the fixture equals the detokenized text.
    raw = (fixtures_dir / "main_corpus" / "docs.conllu").read_text()
    comments = [l[len("# text = "):] for l in raw.splitlines()
                if l.startswith("# text = ")]
    texts = [s.text() for s in main_corpus.sentences()]
    assert comments == texts


def test_text_length_equals_max_char_end(main_corpus):
    for s in main_corpus.sentences():
        assert len(s.text()) == max(t.char_end for t in s.tokens)


def test_exactly_one_root_per_sentence(main_corpus):
    for s in main_corpus.sentences():
        assert sum(1 for t in s.tokens if t.head == 0) == 1


def test_round_trip(main_corpus):
    text = corpus_to_conllu(main_corpus)
    again = load_corpus_text(text, main_corpus.corpus_id)
    assert again == main_corpus


def test_round_trip_preserves_enhanced_edges():
    s = build_sentence("e#s1", [
        ("a", "a", "X", 2, "dep"),
        ("b", "b", "X", 0, "root"),
    ], enhanced=[(1, 2, "extra")])
    from synq.corpus import Corpus, Document, sentence_to_conllu
    c = Corpus("e", [Document("e", {}, (s,))])
    again = load_corpus_text(corpus_to_conllu(c), "e")
    assert again.sentence("e#s1").enhanced_edges == frozenset({(1, 2, "extra")})
    assert again == c


def test_context_window_boundary_clipping(context_corpus):
    first = context_corpus.sentence_ids[0]
    window = context_window(context_corpus, first, before=2, after=1)
    assert [w.sentence_id for w in window] == ["ctx01#s1", "ctx01#s2"]


def test_context_window_identity(context_corpus):
    mid = "ctx01#s5"
    window = context_window(context_corpus, mid, before=0, after=0)
    assert [w.sentence_id for w in window] == [mid]


def test_context_window_middle_slice(context_corpus):
    # Sentence 5 of a 10-sentence doc, two each way -> sentences 3..7.
    window = context_window(context_corpus, "ctx01#s5", before=2, after=2)
    assert [w.sentence_id for w in window] == [
        f"ctx01#s{k}" for k in range(3, 8)]


def test_context_window_contiguity_property(main_corpus):
    for sid in main_corpus.sentence_ids:
        doc = main_corpus.document_of(sid)
        window = context_window(main_corpus, sid, before=3, after=3)
        ids = [w.sentence_id for w in window]
        assert sid in ids
        doc_ids = [s.sentence_id for s in doc.sentences]
        start = doc_ids.index(ids[0])
        assert doc_ids[start:start + len(ids)] == ids


def test_context_window_unknown_sentence(main_corpus):
    with pytest.raises(UnknownSentence):
        context_window(main_corpus, "nope#s1", 1, 1)


def test_no_cross_document_leakage(main_corpus):
    last_of_d01 = "d01#s2"
    window = context_window(main_corpus, last_of_d01, before=0, after=5)
    assert [w.sentence_id for w in window] == ["d01#s2"]
