"""Inverted index over a corpus: lemma/upos/deprel postings at sentence
granularity.

The index is a pure pruning device: ``candidates`` returns a superset of the
sentences that can match a query (sound and complete as a filter), and the
matcher re-verifies inside each candidate. Postings cover base and enhanced
edges, so rule-added edges are searchable.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Mapping

from .corpus import Corpus
from .errors import ConfigError, EmptyCorpus, UnknownList
from .query import GraphQuery, WILDCARD

MAGIC = "SYNQIDX1"


@dataclass(frozen=True)
class CandidateSet:
    ordinals: tuple[int, ...]
    full_scan: bool = False


@dataclass(frozen=True)
class Index:
    corpus_fingerprint: str
    sentence_ids: tuple[str, ...]
    lemma_postings: Mapping[str, tuple[int, ...]]
    upos_postings: Mapping[str, tuple[int, ...]]
    deprel_postings: Mapping[str, tuple[int, ...]]

    def ordinal_of(self, sentence_id: str) -> int:
        return self.sentence_ids.index(sentence_id)


def corpus_fingerprint(c: Corpus) -> str:
    """Content hash binding an index to the exact corpus it was built from,
    including enhanced edges."""
    h = hashlib.sha256()
    for s in c.sentences():
        h.update(s.sentence_id.encode("utf-8"))
        for t in s.tokens:
            h.update(("\x1f".join([
                t.form, t.lemma, t.upos, str(t.head), t.deprel,
                "1" if t.space_after else "0",
            ]) + "\x1e").encode("utf-8"))
        for edge in sorted(s.enhanced_edges):
            h.update(f"{edge[0]}:{edge[1]}:{edge[2]}\x1d".encode("utf-8"))
        h.update(b"\x1c")
    return h.hexdigest()


def build_index(c: Corpus) -> Index:
    if not c.sentence_ids:
        raise EmptyCorpus(f"corpus {c.corpus_id!r} has no sentences")
    lemma: dict[str, set[int]] = {}
    upos: dict[str, set[int]] = {}
    deprel: dict[str, set[int]] = {}
    for ordinal, s in enumerate(c.sentences()):
        for t in s.tokens:
            lemma.setdefault(t.lemma.casefold(), set()).add(ordinal)
            upos.setdefault(t.upos, set()).add(ordinal)
        for _, _, rel in s.all_edges:
            deprel.setdefault(rel, set()).add(ordinal)

    def freeze(d: dict[str, set[int]]) -> dict[str, tuple[int, ...]]:
        return {k: tuple(sorted(v)) for k, v in d.items()}

    return Index(
        corpus_fingerprint=corpus_fingerprint(c),
        sentence_ids=tuple(c.sentence_ids),
        lemma_postings=freeze(lemma),
        upos_postings=freeze(upos),
        deprel_postings=freeze(deprel),
    )


def candidates(i: Index, q: GraphQuery) -> CandidateSet:
    """Intersect postings over every hard constraint of the query. With no
    indexable constraint the whole corpus is returned, flagged full_scan."""
    postings: list[tuple[int, ...]] = []
    for n in q.nodes:
        if n.lemma is not None:
            postings.append(i.lemma_postings.get(n.lemma.casefold(), ()))
        elif n.word_list is not None:
            if n.lemma_set is None:
                raise UnknownList(n.word_list)
            union: set[int] = set()
            for lem in n.lemma_set:
                union.update(i.lemma_postings.get(lem.casefold(), ()))
            postings.append(tuple(sorted(union)))
        if n.upos is not None:
            postings.append(i.upos_postings.get(n.upos, ()))
    for e in q.edges:
        if e.deprel != WILDCARD:
            postings.append(i.deprel_postings.get(e.deprel, ()))
    if not postings:
        return CandidateSet(tuple(range(len(i.sentence_ids))),
                            full_scan=True)
    # Rarest-first intersection; order only affects work, not the result.
    postings.sort(key=len)
    result = set(postings[0])
    for p in postings[1:]:
        result &= set(p)
        if not result:
            break
    return CandidateSet(tuple(sorted(result)))


# -- serialization -----------------------------------------------------------
#
# Text container, UTF-8, '\n' line endings, documented in the README:
#   line 1: magic "SYNQIDX1"
#   line 2: fingerprint<TAB><hex sha256>
#   line 3: sentences<TAB><count>
#   next <count> lines: s<TAB><sentence_id> in ordinal order
#   then one line per posting, keys sorted lexicographically per section:
#     lemma<TAB><key><TAB><ordinals space-separated>
#     upos<TAB><key><TAB>...
#     deprel<TAB><key><TAB>...

def save_index(i: Index, path: str) -> None:
    lines = [MAGIC, f"fingerprint\t{i.corpus_fingerprint}",
             f"sentences\t{len(i.sentence_ids)}"]
    lines.extend(f"s\t{sid}" for sid in i.sentence_ids)
    for section, table in (("lemma", i.lemma_postings),
                           ("upos", i.upos_postings),
                           ("deprel", i.deprel_postings)):
        for key in sorted(table):
            ords = " ".join(str(o) for o in table[key])
            lines.append(f"{section}\t{key}\t{ords}")
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write("\n".join(lines) + "\n")


def load_index(path: str) -> Index:
    with open(path, encoding="utf-8") as f:
        lines = f.read().splitlines()
    if not lines or lines[0] != MAGIC:
        raise ConfigError(f"{path}: not a {MAGIC} index file")
    if len(lines) < 3 or not lines[1].startswith("fingerprint\t"):
        raise ConfigError(f"{path}: missing fingerprint")
    fingerprint = lines[1].split("\t", 1)[1]
    count = int(lines[2].split("\t", 1)[1])
    sentence_ids = tuple(line.split("\t", 1)[1] for line in lines[3:3 + count])
    tables: dict[str, dict[str, tuple[int, ...]]] = {
        "lemma": {}, "upos": {}, "deprel": {}}
    for line in lines[3 + count:]:
        section, key, ords = line.split("\t")
        tables[section][key] = tuple(
            int(o) for o in ords.split(" ") if o)
    return Index(corpus_fingerprint=fingerprint, sentence_ids=sentence_ids,
                 lemma_postings=tables["lemma"],
                 upos_postings=tables["upos"],
                 deprel_postings=tables["deprel"])
