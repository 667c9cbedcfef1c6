"""CoNLL-U corpus model: tokens, sentence graphs, documents, corpora.

The model is immutable after loading, so corpora can be shared freely
between the matcher, the index builder and the service without locking.
Only the basic token layer is modelled: multiword-token ranges and empty
nodes are skipped, and the dependency tree is validated on load.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Mapping, Sequence

from .errors import (
    CyclicTree,
    HeadOutOfRange,
    MalformedLine,
    MultipleRoots,
    UnknownSentence,
)

Edge = tuple[int, int, str]  # (head index, dependent index, deprel); head 0 = root


@dataclass(frozen=True)
class Token:
    """One syntactic word. ``head`` is 1-based, 0 meaning the root."""

    index: int
    form: str
    lemma: str
    upos: str
    head: int
    deprel: str
    space_after: bool = True
    char_start: int = 0
    char_end: int = 0


@dataclass(frozen=True)
class SentenceGraph:
    """A dependency tree over tokens, plus optional enhanced edges.

    ``base_edges`` always form a tree (including the virtual root edge with
    head 0); ``enhanced_edges`` are extra edges added by rewrite rules and
    never duplicate base edges.
    """

    sentence_id: str
    tokens: tuple[Token, ...]
    enhanced_edges: frozenset[Edge] = frozenset()

    @cached_property
    def base_edges(self) -> frozenset[Edge]:
        return frozenset((t.head, t.index, t.deprel) for t in self.tokens)

    @cached_property
    def all_edges(self) -> frozenset[Edge]:
        return self.base_edges | self.enhanced_edges

    @cached_property
    def children(self) -> Mapping[int, tuple[tuple[int, str], ...]]:
        """Base-tree children of each token index: head -> ((dep, deprel), ...)."""
        out: dict[int, list[tuple[int, str]]] = {}
        for t in self.tokens:
            out.setdefault(t.head, []).append((t.index, t.deprel))
        return {h: tuple(sorted(kids)) for h, kids in out.items()}

    def token(self, index: int) -> Token:
        return self.tokens[index - 1]

    def text(self) -> str:
        """Detokenized sentence text; see :func:`sentence_text`."""
        return sentence_text(self)

    def with_enhanced(self, edges: Iterable[Edge]) -> "SentenceGraph":
        """Return a copy with extra enhanced edges (base duplicates dropped)."""
        extra = frozenset(edges) - self.base_edges
        if extra <= self.enhanced_edges:
            return self
        return SentenceGraph(self.sentence_id, self.tokens,
                             self.enhanced_edges | extra)


@dataclass(frozen=True)
class Document:
    doc_id: str
    metadata: Mapping[str, str] = field(default_factory=dict)
    sentences: tuple[SentenceGraph, ...] = ()


class Corpus:
    """An ordered collection of documents with globally unique sentence ids."""

    def __init__(self, corpus_id: str, documents: Sequence[Document]):
        self.corpus_id = corpus_id
        self.documents = tuple(documents)
        self._locate: dict[str, tuple[int, int]] = {}
        for di, doc in enumerate(self.documents):
            for si, sent in enumerate(doc.sentences):
                if sent.sentence_id in self._locate:
                    raise ValueError(
                        f"duplicate sentence_id: {sent.sentence_id}")
                self._locate[sent.sentence_id] = (di, si)
        self.sentence_ids = tuple(
            s.sentence_id for d in self.documents for s in d.sentences)

    def __eq__(self, other):
        return (isinstance(other, Corpus)
                and self.corpus_id == other.corpus_id
                and self.documents == other.documents)

    def __repr__(self):
        return (f"Corpus({self.corpus_id!r}, {len(self.documents)} docs, "
                f"{len(self.sentence_ids)} sentences)")

    def sentences(self) -> Iterator[SentenceGraph]:
        for doc in self.documents:
            yield from doc.sentences

    def sentence(self, sentence_id: str) -> SentenceGraph:
        try:
            di, si = self._locate[sentence_id]
        except KeyError:
            raise UnknownSentence(f"unknown sentence: {sentence_id}") from None
        return self.documents[di].sentences[si]

    def document_of(self, sentence_id: str) -> Document:
        try:
            di, _ = self._locate[sentence_id]
        except KeyError:
            raise UnknownSentence(f"unknown sentence: {sentence_id}") from None
        return self.documents[di]

    def has_sentence(self, sentence_id: str) -> bool:
        return sentence_id in self._locate


# -- construction helpers ----------------------------------------------

def _compute_offsets(forms: Sequence[str],
                     space_after: Sequence[bool]) -> list[tuple[int, int]]:
    spans = []
    pos = 0
    last = len(forms) - 1
    for i, form in enumerate(forms):
        start = pos
        end = start + len(form)
        spans.append((start, end))
        pos = end + (1 if space_after[i] and i < last else 0)
    return spans


def _validate_tree(heads: Sequence[int], err=MalformedLine,
                   context: str = "") -> None:
    n = len(heads)
    roots = [i + 1 for i, h in enumerate(heads) if h == 0]
    for i, h in enumerate(heads):
        if h < 0 or h > n:
            raise HeadOutOfRange(
                f"head {h} out of range 1..{n}{context}")
    if len(roots) > 1:
        raise MultipleRoots(f"tokens {roots} all have head 0{context}")
    # With every head in 1..n and no root, some cycle must exist; detect it
    # (and self-loops) by walking to the root with memoization.
    safe: set[int] = {0}
    for start in range(1, n + 1):
        trail = []
        node = start
        while node not in safe:
            if node in trail:
                raise CyclicTree(f"cycle through token {node}{context}")
            trail.append(node)
            node = heads[node - 1]
        safe.update(trail)


def build_sentence(sentence_id: str,
                   rows: Sequence[tuple],
                   enhanced: Iterable[Edge] = ()) -> SentenceGraph:
    """Build a validated SentenceGraph from (form, lemma, upos, head, deprel)
    rows, with an optional trailing space_after flag per row. Character
    offsets are computed from the forms."""
    forms = [r[0] for r in rows]
    spaces = [bool(r[5]) if len(r) > 5 else True for r in rows]
    heads = [int(r[3]) for r in rows]
    if rows:
        _validate_tree(heads)
    spans = _compute_offsets(forms, spaces)
    tokens = tuple(
        Token(index=i + 1, form=r[0], lemma=r[1], upos=r[2], head=heads[i],
              deprel=r[4], space_after=spaces[i],
              char_start=spans[i][0], char_end=spans[i][1])
        for i, r in enumerate(rows))
    sent = SentenceGraph(sentence_id, tokens)
    extra = frozenset(enhanced) - sent.base_edges
    for h, d, _ in extra:
        if not (0 <= h <= len(rows)) or not (1 <= d <= len(rows)):
            raise HeadOutOfRange(f"enhanced edge ({h},{d}) out of range")
    if extra:
        sent = SentenceGraph(sentence_id, tokens, extra)
    return sent


def sentence_text(s: SentenceGraph) -> str:
    """Concatenate token forms, inserting a single space between tokens
    except after tokens flagged SpaceAfter=No."""
    parts = []
    last = len(s.tokens) - 1
    for i, t in enumerate(s.tokens):
        parts.append(t.form)
        if t.space_after and i < last:
            parts.append(" ")
    return "".join(parts)


# -- CoNLL-U parsing ----------------------------------------------------

_NEWDOC = "# newdoc id ="
_META = "# meta:"


def _parse_blocks(text: str):
    """Yield (doc_id_or_None, metadata, [(line_no, fields), ...]) per sentence
    block, tracking '# newdoc id' boundaries and '# meta:' comments."""
    doc_id = None
    metadata: dict[str, str] = {}
    block: list[tuple[int, list[str]]] = []
    pending_newdoc = False

    def flush():
        nonlocal block
        if block:
            yield_block = block
            block = []
            return yield_block
        return None

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.rstrip("\n")
        if not line.strip():
            done = flush()
            if done:
                yield doc_id, metadata, done, pending_newdoc
                pending_newdoc = False
            continue
        if line.startswith("#"):
            if line.startswith(_NEWDOC):
                done = flush()
                if done:
                    yield doc_id, metadata, done, pending_newdoc
                doc_id = line[len(_NEWDOC):].strip()
                metadata = {}
                pending_newdoc = True
            elif line.startswith(_META):
                body = line[len(_META):].strip()
                if "=" in body:
                    k, v = body.split("=", 1)
                    metadata = dict(metadata)
                    metadata[k.strip()] = v.strip()
            continue
        block.append((line_no, line.split("\t")))
    done = flush()
    if done:
        yield doc_id, metadata, done, pending_newdoc


def _parse_enhanced(deps: str, n: int, where: str) -> list[Edge]:
    if deps in ("_", ""):
        return []
    edges = []
    for item in deps.split("|"):
        if ":" not in item:
            raise MalformedLine(f"bad DEPS entry {item!r}{where}")
        head_s, rel = item.split(":", 1)
        if "." in head_s:  # empty-node head: skipped layer
            continue
        try:
            h = int(head_s)
        except ValueError:
            raise MalformedLine(f"bad DEPS head {head_s!r}{where}") from None
        if h < 0 or h > n:
            raise HeadOutOfRange(f"DEPS head {h} out of range{where}")
        edges.append((h, 0, rel))  # dependent filled in by caller
    return edges


def _block_to_sentence(sentence_id: str, ordinal: int,
                       lines: list[tuple[int, list[str]]]) -> SentenceGraph:
    rows = []
    enhanced: list[Edge] = []
    for line_no, cols in lines:
        where = f" (sentence {ordinal}, line {line_no})"
        if len(cols) != 10:
            raise MalformedLine(
                f"expected 10 tab-separated columns, got {len(cols)}{where}",
                sentence_ordinal=ordinal, line_number=line_no)
        tid = cols[0]
        if "-" in tid or "." in tid:  # multiword range / empty node
            continue
        try:
            idx = int(tid)
        except ValueError:
            raise MalformedLine(f"bad token id {tid!r}{where}",
                                sentence_ordinal=ordinal,
                                line_number=line_no) from None
        if idx != len(rows) + 1:
            raise MalformedLine(f"token ids not consecutive at {tid!r}{where}",
                                sentence_ordinal=ordinal, line_number=line_no)
        try:
            head = int(cols[6])
        except ValueError:
            raise MalformedLine(f"bad head {cols[6]!r}{where}",
                                sentence_ordinal=ordinal,
                                line_number=line_no) from None
        deprel = cols[7]
        if not deprel or deprel == "_":
            raise MalformedLine(f"empty deprel{where}",
                                sentence_ordinal=ordinal, line_number=line_no)
        misc = cols[9]
        space = "SpaceAfter=No" not in misc.split("|")
        rows.append((cols[1], cols[2], cols[3], head, deprel, space))
        enhanced.append((line_no, idx, cols[8]))  # parsed after count known

    where = f" (sentence {ordinal})"
    n = len(rows)
    edges: list[Edge] = []
    for line_no, idx, deps in enhanced:
        for h, _, rel in _parse_enhanced(deps, n, f"{where}, line {line_no}"):
            edges.append((h, idx, rel))
    try:
        return build_sentence(sentence_id, rows, edges)
    except MalformedLine as e:
        raise type(e)(f"{e}{where}", sentence_ordinal=ordinal) from None


def load_conllu(text: str, doc_id: str,
                metadata: Mapping[str, str] | None = None) -> Document:
    """Parse CoNLL-U text into a single Document (newdoc comments ignored)."""
    sentences = []
    meta = dict(metadata or {})
    ordinal = 0
    for _, block_meta, block, _ in _parse_blocks(text):
        ordinal += 1
        meta.update(block_meta)
        sid = f"{doc_id}#s{len(sentences) + 1}"
        sentences.append(_block_to_sentence(sid, ordinal, block))
    return Document(doc_id=doc_id, metadata=meta, sentences=tuple(sentences))


def load_corpus_text(text: str, corpus_id: str,
                     default_doc_id: str = "doc") -> Corpus:
    """Parse CoNLL-U text into a Corpus, honoring '# newdoc id' boundaries."""
    docs: list[Document] = []
    current_id: str | None = None
    current_meta: dict[str, str] = {}
    current_sents: list[SentenceGraph] = []
    ordinal = 0

    def close():
        if current_id is not None or current_sents:
            did = current_id if current_id is not None else default_doc_id
            docs.append(Document(did, dict(current_meta),
                                 tuple(current_sents)))

    for doc_id, meta, block, is_new in _parse_blocks(text):
        ordinal += 1
        if is_new or (doc_id != current_id and doc_id is not None):
            close()
            current_id = doc_id
            current_sents = []
        current_meta = dict(meta)
        sid_doc = current_id if current_id is not None else default_doc_id
        sid = f"{sid_doc}#s{len(current_sents) + 1}"
        current_sents.append(_block_to_sentence(sid, ordinal, block))
    close()
    return Corpus(corpus_id, docs)


def load_corpus_dir(path: str, corpus_id: str | None = None) -> Corpus:
    """Load a corpus manifest: a directory of .conllu files plus an optional
    metadata.tsv with ``doc_id<TAB>key<TAB>value`` rows."""
    names = sorted(n for n in os.listdir(path) if n.endswith(".conllu"))
    docs: list[Document] = []
    for name in names:
        with open(os.path.join(path, name), encoding="utf-8") as f:
            sub = load_corpus_text(f.read(), corpus_id="_part",
                                   default_doc_id=name[:-len(".conllu")])
        docs.extend(sub.documents)
    meta_path = os.path.join(path, "metadata.tsv")
    if os.path.exists(meta_path):
        extra: dict[str, dict[str, str]] = {}
        with open(meta_path, encoding="utf-8") as f:
            for raw in f:
                line = raw.rstrip("\n")
                if not line.strip() or line.startswith("#"):
                    continue
                parts = line.split("\t")
                if len(parts) != 3:
                    raise MalformedLine(
                        f"metadata.tsv rows need 3 fields: {line!r}")
                extra.setdefault(parts[0], {})[parts[1]] = parts[2]
        docs = [
            Document(d.doc_id, {**d.metadata, **extra.get(d.doc_id, {})},
                     d.sentences) for d in docs
        ]
    cid = corpus_id if corpus_id is not None else os.path.basename(
        os.path.normpath(path))
    return Corpus(cid, docs)


# -- serialization -------------------------------------------------------

def sentence_to_conllu(s: SentenceGraph) -> str:
    """Serialize one sentence back to CoNLL-U. Enhanced edges are written in
    the DEPS column (extra edges only, not the base tree)."""
    by_dep: dict[int, list[tuple[int, str]]] = {}
    for h, d, rel in sorted(s.enhanced_edges):
        by_dep.setdefault(d, []).append((h, rel))
    lines = [f"# sent_id = {s.sentence_id}", f"# text = {s.text()}"]
    for t in s.tokens:
        deps = "|".join(f"{h}:{rel}" for h, rel in by_dep.get(t.index, []))
        misc = "_" if t.space_after else "SpaceAfter=No"
        lines.append("\t".join([
            str(t.index), t.form, t.lemma, t.upos, "_", "_",
            str(t.head), t.deprel, deps or "_", misc,
        ]))
    return "\n".join(lines) + "\n"


def document_to_conllu(doc: Document) -> str:
    parts = [f"# newdoc id = {doc.doc_id}\n"]
    for k in sorted(doc.metadata):
        parts.append(f"# meta: {k} = {doc.metadata[k]}\n")
    for s in doc.sentences:
        parts.append(sentence_to_conllu(s))
        parts.append("\n")
    return "".join(parts)


def corpus_to_conllu(c: Corpus) -> str:
    return "".join(document_to_conllu(d) for d in c.documents)


def save_corpus(c: Corpus, path: str) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(corpus_to_conllu(c))


def load_corpus_path(path: str, corpus_id: str | None = None) -> Corpus:
    """Load a corpus from either a manifest directory or a .conllu file."""
    if os.path.isdir(path):
        return load_corpus_dir(path, corpus_id)
    with open(path, encoding="utf-8") as f:
        text = f.read()
    cid = corpus_id if corpus_id is not None else os.path.splitext(
        os.path.basename(path))[0]
    return load_corpus_text(text, cid)


# -- navigation ----------------------------------------------------------

def context_window(c: Corpus, sentence_id: str, before: int,
                   after: int) -> list[SentenceGraph]:
    """Up to ``before + 1 + after`` sentences around the center, clipped at
    the boundaries of the center's document."""
    if before < 0 or after < 0:
        raise ValueError("before/after must be >= 0")
    doc = c.document_of(sentence_id)
    pos = next(i for i, s in enumerate(doc.sentences)
               if s.sentence_id == sentence_id)
    lo = max(0, pos - before)
    hi = min(len(doc.sentences), pos + after + 1)
    return list(doc.sentences[lo:hi])
