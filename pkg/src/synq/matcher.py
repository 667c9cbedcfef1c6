"""Exact subgraph matching of graph queries inside sentences.

A match is an injective assignment of pattern nodes to tokens such that
every node constraint holds and every pattern edge is realized, with the
right direction and deprel, over the sentence's base plus enhanced edges.

Matches that differ only in structural-node placement are collapsed:
captures and constrained nodes define match identity, and the collapsed
representative is the assignment with the lexicographically smallest full
token tuple (in node declaration order). Results are ordered by that tuple,
which makes matching deterministic and independent of search order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .corpus import Corpus, SentenceGraph
from .enhance import expand_np
from .errors import FingerprintMismatch, UnknownCapture
from .index import CandidateSet, Index, candidates, corpus_fingerprint
from .query import GraphQuery, NodeConstraint, WILDCARD

# Captured tokens with these tags get their display span expanded to the
# surrounding noun phrase.
NOUN_TAGS = frozenset({"NOUN", "PROPN"})

DEFAULT_MATCH_CAP = 10_000


@dataclass(frozen=True)
class CaptureSpan:
    token_index: int
    start: int
    end: int
    text: str
    lemma: str
    form: str


@dataclass(frozen=True)
class Match:
    sentence_id: str
    assignment: tuple[tuple[str, int], ...]  # (node_id, token index) pairs
    captures: tuple[tuple[str, CaptureSpan], ...]

    @property
    def assignment_map(self) -> dict[str, int]:
        return dict(self.assignment)

    @property
    def capture_map(self) -> dict[str, CaptureSpan]:
        return dict(self.captures)


@dataclass(frozen=True)
class MatchSet:
    query_name: str
    matches: tuple[Match, ...]
    truncated: bool = False

    def sentence_ids(self) -> tuple[str, ...]:
        seen: dict[str, None] = {}
        for m in self.matches:
            seen.setdefault(m.sentence_id)
        return tuple(seen)


def _node_ok(n: NodeConstraint, lemma_folded: str, upos: str) -> bool:
    if n.lemma is not None and lemma_folded != n.lemma.casefold():
        return False
    if n.word_list is not None:
        members = n.lemma_set if n.lemma_set is not None else frozenset()
        if lemma_folded not in members:
            return False
    if n.upos is not None and upos != n.upos:
        return False
    return True


def _selectivity(n: NodeConstraint) -> int:
    if n.lemma is not None:
        return 0
    if n.word_list is not None:
        return 1
    if n.upos is not None:
        return 2
    return 3


def _iter_assignments(s: SentenceGraph, q: GraphQuery):
    """Yield raw injective assignments as dicts node_id -> token index."""
    tokens = s.tokens
    if not tokens:
        return
    folded = {t.index: t.lemma.casefold() for t in tokens}
    node_by_id = {n.node_id: n for n in q.nodes}

    heads_of: dict[int, list[tuple[int, str]]] = {}
    deps_of: dict[int, list[tuple[int, str]]] = {}
    pair_rels: dict[tuple[int, int], set[str]] = {}
    for h, d, rel in s.all_edges:
        if h < 1:
            continue
        deps_of.setdefault(h, []).append((d, rel))
        heads_of.setdefault(d, []).append((h, rel))
        pair_rels.setdefault((h, d), set()).add(rel)

    adjacent: dict[str, list[tuple[str, str, bool]]] = {
        n.node_id: [] for n in q.nodes}
    for e in q.edges:
        adjacent[e.source].append((e.target, e.deprel, True))   # source=head
        adjacent[e.target].append((e.source, e.deprel, False))

    # Visit order: most selective seed, then grow along pattern edges.
    order: list[str] = []
    placed: set[str] = set()
    decl = {n.node_id: i for i, n in enumerate(q.nodes)}
    remaining = set(node_by_id)
    while remaining:
        frontier = [nid for nid in remaining
                    if any(o in placed for o, _, _ in adjacent[nid])]
        pool = frontier or sorted(remaining, key=lambda x: decl[x])
        pick = min(pool, key=lambda nid: (_selectivity(node_by_id[nid]),
                                          decl[nid]))
        order.append(pick)
        placed.add(pick)
        remaining.discard(pick)

    def edge_holds(head_tok: int, dep_tok: int, rel: str) -> bool:
        rels = pair_rels.get((head_tok, dep_tok))
        if not rels:
            return False
        return rel == WILDCARD or rel in rels

    def candidates_for(nid: str, assign: dict[str, int]) -> Iterable[int]:
        n = node_by_id[nid]
        pool: set[int] | None = None
        for other, rel, i_am_head in adjacent[nid]:
            if other not in assign:
                continue
            tok = assign[other]
            neigh = deps_of.get(tok, ()) if not i_am_head \
                else heads_of.get(tok, ())
            local = {idx for idx, r in neigh if rel == WILDCARD or r == rel}
            pool = local if pool is None else pool & local
            if not pool:
                return ()
        if pool is None:
            pool = {t.index for t in tokens}
        out = []
        for idx in sorted(pool):
            if idx in assign.values():
                continue
            if not _node_ok(n, folded[idx], tokens[idx - 1].upos):
                continue
            # Verify every edge to already-placed neighbors both ways.
            good = True
            for other, rel, i_am_head in adjacent[nid]:
                if other not in assign:
                    continue
                h, d = (idx, assign[other]) if i_am_head else (assign[other], idx)
                if not edge_holds(h, d, rel):
                    good = False
                    break
            if good:
                out.append(idx)
        return out

    assign: dict[str, int] = {}

    def rec(depth: int):
        if depth == len(order):
            yield dict(assign)
            return
        nid = order[depth]
        for idx in candidates_for(nid, assign):
            assign[nid] = idx
            yield from rec(depth + 1)
            del assign[nid]

    yield from rec(0)


def canonical_matches(s: SentenceGraph, q: GraphQuery,
                      raw: Iterable[dict[str, int]]) -> list[Match]:
    """Collapse raw assignments by capture/constrained-node identity, pick
    the smallest full tuple per group, sort, and build Match objects."""
    node_ids = [n.node_id for n in q.nodes]
    identity_ids = [n.node_id for n in q.nodes if not n.structural]
    best: dict[tuple[int, ...], tuple[int, ...]] = {}
    for a in raw:
        key = tuple(a[nid] for nid in identity_ids)
        full = tuple(a[nid] for nid in node_ids)
        if key not in best or full < best[key]:
            best[key] = full
    text = s.text()
    out = []
    for full in sorted(best.values()):
        assign = dict(zip(node_ids, full))
        caps = []
        for n in q.nodes:
            if n.capture is None:
                continue
            idx = assign[n.node_id]
            tok = s.token(idx)
            if tok.upos in NOUN_TAGS:
                start, end = expand_np(s, idx)
            else:
                start, end = tok.char_start, tok.char_end
            caps.append((n.capture, CaptureSpan(
                token_index=idx, start=start, end=end,
                text=text[start:end], lemma=tok.lemma, form=tok.form)))
        out.append(Match(sentence_id=s.sentence_id,
                         assignment=tuple(assign.items()),
                         captures=tuple(caps)))
    return out


def match_sentence(s: SentenceGraph, q: GraphQuery,
                   cap: int | None = None) -> list[Match]:
    """All collapsed matches of the query in one sentence, deterministic
    order, truncated to ``cap`` when given."""
    matches = canonical_matches(s, q, _iter_assignments(s, q))
    if cap is not None and len(matches) > cap:
        return matches[:cap]
    return matches


def search(i: Index | None, c: Corpus, q: GraphQuery,
           limit: int = DEFAULT_MATCH_CAP, full_scan: bool = False) -> MatchSet:
    """Match the query over the corpus in corpus order.

    With an index, only candidate sentences are visited; the result is
    identical with or without one (the index is pure pruning). ``limit``
    caps the total number of matches; hitting it sets ``truncated``.
    """
    if i is not None and not full_scan:
        if i.corpus_fingerprint != corpus_fingerprint(c):
            raise FingerprintMismatch(
                f"index was built for a different corpus state")
        cand: CandidateSet = candidates(i, q)
        ordinals: Sequence[int] = cand.ordinals
    else:
        ordinals = range(len(c.sentence_ids))
    matches: list[Match] = []
    truncated = False
    sentences = list(c.sentences())
    for o in ordinals:
        found = match_sentence(sentences[o], q)
        for m in found:
            if len(matches) >= limit:
                truncated = True
                break
            matches.append(m)
        if truncated:
            break
    return MatchSet(query_name=q.name, matches=tuple(matches),
                    truncated=truncated)


def aggregate(m: MatchSet, capture: str, key: str = "lemma",
              query: GraphQuery | None = None) -> list[tuple[str, int]]:
    """Count capture values across a match set, descending count with
    lexicographic tie-break. ``key`` selects lemma or surface form."""
    if query is not None and capture not in query.captures:
        raise UnknownCapture(f"query has no capture named {capture!r}")
    if key not in ("lemma", "form"):
        raise ValueError(f"key must be lemma or form, got {key!r}")
    counts: dict[str, int] = {}
    seen_any = False
    for match in m.matches:
        caps = match.capture_map
        if capture not in caps:
            continue
        seen_any = True
        value = getattr(caps[capture], key)
        counts[value] = counts.get(value, 0) + 1
    if not seen_any and m.matches and query is None:
        raise UnknownCapture(f"no match carries capture {capture!r}")
    return sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))


# -- multi-query extraction ----------------------------------------------

@dataclass(frozen=True)
class QueryStat:
    name: str
    total: int
    unique: int


@dataclass(frozen=True)
class ExtractionReport:
    corpus_id: str
    doc_count: int
    query_stats: tuple[QueryStat, ...]
    doc_sentences: tuple[tuple[str, tuple[str, ...]], ...]
    total_extracted: int
    pct_docs_with_sentence: float
    pct_docs_with_multiple: float

    def doc_sentence_map(self) -> dict[str, tuple[str, ...]]:
        return dict(self.doc_sentences)


def run_query_set(qs: Sequence[GraphQuery], i: Index | None,
                  c: Corpus) -> ExtractionReport:
    """Run every query, compute per-query totals and uniques (sentences
    matched by that query and no other), and corpus coverage stats."""
    if not qs:
        raise ValueError("query set is empty")
    per_query: list[set[str]] = []
    for q in qs:
        ms = search(i, c, q)
        per_query.append(set(ms.sentence_ids()))
    stats = []
    for pos, q in enumerate(qs):
        others: set[str] = set()
        for other_pos, sents in enumerate(per_query):
            if other_pos != pos:
                others |= sents
        mine = per_query[pos]
        stats.append(QueryStat(name=q.name, total=len(mine),
                               unique=len(mine - others)))
    extracted: set[str] = set()
    for sents in per_query:
        extracted |= sents
    doc_sentences = []
    docs_with = 0
    docs_multi = 0
    for doc in c.documents:
        hits = tuple(s.sentence_id for s in doc.sentences
                     if s.sentence_id in extracted)
        if hits:
            doc_sentences.append((doc.doc_id, hits))
            docs_with += 1
            if len(hits) > 1:
                docs_multi += 1
    n_docs = len(c.documents)
    return ExtractionReport(
        corpus_id=c.corpus_id,
        doc_count=n_docs,
        query_stats=tuple(stats),
        doc_sentences=tuple(doc_sentences),
        total_extracted=len(extracted),
        pct_docs_with_sentence=100.0 * docs_with / n_docs if n_docs else 0.0,
        pct_docs_with_multiple=100.0 * docs_multi / n_docs if n_docs else 0.0,
    )


# -- serialization -----------------------------------------------------------

def matchset_to_lines(m: MatchSet) -> list[str]:
    """One match per line: sentence_id, query name, then one
    ``name=text@start-end`` field per capture, all tab-separated."""
    lines = []
    for match in m.matches:
        fields = [match.sentence_id, m.query_name]
        for name, span in match.captures:
            fields.append(f"{name}={span.text}@{span.start}-{span.end}")
        lines.append("\t".join(fields))
    return lines


def report_to_text(r: ExtractionReport) -> str:
    """Key-value text block; field names are part of the on-disk contract."""
    lines = [
        "kind: extraction",
        f"corpus: {r.corpus_id}",
        f"doc_count: {r.doc_count}",
        f"query_count: {len(r.query_stats)}",
        f"total_extracted_sentences: {r.total_extracted}",
        f"docs_with_sentence_pct: {r.pct_docs_with_sentence:.2f}",
        f"docs_with_multiple_pct: {r.pct_docs_with_multiple:.2f}",
    ]
    for s in r.query_stats:
        lines.append(f"query: {s.name}\ttotal: {s.total}\tunique: {s.unique}")
    for doc_id, sents in r.doc_sentences:
        lines.append(f"doc: {doc_id}\tsentences: {' '.join(sents)}")
    return "\n".join(lines) + "\n"


def report_from_text(text: str) -> ExtractionReport:
    fields: dict[str, str] = {}
    stats: list[QueryStat] = []
    docs: list[tuple[str, tuple[str, ...]]] = []
    for line in text.splitlines():
        if not line.strip():
            continue
        if line.startswith("query: "):
            qpart, tpart, upart = line.split("\t")
            stats.append(QueryStat(
                name=qpart[len("query: "):],
                total=int(tpart[len("total: "):]),
                unique=int(upart[len("unique: "):])))
        elif line.startswith("doc: "):
            dpart, spart = line.split("\t")
            sent_ids = tuple(x for x in spart[len("sentences: "):].split(" ")
                             if x)
            docs.append((dpart[len("doc: "):], sent_ids))
        else:
            key, value = line.split(": ", 1)
            fields[key] = value
    return ExtractionReport(
        corpus_id=fields["corpus"],
        doc_count=int(fields["doc_count"]),
        query_stats=tuple(stats),
        doc_sentences=tuple(docs),
        total_extracted=int(fields["total_extracted_sentences"]),
        pct_docs_with_sentence=float(fields["docs_with_sentence_pct"]),
        pct_docs_with_multiple=float(fields["docs_with_multiple_pct"]),
    )
