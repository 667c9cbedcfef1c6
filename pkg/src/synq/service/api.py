"""HTTP service exposing corpora, search, suggestions, context windows,
annotation persistence, and reports.

Payloads are JSON with documented field names; errors carry machine-readable
codes (``{"error": {"code": ..., "message": ...}}``). The service is
stateless per request apart from the hosted corpora, the annotation log,
and the most recent extraction run per corpus.
"""

from __future__ import annotations

from typing import Any

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from ..corpus import Corpus, context_window, load_corpus_text
from ..enhance import LabelMap, RuleSet, canonicalize, apply_rules
from ..errors import (
    CompileError,
    MissingData,
    ParserUnavailable,
    SynqError,
    UnknownCorpus,
    UnknownSentence,
)
from ..index import Index, build_index
from ..matcher import (
    ExtractionReport,
    MatchSet,
    aggregate,
    run_query_set,
    search,
)
from ..ontology_eval import (
    AnnotationRecord,
    LabelOntology,
    RatingsMatrix,
    context_size_histogram,
    distribution_of,
    krippendorff_alpha,
    HIGH,
    GRANULAR,
)
from ..query import (
    GraphQuery,
    WordListTable,
    compile_example,
    parse_graph_dsl,
    parse_query_records,
    resolve_lists,
)
from ..suggest import SeedPair, mine_paths, path_to_query, suggestions_to_dsl
from .adapter import ParserAdapter
from .store import AnnotationStore

_COMPILE_ERRORS = ("SyntaxError", "UnknownNodeId", "DisconnectedPattern",
                   "NoConstrainedNode", "MarkupMismatch", "NoMarkedToken",
                   "UnknownList")

_NOT_FOUND = ("UnknownSentence", "UnknownCorpus", "MissingData")


class ServiceState:
    """Everything a running service instance holds."""

    def __init__(self,
                 lists: WordListTable | None = None,
                 rule_set: RuleSet | None = None,
                 label_map: LabelMap | None = None,
                 ontology: LabelOntology | None = None,
                 store: AnnotationStore | None = None,
                 parser: ParserAdapter | None = None):
        self.lists = lists or WordListTable({})
        self.rule_set = rule_set
        self.label_map = label_map or LabelMap({})
        self.ontology = ontology or LabelOntology.default()
        self.store = store
        self.parser = parser
        self.corpora: dict[str, Corpus] = {}
        self.indexes: dict[str, Index] = {}
        self.extractions: dict[str, ExtractionReport] = {}

    def ingest(self, corpus_id: str, conllu_text: str) -> Corpus:
        corpus = load_corpus_text(conllu_text, corpus_id)
        corpus = self.prepare(corpus)
        self.add_corpus(corpus)
        return corpus

    def prepare(self, corpus: Corpus) -> Corpus:
        """Canonicalize labels and apply enhancement rules, per document."""
        docs = []
        for doc in corpus.documents:
            sents = []
            for s in doc.sentences:
                s = canonicalize(s, self.label_map)
                if self.rule_set is not None:
                    s = apply_rules(s, self.rule_set)
                sents.append(s)
            docs.append(type(doc)(doc.doc_id, doc.metadata, tuple(sents)))
        return Corpus(corpus.corpus_id, docs)

    def add_corpus(self, corpus: Corpus) -> None:
        self.corpora[corpus.corpus_id] = corpus
        self.indexes[corpus.corpus_id] = build_index(corpus)

    def corpus(self, corpus_id: str) -> Corpus:
        try:
            return self.corpora[corpus_id]
        except KeyError:
            raise UnknownCorpus(f"unknown corpus: {corpus_id}") from None

    def find_sentence(self, sentence_id: str):
        for corpus in self.corpora.values():
            if corpus.has_sentence(sentence_id):
                return corpus, corpus.sentence(sentence_id)
        raise UnknownSentence(f"unknown sentence: {sentence_id}")

    def compile_query(self, text: str, kind: str,
                      parse_conllu: str | None) -> GraphQuery:
        try:
            if kind == "dsl":
                q = parse_graph_dsl(text)
            elif kind == "example":
                if parse_conllu:
                    from ..corpus import load_conllu
                    doc = load_conllu(parse_conllu, doc_id="_req")
                    if not doc.sentences:
                        raise ParserUnavailable("attached parse is empty")
                    parse = doc.sentences[0]
                elif self.parser is not None:
                    parse = self.parser.parse(text)
                else:
                    raise ParserUnavailable(
                        "example query without parse and no parser adapter")
                parse = canonicalize(parse, self.label_map)
                if self.rule_set is not None:
                    parse = apply_rules(parse, self.rule_set)
                q = compile_example(text, parse, self.lists)
            else:
                raise ValueError(f"unknown query kind: {kind!r}")
            return resolve_lists(q, self.lists)
        except SynqError as e:
            if e.code in _COMPILE_ERRORS:
                raise CompileError(e) from e
            raise


def _matchset_json(ms: MatchSet, state: ServiceState,
                   corpus: Corpus) -> dict[str, Any]:
    matches = []
    for m in ms.matches:
        sent = corpus.sentence(m.sentence_id)
        matches.append({
            "sentence_id": m.sentence_id,
            "doc_id": corpus.document_of(m.sentence_id).doc_id,
            "sentence_text": sent.text(),
            "assignment": dict(m.assignment),
            "captures": [
                {"name": name, "token_index": span.token_index,
                 "start": span.start, "end": span.end, "text": span.text,
                 "lemma": span.lemma, "form": span.form}
                for name, span in m.captures
            ],
        })
    return {"query_name": ms.query_name, "truncated": ms.truncated,
            "matches": matches}


def create_app(state: ServiceState) -> FastAPI:
    app = FastAPI(title="synq", docs_url=None, redoc_url=None)

    @app.exception_handler(SynqError)
    async def synq_error_handler(_: Request, exc: SynqError):
        if exc.code in _NOT_FOUND:
            status = 404
        elif exc.code == "StorageFailure":
            status = 500
        else:
            status = 400
        return JSONResponse(
            status_code=status,
            content={"error": {"code": exc.code, "message": str(exc)}})

    @app.get("/corpora")
    def list_corpora():
        return {"corpora": [
            {"corpus_id": c.corpus_id,
             "documents": len(c.documents),
             "sentences": len(c.sentence_ids)}
            for c in state.corpora.values()
        ]}

    class IngestBody(BaseModel):
        conllu: str

    @app.post("/corpora/{corpus_id}")
    def ingest_corpus(corpus_id: str, body: IngestBody):
        corpus = state.ingest(corpus_id, body.conllu)
        return {"corpus_id": corpus.corpus_id,
                "documents": len(corpus.documents),
                "sentences": len(corpus.sentence_ids)}

    @app.get("/ontology")
    def get_ontology():
        onto = state.ontology
        return {
            "high_level": [
                {"label": h, "children": list(onto.children(h))}
                for h in onto.high_level_labels
            ],
            "not_relevant": "Not relevant",
        }

    class SearchBody(BaseModel):
        corpus_id: str
        query: str
        kind: str = "dsl"
        parse: str | None = None
        limit: int = 1000

    @app.post("/search")
    def handle_search(body: SearchBody):
        corpus = state.corpus(body.corpus_id)
        q = state.compile_query(body.query, body.kind, body.parse)
        ms = search(state.indexes[body.corpus_id], corpus, q,
                    limit=body.limit)
        result = _matchset_json(ms, state, corpus)
        result["aggregations"] = {
            name: [[value, count]
                   for value, count in aggregate(ms, name, key="lemma")]
            for name in q.captures
        }
        return result

    class SuggestBody(BaseModel):
        corpus_id: str
        pairs: list[str]
        k: int = 10
        keep_lexical: str = "none"

    @app.post("/suggest")
    def handle_suggest(body: SuggestBody):
        corpus = state.corpus(body.corpus_id)
        pairs = [SeedPair.parse(p) for p in body.pairs]
        sigs = mine_paths(corpus, pairs, body.k)
        out = []
        for rank, sig in enumerate(sigs, start=1):
            q = path_to_query(sig, body.keep_lexical, pairs[0],
                              name=f"suggestion_{rank}")
            from ..query import query_to_dsl
            out.append({
                "count": sig.count,
                "steps": [f"{s.direction}:{s.deprel}" for s in sig.steps],
                "examples": list(sig.examples),
                "dsl": query_to_dsl(q),
            })
        return {"suggestions": out}

    @app.get("/context/{corpus_id}/{sentence_id}")
    def get_context(corpus_id: str, sentence_id: str,
                    before: int = 0, after: int = 0):
        corpus = state.corpus(corpus_id)
        window = context_window(corpus, sentence_id, before, after)
        return {"sentences": [
            {"sentence_id": s.sentence_id, "text": s.text(),
             "is_center": s.sentence_id == sentence_id}
            for s in window
        ]}

    class AnnotationBody(BaseModel):
        sentence_id: str
        annotator_id: str
        primary_label: str
        secondary_label: str | None = None
        context_before: int = 0
        context_after: int = 0
        correction_target: str | None = None

    @app.post("/annotations")
    def create_annotation(body: AnnotationBody):
        if state.store is None:
            raise MissingData("annotations")
        record = AnnotationRecord(
            sentence_id=body.sentence_id,
            annotator_id=body.annotator_id,
            primary_label=body.primary_label,
            secondary_label=body.secondary_label,
            context_before=body.context_before,
            context_after=body.context_after,
            correction_target=body.correction_target,
        )
        record.validate(state.ontology)
        state.find_sentence(record.sentence_id)
        if record.correction_target is not None:
            state.find_sentence(record.correction_target)
        state.store.append(record)
        return {"ok": True}

    @app.get("/annotations")
    def list_annotations():
        if state.store is None:
            raise MissingData("annotations")
        return {"records": [
            {"sentence_id": r.sentence_id, "annotator_id": r.annotator_id,
             "primary_label": r.primary_label,
             "secondary_label": r.secondary_label,
             "context_before": r.context_before,
             "context_after": r.context_after,
             "correction_target": r.correction_target}
            for r in state.store.records()
        ]}

    class ExtractBody(BaseModel):
        corpus_id: str
        queries: str

    @app.post("/extract")
    def handle_extract(body: ExtractBody):
        corpus = state.corpus(body.corpus_id)
        try:
            qs = parse_query_records(body.queries, state.lists)
            qs = [resolve_lists(q, state.lists) for q in qs]
        except SynqError as e:
            if e.code in _COMPILE_ERRORS:
                raise CompileError(e) from e
            raise
        report = run_query_set(qs, state.indexes[body.corpus_id], corpus)
        state.extractions[body.corpus_id] = report
        return _report_json(report)

    @app.get("/queue/{corpus_id}")
    def annotation_queue(corpus_id: str):
        corpus = state.corpus(corpus_id)
        report = state.extractions.get(corpus_id)
        if report is None:
            raise MissingData("queue")
        items = []
        for _, sents in report.doc_sentences:
            for sid in sents:
                items.append({"sentence_id": sid,
                              "text": corpus.sentence(sid).text()})
        return {"queue": items}

    @app.get("/reports/iaa")
    def report_iaa(level: str = HIGH, exclude_not_relevant: bool = False):
        matrix = _require_ratings(state)
        alpha = krippendorff_alpha(matrix, level=level,
                                   ontology=state.ontology,
                                   exclude_not_relevant=exclude_not_relevant)
        return {"kind": "iaa", "level": level,
                "exclude_not_relevant": exclude_not_relevant,
                "alpha": alpha}

    @app.get("/reports/coverage")
    def report_coverage(corpus_id: str):
        report = state.extractions.get(corpus_id)
        if report is None:
            raise MissingData("coverage")
        return {"kind": "coverage", "corpus_id": corpus_id,
                "doc_count": report.doc_count,
                "total_extracted_sentences": report.total_extracted,
                "docs_with_sentence_pct": report.pct_docs_with_sentence,
                "docs_with_multiple_pct": report.pct_docs_with_multiple}

    @app.get("/reports/query_contrib")
    def report_query_contrib(corpus_id: str):
        report = state.extractions.get(corpus_id)
        if report is None:
            raise MissingData("query_contrib")
        return {"kind": "query_contrib", "corpus_id": corpus_id,
                "queries": [
                    {"name": s.name, "total": s.total, "unique": s.unique}
                    for s in report.query_stats
                ]}

    @app.get("/reports/label_dist")
    def report_label_dist(level: str = GRANULAR):
        records = _require_records(state)
        labels = [r.primary_label for r in records]
        if level == HIGH:
            labels = [state.ontology.to_high_level(x) for x in labels]
        dist = distribution_of(labels)
        return {"kind": "label_dist", "level": level,
                "distribution": {k: v for k, v in
                                 sorted(dist.probs.items(),
                                        key=lambda kv: (-kv[1], kv[0]))}}

    @app.get("/reports/context_hist")
    def report_context_hist():
        records = _require_records(state)
        hist = context_size_histogram(records)
        return {"kind": "context_hist", "bins": [
            {"before": b, "after": a, "count": n}
            for (b, a), n in sorted(hist.items())
        ]}

    return app


def _require_records(state: ServiceState):
    if state.store is None or len(state.store) == 0:
        raise MissingData("annotations")
    return state.store.records()


def _require_ratings(state: ServiceState) -> RatingsMatrix:
    return RatingsMatrix.from_records(_require_records(state))


def _report_json(report: ExtractionReport) -> dict[str, Any]:
    return {
        "kind": "extraction",
        "corpus_id": report.corpus_id,
        "doc_count": report.doc_count,
        "total_extracted_sentences": report.total_extracted,
        "docs_with_sentence_pct": report.pct_docs_with_sentence,
        "docs_with_multiple_pct": report.pct_docs_with_multiple,
        "queries": [
            {"name": s.name, "total": s.total, "unique": s.unique}
            for s in report.query_stats
        ],
        "doc_sentences": [
            {"doc_id": doc_id, "sentences": list(sents)}
            for doc_id, sents in report.doc_sentences
        ],
    }
