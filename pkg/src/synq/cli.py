"""Batch command line: one subcommand per pipeline stage.

Exit codes: 0 success, 1 usage error, 2 data error. All outputs are UTF-8
and byte-identical across runs given the same inputs and seeds.
"""

from __future__ import annotations

import argparse
import sys

from . import corpus as corpus_mod
from .enhance import LabelMap, canonicalize, apply_rules, load_rule_set
from .errors import SynqError
from .index import build_index, load_index, save_index
from .matcher import (
    matchset_to_lines,
    report_from_text,
    report_to_text,
    run_query_set,
    search,
)
from .ontology_eval import (
    GRANULAR,
    AnnotationRecord,
    LabelOntology,
    RatingsMatrix,
    baseline_predict,
    context_size_histogram,
    distribution_of,
    default_lexicon,
    kl_divergence,
    krippendorff_alpha,
    load_lexicon,
    rule_classifier,
)
from .query import WordListTable, load_query_file, resolve_lists
from .suggest import load_seed_pairs, mine_paths, suggestions_to_dsl

_DEFAULT_LABEL_MAP_RESOURCE = "label_map.tsv"


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse defaults to exit code 2
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _default_label_map() -> LabelMap:
    from importlib import resources
    text = resources.files("synq.data").joinpath(
        _DEFAULT_LABEL_MAP_RESOURCE).read_text(encoding="utf-8")
    pairs = {}
    for line in text.splitlines():
        if line.strip() and not line.startswith("#"):
            src, dst = line.split("\t")
            pairs[src] = dst
    return LabelMap(pairs)


def _load_corpus(path: str, rules: str | None):
    """Load a corpus store or manifest directory; labels are canonicalized
    with the bundled map (idempotent), rules applied only when given."""
    c = corpus_mod.load_corpus_path(path)
    label_map = _default_label_map()
    rule_set = load_rule_set(rules) if rules else None
    docs = []
    for doc in c.documents:
        sents = []
        for s in doc.sentences:
            s = canonicalize(s, label_map)
            if rule_set is not None:
                s = apply_rules(s, rule_set)
            sents.append(s)
        docs.append(corpus_mod.Document(doc.doc_id, doc.metadata,
                                        tuple(sents)))
    return corpus_mod.Corpus(c.corpus_id, docs)


def _load_lists(path: str | None) -> WordListTable:
    return WordListTable.load(path) if path else WordListTable({})


def _write_out(text: str, out: str | None):
    if out:
        with open(out, "w", encoding="utf-8") as f:
            f.write(text)
    else:
        sys.stdout.write(text)


def _cmd_ingest(args) -> int:
    c = _load_corpus(args.corpus, args.rules)
    corpus_mod.save_corpus(c, args.out)
    print(f"ingested {len(c.documents)} documents, "
          f"{len(c.sentence_ids)} sentences -> {args.out}")
    return 0


def _cmd_index(args) -> int:
    c = _load_corpus(args.corpus, args.rules)
    idx = build_index(c)
    save_index(idx, args.out)
    print(f"indexed {len(idx.sentence_ids)} sentences -> {args.out}")
    return 0


def _cmd_search(args) -> int:
    c = _load_corpus(args.corpus, args.rules)
    lists = _load_lists(args.lists)
    queries = load_query_file(args.queries, lists)
    idx = load_index(args.index) if args.index else build_index(c)
    lines = []
    for q in queries:
        q = resolve_lists(q, lists)
        ms = search(idx, c, q, limit=args.limit)
        lines.extend(matchset_to_lines(ms))
    _write_out("\n".join(lines) + ("\n" if lines else ""), args.out)
    return 0


def _cmd_suggest(args) -> int:
    c = _load_corpus(args.corpus, args.rules)
    pairs = load_seed_pairs(args.pairs)
    sigs = mine_paths(c, pairs, args.k)
    text = suggestions_to_dsl(sigs, pairs[0]) if pairs and sigs else ""
    _write_out(text, args.out)
    return 0


def _cmd_extract(args) -> int:
    c = _load_corpus(args.corpus, args.rules)
    lists = _load_lists(args.lists)
    queries = [resolve_lists(q, lists)
               for q in load_query_file(args.queries, lists)]
    idx = load_index(args.index) if args.index else build_index(c)
    report = run_query_set(queries, idx, c)
    _write_out(report_to_text(report), args.out)
    if args.sentences_out:
        sids = [sid for _, sents in report.doc_sentences for sid in sents]
        with open(args.sentences_out, "w", encoding="utf-8") as f:
            f.write("\n".join(sids) + ("\n" if sids else ""))
    return 0


def _cmd_classify(args) -> int:
    c = _load_corpus(args.corpus, args.rules)
    with open(args.sentences, encoding="utf-8") as f:
        sids = [line.strip() for line in f if line.strip()]
    if args.baseline == "rule":
        lexicon = load_lexicon(args.lexicon) if args.lexicon \
            else default_lexicon()
        labels = {sid: rule_classifier(c.sentence(sid).text(), lexicon)
                  for sid in sids}
    else:
        with open(args.train, encoding="utf-8") as f:
            train = [line.strip() for line in f if line.strip()]
        labels = baseline_predict(args.baseline, train, sids, seed=args.seed)
    lines = [f"{sid}\t{labels[sid]}" for sid in sids]
    _write_out("\n".join(lines) + ("\n" if lines else ""), args.out)
    return 0


def _read_labels(path: str) -> list[str]:
    with open(path, encoding="utf-8") as f:
        return [line.strip() for line in f if line.strip()]


def _cmd_eval(args) -> int:
    out_lines: list[str] = []
    if args.kind == "iaa":
        matrix = RatingsMatrix.load_tsv(args.ratings)
        ontology = LabelOntology.load(args.ontology) if args.ontology \
            else LabelOntology.default()
        alpha = krippendorff_alpha(
            matrix, level=args.level, ontology=ontology,
            exclude_not_relevant=args.exclude_not_relevant)
        out_lines.append(f"alpha {alpha:.4f}")
    elif args.kind == "dist":
        p = distribution_of(_read_labels(args.labels))
        for label, prob in sorted(p.probs.items(),
                                  key=lambda kv: (-kv[1], kv[0])):
            out_lines.append(f"{label}\t{prob:.6f}")
        if args.labels_pred:
            q = distribution_of(_read_labels(args.labels_pred))
            forward = kl_divergence(p, q, epsilon=args.epsilon)
            reverse = kl_divergence(q, p, epsilon=args.epsilon)
            out_lines.append(f"kl_forward_nats {forward:.6f}")
            out_lines.append(f"kl_reverse_nats {reverse:.6f}")
            out_lines.append(
                "# KL depends on direction and log base; both directions "
                "are shown in nats. Externally reported values may use a "
                "different, unstated convention.")
    elif args.kind == "coverage":
        with open(args.report, encoding="utf-8") as f:
            report = report_from_text(f.read())
        out_lines.append(f"doc_count {report.doc_count}")
        out_lines.append(
            f"total_extracted_sentences {report.total_extracted}")
        out_lines.append(
            f"docs_with_sentence_pct {report.pct_docs_with_sentence:.2f}")
        out_lines.append(
            f"docs_with_multiple_pct {report.pct_docs_with_multiple:.2f}")
    elif args.kind == "contrib":
        with open(args.report, encoding="utf-8") as f:
            report = report_from_text(f.read())
        for s in report.query_stats:
            out_lines.append(f"query {s.name}\ttotal {s.total}\t"
                             f"unique {s.unique}")
    elif args.kind == "context":
        records = []
        with open(args.annotations, encoding="utf-8") as f:
            for raw in f:
                if raw.strip():
                    records.append(AnnotationRecord.from_line(raw))
        hist = context_size_histogram(records)
        for (b, a), n in sorted(hist.items()):
            out_lines.append(f"({b},{a})\t{n}")
    _write_out("\n".join(out_lines) + ("\n" if out_lines else ""), args.out)
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .ontology_eval import LabelOntology
    from .service import AnnotationStore, ParserAdapter, ServiceState, \
        create_app

    state = ServiceState(
        lists=_load_lists(args.lists),
        rule_set=load_rule_set(args.rules) if args.rules else None,
        label_map=_default_label_map(),
        ontology=LabelOntology.load(args.ontology) if args.ontology
        else LabelOntology.default(),
        store=AnnotationStore(args.annotations) if args.annotations else None,
        parser=ParserAdapter(endpoint=args.parser, enabled=True)
        if args.parser else None,
    )
    if args.corpus:
        state.add_corpus(_load_corpus(args.corpus, args.rules))
    uvicorn.run(create_app(state), host=args.host, port=args.port,
                log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="synq",
                     description="syntactic extractive search toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_corpus_flags(p):
        p.add_argument("--corpus", required=True,
                       help="corpus store file or manifest directory")
        p.add_argument("--rules", help="control-verb list enabling "
                                       "enhancement rules")

    p = sub.add_parser("ingest", help="consolidate a corpus into one store")
    add_corpus_flags(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_ingest)

    p = sub.add_parser("index", help="build the inverted index")
    add_corpus_flags(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_index)

    p = sub.add_parser("search", help="run queries and print match records")
    add_corpus_flags(p)
    p.add_argument("--queries", required=True)
    p.add_argument("--lists")
    p.add_argument("--index")
    p.add_argument("--limit", type=int, default=10000)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_search)

    p = sub.add_parser("suggest", help="mine query suggestions from seeds")
    add_corpus_flags(p)
    p.add_argument("--pairs", required=True, help="a:b seed pairs, one per line")
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_suggest)

    p = sub.add_parser("extract", help="run a query set and report coverage")
    add_corpus_flags(p)
    p.add_argument("--queries", required=True)
    p.add_argument("--lists")
    p.add_argument("--index")
    p.add_argument("--out")
    p.add_argument("--sentences-out", dest="sentences_out")
    p.set_defaults(func=_cmd_extract)

    p = sub.add_parser("classify", help="label extracted sentences")
    add_corpus_flags(p)
    p.add_argument("--sentences", required=True,
                   help="sentence ids, one per line")
    p.add_argument("--lexicon")
    p.add_argument("--baseline", choices=["rule", "random", "majority"],
                   default="rule")
    p.add_argument("--train", help="training labels for baselines")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_classify)

    p = sub.add_parser("eval", help="evaluation reports")
    p.add_argument("kind",
                   choices=["iaa", "dist", "coverage", "contrib", "context"])
    p.add_argument("--ratings")
    p.add_argument("--level", choices=["granular", "high"], default=GRANULAR)
    p.add_argument("--exclude-not-relevant", action="store_true",
                   dest="exclude_not_relevant")
    p.add_argument("--ontology")
    p.add_argument("--labels")
    p.add_argument("--labels-pred", dest="labels_pred")
    p.add_argument("--epsilon", type=float, default=1e-6)
    p.add_argument("--report")
    p.add_argument("--annotations")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("serve", help="start the HTTP service")
    p.add_argument("--corpus")
    p.add_argument("--rules")
    p.add_argument("--lists")
    p.add_argument("--ontology")
    p.add_argument("--annotations")
    p.add_argument("--parser", help="external parser endpoint URL")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8777)
    p.set_defaults(func=_cmd_serve)

    return parser


_EVAL_REQUIRED = {
    "iaa": ["ratings"],
    "dist": ["labels"],
    "coverage": ["report"],
    "contrib": ["report"],
    "context": ["annotations"],
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "eval":
        for flag in _EVAL_REQUIRED[args.kind]:
            if getattr(args, flag) is None:
                parser.error(f"eval {args.kind} requires --{flag}")
    if args.command == "classify" and args.baseline in ("random", "majority") \
            and not args.train:
        parser.error("baselines need --train")
    try:
        return args.func(args)
    except SynqError as e:
        print(f"error: {e.code}: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"error: io: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
