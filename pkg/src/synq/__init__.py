"""synq: syntactic extractive search and annotation over dependency-parsed
corpora.

The pipeline: load CoNLL-U corpora, canonicalize and enhance their graphs,
index them, match graph-pattern queries (written directly or compiled from
marked-up example sentences), mine query suggestions from seed lexical
pairs, and evaluate annotation campaigns over a two-tier label ontology.
"""

from .corpus import (
    Corpus,
    Document,
    SentenceGraph,
    Token,
    build_sentence,
    context_window,
    load_conllu,
    load_corpus_dir,
    load_corpus_path,
    load_corpus_text,
    sentence_text,
)
from .enhance import (
    LabelMap,
    RuleSet,
    apply_rules,
    canonicalize,
    default_rule_set,
    expand_np,
)
from .index import Index, build_index, candidates, corpus_fingerprint
from .matcher import (
    ExtractionReport,
    Match,
    MatchSet,
    aggregate,
    match_sentence,
    run_query_set,
    search,
)
from .ontology_eval import (
    NOT_RELEVANT,
    AnnotationRecord,
    LabelDistribution,
    LabelOntology,
    RatingsMatrix,
    accuracy_confusion,
    baseline_predict,
    context_size_histogram,
    distribution_of,
    kl_divergence,
    krippendorff_alpha,
    majority_labels,
    rule_classifier,
)
from .query import (
    GraphQuery,
    NodeConstraint,
    QueryEdge,
    WordListTable,
    compile_example,
    parse_graph_dsl,
    resolve_lists,
)
from .suggest import PathSignature, SeedPair, mine_paths, path_to_query

__version__ = "0.1.0"
