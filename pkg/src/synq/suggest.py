"""Query suggestion mining: collect syntactic paths between seed lexical
pairs and rank them by corpus frequency.

Paths run along base-tree edges by default (so mining is independent of
enhancement configuration); pass ``include_enhanced=True`` to follow
enhanced edges too, in which case the shortest path is used.
"""

from __future__ import annotations

from collections import Counter, deque
from dataclasses import dataclass

from .corpus import Corpus, SentenceGraph
from .query import GraphQuery, NodeConstraint, QueryEdge, query_to_dsl


@dataclass(frozen=True)
class SeedPair:
    lemma_a: str
    lemma_b: str

    def __post_init__(self):
        if not self.lemma_a or not self.lemma_b:
            raise ValueError("seed lemmas must be nonempty")
        if self.lemma_a == self.lemma_b:
            raise ValueError("seed lemmas must differ")

    @staticmethod
    def parse(text: str) -> "SeedPair":
        """Parse the ``a:b`` seed format, e.g. ``complainant:reliable``."""
        if ":" not in text:
            raise ValueError(f"seed pair must be 'a:b', got {text!r}")
        a, b = text.split(":", 1)
        return SeedPair(a.strip(), b.strip())


@dataclass(frozen=True)
class PathStep:
    direction: str  # "up" (to head) or "down" (to dependent)
    deprel: str


@dataclass(frozen=True)
class PathSignature:
    steps: tuple[PathStep, ...]
    count: int
    examples: tuple[str, ...] = ()  # up to 5 sentence ids

    def canonical(self) -> str:
        return " ".join(f"{s.direction}:{s.deprel}" for s in self.steps)


def _sentence_path(s: SentenceGraph, a: int, b: int,
                   include_enhanced: bool) -> tuple[PathStep, ...] | None:
    """Steps from token a to token b. Over the base tree this is the unique
    tree path; with enhanced edges it is a BFS shortest path with
    deterministic tie-breaking by token index."""
    edges = s.all_edges if include_enhanced else s.base_edges
    neighbors: dict[int, list[tuple[int, PathStep]]] = {}
    for h, d, rel in sorted(edges):
        if h < 1:
            continue
        neighbors.setdefault(d, []).append((h, PathStep("up", rel)))
        neighbors.setdefault(h, []).append((d, PathStep("down", rel)))
    back: dict[int, tuple[int, PathStep]] = {a: (a, PathStep("", ""))}
    queue = deque([a])
    while queue:
        cur = queue.popleft()
        if cur == b:
            break
        for nxt, step in neighbors.get(cur, ()):
            if nxt not in back:
                back[nxt] = (cur, step)
                queue.append(nxt)
    if b not in back:
        return None
    steps: list[PathStep] = []
    node = b
    while node != a:
        prev, step = back[node]
        steps.append(step)
        node = prev
    return tuple(reversed(steps))


def mine_paths(c: Corpus, pairs: list[SeedPair], k: int,
               include_enhanced: bool = False) -> list[PathSignature]:
    """Top-k path signatures connecting any seed pair, ranked by corpus
    frequency (count desc, canonical string asc). Occurrence pairing is
    all-pairs within a sentence."""
    if k < 1:
        raise ValueError("k must be >= 1")
    counts: Counter[tuple[PathStep, ...]] = Counter()
    examples: dict[tuple[PathStep, ...], list[str]] = {}
    folded_pairs = [(p.lemma_a.casefold(), p.lemma_b.casefold())
                    for p in pairs]
    for s in c.sentences():
        by_lemma: dict[str, list[int]] = {}
        for t in s.tokens:
            by_lemma.setdefault(t.lemma.casefold(), []).append(t.index)
        for la, lb in folded_pairs:
            if la not in by_lemma or lb not in by_lemma:
                continue
            for ta in by_lemma[la]:
                for tb in by_lemma[lb]:
                    if ta == tb:
                        continue
                    steps = _sentence_path(s, ta, tb, include_enhanced)
                    if steps is None:
                        continue
                    counts[steps] += 1
                    ex = examples.setdefault(steps, [])
                    if len(ex) < 5 and s.sentence_id not in ex:
                        ex.append(s.sentence_id)
    sigs = [
        PathSignature(steps=steps, count=n, examples=tuple(examples[steps]))
        for steps, n in counts.items()
    ]
    sigs.sort(key=lambda p: (-p.count, p.canonical()))
    return sigs[:k]


def path_to_query(p: PathSignature, keep_lexical: str,
                  pair: SeedPair, name: str = "path") -> GraphQuery:
    """Turn a path signature into a query: endpoints become captures X and Y,
    interior nodes structural. ``keep_lexical`` in {none, a, b, both}
    reinstates lemma constraints on the endpoints."""
    if keep_lexical not in ("none", "a", "b", "both"):
        raise ValueError(f"keep_lexical must be none|a|b|both, got "
                         f"{keep_lexical!r}")
    n_nodes = len(p.steps) + 1
    nodes = []
    for pos in range(n_nodes):
        node_id = f"p{pos}"
        capture = lemma = None
        if pos == 0:
            capture = "X"
            if keep_lexical in ("a", "both"):
                lemma = pair.lemma_a
        elif pos == n_nodes - 1:
            capture = "Y"
            if keep_lexical in ("b", "both"):
                lemma = pair.lemma_b
        nodes.append(NodeConstraint(node_id=node_id, capture=capture,
                                    lemma=lemma))
    edges = []
    for pos, step in enumerate(p.steps):
        cur, nxt = f"p{pos}", f"p{pos + 1}"
        if step.direction == "up":
            edges.append(QueryEdge(source=nxt, target=cur,
                                   deprel=step.deprel))
        else:
            edges.append(QueryEdge(source=cur, target=nxt,
                                   deprel=step.deprel))
    return GraphQuery(name=name, nodes=tuple(nodes), edges=tuple(edges))


def suggestions_to_dsl(sigs: list[PathSignature], pair: SeedPair,
                       keep_lexical: str = "none") -> str:
    """Emit ranked suggestions as '---'-separated query DSL blocks, each
    preceded by a ``# count=<n>`` comment; the output loads directly as a
    query set file."""
    blocks = []
    for rank, sig in enumerate(sigs, start=1):
        q = path_to_query(sig, keep_lexical, pair,
                          name=f"suggestion_{rank}")
        blocks.append(f"# count={sig.count}\n" + query_to_dsl(q))
    return "\n---\n".join(blocks)


def load_seed_pairs(path: str) -> list[SeedPair]:
    """One ``a:b`` pair per line; blank lines and # comments skipped."""
    pairs = []
    with open(path, encoding="utf-8") as f:
        for raw in f:
            line = raw.strip()
            if line and not line.startswith("#"):
                pairs.append(SeedPair.parse(line))
    return pairs
