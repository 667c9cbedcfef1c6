"""Graph-pattern queries and the two surfaces that produce them.

A query is a small labeled graph: nodes carry optional constraints (exact
lemma, word-list membership, POS tag) and optional capture names; edges
carry a deprel or the wildcard ``*``. Queries come either from a direct
line-based DSL or are compiled from an example sentence with markup, in
which case the pattern is the Steiner subtree of the marked tokens in the
example's parse.

Markup grammar, one item per whitespace-separated token of the example:

    word            scaffold: aligns with the parse, not part of the pattern
    $word           anchor on this token's lemma (no capture)
    name:word       capture this token, no constraint
    name:$word      capture + lemma anchor
    name:[w1|w2]    capture + inline word list (w1 doubles as the surface)
    name:@list      capture + named word list (surface check skipped)
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

from .corpus import SentenceGraph, load_conllu
from .errors import (
    ConfigError,
    ParserUnavailable,
    DisconnectedPattern,
    MarkupMismatch,
    NoConstrainedNode,
    NoMarkedToken,
    QuerySyntaxError,
    UnknownList,
    UnknownNodeId,
)

WILDCARD = "*"
_INLINE_PREFIX = "~inline"


@dataclass(frozen=True)
class NodeConstraint:
    """A pattern node. A node with no capture and no constraints is
    structural: it only shapes the path."""

    node_id: str
    capture: str | None = None
    lemma: str | None = None
    word_list: str | None = None
    upos: str | None = None
    lemma_set: frozenset[str] | None = None  # filled by resolve_lists

    def __post_init__(self):
        if self.lemma is not None and self.word_list is not None:
            raise QuerySyntaxError(
                f"node {self.node_id}: lemma and list are exclusive")

    @property
    def structural(self) -> bool:
        return (self.capture is None and self.lemma is None
                and self.word_list is None and self.upos is None)

    @property
    def constrained(self) -> bool:
        return (self.lemma is not None or self.word_list is not None
                or self.upos is not None)


@dataclass(frozen=True)
class QueryEdge:
    """Directed pattern edge: ``source`` is the head."""

    source: str
    target: str
    deprel: str


@dataclass(frozen=True)
class GraphQuery:
    name: str
    nodes: tuple[NodeConstraint, ...]
    edges: tuple[QueryEdge, ...]
    inline_lists: tuple[tuple[str, frozenset[str]], ...] = ()

    def __post_init__(self):
        ids = [n.node_id for n in self.nodes]
        if len(set(ids)) != len(ids):
            raise QuerySyntaxError(f"duplicate node ids in query {self.name}")
        known = set(ids)
        for e in self.edges:
            for nid in (e.source, e.target):
                if nid not in known:
                    raise UnknownNodeId(f"edge references unknown node {nid}")
        if self.nodes and not _connected(ids, self.edges):
            raise DisconnectedPattern(
                f"query {self.name}: pattern graph is not connected")
        if self.nodes and all(n.structural for n in self.nodes):
            raise NoConstrainedNode(
                f"query {self.name}: every node is structural")

    def node(self, node_id: str) -> NodeConstraint:
        for n in self.nodes:
            if n.node_id == node_id:
                return n
        raise UnknownNodeId(node_id)

    @property
    def captures(self) -> tuple[str, ...]:
        return tuple(n.capture for n in self.nodes if n.capture is not None)


def _connected(ids: Sequence[str], edges: Sequence[QueryEdge]) -> bool:
    if len(ids) <= 1:
        return True
    adj: dict[str, set[str]] = {i: set() for i in ids}
    for e in edges:
        adj[e.source].add(e.target)
        adj[e.target].add(e.source)
    seen = {ids[0]}
    stack = [ids[0]]
    while stack:
        for nxt in adj[stack.pop()]:
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return len(seen) == len(ids)


@dataclass(frozen=True)
class WordListTable:
    """Named sets of lemmas; membership tests are case-folded."""

    lists: Mapping[str, frozenset[str]] = field(default_factory=dict)

    def __post_init__(self):
        for name, members in self.lists.items():
            if not name:
                raise ConfigError("word list with empty name")
            if not members:
                raise ConfigError(f"word list {name!r} is empty")

    @staticmethod
    def load(path: str) -> "WordListTable":
        """One list per line: ``name: w1, w2, w3``."""
        lists: dict[str, frozenset[str]] = {}
        with open(path, encoding="utf-8") as f:
            for line_no, raw in enumerate(f, start=1):
                line = raw.strip()
                if not line or line.startswith("#"):
                    continue
                if ":" not in line:
                    raise ConfigError(f"bad word list line {line_no}: {line!r}")
                name, members = line.split(":", 1)
                words = frozenset(w.strip().casefold()
                                  for w in members.split(",") if w.strip())
                lists[name.strip()] = words
        return WordListTable(lists)


# -- direct DSL -----------------------------------------------------------

_EDGE_RE = re.compile(r"^edge\s+(\S+)\s+-(.+?)->\s+(\S+)\s*$")
_NODE_KEYS = ("capture", "lemma", "list", "pos")


def parse_graph_dsl(text: str, name: str = "query") -> GraphQuery:
    """Parse the line-based query DSL::

        name: descriptive name
        node <id> [capture=<name>] [lemma=<l>] [list=@<name>] [pos=<P>]
        edge <src> -<deprel|*>-> <dst>

    ``edge a -nsubj-> t`` declares ``a`` as the head. Comment lines start
    with '#'.
    """
    nodes: list[NodeConstraint] = []
    edges: list[QueryEdge] = []
    seen_ids: set[str] = set()
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("name:"):
            name = line[len("name:"):].strip()
            continue
        if line.startswith("node"):
            parts = line.split()
            if len(parts) < 2:
                raise QuerySyntaxError("node line needs an id",
                                       line_number=line_no)
            node_id = parts[1]
            if node_id in seen_ids:
                raise QuerySyntaxError(f"duplicate node id {node_id}",
                                       line_number=line_no)
            seen_ids.add(node_id)
            kwargs: dict[str, str | None] = {}
            for item in parts[2:]:
                if "=" not in item:
                    raise QuerySyntaxError(f"bad node attribute {item!r}",
                                           line_number=line_no)
                key, value = item.split("=", 1)
                if key not in _NODE_KEYS or not value:
                    raise QuerySyntaxError(f"bad node attribute {item!r}",
                                           line_number=line_no)
                kwargs[key] = value
            word_list = kwargs.get("list")
            if word_list is not None:
                if not word_list.startswith("@"):
                    raise QuerySyntaxError(
                        f"list reference must start with '@': {word_list!r}",
                        line_number=line_no)
                word_list = word_list[1:]
            try:
                nodes.append(NodeConstraint(
                    node_id=node_id,
                    capture=kwargs.get("capture"),
                    lemma=kwargs.get("lemma"),
                    word_list=word_list,
                    upos=kwargs.get("pos")))
            except QuerySyntaxError as e:
                raise QuerySyntaxError(str(e), line_number=line_no) from None
            continue
        if line.startswith("edge"):
            m = _EDGE_RE.match(line)
            if not m:
                raise QuerySyntaxError(f"bad edge line: {line!r}",
                                       line_number=line_no)
            src, rel, dst = m.groups()
            for nid in (src, dst):
                if nid not in seen_ids:
                    raise UnknownNodeId(
                        f"edge references undeclared node {nid}",
                        line_number=line_no)
            edges.append(QueryEdge(src, dst, rel))
            continue
        raise QuerySyntaxError(f"unrecognized line: {line!r}",
                               line_number=line_no)
    if not nodes:
        raise QuerySyntaxError("query has no nodes")
    return GraphQuery(name=name, nodes=tuple(nodes), edges=tuple(edges))


def query_to_dsl(q: GraphQuery) -> str:
    """Render a query back to DSL text. Inline lists are rendered as
    bracketed alternatives on a synthetic list attribute, so only queries
    without inline lists round-trip through :func:`parse_graph_dsl`."""
    lines = [f"name: {q.name}"]
    inline = dict(q.inline_lists)
    for n in q.nodes:
        attrs = []
        if n.capture:
            attrs.append(f"capture={n.capture}")
        if n.lemma:
            attrs.append(f"lemma={n.lemma}")
        if n.word_list:
            if n.word_list in inline:
                raise ValueError(
                    "inline word lists cannot be rendered to the DSL")
            attrs.append(f"list=@{n.word_list}")
        if n.upos:
            attrs.append(f"pos={n.upos}")
        lines.append(" ".join(["node", n.node_id] + attrs))
    for e in q.edges:
        lines.append(f"edge {e.source} -{e.deprel}-> {e.target}")
    return "\n".join(lines) + "\n"


# -- search by example ------------------------------------------------------

_CAPTURE_RE = re.compile(r"^([A-Za-z_]\w*):(.+)$", re.S)
_LIST_RE = re.compile(r"^\[(.+)\]$", re.S)


@dataclass(frozen=True)
class _MarkupToken:
    surface: str | None  # None: any surface accepted (named-list reference)
    capture: str | None
    anchor_lemma: bool = False
    inline_words: frozenset[str] | None = None
    list_name: str | None = None

    @property
    def marked(self) -> bool:
        return (self.capture is not None or self.anchor_lemma
                or self.inline_words is not None or self.list_name is not None)


def _parse_markup_token(item: str) -> _MarkupToken:
    capture = None
    m = _CAPTURE_RE.match(item)
    if m:
        capture, item = m.group(1), m.group(2)
    if item.startswith("@"):
        if capture is None:
            raise QuerySyntaxError(f"word-list markup needs a capture: @{item[1:]}")
        return _MarkupToken(surface=None, capture=capture,
                            list_name=item[1:])
    lm = _LIST_RE.match(item)
    if lm:
        if capture is None:
            raise QuerySyntaxError(f"word-list markup needs a capture: {item}")
        words = [w for w in lm.group(1).split("|") if w]
        if not words:
            raise QuerySyntaxError(f"empty word list markup: {item}")
        return _MarkupToken(surface=words[0], capture=capture,
                            inline_words=frozenset(w.casefold() for w in words))
    if item.startswith("$"):
        return _MarkupToken(surface=item[1:], capture=capture,
                            anchor_lemma=True)
    return _MarkupToken(surface=item, capture=capture)


def _path_members(parse: SentenceGraph, a: int, b: int) -> set[int]:
    """Tokens on the base-tree path between a and b, exclusive of nothing;
    returned as the set of path member indices."""
    parent = {t.index: t.head for t in parse.tokens}

    def ancestors(x: int) -> list[int]:
        chain = [x]
        while parent[chain[-1]] != 0:
            chain.append(parent[chain[-1]])
        return chain

    up_a = ancestors(a)
    up_b_set = {}
    for i, x in enumerate(ancestors(b)):
        up_b_set[x] = i
    lca = next(x for x in up_a if x in up_b_set)
    path = up_a[:up_a.index(lca) + 1]
    path += list(reversed(ancestors(b)[:up_b_set[lca]]))
    return set(path)


def compile_example(marked: str, parse: SentenceGraph,
                    lists: WordListTable, name: str = "example") -> GraphQuery:
    """Compile a marked-up example sentence into a graph query.

    Marked tokens become pattern nodes; the pattern's edges are the union of
    base-tree paths between every pair of marked tokens (their Steiner
    subtree), with interior tokens as structural nodes. Deprels and
    directions are copied from the parse.
    """
    items = [_parse_markup_token(tok) for tok in marked.split()]
    if len(items) != len(parse.tokens):
        raise MarkupMismatch(
            f"markup has {len(items)} tokens, parse has {len(parse.tokens)}")
    for item, tok in zip(items, parse.tokens):
        if item.surface is not None and item.surface != tok.form:
            raise MarkupMismatch(
                f"markup token {item.surface!r} != parse token {tok.form!r}")
    for item in items:
        if item.list_name is not None and item.list_name not in lists.lists:
            raise UnknownList(item.list_name)

    marked_idx = [i + 1 for i, item in enumerate(items) if item.marked]
    if not marked_idx:
        raise NoMarkedToken("no marked token in example")

    members: set[int] = set(marked_idx)
    for i, a in enumerate(marked_idx):
        for b in marked_idx[i + 1:]:
            members |= _path_members(parse, a, b)

    inline: list[tuple[str, frozenset[str]]] = []
    nodes: list[NodeConstraint] = []
    for idx in sorted(members):
        node_id = f"n{idx}"
        if idx in set(marked_idx):
            item = items[idx - 1]
            lemma = parse.token(idx).lemma if item.anchor_lemma else None
            word_list = item.list_name
            lemma_set = None
            if item.inline_words is not None:
                word_list = f"{_INLINE_PREFIX}{len(inline)}"
                inline.append((word_list, item.inline_words))
                lemma_set = item.inline_words
            nodes.append(NodeConstraint(
                node_id=node_id, capture=item.capture, lemma=lemma,
                word_list=word_list, lemma_set=lemma_set))
        else:
            nodes.append(NodeConstraint(node_id=node_id))

    edges: list[QueryEdge] = []
    for t in parse.tokens:
        if t.index in members and t.head in members:
            edges.append(QueryEdge(f"n{t.head}", f"n{t.index}", t.deprel))
    edges.sort(key=lambda e: (e.source, e.target))
    return GraphQuery(name=name, nodes=tuple(nodes), edges=tuple(edges),
                      inline_lists=tuple(inline))


def resolve_lists(q: GraphQuery, lists: WordListTable) -> GraphQuery:
    """Materialize every word-list reference into a lemma set."""
    inline = dict(q.inline_lists)
    nodes = []
    changed = False
    for n in q.nodes:
        if n.word_list is not None and n.lemma_set is None:
            if n.word_list in inline:
                members = inline[n.word_list]
            elif n.word_list in lists.lists:
                members = lists.lists[n.word_list]
            else:
                raise UnknownList(n.word_list)
            nodes.append(replace(n, lemma_set=members))
            changed = True
        else:
            nodes.append(n)
    if not changed:
        return q
    return GraphQuery(name=q.name, nodes=tuple(nodes), edges=q.edges,
                      inline_lists=q.inline_lists)


# -- query files -------------------------------------------------------------

def _split_records(text: str) -> list[list[str]]:
    records: list[list[str]] = [[]]
    for raw in text.splitlines():
        if raw.strip() == "---":
            records.append([])
        else:
            records[-1].append(raw)
    return [r for r in records if any(line.strip() for line in r)]


def parse_query_records(text: str, lists: WordListTable,
                        parse_provider=None) -> list[GraphQuery]:
    """Parse a query file: records separated by '---' lines, each either a
    DSL block or an ``example:`` line with markup. Example records carry
    their parse inline under a ``parse:`` line (CoNLL-U token lines), or are
    parsed through ``parse_provider(text) -> SentenceGraph`` when given.
    """
    queries: list[GraphQuery] = []
    for rec_no, rec in enumerate(_split_records(text), start=1):
        name = f"q{rec_no}"
        example = None
        parse_lines: list[str] | None = None
        dsl_lines: list[str] = []
        for line in rec:
            stripped = line.strip()
            if parse_lines is not None:
                if stripped:
                    parse_lines.append(stripped)
                continue
            if stripped.startswith("name:"):
                name = stripped[len("name:"):].strip()
            elif stripped.startswith("example:"):
                example = stripped[len("example:"):].strip()
            elif stripped == "parse:":
                parse_lines = []
            else:
                dsl_lines.append(line)
        if example is not None:
            if parse_lines:
                doc = load_conllu("\n".join(parse_lines) + "\n", doc_id="_q")
                parse = doc.sentences[0]
            elif parse_provider is not None:
                parse = parse_provider(_strip_markup_for_parse(example))
            else:
                raise ParserUnavailable(
                    f"example query {name!r} has no parse attached")
            queries.append(compile_example(example, parse, lists, name=name))
        else:
            queries.append(parse_graph_dsl("\n".join(dsl_lines), name=name))
    return queries


def _strip_markup_for_parse(marked: str) -> str:
    parts = []
    for tok in marked.split():
        item = _parse_markup_token(tok)
        parts.append(item.surface if item.surface is not None else tok)
    return " ".join(parts)


def load_query_file(path: str, lists: WordListTable,
                    parse_provider=None) -> list[GraphQuery]:
    with open(path, encoding="utf-8") as f:
        return parse_query_records(f.read(), lists, parse_provider)
