"""Dependency-graph rewriting: label canonicalization, enhancement rules
that add implicit-argument edges, and noun-phrase span expansion.

All functions are pure: they return new SentenceGraph instances and never
mutate base edges. Rules fire in a single ordered pass (no fix-point
iteration), each rule seeing base edges plus edges added by earlier rules.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

from .corpus import Edge, SentenceGraph, Token
from .errors import ConfigError, InvalidIndex

# Relations treated as noun modifiers when expanding a captured noun to a
# display span. Modifiers may precede or follow the noun.
MODIFIER_RELS = frozenset({"det", "amod", "compound", "nmod:poss"})


@dataclass(frozen=True)
class LabelMap:
    """Substitution table for deprel/upos labels, applied once per label.

    Targets must not themselves appear as sources, which makes a single
    application idempotent.
    """

    pairs: Mapping[str, str]

    def __post_init__(self):
        for src, dst in self.pairs.items():
            if dst in self.pairs:
                raise ConfigError(
                    f"label map is not a one-step substitution: "
                    f"{src} -> {dst} but {dst} is also a source")

    def apply(self, label: str) -> str:
        return self.pairs.get(label, label)

    @staticmethod
    def load(path: str) -> "LabelMap":
        """One mapping per line: ``source<TAB>target``."""
        pairs = {}
        with open(path, encoding="utf-8") as f:
            for line_no, raw in enumerate(f, start=1):
                line = raw.rstrip("\n")
                if not line.strip() or line.startswith("#"):
                    continue
                parts = line.split("\t")
                if len(parts) != 2 or not parts[0] or not parts[1]:
                    raise ConfigError(
                        f"bad label map line {line_no}: {line!r}")
                pairs[parts[0]] = parts[1]
        return LabelMap(pairs)


def canonicalize(s: SentenceGraph, m: LabelMap) -> SentenceGraph:
    """Rewrite every deprel and upos through the label map; idempotent."""
    changed = False
    tokens = []
    for t in s.tokens:
        upos = m.apply(t.upos)
        deprel = m.apply(t.deprel)
        if upos != t.upos or deprel != t.deprel:
            changed = True
            t = Token(t.index, t.form, t.lemma, upos, t.head, deprel,
                      t.space_after, t.char_start, t.char_end)
        tokens.append(t)
    enhanced = frozenset((h, d, m.apply(rel)) for h, d, rel in s.enhanced_edges)
    if not changed and enhanced == s.enhanced_edges:
        return s
    return SentenceGraph(s.sentence_id, tuple(tokens), enhanced)


# -- enhancement rules ---------------------------------------------------

@dataclass(frozen=True)
class TriggerEdge:
    """Pattern edge over role names: parent --deprel--> child."""

    parent: str
    child: str
    deprel: str


@dataclass(frozen=True)
class Blocker:
    """Vetoes a rule when ``role`` has any dependent with one of these
    deprels."""

    role: str
    child_deprels: frozenset[str]


@dataclass(frozen=True)
class EnhancementRule:
    name: str
    trigger: tuple[TriggerEdge, ...]
    action: tuple[str, str, str]  # (source role = head, target role, deprel)
    lexical_role: str | None = None  # role whose lemma must be a control verb
    blockers: tuple[Blocker, ...] = ()


@dataclass(frozen=True)
class RuleSet:
    rules: tuple[EnhancementRule, ...]
    control_verbs: frozenset[str]

    def __post_init__(self):
        names = [r.name for r in self.rules]
        if len(set(names)) != len(names):
            raise ConfigError(f"duplicate rule names: {names}")


# The two built-in clausal-complement rules. A control verb with an open
# complement shares an argument with it: the matrix subject when the verb
# has no object ("I want to dance" links dance -> I), the object otherwise
# ("I told him to dance" links dance -> him, never dance -> I).
SUBJECT_CONTROL = EnhancementRule(
    name="subject-control",
    trigger=(TriggerEdge("v", "x", "xcomp"), TriggerEdge("v", "s", "nsubj")),
    action=("x", "s", "nsubj"),
    lexical_role="v",
    blockers=(Blocker("v", frozenset({"obj", "iobj"})),),
)

OBJECT_CONTROL = EnhancementRule(
    name="object-control",
    trigger=(TriggerEdge("v", "x", "xcomp"), TriggerEdge("v", "o", "obj")),
    action=("x", "o", "nsubj"),
    lexical_role="v",
)

DEFAULT_CONTROL_VERBS = frozenset({"want", "tell", "ask", "try"})


def default_rule_set(
        control_verbs: Iterable[str] | None = None) -> RuleSet:
    verbs = frozenset(v.casefold() for v in control_verbs) \
        if control_verbs is not None else DEFAULT_CONTROL_VERBS
    return RuleSet(rules=(SUBJECT_CONTROL, OBJECT_CONTROL),
                   control_verbs=verbs)


def load_control_verbs(path: str) -> frozenset[str]:
    """One lemma per line; blank lines and # comments skipped."""
    verbs = set()
    with open(path, encoding="utf-8") as f:
        for raw in f:
            line = raw.strip()
            if line and not line.startswith("#"):
                verbs.add(line.casefold())
    return frozenset(verbs)


def load_rule_set(path: str) -> RuleSet:
    return default_rule_set(load_control_verbs(path))


def _role_assignments(s: SentenceGraph, rule: EnhancementRule,
                      edges: frozenset[Edge], verbs: frozenset[str]):
    """All injective role -> token assignments satisfying the trigger,
    grown edge by edge so candidates come from graph adjacency."""
    deps_of: dict[int, list[tuple[int, str]]] = {}
    heads_of: dict[int, list[tuple[int, str]]] = {}
    for h, d, rel in edges:
        if h >= 1:
            deps_of.setdefault(h, []).append((d, rel))
            heads_of.setdefault(d, []).append((h, rel))

    def passes(role: str, index: int) -> bool:
        if role == rule.lexical_role:
            return s.token(index).lemma.casefold() in verbs
        return True

    results: list[dict[str, int]] = []

    def rec(assign: dict[str, int], remaining: list[TriggerEdge]):
        if not remaining:
            results.append(dict(assign))
            return
        # Prefer an edge with at least one bound endpoint.
        pick = next((te for te in remaining
                     if te.parent in assign or te.child in assign),
                    remaining[0])
        rest = [te for te in remaining if te is not pick]
        p_bound, c_bound = assign.get(pick.parent), assign.get(pick.child)
        if p_bound is not None and c_bound is not None:
            if any(d == c_bound and rel == pick.deprel
                   for d, rel in deps_of.get(p_bound, ())):
                rec(assign, rest)
            return
        if p_bound is not None:
            cands = [(p_bound, d) for d, rel in sorted(deps_of.get(p_bound, ()))
                     if rel == pick.deprel]
        elif c_bound is not None:
            cands = [(h, c_bound) for h, rel in sorted(heads_of.get(c_bound, ()))
                     if rel == pick.deprel]
        else:
            cands = [(h, d) for h, kids in sorted(deps_of.items())
                     for d, rel in sorted(kids) if rel == pick.deprel]
        used = set(assign.values())
        for h, d in cands:
            new = {}
            if p_bound is None:
                if h in used or not passes(pick.parent, h):
                    continue
                new[pick.parent] = h
            if c_bound is None:
                if d in used or d in new.values() or not passes(pick.child, d):
                    continue
                new[pick.child] = d
            assign.update(new)
            rec(assign, rest)
            for k in new:
                del assign[k]

    rec({}, list(rule.trigger))
    return results


def apply_rules(s: SentenceGraph, r: RuleSet) -> SentenceGraph:
    """Run every rule once, in list order, adding enhanced edges. Base edges
    are never modified; already-present edges are not duplicated."""
    current = s
    for rule in r.rules:
        edges = current.all_edges
        children: dict[int, list[tuple[int, str]]] = {}
        for h, d, rel in edges:
            children.setdefault(h, []).append((d, rel))
        added: list[Edge] = []
        for assign in _role_assignments(current, rule, edges,
                                        r.control_verbs):
            blocked = False
            for blocker in rule.blockers:
                tok = assign[blocker.role]
                if any(rel in blocker.child_deprels
                       for _, rel in children.get(tok, [])):
                    blocked = True
                    break
            if blocked:
                continue
            src_role, dst_role, deprel = rule.action
            added.append((assign[src_role], assign[dst_role], deprel))
        if added:
            current = current.with_enhanced(added)
    return current


# -- noun-phrase expansion -------------------------------------------------

def expand_np(s: SentenceGraph, head_index: int) -> tuple[int, int]:
    """Character span of the noun at ``head_index`` together with its
    contiguous det/amod/compound/nmod:poss dependents on either side.
    Non-contiguous dependents truncate the span at the first gap."""
    if head_index < 1 or head_index > len(s.tokens):
        raise InvalidIndex(f"token index {head_index} out of range")
    members = {head_index}
    for d, rel in s.children.get(head_index, ()):
        if rel in MODIFIER_RELS:
            members.add(d)
    lo = head_index
    while lo - 1 in members:
        lo -= 1
    hi = head_index
    while hi + 1 in members:
        hi += 1
    return s.token(lo).char_start, s.token(hi).char_end
