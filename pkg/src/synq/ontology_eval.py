"""Credibility label ontology, annotation records, and evaluation metrics:
inter-annotator agreement (Krippendorff's alpha over a coincidence matrix),
majority gold labels, accuracy/confusion, KL divergence between label
distributions, simple baselines, and a keyword rule classifier.
"""

from __future__ import annotations

import math
import random
from collections import Counter
from dataclasses import dataclass, field
from importlib import resources
from typing import Iterable, Mapping, Sequence

from .errors import (
    ConfigError,
    DomainMismatch,
    EmptyInput,
    EmptyOverlap,
    EmptyTraining,
    InsufficientData,
    InvalidRecord,
    UnknownLabel,
)

NOT_RELEVANT = "Not relevant"

GRANULAR = "granular"
HIGH = "high"


@dataclass(frozen=True)
class LabelOntology:
    """Two-tier label set: each granular label has exactly one high-level
    parent; NOT_RELEVANT is its own fixed point at both levels."""

    parents: Mapping[str, str]  # granular -> high-level

    def __post_init__(self):
        highs = {}
        for g, h in self.parents.items():
            highs.setdefault(h, []).append(g)
        if len(highs) != 4:
            raise ConfigError(
                f"expected 4 high-level labels, got {len(highs)}")
        for h, children in highs.items():
            if len(children) != 2:
                raise ConfigError(
                    f"high-level label {h!r} has {len(children)} children, "
                    f"expected 2")

    @property
    def granular_labels(self) -> tuple[str, ...]:
        return tuple(self.parents)

    @property
    def high_level_labels(self) -> tuple[str, ...]:
        seen: dict[str, None] = {}
        for h in self.parents.values():
            seen.setdefault(h)
        return tuple(seen)

    def to_high_level(self, g: str) -> str:
        if g == NOT_RELEVANT:
            return NOT_RELEVANT
        try:
            return self.parents[g]
        except KeyError:
            raise UnknownLabel(f"unknown granular label: {g!r}") from None

    def children(self, high: str) -> tuple[str, ...]:
        return tuple(g for g, h in self.parents.items() if h == high)

    def is_valid_label(self, label: str) -> bool:
        return label == NOT_RELEVANT or label in self.parents

    @staticmethod
    def parse(text: str) -> "LabelOntology":
        """Config format: high-level labels flush left, granular children
        indented beneath them. A childless flush-left NOT_RELEVANT line is
        accepted and ignored (it is always present implicitly)."""
        parents: dict[str, str] = {}
        current: str | None = None
        for raw in text.splitlines():
            if not raw.strip() or raw.lstrip().startswith("#"):
                continue
            if raw[0] in (" ", "\t"):
                if current is None:
                    raise ConfigError("granular label before any high-level "
                                      f"label: {raw.strip()!r}")
                parents[raw.strip()] = current
            else:
                label = raw.strip()
                current = None if label == NOT_RELEVANT else label
        return LabelOntology(parents)

    @staticmethod
    def load(path: str) -> "LabelOntology":
        with open(path, encoding="utf-8") as f:
            return LabelOntology.parse(f.read())

    @staticmethod
    def default() -> "LabelOntology":
        text = resources.files("synq.data").joinpath(
            "ontology.txt").read_text(encoding="utf-8")
        return LabelOntology.parse(text)


# -- annotation records -------------------------------------------------

_RECORD_FIELDS = 7


@dataclass(frozen=True)
class AnnotationRecord:
    """One annotator decision. ``correction_target`` points at the sentence
    that should have been extracted instead, and is only allowed when the
    primary label is NOT_RELEVANT."""

    sentence_id: str
    annotator_id: str
    primary_label: str
    secondary_label: str | None = None
    context_before: int = 0
    context_after: int = 0
    correction_target: str | None = None

    def validate(self, ontology: LabelOntology | None = None) -> None:
        if not self.sentence_id or not self.annotator_id:
            raise InvalidRecord("sentence_id and annotator_id are required")
        if self.secondary_label is not None \
                and self.secondary_label == self.primary_label:
            raise InvalidRecord("secondary label equals primary label")
        if self.context_before < 0 or self.context_after < 0:
            raise InvalidRecord("context counts must be >= 0")
        if self.correction_target is not None \
                and self.primary_label != NOT_RELEVANT:
            raise InvalidRecord(
                "correction_target requires a Not relevant primary label")
        if ontology is not None:
            for label in (self.primary_label, self.secondary_label):
                if label is not None and not ontology.is_valid_label(label):
                    raise UnknownLabel(f"unknown label: {label!r}")
        for value in (self.sentence_id, self.annotator_id,
                      self.primary_label, self.secondary_label or "",
                      self.correction_target or ""):
            if "\t" in value or "\n" in value:
                raise InvalidRecord("record fields must not contain tabs "
                                    "or newlines")

    def to_line(self) -> str:
        return "\t".join([
            self.sentence_id,
            self.annotator_id,
            self.primary_label,
            self.secondary_label or "",
            str(self.context_before),
            str(self.context_after),
            self.correction_target or "",
        ])

    @staticmethod
    def from_line(line: str) -> "AnnotationRecord":
        parts = line.rstrip("\n").split("\t")
        if len(parts) != _RECORD_FIELDS:
            raise InvalidRecord(
                f"expected {_RECORD_FIELDS} tab-separated fields, "
                f"got {len(parts)}")
        return AnnotationRecord(
            sentence_id=parts[0],
            annotator_id=parts[1],
            primary_label=parts[2],
            secondary_label=parts[3] or None,
            context_before=int(parts[4]),
            context_after=int(parts[5]),
            correction_target=parts[6] or None,
        )


class RatingsMatrix:
    """units (sentences) x raters -> label, sparse."""

    def __init__(self):
        self._ratings: dict[str, dict[str, str]] = {}

    def add(self, unit: str, rater: str, label: str) -> None:
        self._ratings.setdefault(unit, {})[rater] = label

    @property
    def units(self) -> tuple[str, ...]:
        return tuple(self._ratings)

    def ratings_for(self, unit: str) -> dict[str, str]:
        return dict(self._ratings.get(unit, {}))

    @staticmethod
    def from_records(records: Iterable[AnnotationRecord]) -> "RatingsMatrix":
        m = RatingsMatrix()
        for r in records:
            m.add(r.sentence_id, r.annotator_id, r.primary_label)
        return m

    @staticmethod
    def load_tsv(path: str) -> "RatingsMatrix":
        """Read annotation-record lines (see AnnotationRecord.to_line)."""
        m = RatingsMatrix()
        with open(path, encoding="utf-8") as f:
            for raw in f:
                if not raw.strip() or raw.startswith("#"):
                    continue
                r = AnnotationRecord.from_line(raw)
                m.add(r.sentence_id, r.annotator_id, r.primary_label)
        return m


# -- agreement ----------------------------------------------------------

def _map_level(label: str, level: str, ontology: LabelOntology) -> str:
    if level == HIGH:
        return ontology.to_high_level(label)
    return label


def krippendorff_alpha(r: RatingsMatrix, level: str = GRANULAR,
                       ontology: LabelOntology | None = None,
                       exclude_not_relevant: bool = False) -> float:
    """Nominal-metric Krippendorff's alpha via the coincidence matrix.

    Units with fewer than two usable ratings are dropped. With
    ``exclude_not_relevant``, NOT_RELEVANT ratings are removed before the
    unit filter. alpha = 1 - D_o / D_e; perfect agreement returns exactly 1.
    """
    if ontology is None:
        ontology = LabelOntology.default()
    coincidence: Counter[tuple[str, str]] = Counter()
    n_pairable = 0.0
    usable_units = 0
    for unit in r.units:
        labels = [
            _map_level(lab, level, ontology)
            for lab in r.ratings_for(unit).values()
        ]
        if exclude_not_relevant:
            labels = [lab for lab in labels if lab != NOT_RELEVANT]
        m = len(labels)
        if m < 2:
            continue
        usable_units += 1
        weight = 1.0 / (m - 1)
        for i, a in enumerate(labels):
            for j, b in enumerate(labels):
                if i != j:
                    coincidence[(a, b)] += weight
                    n_pairable += weight
    if usable_units == 0:
        raise InsufficientData("no unit has two or more ratings")
    disagree = sum(v for (a, b), v in coincidence.items() if a != b)
    d_observed = disagree / n_pairable
    if d_observed == 0.0:
        return 1.0
    marginals: Counter[str] = Counter()
    for (a, _), v in coincidence.items():
        marginals[a] += v
    n = n_pairable
    d_expected = sum(
        marginals[a] * marginals[b]
        for a in marginals for b in marginals if a != b
    ) / (n * (n - 1))
    return 1.0 - d_observed / d_expected


def majority_labels(r: RatingsMatrix) -> dict[str, str | None]:
    """Strict-plurality label per unit; exact ties map to None (unresolved)."""
    out: dict[str, str | None] = {}
    for unit in r.units:
        counts = Counter(r.ratings_for(unit).values())
        ranked = counts.most_common()
        if len(ranked) > 1 and ranked[0][1] == ranked[1][1]:
            out[unit] = None
        else:
            out[unit] = ranked[0][0]
    return out


def accuracy_confusion(pred: Mapping[str, str], gold: Mapping[str, str | None],
                       level: str = GRANULAR,
                       ontology: LabelOntology | None = None,
                       gold_secondary: Mapping[str, str] | None = None,
                       secondary_matches: bool = False):
    """Accuracy and confusion matrix (rows = gold, cols = pred) over the
    shared units with resolved gold. With ``secondary_matches``, a
    prediction equal to the unit's secondary gold label also counts as a
    hit (off by default)."""
    if ontology is None:
        ontology = LabelOntology.default()
    units = sorted(u for u in pred if gold.get(u) is not None)
    if not units:
        raise EmptyOverlap("no shared units with resolved gold labels")
    hits = 0
    confusion: dict[tuple[str, str], int] = {}
    for u in units:
        p = _map_level(pred[u], level, ontology)
        g = _map_level(gold[u], level, ontology)  # type: ignore[arg-type]
        if p == g:
            hits += 1
            confusion[(g, p)] = confusion.get((g, p), 0) + 1
            continue
        secondary = (gold_secondary or {}).get(u)
        if secondary_matches and secondary is not None \
                and _map_level(secondary, level, ontology) == p:
            hits += 1
            confusion[(p, p)] = confusion.get((p, p), 0) + 1
            continue
        confusion[(g, p)] = confusion.get((g, p), 0) + 1
    return hits / len(units), confusion


# -- distributions --------------------------------------------------------

@dataclass(frozen=True)
class LabelDistribution:
    probs: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if any(p < 0 for p in self.probs.values()):
            raise ValueError("probabilities must be >= 0")
        total = sum(self.probs.values())
        if self.probs and abs(total - 1.0) > 1e-9:
            raise ValueError(f"probabilities sum to {total}, expected 1")


def distribution_of(labels: Sequence[str]) -> LabelDistribution:
    if not labels:
        raise EmptyInput("cannot build a distribution from no labels")
    counts = Counter(labels)
    total = len(labels)
    return LabelDistribution({lab: c / total for lab, c in counts.items()})


def kl_divergence(p: LabelDistribution, q: LabelDistribution,
                  epsilon: float = 1e-6) -> float:
    """KL(p || q) in nats, with 0*ln(0) = 0. When q has an empty bin, q is
    smoothed: q' = (q + epsilon) / (1 + K*epsilon) over the K-label domain.

    Direction and log base are conventions, not givens: reversing the
    arguments yields a different value, so report both when comparing
    against externally published numbers.
    """
    if set(p.probs) != set(q.probs):
        raise DomainMismatch(
            f"label domains differ: {sorted(p.probs)} vs {sorted(q.probs)}")
    qv = dict(q.probs)
    if any(v == 0.0 for v in qv.values()):
        k = len(qv)
        qv = {lab: (v + epsilon) / (1.0 + k * epsilon)
              for lab, v in qv.items()}
    total = 0.0
    for lab, pv in p.probs.items():
        if pv == 0.0:
            continue
        total += pv * math.log(pv / qv[lab])
    return total


# -- baselines and the rule classifier ------------------------------------

def baseline_predict(kind: str, train_labels: Sequence[str],
                     units: Sequence[str], seed: int = 0) -> dict[str, str]:
    """``random``: seeded uniform choice over the label domain seen in
    training. ``majority``: the most frequent training label everywhere
    (ties broken lexicographically)."""
    if not train_labels:
        raise EmptyTraining("baseline needs training labels")
    if kind == "random":
        domain = sorted(set(train_labels))
        rng = random.Random(seed)
        return {u: rng.choice(domain) for u in sorted(units)}
    if kind == "majority":
        counts = Counter(train_labels)
        label = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))[0][0]
        return {u: label for u in units}
    raise ValueError(f"unknown baseline kind: {kind!r}")


def load_lexicon(path: str) -> list[tuple[str, str]]:
    """phrase<TAB>label rows, order preserved for tie-breaking."""
    table = []
    with open(path, encoding="utf-8") as f:
        for line_no, raw in enumerate(f, start=1):
            line = raw.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2 or not parts[0] or not parts[1]:
                raise ConfigError(f"bad lexicon line {line_no}: {line!r}")
            table.append((parts[0], parts[1]))
    return table


def default_lexicon() -> list[tuple[str, str]]:
    text = resources.files("synq.data").joinpath(
        "classifier_lexicon.tsv").read_text(encoding="utf-8")
    table = []
    for line in text.splitlines():
        if not line.strip() or line.startswith("#"):
            continue
        phrase, label = line.split("\t")
        table.append((phrase, label))
    return table


def rule_classifier(sentence_text: str,
                    lexicon: Sequence[tuple[str, str]]) -> str:
    """Label of the longest lexicon phrase contained in the sentence
    (case-folded substring match; ties broken by lexicon order); falls back
    to NOT_RELEVANT."""
    haystack = sentence_text.casefold()
    best: tuple[int, int] | None = None
    best_label = NOT_RELEVANT
    for order, (phrase, label) in enumerate(lexicon):
        if phrase.casefold() in haystack:
            key = (-len(phrase), order)
            if best is None or key < best:
                best = key
                best_label = label
    return best_label


def context_size_histogram(
        records: Iterable[AnnotationRecord]) -> dict[tuple[int, int], int]:
    """Exact frequency table of (context_before, context_after) pairs."""
    hist: dict[tuple[int, int], int] = {}
    for r in records:
        key = (r.context_before, r.context_after)
        hist[key] = hist.get(key, 0) + 1
    return hist
