"""Column-format NER corpora: parsing, validation, serialization, frequency stats.

The on-disk format is one token per line (``surface<SEP>label``, SEP a single
space or tab), a blank line between sentences, UTF-8 with LF endings.  Labels
use the BIO scheme over a declared set of entity types; ``O`` marks non-entity
tokens.  For all distribution estimation downstream, BIO prefixes are collapsed
to bare entity types and ``O`` is kept as one additional category, so every
token carries mass.
"""

from __future__ import annotations

import unicodedata
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Iterator

from .errors import IllegalBioTransition, MalformedLine, UnknownLabel

OUTSIDE = "O"


@dataclass(frozen=True)
class BioLabel:
    """A BIO tag: kind is one of ``O``/``B``/``I``; entity_type is None for O."""

    kind: str
    entity_type: str | None = None

    def __post_init__(self):
        if self.kind not in ("O", "B", "I"):
            raise ValueError(f"bad BIO kind {self.kind!r}")
        if (self.kind == "O") != (self.entity_type is None):
            raise ValueError("entity_type must be set exactly when kind is B or I")

    @property
    def category(self) -> str:
        """Entity type with the BIO prefix collapsed; ``O`` is its own category."""
        return self.entity_type if self.entity_type is not None else OUTSIDE

    @classmethod
    def parse(cls, text: str, label_space: frozenset[str] | set[str], line_no: int = 0) -> "BioLabel":
        if text == OUTSIDE:
            return cls("O")
        if len(text) > 2 and text[1] == "-" and text[0] in ("B", "I"):
            entity_type = text[2:]
            if entity_type in label_space:
                return cls(text[0], entity_type)
        raise UnknownLabel(line_no, text)

    def __str__(self) -> str:
        return OUTSIDE if self.kind == "O" else f"{self.kind}-{self.entity_type}"


Token = tuple[str, BioLabel]
Sentence = list[Token]


@dataclass
class LabeledCorpus:
    """Sentences of (surface, BioLabel) rows plus the declared entity-type space."""

    sentences: list[Sentence] = field(default_factory=list)
    label_space: frozenset[str] = frozenset()

    @property
    def categories(self) -> tuple[str, ...]:
        """All collapsed label categories, including ``O``, in sorted order."""
        return tuple(sorted(set(self.label_space) | {OUTSIDE}))

    def tokens(self) -> Iterator[Token]:
        for sentence in self.sentences:
            yield from sentence

    def n_tokens(self) -> int:
        return sum(len(s) for s in self.sentences)

    def validate(self) -> None:
        """Check structural invariants; raises on violation.

        Sentences are non-empty, surfaces contain no whitespace, every I-X row
        is preceded by B-X or I-X of the same type, and all entity types are
        drawn from the declared label space.
        """
        for sentence in self.sentences:
            if not sentence:
                raise ValueError("empty sentence")
            prev: BioLabel | None = None
            for surface, label in sentence:
                if not surface or any(c.isspace() for c in surface):
                    raise ValueError(f"surface {surface!r} is empty or contains whitespace")
                if label.entity_type is not None and label.entity_type not in self.label_space:
                    raise UnknownLabel(0, str(label))
                if label.kind == "I" and not (
                    prev is not None
                    and prev.kind in ("B", "I")
                    and prev.entity_type == label.entity_type
                ):
                    raise IllegalBioTransition(0, str(label))
                prev = label


@dataclass
class FrequencyTable:
    """Word/label occurrence counts with BIO collapsed to bare categories."""

    word_label_count: dict[tuple[str, str], int]
    word_count: dict[str, int]

    def total(self) -> int:
        return sum(self.word_count.values())


def parse_conll(text: str, label_space: Iterable[str], repair: bool = False) -> LabeledCorpus:
    """Parse column-format text into a validated corpus.

    ``repair=True`` rewrites orphan ``I-X`` rows (sentence-initial, after O, or
    after a different entity type) to ``B-X``; with repair off they raise
    IllegalBioTransition.
    """
    space = frozenset(label_space)
    sentences: list[Sentence] = []
    current: Sentence = []
    prev: BioLabel | None = None

    for line_no, raw in enumerate(text.split("\n"), start=1):
        line = raw.rstrip("\r")
        if not line.strip():
            if current:
                sentences.append(current)
                current = []
            prev = None
            continue
        parts = line.split()
        if len(parts) != 2:
            raise MalformedLine(line_no, raw)
        surface = unicodedata.normalize("NFC", parts[0])
        label = BioLabel.parse(parts[1], space, line_no)
        if label.kind == "I" and not (
            prev is not None and prev.kind in ("B", "I") and prev.entity_type == label.entity_type
        ):
            if not repair:
                raise IllegalBioTransition(line_no, parts[1])
            label = BioLabel("B", label.entity_type)
        current.append((surface, label))
        prev = label
    if current:
        sentences.append(current)

    return LabeledCorpus(sentences=sentences, label_space=space)


def serialize_conll(corpus: LabeledCorpus) -> str:
    """Inverse of :func:`parse_conll`: single-space separator, one blank line
    between sentences, trailing newline; the empty corpus serializes to ""."""
    blocks = [
        "\n".join(f"{surface} {label}" for surface, label in sentence)
        for sentence in corpus.sentences
    ]
    if not blocks:
        return ""
    return "\n\n".join(blocks) + "\n"


def count_frequencies(corpus: LabeledCorpus) -> FrequencyTable:
    """Count word-category pairs and word totals over the whole corpus."""
    pair_counts: Counter[tuple[str, str]] = Counter()
    word_counts: Counter[str] = Counter()
    for surface, label in corpus.tokens():
        pair_counts[(surface, label.category)] += 1
        word_counts[surface] += 1
    return FrequencyTable(word_label_count=dict(pair_counts), word_count=dict(word_counts))
