"""Distant annotation of unlabeled text by gazetteer matching.

Entries are whole token sequences mapped to entity types.  Annotation is
greedy left-to-right longest-match: at each position the longest matching
entry wins, its span is emitted as B-X I-X ... I-X, and matching restarts
after the span.  Unmatched tokens get O.  The induced label distribution is
noisy, which is acceptable downstream: only distribution estimates are taken
from it, nothing trains on the labels directly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .corpus import OUTSIDE, BioLabel, LabeledCorpus
from .errors import DuplicateConflictingEntry, MalformedLine, UnknownType


@dataclass
class EntityLexicon:
    """Read-only after load; keys are token sequences, values entity types."""

    entries: dict[tuple[str, ...], str]
    max_entry_len: int
    _lowered: dict[tuple[str, ...], str] | None = field(
        default=None, repr=False, compare=False
    )

    def lowered_entries(self) -> dict[tuple[str, ...], str]:
        """Case-folded view of the entries; conflicting folds are rejected."""
        if self._lowered is None:
            lowered: dict[tuple[str, ...], str] = {}
            for seq, entity_type in self.entries.items():
                key = tuple(t.lower() for t in seq)
                if key in lowered and lowered[key] != entity_type:
                    raise DuplicateConflictingEntry(key, (lowered[key], entity_type))
                lowered[key] = entity_type
            self._lowered = lowered
        return self._lowered


def load_lexicon(text: str, label_space: set[str] | frozenset[str]) -> EntityLexicon:
    """Parse TSV lines ``surface form<TAB>TYPE``; the surface form is split on
    whitespace into a token sequence.  Exact duplicates are deduplicated; the
    same sequence mapping to two different types is an error."""
    entries: dict[tuple[str, ...], str] = {}
    for line_no, raw in enumerate(text.split("\n"), start=1):
        line = raw.rstrip("\r")
        if not line.strip():
            continue
        if "\t" not in line:
            raise MalformedLine(line_no, raw, reason="expected `surface form<TAB>TYPE`")
        surface, entity_type = line.split("\t", 1)
        entity_type = entity_type.strip()
        tokens = tuple(surface.split())
        if not tokens:
            raise MalformedLine(line_no, raw, reason="entry has no tokens")
        if entity_type == OUTSIDE or entity_type not in label_space:
            raise UnknownType(surface, entity_type)
        if tokens in entries and entries[tokens] != entity_type:
            raise DuplicateConflictingEntry(tokens, (entries[tokens], entity_type))
        entries[tokens] = entity_type
    max_len = max((len(seq) for seq in entries), default=0)
    return EntityLexicon(entries=entries, max_entry_len=max_len)


def annotate(tokens: list[str], lexicon: EntityLexicon,
             case_insensitive: bool = False) -> list[BioLabel]:
    """Greedy longest-match labels for one sentence; same length as the input."""
    if not tokens:
        raise ValueError("cannot annotate an empty sentence")
    entries = lexicon.lowered_entries() if case_insensitive else lexicon.entries
    keys = [t.lower() for t in tokens] if case_insensitive else tokens

    labels: list[BioLabel] = []
    i = 0
    n = len(tokens)
    while i < n:
        matched = 0
        entity_type = ""
        for length in range(min(lexicon.max_entry_len, n - i), 0, -1):
            candidate = tuple(keys[i:i + length])
            if candidate in entries:
                matched = length
                entity_type = entries[candidate]
                break
        if matched:
            labels.append(BioLabel("B", entity_type))
            labels.extend(BioLabel("I", entity_type) for _ in range(matched - 1))
            i += matched
        else:
            labels.append(BioLabel("O"))
            i += 1
    return labels


def annotate_corpus(sentences: list[list[str]], lexicon: EntityLexicon,
                    label_space: set[str] | frozenset[str],
                    case_insensitive: bool = False) -> LabeledCorpus:
    """Annotate tokenized sentences into a labeled corpus."""
    out = [
        list(zip(sentence, annotate(sentence, lexicon, case_insensitive)))
        for sentence in sentences
        if sentence
    ]
    return LabeledCorpus(sentences=out, label_space=frozenset(label_space))
