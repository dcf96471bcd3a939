"""Shared subword space, greedy default tokenization, and exhaustive
enumeration of the segmentation lattice of a word.

The vocabulary follows the WordPiece ``vocab.txt`` convention: one token per
line, word-internal continuation tokens carry a ``##`` prefix, and an ``[UNK]``
token must be present.  ``tokenize_default`` is the deterministic greedy
longest-match-first tokenizer; ``enumerate_segmentations`` walks the full
DAG of valid splits (node i connects to j when the continuation-marked piece
word[i:j] is in the vocabulary).
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

Segmentation = tuple[str, ...]

#: Words longer than this keep their default tokenization instead of being
#: enumerated; segmentation count is exponential in word length.
MAX_ENUMERATION_CHARS = 40

#: Default cap on enumerated segmentations per word, fewest-pieces-first.
DEFAULT_SEGMENTATION_CAP = 64


@dataclass(frozen=True)
class SubwordVocab:
    """Immutable subword inventory with a continuation-prefix convention."""

    tokens: frozenset[str]
    unk_token: str = "[UNK]"
    continuation: str = "##"

    def __post_init__(self):
        if self.unk_token not in self.tokens:
            raise ValueError(f"unk token {self.unk_token!r} missing from the vocabulary")
        for token in self.tokens:
            stripped = token[len(self.continuation):] if token.startswith(self.continuation) else token
            if not stripped:
                raise ValueError(f"token {token!r} is empty after stripping the continuation marker")

    @classmethod
    def from_tokens(cls, tokens: Iterable[str], unk_token: str = "[UNK]",
                    continuation: str = "##") -> "SubwordVocab":
        return cls(frozenset(tokens), unk_token, continuation)

    @classmethod
    def from_text(cls, text: str, unk_token: str = "[UNK]",
                  continuation: str = "##") -> "SubwordVocab":
        """One token per line; blank lines are ignored."""
        return cls.from_tokens((line for line in text.splitlines() if line.strip()),
                               unk_token, continuation)

    def piece(self, chars: str, continuing: bool) -> str:
        return self.continuation + chars if continuing else chars

    def strip_marker(self, piece: str) -> str:
        return piece[len(self.continuation):] if piece.startswith(self.continuation) else piece


def load_vocab(path: str | Path, unk_token: str = "[UNK]",
               continuation: str = "##") -> SubwordVocab:
    return SubwordVocab.from_text(Path(path).read_text(encoding="utf-8"),
                                  unk_token, continuation)


def reconstruct(segmentation: Segmentation, vocab: SubwordVocab) -> str:
    """Strip continuation markers and concatenate the pieces back into a word."""
    return segmentation[0] + "".join(vocab.strip_marker(p) for p in segmentation[1:])


def tokenize_default(word: str, vocab: SubwordVocab) -> Segmentation:
    """Greedy longest-match-first tokenization; [unk] when any position dead-ends."""
    if not word:
        raise ValueError("cannot tokenize an empty word")
    n = len(word)
    pieces: list[str] = []
    start = 0
    while start < n:
        end = n
        match = None
        while start < end:
            piece = vocab.piece(word[start:end], start > 0)
            if piece in vocab.tokens:
                match = piece
                break
            end -= 1
        if match is None:
            return (vocab.unk_token,)
        pieces.append(match)
        start = end
    return tuple(pieces)


def _match_table(word: str, vocab: SubwordVocab) -> list[list[int]]:
    # matches[i] = ascending end positions j such that piece(word[i:j], i>0) is in vocab
    n = len(word)
    matches: list[list[int]] = []
    for i in range(n):
        ends = [
            j for j in range(i + 1, n + 1)
            if vocab.piece(word[i:j], i > 0) in vocab.tokens
        ]
        matches.append(ends)
    return matches


def enumerate_segmentations(word: str, vocab: SubwordVocab,
                            cap: int = DEFAULT_SEGMENTATION_CAP) -> list[Segmentation]:
    """All distinct valid segmentations of ``word``, ordered by (piece count,
    lexicographic pieces), truncated to ``cap``.

    The default tokenization is always retained even under truncation.  Words
    with no valid segmentation yield ``[(unk_token,)]``; words longer than
    ``MAX_ENUMERATION_CHARS`` bypass enumeration and keep their default.
    """
    if cap < 1:
        raise ValueError(f"cap must be >= 1, got {cap}")
    if len(word) > MAX_ENUMERATION_CHARS:
        return [tokenize_default(word, vocab)]

    n = len(word)
    matches = _match_table(word, vocab)

    # reach[i] = piece counts achievable for the suffix starting at i
    reach: list[set[int]] = [set() for _ in range(n)] + [{0}]
    for i in range(n - 1, -1, -1):
        for j in matches[i]:
            reach[i].update(c + 1 for c in reach[j])
    if not reach[0]:
        return [(vocab.unk_token,)]

    # Iterative deepening on the piece count; within one count a DFS that tries
    # ends in ascending order emits segmentations in lexicographic order, so
    # collection can stop as soon as `cap` entries are gathered.
    results: list[Segmentation] = []
    prefix: list[str] = []

    def dfs(i: int, remaining: int) -> bool:
        if i == n:
            results.append(tuple(prefix))
            return len(results) >= cap
        for j in matches[i]:
            if remaining - 1 in reach[j]:
                prefix.append(vocab.piece(word[i:j], i > 0))
                done = dfs(j, remaining - 1)
                prefix.pop()
                if done:
                    return True
        return False

    for k in sorted(reach[0]):
        if dfs(0, k):
            break

    default = tokenize_default(word, vocab)
    if default != (vocab.unk_token,) and default not in results:
        if len(results) >= cap:
            results = results[: cap - 1]
        results.append(default)
    return results


def subword_set(word: str, vocab: SubwordVocab,
                cap: int = DEFAULT_SEGMENTATION_CAP) -> frozenset[str]:
    """Union of the pieces over all enumerated segmentations of ``word``."""
    return frozenset(
        piece
        for segmentation in enumerate_segmentations(word, vocab, cap)
        for piece in segmentation
    )
