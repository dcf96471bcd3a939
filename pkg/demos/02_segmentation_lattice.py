"""The segmentation lattice of a word.

A WordPiece-style vocabulary usually tokenizes a word one way (greedy
longest-match-first), but many other segmentations are valid.  This package
enumerates all of them: that set of alternatives is the room the transport
step has to redistribute subword mass.
"""

from subalign import (
    SubwordVocab,
    enumerate_segmentations,
    reconstruct,
    subword_set,
    tokenize_default,
)

vocab = SubwordVocab.from_tokens([
    "[UNK]",
    "un", "play", "playing", "able", "unplayable",
    "##play", "##able", "##ing", "##layable",
    "u", "p", "##n", "##p", "##l", "##a", "##y", "##able",
])

word = "unplayable"
print(f"default (greedy) tokenization of {word!r}:")
print(" ", tokenize_default(word, vocab))

segmentations = enumerate_segmentations(word, vocab, cap=64)
print(f"\nall {len(segmentations)} valid segmentations, fewest pieces first:")
for seg in segmentations:
    print("  ", " + ".join(seg))
    assert reconstruct(seg, vocab) == word  # every one rebuilds the word

pieces = subword_set(word, vocab, cap=64)
print(f"\n|sub({word})| = {len(pieces)} distinct reachable pieces:")
print(" ", sorted(pieces))

# Dead ends fall back to the unk token rather than failing:
print("\nno segmentation exists for 'xyz':", tokenize_default("xyz", vocab))

# The cap keeps pathological words bounded but never drops the default:
capped = enumerate_segmentations(word, vocab, cap=2)
print(f"\nwith cap=2: {capped}")
assert tokenize_default(word, vocab) in capped
