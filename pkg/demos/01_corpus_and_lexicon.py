"""Corpora and distant annotation.

Parse a column-format NER corpus, look at its frequency statistics, then
label an unlabeled corpus with a gazetteer: greedy longest-match, B/I span
emission, O everywhere else.
"""

from subalign import (
    annotate,
    annotate_corpus,
    count_frequencies,
    load_lexicon,
    parse_conll,
    serialize_conll,
)

LABELS = {"ORG", "LOC", "PER"}

source_text = """\
Real B-ORG
Madrid I-ORG
Club I-ORG
won O
in O
spain B-LOC

Madrid B-LOC
is O
sunny O
"""

corpus = parse_conll(source_text, LABELS)
print(f"parsed {len(corpus.sentences)} sentences, {corpus.n_tokens()} tokens")

freq = count_frequencies(corpus)
print("\nword/category counts (BIO collapsed, O is its own category):")
for (word, category), count in sorted(freq.word_label_count.items()):
    print(f"  {word:8s} {category:4s} {count}")

# Note: 'Madrid' carries both ORG (inside 'Real Madrid Club') and LOC mass.
# That per-label ambiguity is exactly what the transport step reasons about.

lexicon = load_lexicon("Real Madrid Club\tORG\nMadrid\tLOC\nspain\tLOC\n", LABELS)
print(f"\nlexicon: {len(lexicon.entries)} entries, longest {lexicon.max_entry_len} tokens")

tokens = ["Real", "Madrid", "Club", "played", "Madrid", "yesterday"]
labels = annotate(tokens, lexicon)
print("\ngreedy longest-match annotation:")
for token, label in zip(tokens, labels):
    print(f"  {token:10s} {label}")
# 'Real Madrid Club' wins over the shorter 'Madrid' entry; the standalone
# 'Madrid' later in the sentence still gets B-LOC.

annotated = annotate_corpus([tokens], lexicon, LABELS)
print("\nas a CoNLL file:")
print(serialize_conll(annotated))
