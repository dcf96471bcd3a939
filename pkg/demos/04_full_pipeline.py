"""End to end: re-tokenize a source corpus toward a target domain.

Scenario: the word 'madrid' is mostly a LOCATION in the source corpus but
the (distantly labeled) target domain uses its whole-word piece mostly as an
ORGANIZATION, while exposing the pieces 'mad' + '##rid' in location-ish
contexts.  Solving the transport problem routes (madrid, LOC) mass onto the
split pieces, the sampler re-tokenizes accordingly, and the conditional KL
between the domains drops.
"""

from subalign import (
    BioLabel,
    LabeledCorpus,
    SolverConfig,
    SubwordVocab,
    build_instance,
    compare_before_after,
    count_frequencies,
    derive_policy,
    enumerate_corpus_segmentations,
    estimate_target,
    retokenize_corpus,
    serialize_conll,
    solve,
)

LABELS = frozenset({"LOC", "ORG"})
vocab = SubwordVocab.from_tokens(
    ["[UNK]", "madrid", "mad", "##rid", "club", "visit", "qq", "##qq", "the"]
)


def sent(*pairs):
    return [(w, BioLabel("B", c) if c != "O" else BioLabel("O")) for w, c in pairs]


# Source: gold labels; 'madrid' is 4x LOC, 2x ORG.
source = LabeledCorpus([
    sent(("visit", "O"), ("madrid", "LOC")),
    sent(("madrid", "LOC"), ("the", "O")),
    sent(("madrid", "ORG"), ("club", "ORG")),
    sent(("visit", "O"), ("madrid", "LOC")),
    sent(("madrid", "LOC"), ("the", "O")),
    sent(("madrid", "ORG"), ("the", "O")),
], LABELS)

# Target (already distantly annotated): the whole-word piece 'madrid' shows
# up as ORG, while the pieces 'mad' and '##rid' surface inside LOC-labeled
# carrier words ('madqq' -> [mad, ##qq], 'qqrid' -> [qq, ##rid]).
target = LabeledCorpus([
    sent(("madrid", "ORG"), ("club", "ORG"), ("the", "O")),
    sent(("madrid", "ORG"), ("visit", "O")),
    sent(("madrid", "ORG"), ("the", "O")),
    sent(("madqq", "LOC"), ("qqrid", "LOC")),
    sent(("madqq", "LOC"), ("qqrid", "LOC"), ("visit", "O")),
], LABELS)

freq = count_frequencies(source)
stats = estimate_target(target, vocab, alpha=0.5)
print("target conditionals of interest:")
for piece in ("madrid", "##rid"):
    row = {y: stats.joint.get((piece, y), 0.0) / stats.marginal[piece]
           for y in stats.categories}
    pretty = ", ".join(f"P({y}|{piece})={p:.2f}" for y, p in row.items() if p > 0.01)
    print(f"  {pretty}")

segmentations = enumerate_corpus_segmentations(freq.word_count, vocab)
instance = build_instance(freq, vocab, stats, gamma=0.1, mode="conditional",
                          segmentations=segmentations)
print(f"\ninstance: {instance.n_rows} rows x {instance.n_cols} cols, "
      f"{instance.nnz} finite cells")

plan = solve(instance, SolverConfig(tolerance=1e-10, max_iters=100000))
print(f"solved in {plan.iterations} iterations, violation {plan.marginal_error:.1e}")

policy = derive_policy(plan, instance, segmentations, vocab)
print("\nsegmentation distributions for 'madrid':")
for category in ("LOC", "ORG"):
    entry = policy.entries[("madrid", category)]
    pretty = ", ".join(f"{'+'.join(seg)}: {p:.3f}" for seg, p in entry)
    print(f"  ({category})  {pretty}")

retok = retokenize_corpus(source, policy, vocab, seed=5)
print("\nre-tokenized source (first two sentences):")
print(serialize_conll(LabeledCorpus(retok.sentences[:2], LABELS)))

report = compare_before_after(source, retok, stats, vocab)
print(report.format_table())
