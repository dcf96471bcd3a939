"""Per (word, category) segmentation distributions and sampled re-tokenization.

The solved plan row for (w, y), normalized by its row mass, gives per-subword
conditionals P(t | w, y).  Each enumerated segmentation of w is scored by the
minimum conditional over its pieces (recovering a segmentation distribution
exactly would mean solving a sparse linear system; the bottleneck piece is
used instead), and the scores are normalized into a sampling distribution.
Degenerate all-zero rows fall back to probability 1 on the default
tokenization and are flagged.

Re-tokenizing a corpus samples one segmentation per token from a
counter-based stream keyed by (seed, sentence index, token index), so the
output is reproducible and independent of worker order.  Words without a
policy entry keep their default tokenization.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

from .corpus import BioLabel, LabeledCorpus, Sentence
from .errors import MissingSegmentations
from .estimator import TransportInstance
from .sampling import sample_index, stream_uniform
from .segmenter import Segmentation, SubwordVocab, tokenize_default
from .solver import TransportPlan

PolicyKey = tuple[str, str]


@dataclass
class RetokenizationPolicy:
    """Sampling distributions over segmentations, keyed by (word, category)."""

    entries: dict[PolicyKey, list[tuple[Segmentation, float]]]
    fallback: set[PolicyKey] = field(default_factory=set)


def subword_conditionals(plan: TransportPlan,
                         instance: TransportInstance) -> dict[PolicyKey, dict[str, float]]:
    """P(t | w, y): each plan row divided by its row mass."""
    out: dict[PolicyKey, dict[str, float]] = {}
    for i, key in enumerate(instance.row_index):
        cols, vals = plan.row_slice(i)
        mass = instance.row_mass[i]
        out[key] = {instance.col_index[j]: float(v / mass) for j, v in zip(cols, vals)}
    return out


def derive_policy(plan: TransportPlan, instance: TransportInstance,
                  segmentations: Mapping[str, list[Segmentation]],
                  vocab: SubwordVocab) -> RetokenizationPolicy:
    """Turn a solved plan into segmentation distributions.

    ``segmentations`` must come from the same enumeration cap the instance was
    built with, otherwise pieces may be missing from the plan columns.
    """
    conditionals = subword_conditionals(plan, instance)
    entries: dict[PolicyKey, list[tuple[Segmentation, float]]] = {}
    fallback: set[PolicyKey] = set()
    for key in instance.row_index:
        word, _ = key
        if word not in segmentations:
            raise MissingSegmentations(word)
        segs = segmentations[word]
        cond = conditionals[key]
        scores = [min(cond.get(piece, 0.0) for piece in seg) for seg in segs]
        total = sum(scores)
        if total <= 0.0:
            entries[key] = [(tokenize_default(word, vocab), 1.0)]
            fallback.add(key)
        else:
            entries[key] = [(seg, score / total) for seg, score in zip(segs, scores)]
    return RetokenizationPolicy(entries=entries, fallback=fallback)


def _expand_bio(segmentation: Segmentation, label: BioLabel) -> list[tuple[str, BioLabel]]:
    # B-X -> first piece B-X then I-X; I-X -> all I-X; O -> all O
    if label.kind == "O":
        return [(piece, label) for piece in segmentation]
    inside = BioLabel("I", label.entity_type)
    first = label if label.kind == "B" else inside
    return [(segmentation[0], first)] + [(piece, inside) for piece in segmentation[1:]]


def retokenize_corpus(corpus: LabeledCorpus, policy: RetokenizationPolicy,
                      vocab: SubwordVocab, seed: int) -> LabeledCorpus:
    """Sample a segmentation for every token and expand to subword rows."""
    out: list[Sentence] = []
    for s_idx, sentence in enumerate(corpus.sentences):
        rows: Sentence = []
        for t_idx, (word, label) in enumerate(sentence):
            entry = policy.entries.get((word, label.category))
            if entry is None:
                segmentation = tokenize_default(word, vocab)
            elif len(entry) == 1:
                segmentation = entry[0][0]
            else:
                u = stream_uniform(seed, s_idx, t_idx)
                segmentation = entry[sample_index([p for _, p in entry], u)][0]
            rows.extend(_expand_bio(segmentation, label))
        out.append(rows)
    return LabeledCorpus(sentences=out, label_space=corpus.label_space)


def policy_to_jsonl(policy: RetokenizationPolicy) -> str:
    """One record per (word, category), sorted, as
    ``{"word": ..., "label": ..., "segs": [{"pieces": [...], "p": ...}]}``."""
    lines = []
    for (word, category) in sorted(policy.entries):
        segs = [
            {"pieces": list(seg), "p": prob}
            for seg, prob in policy.entries[(word, category)]
        ]
        lines.append(json.dumps({"word": word, "label": category, "segs": segs},
                                ensure_ascii=False))
    return "\n".join(lines) + ("\n" if lines else "")


def save_policy(policy: RetokenizationPolicy, path: str | Path) -> None:
    Path(path).write_text(policy_to_jsonl(policy), encoding="utf-8")


def load_policy(text: str) -> RetokenizationPolicy:
    entries: dict[PolicyKey, list[tuple[Segmentation, float]]] = {}
    for line in text.splitlines():
        if not line.strip():
            continue
        record = json.loads(line)
        entries[(record["word"], record["label"])] = [
            (tuple(seg["pieces"]), float(seg["p"])) for seg in record["segs"]
        ]
    return RetokenizationPolicy(entries=entries)


def load_policy_file(path: str | Path) -> RetokenizationPolicy:
    return load_policy(Path(path).read_text(encoding="utf-8"))
