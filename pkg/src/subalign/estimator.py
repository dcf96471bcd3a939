"""Target distribution estimation and transport-instance assembly.

The target side is summarized by smoothed subword/label statistics taken from
a distantly annotated corpus under the default tokenizer.  The source side
becomes a mass-transport grid: one row per observed (word, category) pair, one
column per reachable subword.  Raw row mass is ``count(w,y) * |sub(w)|`` and
raw column mass is ``sum_w count(w) * [t in sub(w)]``; both vectors are then
normalized to total mass 1, since the balanced problem is what the Sinkhorn
solver handles.  A cell (w,y),t is structurally masked (cost +inf, never
stored) unless t occurs in some enumerated segmentation of w.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .corpus import FrequencyTable, LabeledCorpus
from .errors import EmptyCorpus, InfeasibleRow, MissingSegmentations, NonPositiveGamma
from .segmenter import (
    DEFAULT_SEGMENTATION_CAP,
    Segmentation,
    SubwordVocab,
    enumerate_segmentations,
    tokenize_default,
)

#: Finite cost for subwords never observed in the target domain, roughly
#: -log(1e-13): strongly discouraged but keeps rows feasible.  +inf is
#: reserved for structural masking.
UNSEEN_COST = 30.0

DEFAULT_ALPHA = 0.5
DEFAULT_GAMMA = 0.1

OBJECTIVE_MODES = ("conditional", "joint")
ROW_WEIGHT_MODES = ("subword_set_size", "default_seg_len")


@dataclass
class TargetStats:
    """Smoothed target-domain subword/label distribution.

    ``joint`` holds P(t, y) over the grid (observed subwords x all categories)
    after add-alpha smoothing; ``marginal`` is its per-subword sum.  Raw counts
    are kept so diagnostics can re-smooth on a union grid.
    """

    joint: dict[tuple[str, str], float]
    marginal: dict[str, float]
    categories: tuple[str, ...]
    smoothing_alpha: float
    joint_counts: dict[tuple[str, str], int]
    total_count: int


def subword_label_counts(corpus: LabeledCorpus, vocab: SubwordVocab) -> Counter:
    """(subword, category) counts: default-tokenize each word, every piece
    inherits the word's collapsed category."""
    counts: Counter[tuple[str, str]] = Counter()
    for surface, label in corpus.tokens():
        for piece in tokenize_default(surface, vocab):
            counts[(piece, label.category)] += 1
    return counts


def estimate_target(corpus: LabeledCorpus, vocab: SubwordVocab,
                    alpha: float = DEFAULT_ALPHA) -> TargetStats:
    """Estimate P(t,y) and P(t) for the target domain.

    Counts are add-alpha smoothed over (observed subwords) x (all categories,
    O included) and normalized.  With alpha=0 this reduces to the raw
    maximum-likelihood estimate and zero-count cells carry no entry.
    """
    if alpha < 0:
        raise ValueError(f"alpha must be >= 0, got {alpha}")
    counts = subword_label_counts(corpus, vocab)
    if not counts:
        raise EmptyCorpus("target corpus has no tokens")
    categories = corpus.categories
    subwords = sorted({t for t, _ in counts})
    total = sum(counts.values())
    denom = total + alpha * len(subwords) * len(categories)

    joint: dict[tuple[str, str], float] = {}
    marginal: dict[str, float] = {}
    for t in subwords:
        row_sum = 0.0
        for y in categories:
            p = (counts.get((t, y), 0) + alpha) / denom
            if p > 0:
                joint[(t, y)] = p
                row_sum += p
        marginal[t] = row_sum
    return TargetStats(
        joint=joint,
        marginal=marginal,
        categories=categories,
        smoothing_alpha=alpha,
        joint_counts=dict(counts),
        total_count=total,
    )


@dataclass
class TransportInstance:
    """A balanced, masked optimal-transport problem in CSR layout.

    Only finite-cost cells are stored; anything not stored is masked (+inf).
    ``row_mass``/``col_mass`` are the normalized marginals (each sums to 1);
    the raw pre-normalization vectors are kept for inspection.
    """

    row_index: list[tuple[str, str]]
    col_index: list[str]
    row_mass: np.ndarray
    col_mass: np.ndarray
    row_mass_raw: np.ndarray
    col_mass_raw: np.ndarray
    row_ptr: np.ndarray
    col_ids: np.ndarray
    cost_data: np.ndarray
    gamma: float
    objective_mode: str

    @property
    def n_rows(self) -> int:
        return len(self.row_index)

    @property
    def n_cols(self) -> int:
        return len(self.col_index)

    @property
    def nnz(self) -> int:
        return len(self.cost_data)

    def row_cells(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        """(column ids, costs) of the finite cells in row i."""
        lo, hi = self.row_ptr[i], self.row_ptr[i + 1]
        return self.col_ids[lo:hi], self.cost_data[lo:hi]

    def cost_dense(self) -> np.ndarray:
        """Dense cost matrix with +inf on masked cells (small instances only)."""
        dense = np.full((self.n_rows, self.n_cols), np.inf)
        for i in range(self.n_rows):
            cols, costs = self.row_cells(i)
            dense[i, cols] = costs
        return dense

    @classmethod
    def from_dense(cls, row_mass: Sequence[float], col_mass: Sequence[float],
                   cost: np.ndarray, gamma: float,
                   objective_mode: str = "conditional",
                   row_index: list[tuple[str, str]] | None = None,
                   col_index: list[str] | None = None) -> "TransportInstance":
        """Build an instance from a dense cost matrix; +inf entries are masked."""
        cost = np.asarray(cost, dtype=float)
        rows, cols = np.nonzero(np.isfinite(cost))
        return cls.from_cells(
            row_mass, col_mass, rows, cols, cost[rows, cols], gamma,
            objective_mode=objective_mode, row_index=row_index, col_index=col_index,
        )

    @classmethod
    def from_cells(cls, row_mass: Sequence[float], col_mass: Sequence[float],
                   rows: np.ndarray, cols: np.ndarray, costs: np.ndarray,
                   gamma: float, objective_mode: str = "conditional",
                   row_index: list[tuple[str, str]] | None = None,
                   col_index: list[str] | None = None) -> "TransportInstance":
        """Build an instance from COO triples of the finite cells."""
        if gamma <= 0:
            raise NonPositiveGamma(gamma)
        raw_a = np.asarray(row_mass, dtype=float)
        raw_b = np.asarray(col_mass, dtype=float)
        if np.any(raw_a <= 0) or np.any(raw_b <= 0):
            raise ValueError("marginal masses must be strictly positive")
        n, m = len(raw_a), len(raw_b)
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        costs = np.asarray(costs, dtype=float)

        order = np.lexsort((cols, rows))
        rows, cols, costs = rows[order], cols[order], costs[order]
        row_ptr = np.zeros(n + 1, dtype=np.int64)
        np.add.at(row_ptr, rows + 1, 1)
        row_ptr = np.cumsum(row_ptr)

        if np.any(np.diff(row_ptr) == 0):
            bad = int(np.flatnonzero(np.diff(row_ptr) == 0)[0])
            raise InfeasibleRow(bad if row_index is None else row_index[bad])
        if len(np.unique(cols)) != m:
            raise InfeasibleRow("some column has no finite-cost cell")

        if row_index is None:
            row_index = [(f"row{i:05d}", "O") for i in range(n)]
        if col_index is None:
            col_index = [f"col{j:05d}" for j in range(m)]
        return cls(
            row_index=row_index,
            col_index=col_index,
            row_mass=raw_a / raw_a.sum(),
            col_mass=raw_b / raw_b.sum(),
            row_mass_raw=raw_a,
            col_mass_raw=raw_b,
            row_ptr=row_ptr,
            col_ids=cols,
            cost_data=costs,
            gamma=float(gamma),
            objective_mode=objective_mode,
        )


def enumerate_corpus_segmentations(
    words: Iterable[str], vocab: SubwordVocab,
    cap: int = DEFAULT_SEGMENTATION_CAP,
) -> dict[str, list[Segmentation]]:
    """Segmentation lattice for every distinct word, shared by instance
    construction and policy derivation (the cap must match between the two)."""
    return {w: enumerate_segmentations(w, vocab, cap) for w in sorted(set(words))}


def _cell_cost(t: str, y: str, target: TargetStats, mode: str) -> float:
    pt = target.marginal.get(t)
    if pt is None:
        return UNSEEN_COST
    pj = target.joint.get((t, y), 0.0)
    if pj <= 0.0:
        return UNSEEN_COST
    if mode == "conditional":
        return -math.log(pj / pt)
    return -math.log(pj)


def build_instance(freq: FrequencyTable, vocab: SubwordVocab, target: TargetStats,
                   gamma: float = DEFAULT_GAMMA, mode: str = "conditional",
                   cap: int = DEFAULT_SEGMENTATION_CAP,
                   segmentations: Mapping[str, list[Segmentation]] | None = None,
                   row_weight: str = "subword_set_size") -> TransportInstance:
    """Assemble the masked transport problem from source-side frequencies.

    ``mode`` picks the cost: -log(P_T(t,y)/P_T(t)) for ``conditional``,
    -log(P_T(t,y)) for ``joint``; target-unseen subwords get UNSEEN_COST.
    ``row_weight`` selects the |sub(w)| factor in the raw row mass: the size
    of the possible-subword set (default) or the default-segmentation length.
    """
    if gamma <= 0:
        raise NonPositiveGamma(gamma)
    if mode not in OBJECTIVE_MODES:
        raise ValueError(f"objective mode must be one of {OBJECTIVE_MODES}, got {mode!r}")
    if row_weight not in ROW_WEIGHT_MODES:
        raise ValueError(f"row_weight must be one of {ROW_WEIGHT_MODES}, got {row_weight!r}")
    if not freq.word_count:
        raise EmptyCorpus("source corpus has no tokens")

    words = sorted(freq.word_count)
    if segmentations is None:
        segmentations = enumerate_corpus_segmentations(words, vocab, cap)
    for w in words:
        if w not in segmentations:
            raise MissingSegmentations(w)
    subs = {w: sorted({p for seg in segmentations[w] for p in seg}) for w in words}

    col_index = sorted({t for pieces in subs.values() for t in pieces})
    col_pos = {t: j for j, t in enumerate(col_index)}
    row_index = sorted(freq.word_label_count)

    if row_weight == "subword_set_size":
        weight = {w: len(subs[w]) for w in words}
    else:
        weight = {w: len(tokenize_default(w, vocab)) for w in words}

    row_mass_raw = np.array(
        [freq.word_label_count[(w, y)] * weight[w] for w, y in row_index], dtype=float
    )
    col_mass_raw = np.zeros(len(col_index))
    for w in words:
        for t in subs[w]:
            col_mass_raw[col_pos[t]] += freq.word_count[w]

    row_ptr = np.zeros(len(row_index) + 1, dtype=np.int64)
    col_ids: list[int] = []
    cost_data: list[float] = []
    for i, (w, y) in enumerate(row_index):
        for t in subs[w]:
            col_ids.append(col_pos[t])
            cost_data.append(_cell_cost(t, y, target, mode))
        row_ptr[i + 1] = len(col_ids)
        if row_ptr[i + 1] == row_ptr[i]:
            raise InfeasibleRow((w, y))

    return TransportInstance(
        row_index=row_index,
        col_index=col_index,
        row_mass=row_mass_raw / row_mass_raw.sum(),
        col_mass=col_mass_raw / col_mass_raw.sum(),
        row_mass_raw=row_mass_raw,
        col_mass_raw=col_mass_raw,
        row_ptr=row_ptr,
        col_ids=np.array(col_ids, dtype=np.int64),
        cost_data=np.array(cost_data, dtype=float),
        gamma=float(gamma),
        objective_mode=mode,
    )


_INSTANCE_FORMAT = "subalign-instance-v1"


def save_instance(instance: TransportInstance, path: str | Path) -> None:
    """Write the debugging dump: a self-describing JSON document with explicit
    row/col index tables, raw masses, and the finite cells as [i, j, cost]."""
    rows = np.repeat(np.arange(instance.n_rows), np.diff(instance.row_ptr))
    doc = {
        "format": _INSTANCE_FORMAT,
        "gamma": instance.gamma,
        "objective_mode": instance.objective_mode,
        "rows": [list(r) for r in instance.row_index],
        "cols": list(instance.col_index),
        "row_mass_raw": instance.row_mass_raw.tolist(),
        "col_mass_raw": instance.col_mass_raw.tolist(),
        "cells": [
            [int(i), int(j), float(c)]
            for i, j, c in zip(rows, instance.col_ids, instance.cost_data)
        ],
    }
    Path(path).write_text(json.dumps(doc, indent=1) + "\n", encoding="utf-8")


def load_instance(path: str | Path) -> TransportInstance:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    if doc.get("format") != _INSTANCE_FORMAT:
        raise ValueError(f"not a {_INSTANCE_FORMAT} file: {path}")
    rows = np.array([c[0] for c in doc["cells"]], dtype=np.int64)
    cols = np.array([c[1] for c in doc["cells"]], dtype=np.int64)
    costs = np.array([c[2] for c in doc["cells"]], dtype=float)
    return TransportInstance.from_cells(
        doc["row_mass_raw"], doc["col_mass_raw"], rows, cols, costs,
        gamma=doc["gamma"], objective_mode=doc["objective_mode"],
        row_index=[tuple(r) for r in doc["rows"]], col_index=list(doc["cols"]),
    )
