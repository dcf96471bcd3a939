"""KL-divergence diagnostics and the solver timing benchmark.

The headline question after re-tokenization: did the source subword/label
distribution move toward the target's?  Both the conditional divergence
KL(P_src(y|t) || P_tgt(y|t)) and the joint divergence over (t, y) are
reported before and after.  The conditional form is weighted by the source
subword marginal so it is a proper expected KL and stays finite; that
weighting is recorded in the report itself.  All distributions entering a
comparison are re-smoothed with the target's alpha over the union grid of
observed subwords, so disjoint supports stay finite too.
"""

from __future__ import annotations

import json
import math
import time
from collections import Counter
from dataclasses import asdict, dataclass
from typing import Mapping

import numpy as np

from .corpus import LabeledCorpus
from .errors import InstanceEmpty, SupportViolation
from .estimator import TargetStats, TransportInstance, subword_label_counts
from .segmenter import SubwordVocab
from .solver import SolverConfig, solve

_WEIGHTING_NOTE = "conditional KL weighted by the source subword marginal"


@dataclass
class KlReport:
    kl_conditional_before: float
    kl_conditional_after: float
    kl_joint_before: float
    kl_joint_after: float
    support_overlap: float

    def to_json(self) -> str:
        doc = dict(sorted(asdict(self).items()))
        doc["weighting"] = _WEIGHTING_NOTE
        return json.dumps(doc, indent=2) + "\n"

    def format_table(self) -> str:
        rows = [
            ("metric", "before", "after", "delta"),
            ("kl_conditional",
             f"{self.kl_conditional_before:.6f}",
             f"{self.kl_conditional_after:.6f}",
             f"{self.kl_conditional_after - self.kl_conditional_before:+.6f}"),
            ("kl_joint",
             f"{self.kl_joint_before:.6f}",
             f"{self.kl_joint_after:.6f}",
             f"{self.kl_joint_after - self.kl_joint_before:+.6f}"),
            ("support_overlap", f"{self.support_overlap:.6f}", "", ""),
        ]
        widths = [max(len(r[c]) for r in rows) for c in range(4)]
        out = ["  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip()
               for row in rows]
        return "\n".join(out) + f"\n# {_WEIGHTING_NOTE}\n"


def kl_conditional(p: Mapping[str, Mapping[str, float]],
                   q: Mapping[str, Mapping[str, float]],
                   weights: Mapping[str, float]) -> float:
    """sum_t w(t) sum_y p(y|t) log(p(y|t) / q(y|t)).

    q must be smoothed so q(y|t) > 0 wherever p(y|t) > 0.
    """
    total = 0.0
    for t, weight in weights.items():
        if weight <= 0.0:
            continue
        qt = q.get(t, {})
        for y, pv in p[t].items():
            if pv <= 0.0:
                continue
            qv = qt.get(y, 0.0)
            if qv <= 0.0:
                raise SupportViolation(f"subword {t!r}, category {y!r}")
            total += weight * pv * math.log(pv / qv)
    return total


def kl_joint(p: Mapping[tuple[str, str], float],
             q: Mapping[tuple[str, str], float]) -> float:
    """Standard KL over the joint (subword, category) grid."""
    total = 0.0
    for cell, pv in p.items():
        if pv <= 0.0:
            continue
        qv = q.get(cell, 0.0)
        if qv <= 0.0:
            raise SupportViolation(f"cell {cell!r}")
        total += pv * math.log(pv / qv)
    return total


def _subword_counts_at_subword_level(corpus: LabeledCorpus) -> Counter:
    # rows of a re-tokenized corpus are already subwords
    counts: Counter[tuple[str, str]] = Counter()
    for surface, label in corpus.tokens():
        counts[(surface, label.category)] += 1
    return counts


def _smoothed(counts: Mapping[tuple[str, str], int], subwords: list[str],
              categories: tuple[str, ...], alpha: float) -> dict[tuple[str, str], float]:
    total = sum(counts.values())
    denom = total + alpha * len(subwords) * len(categories)
    return {
        (t, y): (counts.get((t, y), 0) + alpha) / denom
        for t in subwords
        for y in categories
        if counts.get((t, y), 0) + alpha > 0
    }


def _conditional_family(joint: Mapping[tuple[str, str], float]):
    marginal: dict[str, float] = {}
    for (t, _), p in joint.items():
        marginal[t] = marginal.get(t, 0.0) + p
    family: dict[str, dict[str, float]] = {}
    for (t, y), p in joint.items():
        family.setdefault(t, {})[y] = p / marginal[t]
    return family, marginal


def compare_before_after(source: LabeledCorpus, retokenized: LabeledCorpus,
                         target_stats: TargetStats, vocab: SubwordVocab) -> KlReport:
    """KL of the source subword distribution against the target, under the
    default tokenization (before) and under the re-tokenized corpus (after).

    All three count tables are re-smoothed with the target's alpha on the
    union grid of their observed subwords, making every KL finite and the
    before/after numbers directly comparable.
    """
    counts_before = subword_label_counts(source, vocab)
    counts_after = _subword_counts_at_subword_level(retokenized)
    counts_target = target_stats.joint_counts
    categories = target_stats.categories
    if set(source.categories) != set(categories):
        raise ValueError(
            f"label spaces differ: source {source.categories}, target {categories}"
        )

    support = lambda counts: {t for t, _ in counts}
    union = sorted(support(counts_before) | support(counts_after) | support(counts_target))
    alpha = target_stats.smoothing_alpha

    p_before = _smoothed(counts_before, union, categories, alpha)
    p_after = _smoothed(counts_after, union, categories, alpha)
    q_target = _smoothed(counts_target, union, categories, alpha)

    fam_before, w_before = _conditional_family(p_before)
    fam_after, w_after = _conditional_family(p_after)
    fam_target, _ = _conditional_family(q_target)

    before_support = support(counts_before)
    target_support = support(counts_target)
    overlap_union = before_support | target_support
    overlap = len(before_support & target_support) / len(overlap_union) if overlap_union else 0.0

    return KlReport(
        kl_conditional_before=kl_conditional(fam_before, fam_target, w_before),
        kl_conditional_after=kl_conditional(fam_after, fam_target, w_after),
        kl_joint_before=kl_joint(p_before, q_target),
        kl_joint_after=kl_joint(p_after, q_target),
        support_overlap=overlap,
    )


@dataclass
class BenchRecord:
    rows: int
    cols: int
    nnz: int
    density: float
    gamma: float
    seed: int
    seconds: float
    iterations: int
    marginal_error: float
    converged: bool

    @staticmethod
    def csv_header() -> str:
        return "rows,cols,nnz,density,gamma,seed,seconds,iterations,marginal_error,converged"

    def csv_row(self) -> str:
        return (f"{self.rows},{self.cols},{self.nnz},{self.density},{self.gamma},"
                f"{self.seed},{self.seconds:.4f},{self.iterations},"
                f"{self.marginal_error:.3e},{int(self.converged)}")


def random_instance(rows: int, cols: int, density: float, gamma: float,
                    seed: int) -> TransportInstance:
    """Seeded random masked instance with balanced random marginals.

    A cyclic diagonal guarantees every row and column at least one finite
    cell; the rest of the cells are drawn uniformly to reach the requested
    density, with uniform [0, 1) costs.  The marginals are the row/column
    sums of a random strictly positive reference plan on the sampled cells,
    so the masked problem is always strictly feasible (arbitrary random
    marginals on a sparse mask generally are not).
    """
    if rows < 1 or cols < 1:
        raise InstanceEmpty(f"need at least one row and one column, got {rows}x{cols}")
    if not 0.0 < density <= 1.0:
        raise ValueError(f"density must be in (0, 1], got {density}")
    rng = np.random.default_rng(seed)
    span = max(rows, cols)
    base = np.unique((np.arange(span) % rows) * cols + (np.arange(span) % cols))
    target_nnz = max(int(density * rows * cols), len(base))
    codes = base
    while len(codes) < target_nnz:
        need = target_nnz - len(codes)
        draw = np.unique(rng.integers(0, rows * cols, size=int(need * 1.5) + 16))
        fresh = np.setdiff1d(draw, codes, assume_unique=True)
        if len(fresh) > need:
            keep = rng.choice(len(fresh), size=need, replace=False)
            fresh = fresh[np.sort(keep)]
        codes = np.concatenate([codes, fresh])
    codes = np.sort(codes)
    i = codes // cols
    j = codes % cols
    costs = rng.random(len(codes))
    reference = rng.random(len(codes)) + 0.1
    row_mass = np.bincount(i, weights=reference, minlength=rows)
    col_mass = np.bincount(j, weights=reference, minlength=cols)
    return TransportInstance.from_cells(row_mass, col_mass, i, j, costs, gamma)


def bench_solver(rows: int, cols: int, density: float, gamma: float, seed: int,
                 tolerance: float = 1e-6, max_iters: int = 10000) -> BenchRecord:
    """Time one solve of a seeded random instance; returns a CSV-ready record."""
    instance = random_instance(rows, cols, density, gamma, seed)
    config = SolverConfig(tolerance=tolerance, max_iters=max_iters)
    start = time.perf_counter()
    plan = solve(instance, config)
    elapsed = time.perf_counter() - start
    return BenchRecord(
        rows=rows, cols=cols, nnz=instance.nnz, density=density, gamma=gamma,
        seed=seed, seconds=elapsed, iterations=plan.iterations,
        marginal_error=plan.marginal_error, converged=plan.converged,
    )
