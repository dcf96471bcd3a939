"""Entropic optimal-transport solver.

Solves min <P, D> - gamma * H(P) subject to fixed row/column marginals by
Sinkhorn matrix scaling of the kernel K = exp(-D / gamma): alternating
u <- a / (K v), v <- b / (K^T u), with the plan diag(u) K diag(v).  Masked
cells (infinite cost) are simply absent from the sparse kernel, so they carry
exactly zero mass in every iterate.

Two numerical paths compute the same fixed point: ``plain`` scaling on the
exponentiated kernel (fast, but exp(-cost/gamma) underflows once cost/gamma
gets large) and ``log_domain``, which runs the updates as segmented
log-sum-exp over the stored cells.  ``auto`` picks log_domain when gamma or
the cost range would underflow double precision.

Convergence is declared when the summed L1 violation of both marginals drops
to the configured tolerance.  A solve that exhausts max_iters returns its best
plan flagged ``converged=False`` rather than raising.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .errors import NonPositiveGamma, NumericalUnderflow, ShapeMismatch
from .estimator import TransportInstance

# Thresholds beyond which plain-mode kernels reach denormal/zero territory.
_PLAIN_GAMMA_LIMIT = 0.02
_PLAIN_COST_LIMIT = 20.0

STABILIZATION_MODES = ("auto", "plain", "log_domain")


@dataclass
class SolverConfig:
    """Solver knobs; ``gamma=None`` defers to the instance's regularization."""

    gamma: float | None = None
    max_iters: int = 10000
    tolerance: float = 1e-8
    stabilization: str = "auto"
    trace_path: str | Path | None = None

    def __post_init__(self):
        if self.gamma is not None and self.gamma <= 0:
            raise NonPositiveGamma(self.gamma)
        if self.tolerance <= 0:
            raise ValueError(f"tolerance must be > 0, got {self.tolerance}")
        if self.max_iters < 1:
            raise ValueError(f"max_iters must be >= 1, got {self.max_iters}")
        if self.stabilization not in STABILIZATION_MODES:
            raise ValueError(
                f"stabilization must be one of {STABILIZATION_MODES}, got {self.stabilization!r}"
            )


@dataclass
class TransportPlan:
    """Solved joint mass over the instance's finite cells (CSR layout shared
    with the instance; unstored cells are masked and exactly zero)."""

    row_ptr: np.ndarray
    col_ids: np.ndarray
    data: np.ndarray
    n_cols: int
    iterations: int
    marginal_error: float
    converged: bool

    @property
    def n_rows(self) -> int:
        return len(self.row_ptr) - 1

    def row_sums(self) -> np.ndarray:
        return np.add.reduceat(self.data, self.row_ptr[:-1])

    def col_sums(self) -> np.ndarray:
        return np.bincount(self.col_ids, weights=self.data, minlength=self.n_cols)

    def row_slice(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        lo, hi = self.row_ptr[i], self.row_ptr[i + 1]
        return self.col_ids[lo:hi], self.data[lo:hi]

    def dense(self) -> np.ndarray:
        out = np.zeros((self.n_rows, self.n_cols))
        for i in range(self.n_rows):
            cols, vals = self.row_slice(i)
            out[i, cols] = vals
        return out


def _segment_lse(x: np.ndarray, ptr: np.ndarray, seg: np.ndarray) -> np.ndarray:
    # log-sum-exp per segment; segments are non-empty by instance feasibility
    peak = np.maximum.reduceat(x, ptr[:-1])
    sums = np.add.reduceat(np.exp(x - peak[seg]), ptr[:-1])
    return peak + np.log(sums)


def _objective(p: np.ndarray, cost: np.ndarray, gamma: float) -> float:
    pos = p > 0
    entropy = -float(np.dot(p[pos], np.log(p[pos])))
    return float(np.dot(p, cost)) - gamma * entropy


def solve(instance: TransportInstance, config: SolverConfig | None = None) -> TransportPlan:
    """Run Sinkhorn scaling on the instance and return the transport plan."""
    if config is None:
        config = SolverConfig()
    gamma = config.gamma if config.gamma is not None else instance.gamma
    if gamma <= 0:
        raise NonPositiveGamma(gamma)

    mode = config.stabilization
    if mode == "auto":
        needs_log = gamma < _PLAIN_GAMMA_LIMIT or (
            instance.nnz > 0 and float(instance.cost_data.max()) > _PLAIN_COST_LIMIT
        )
        mode = "log_domain" if needs_log else "plain"

    trace: list[tuple[int, float, float]] | None = [] if config.trace_path else None
    if mode == "plain":
        data, iterations, err, converged = _solve_plain(instance, gamma, config, trace)
    else:
        data, iterations, err, converged = _solve_log(instance, gamma, config, trace)

    if trace is not None:
        lines = ["iteration,marginal_violation,objective"]
        lines += [f"{i},{v!r},{o!r}" for i, v, o in trace]
        Path(config.trace_path).write_text("\n".join(lines) + "\n", encoding="utf-8")

    return TransportPlan(
        row_ptr=instance.row_ptr,
        col_ids=instance.col_ids,
        data=data,
        n_cols=instance.n_cols,
        iterations=iterations,
        marginal_error=err,
        converged=converged,
    )


def _solve_plain(instance: TransportInstance, gamma: float, config: SolverConfig,
                 trace: list | None):
    n, m = instance.n_rows, instance.n_cols
    a, b = instance.row_mass, instance.col_mass
    kernel_data = np.exp(-instance.cost_data / gamma)
    if np.any(kernel_data == 0.0):
        raise NumericalUnderflow("exp(-cost/gamma) underflowed while building the kernel")
    K = sp.csr_matrix((kernel_data, instance.col_ids, instance.row_ptr), shape=(n, m))
    Kt = K.T.tocsr()
    rows_of = np.repeat(np.arange(n), np.diff(instance.row_ptr))

    u = np.ones(n)
    v = np.ones(m)
    Kv = K @ v
    err = math.inf
    converged = False
    iteration = 0
    for iteration in range(1, config.max_iters + 1):
        if np.any(Kv == 0.0):
            raise NumericalUnderflow("zero column in K v during scaling")
        u = a / Kv
        Ktu = Kt @ u
        if np.any(Ktu == 0.0):
            raise NumericalUnderflow("zero column in K^T u during scaling")
        v = b / Ktu
        if not (np.all(np.isfinite(u)) and np.all(np.isfinite(v))):
            raise NumericalUnderflow("scaling vectors left double-precision range")
        Kv = K @ v
        err = float(np.abs(u * Kv - a).sum() + np.abs(v * Ktu - b).sum())
        if trace is not None:
            p = u[rows_of] * kernel_data * v[instance.col_ids]
            trace.append((iteration, err, _objective(p, instance.cost_data, gamma)))
        if err <= config.tolerance:
            converged = True
            break

    data = u[rows_of] * kernel_data * v[instance.col_ids]
    return data, iteration, err, converged


def _solve_log(instance: TransportInstance, gamma: float, config: SolverConfig,
               trace: list | None):
    n, m = instance.n_rows, instance.n_cols
    log_a = np.log(instance.row_mass)
    log_b = np.log(instance.col_mass)
    log_kernel = -instance.cost_data / gamma
    col_ids = instance.col_ids
    row_ptr = instance.row_ptr
    rows_of = np.repeat(np.arange(n), np.diff(row_ptr))

    # column-major view of the cells for the g-update
    perm = np.lexsort((rows_of, col_ids))
    col_counts = np.bincount(col_ids, minlength=m)
    col_ptr = np.concatenate(([0], np.cumsum(col_counts)))
    col_seg = np.repeat(np.arange(m), col_counts)
    row_seg = rows_of

    f = np.zeros(n)
    g = np.zeros(m)
    err = math.inf
    converged = False
    iteration = 0
    for iteration in range(1, config.max_iters + 1):
        f = log_a - _segment_lse(log_kernel + g[col_ids], row_ptr, row_seg)
        shifted = (log_kernel + f[rows_of])[perm]
        g = log_b - _segment_lse(shifted, col_ptr, col_seg)

        p = np.exp(log_kernel + f[rows_of] + g[col_ids])
        row_err = np.abs(np.add.reduceat(p, row_ptr[:-1]) - instance.row_mass).sum()
        col_err = np.abs(np.bincount(col_ids, weights=p, minlength=m) - instance.col_mass).sum()
        err = float(row_err + col_err)
        if trace is not None:
            trace.append((iteration, err, _objective(p, instance.cost_data, gamma)))
        if err <= config.tolerance:
            converged = True
            break

    data = np.exp(log_kernel + f[rows_of] + g[col_ids])
    return data, iteration, err, converged


def _check_same_cells(plan: TransportPlan, instance: TransportInstance) -> None:
    if plan.n_rows != instance.n_rows or plan.n_cols != instance.n_cols:
        raise ShapeMismatch(
            f"plan is {plan.n_rows}x{plan.n_cols}, instance is "
            f"{instance.n_rows}x{instance.n_cols}"
        )
    if len(plan.data) != instance.nnz or not (
        np.array_equal(plan.row_ptr, instance.row_ptr)
        and np.array_equal(plan.col_ids, instance.col_ids)
    ):
        raise ShapeMismatch("plan and instance store different cell sets")


def transport_cost(plan: TransportPlan, instance: TransportInstance) -> float:
    """<P, D> over the finite cells; masked cells hold no mass by construction."""
    _check_same_cells(plan, instance)
    return float(np.dot(plan.data, instance.cost_data))


def plan_entropy(plan: TransportPlan) -> float:
    """Shannon entropy -sum p log p over the positive plan entries."""
    positive = plan.data[plan.data > 0]
    return -float(np.dot(positive, np.log(positive)))
