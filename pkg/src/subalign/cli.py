"""Pipeline orchestration: annotate, solve, retokenize, diagnose, bench.

Configuration precedence: built-in defaults < ``--config`` key = value file
< ``SUBALIGN_*`` environment variables < command-line flags.  Every command
validates its inputs before touching outputs, and all outputs are written
to a temporary file and renamed into place.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 numerical error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, fields
from pathlib import Path

from .corpus import count_frequencies, parse_conll, serialize_conll
from .diagnostics import BenchRecord, bench_solver, compare_before_after
from .errors import ConfigError, DataError, NotConverged, NumericalError
from .estimator import (
    DEFAULT_ALPHA,
    DEFAULT_GAMMA,
    build_instance,
    enumerate_corpus_segmentations,
    estimate_target,
    save_instance,
)
from .lexicon import annotate_corpus, load_lexicon
from .policy import derive_policy, load_policy_file, policy_to_jsonl, retokenize_corpus
from .segmenter import DEFAULT_SEGMENTATION_CAP, load_vocab
from .solver import SolverConfig, solve

ENV_PREFIX = "SUBALIGN_"

ANNOTATED_NAME = "target_annotated.conll"
POLICY_NAME = "policy.jsonl"
RETOKENIZED_NAME = "retokenized.conll"
TRACE_NAME = "solve_trace.csv"
STATS_NAME = "instance_stats.json"
REPORT_NAME = "kl_report.json"


@dataclass
class PipelineConfig:
    source_corpus: Path | None = None
    target_corpus: Path | None = None
    annotated_target: Path | None = None
    lexicon: Path | None = None
    vocab: Path | None = None
    output_dir: Path = Path("out")
    label_space: tuple[str, ...] = ()
    objective_mode: str = "conditional"
    gamma: float = DEFAULT_GAMMA
    smoothing_alpha: float = DEFAULT_ALPHA
    seg_cap: int = DEFAULT_SEGMENTATION_CAP
    solver_tolerance: float = 1e-8
    solver_max_iters: int = 10000
    seed: int = 0
    case_insensitive_lexicon: bool = False
    repair_bio: bool = False

    def annotated_path(self) -> Path:
        return self.annotated_target or self.output_dir / ANNOTATED_NAME


def _parse_bool(value: str) -> bool:
    lowered = value.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"expected a boolean, got {value!r}")


_PARSERS = {
    "source_corpus": Path,
    "target_corpus": Path,
    "annotated_target": Path,
    "lexicon": Path,
    "vocab": Path,
    "output_dir": Path,
    "label_space": lambda v: tuple(part.strip() for part in v.split(",") if part.strip()),
    "objective_mode": str,
    "gamma": float,
    "smoothing_alpha": float,
    "seg_cap": int,
    "solver_tolerance": float,
    "solver_max_iters": int,
    "seed": int,
    "case_insensitive_lexicon": _parse_bool,
    "repair_bio": _parse_bool,
}


def load_config(path: str | Path | None, env: dict | None = None,
                overrides: dict | None = None) -> PipelineConfig:
    """Merge file, environment, and flag overrides into a validated config."""
    values: dict = {}
    if path is not None:
        path = Path(path)
        if not path.is_file():
            raise ConfigError(f"config file not found: {path}")
        for line_no, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{line_no}: expected `key = value`, got {raw!r}")
            key, _, value = line.partition("=")
            values[key.strip()] = value.strip()

    env = os.environ if env is None else env
    for name in _PARSERS:
        env_key = ENV_PREFIX + name.upper()
        if env_key in env:
            values[name] = env[env_key]

    config = PipelineConfig()
    for key, raw_value in values.items():
        if key not in _PARSERS:
            raise ConfigError(f"unknown config key {key!r}")
        try:
            setattr(config, key, _PARSERS[key](raw_value))
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"config key {key!r}: {exc}") from exc

    for key, value in (overrides or {}).items():
        if value is not None:
            setattr(config, key, value)

    if config.objective_mode not in ("conditional", "joint"):
        raise ConfigError(f"objective_mode must be conditional or joint, got {config.objective_mode!r}")
    if config.gamma <= 0:
        raise ConfigError(f"gamma must be > 0, got {config.gamma}")
    if config.smoothing_alpha < 0:
        raise ConfigError(f"smoothing_alpha must be >= 0, got {config.smoothing_alpha}")
    if config.seg_cap < 1:
        raise ConfigError(f"seg_cap must be >= 1, got {config.seg_cap}")
    if config.solver_tolerance <= 0:
        raise ConfigError(f"solver_tolerance must be > 0, got {config.solver_tolerance}")
    if config.solver_max_iters < 1:
        raise ConfigError(f"solver_max_iters must be >= 1, got {config.solver_max_iters}")
    return config


def _require_files(config: PipelineConfig, names: list[str]) -> None:
    for name in names:
        value: Path | None = getattr(config, name)
        if value is None:
            raise ConfigError(f"config key {name!r} is required for this command")
        if not Path(value).is_file():
            raise ConfigError(f"{name} file not found: {value}")
    if not config.label_space:
        raise ConfigError("label_space must declare at least one entity type")


def _write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def _read_plain_sentences(path: Path) -> list[list[str]]:
    # unlabeled corpus: one sentence per line, whitespace-tokenized
    lines = path.read_text(encoding="utf-8").splitlines()
    return [line.split() for line in lines if line.split()]


def cmd_annotate(config: PipelineConfig, args: argparse.Namespace) -> int:
    _require_files(config, ["target_corpus", "lexicon"])
    lexicon = load_lexicon(Path(config.lexicon).read_text(encoding="utf-8"),
                           set(config.label_space))
    sentences = _read_plain_sentences(Path(config.target_corpus))
    annotated = annotate_corpus(sentences, lexicon, set(config.label_space),
                                config.case_insensitive_lexicon)
    out_path = config.annotated_path()
    _write_atomic(out_path, serialize_conll(annotated))

    n_tokens = annotated.n_tokens()
    n_entity_tokens = sum(1 for _, lbl in annotated.tokens() if lbl.kind != "O")
    n_spans = sum(1 for _, lbl in annotated.tokens() if lbl.kind == "B")
    coverage = n_entity_tokens / n_tokens if n_tokens else 0.0
    print(f"annotated {len(annotated.sentences)} sentences, {n_tokens} tokens -> {out_path}")
    print(f"entity spans: {n_spans}, token coverage: {coverage:.4f}")
    return 0


def cmd_solve(config: PipelineConfig, args: argparse.Namespace) -> int:
    _require_files(config, ["source_corpus", "vocab"])
    annotated_path = config.annotated_path()
    if not annotated_path.is_file():
        raise ConfigError(f"annotated target corpus not found: {annotated_path} (run `annotate` first)")

    vocab = load_vocab(config.vocab)
    source = parse_conll(Path(config.source_corpus).read_text(encoding="utf-8"),
                         config.label_space, repair=config.repair_bio)
    target = parse_conll(annotated_path.read_text(encoding="utf-8"), config.label_space)

    freq = count_frequencies(source)
    stats = estimate_target(target, vocab, config.smoothing_alpha)
    segmentations = enumerate_corpus_segmentations(freq.word_count, vocab, config.seg_cap)
    instance = build_instance(freq, vocab, stats, gamma=config.gamma,
                              mode=config.objective_mode, cap=config.seg_cap,
                              segmentations=segmentations)
    if args.dump_instance:
        save_instance(instance, args.dump_instance)

    trace_tmp = config.output_dir / (TRACE_NAME + ".tmp")
    config.output_dir.mkdir(parents=True, exist_ok=True)
    plan = solve(instance, SolverConfig(
        tolerance=config.solver_tolerance,
        max_iters=config.solver_max_iters,
        trace_path=trace_tmp,
    ))
    os.replace(trace_tmp, config.output_dir / TRACE_NAME)

    if not plan.converged:
        if args.strict:
            raise NotConverged(plan.iterations, plan.marginal_error)
        print(f"warning: solver stopped at violation {plan.marginal_error:.3e} "
              f"after {plan.iterations} iterations", file=sys.stderr)

    policy = derive_policy(plan, instance, segmentations, vocab)
    _write_atomic(config.output_dir / POLICY_NAME, policy_to_jsonl(policy))

    stats_doc = {
        "rows": instance.n_rows,
        "cols": instance.n_cols,
        "finite_cells": instance.nnz,
        "gamma": instance.gamma,
        "objective_mode": instance.objective_mode,
        "iterations": plan.iterations,
        "marginal_error": plan.marginal_error,
        "converged": plan.converged,
        "fallback_entries": len(policy.fallback),
    }
    _write_atomic(config.output_dir / STATS_NAME, json.dumps(stats_doc, indent=2) + "\n")

    print(f"instance: {instance.n_rows} rows x {instance.n_cols} cols, "
          f"{instance.nnz} finite cells")
    print(f"solved in {plan.iterations} iterations, marginal violation "
          f"{plan.marginal_error:.3e} -> {config.output_dir / POLICY_NAME}")
    return 0


def cmd_retokenize(config: PipelineConfig, args: argparse.Namespace) -> int:
    _require_files(config, ["source_corpus", "vocab"])
    policy_path = Path(args.policy) if args.policy else config.output_dir / POLICY_NAME
    if not policy_path.is_file():
        raise ConfigError(f"policy file not found: {policy_path} (run `solve` first)")

    vocab = load_vocab(config.vocab)
    source = parse_conll(Path(config.source_corpus).read_text(encoding="utf-8"),
                         config.label_space, repair=config.repair_bio)
    policy = load_policy_file(policy_path)

    epochs = max(1, args.epoch_seeds)
    for epoch in range(epochs):
        retok = retokenize_corpus(source, policy, vocab, config.seed + epoch)
        name = RETOKENIZED_NAME if epochs == 1 else f"retokenized.ep{epoch}.conll"
        _write_atomic(config.output_dir / name, serialize_conll(retok))
        print(f"retokenized {retok.n_tokens()} subword rows (seed {config.seed + epoch}) "
              f"-> {config.output_dir / name}")
    return 0


def cmd_diagnose(config: PipelineConfig, args: argparse.Namespace) -> int:
    _require_files(config, ["source_corpus", "vocab"])
    annotated_path = config.annotated_path()
    retok_path = Path(args.retokenized) if args.retokenized else config.output_dir / RETOKENIZED_NAME
    for label, p in (("annotated target", annotated_path), ("retokenized corpus", retok_path)):
        if not p.is_file():
            raise ConfigError(f"{label} not found: {p}")

    vocab = load_vocab(config.vocab)
    source = parse_conll(Path(config.source_corpus).read_text(encoding="utf-8"),
                         config.label_space, repair=config.repair_bio)
    target = parse_conll(annotated_path.read_text(encoding="utf-8"), config.label_space)
    retokenized = parse_conll(retok_path.read_text(encoding="utf-8"), config.label_space)

    stats = estimate_target(target, vocab, config.smoothing_alpha)
    report = compare_before_after(source, retokenized, stats, vocab)
    _write_atomic(config.output_dir / REPORT_NAME, report.to_json())
    print(report.format_table())
    print(f"report -> {config.output_dir / REPORT_NAME}")
    return 0


def cmd_bench(config: PipelineConfig, args: argparse.Namespace) -> int:
    record = bench_solver(args.rows, args.cols, args.density,
                          args.bench_gamma if args.bench_gamma is not None else config.gamma,
                          args.bench_seed if args.bench_seed is not None else config.seed,
                          tolerance=args.bench_tolerance)
    print(BenchRecord.csv_header())
    print(record.csv_row())
    return 0


def _add_override_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="key = value config file")
    parser.add_argument("--source", dest="source_corpus", type=Path)
    parser.add_argument("--target", dest="target_corpus", type=Path)
    parser.add_argument("--annotated-target", dest="annotated_target", type=Path)
    parser.add_argument("--lexicon", type=Path)
    parser.add_argument("--vocab", type=Path)
    parser.add_argument("--output-dir", dest="output_dir", type=Path)
    parser.add_argument("--labels", dest="label_space",
                        type=_PARSERS["label_space"], metavar="A,B,C")
    parser.add_argument("--mode", dest="objective_mode", choices=("conditional", "joint"))
    parser.add_argument("--gamma", type=float)
    parser.add_argument("--alpha", dest="smoothing_alpha", type=float)
    parser.add_argument("--seg-cap", dest="seg_cap", type=int)
    parser.add_argument("--tolerance", dest="solver_tolerance", type=float)
    parser.add_argument("--max-iters", dest="solver_max_iters", type=int)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--case-insensitive", dest="case_insensitive_lexicon",
                        action="store_const", const=True)
    parser.add_argument("--repair-bio", dest="repair_bio", action="store_const", const=True)


_CONFIG_KEYS = [f.name for f in fields(PipelineConfig)]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="subalign",
        description="Re-tokenize a labeled NER corpus toward a target domain's "
                    "subword distribution via entropic optimal transport.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_annotate = sub.add_parser("annotate", help="distantly annotate the target corpus")
    p_solve = sub.add_parser("solve", help="estimate distributions and solve the transport problem")
    p_solve.add_argument("--strict", action="store_true",
                         help="treat non-convergence as an error (exit 4)")
    p_solve.add_argument("--dump-instance", type=Path, metavar="PATH",
                         help="write the assembled transport instance as JSON")
    p_retok = sub.add_parser("retokenize", help="sample a re-tokenized source corpus")
    p_retok.add_argument("--policy", type=Path, help="policy JSONL (default: <output_dir>/policy.jsonl)")
    p_retok.add_argument("--epoch-seeds", type=int, default=1, metavar="N",
                         help="emit N passes with seeds seed..seed+N-1")
    p_diag = sub.add_parser("diagnose", help="KL report before/after re-tokenization")
    p_diag.add_argument("--retokenized", type=Path,
                        help="re-tokenized corpus (default: <output_dir>/retokenized.conll)")
    p_bench = sub.add_parser("bench", help="time the solver on a seeded random instance")
    p_bench.add_argument("--rows", type=int, required=True)
    p_bench.add_argument("--cols", type=int, required=True)
    p_bench.add_argument("--density", type=float, default=0.01)
    p_bench.add_argument("--bench-gamma", type=float, default=None)
    p_bench.add_argument("--bench-seed", type=int, default=None)
    p_bench.add_argument("--bench-tolerance", type=float, default=1e-6)

    for p in (p_annotate, p_solve, p_retok, p_diag, p_bench):
        _add_override_flags(p)
    return parser


_COMMANDS = {
    "annotate": cmd_annotate,
    "solve": cmd_solve,
    "retokenize": cmd_retokenize,
    "diagnose": cmd_diagnose,
    "bench": cmd_bench,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        overrides = {k: getattr(args, k) for k in _CONFIG_KEYS if hasattr(args, k)}
        config = load_config(args.config, overrides=overrides)
        return _COMMANDS[args.command](config, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
