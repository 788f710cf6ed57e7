#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Command-line front end of the TCNN matching engine.

Subcommands:
- synth:     generate a synthetic FAQ knowledge base and labeled queries
- index:     build the BM25 candidate index over a knowledge base
- train:     train a tcnn / atcnn1 / atcnn2 reranker
- eval:      retrieve, rerank and report P@1 / R@1 / F1@1
- query:     answer one question against the knowledge base
- gradcheck: compare analytic and finite-difference gradients
- bench:     measure per-triple scoring latency

Exit codes: 0 success, 1 I/O failure, 2 usage or data error, 3 numeric or
check failure.
"""

import sys
import json
import logging
import argparse
import dataclasses
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from .common.config import coerce, read_config_file, thread_count
from .common.errors import (
    ArgumentError,
    CheckpointError,
    DataError,
    GradientCheckError,
    NumericError,
    ShapeError,
    TCNNError,
)
from .data.dataset import load_dataset, save_dataset, split
from .data.synthetic import generate_synthetic
from .evaluation.baseline import WordAverageBaseline
from .evaluation.bench import latency_bench
from .evaluation.metrics import fixed_threshold_report, format_table, threshold_sweep
from .evaluation.ranking import build_ranked_queries, rank_candidates
from .model.config import EMBEDDINGS, VARIANTS, ModelConfig
from .model.gradcheck import TOLERANCE, check_gradients, small_config
from .retrieval.bm25 import DEFAULT_K, Bm25Index
from .retrieval.knowledge_base import KnowledgeBase
from .train.checkpoint import Checkpoint, load_checkpoint, save_checkpoint
from .train.trainer import TrainConfig, Trainer, balanced_pos_weight, build_vocabulary
from .text.embeddings import load_pretrained

WORD_AVERAGE = "word-average"

MODEL_FIELDS = {f.name for f in dataclasses.fields(ModelConfig)}
TRAIN_FIELDS = {f.name for f in dataclasses.fields(TrainConfig)}

# Command-line flags that map onto configuration fields under another name.
FLAG_ALIASES = {
    "epochs": "max_epochs",
    "lr": "learning_rate",
}

GLOBAL_FLAG_TYPES = {"seed": int, "threads": int}
RESERVED_KEYS = ("func", "config", "command", "defaults", "verbose", "question", "_parser")


def setup_logging(verbosity: int = 0) -> None:
    """Set up logging on standard error; -v for INFO, -vv for DEBUG."""
    if verbosity >= 2:
        level = logging.DEBUG
    elif verbosity == 1:
        level = logging.INFO
    else:
        level = logging.WARNING
    logging.basicConfig(
        level=level,
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        stream=sys.stderr
    )


def echo_config(lines: Sequence[str]) -> None:
    """Print the resolved configuration to standard error."""
    for line in lines:
        print(line, file=sys.stderr)


def resolve_settings(args: argparse.Namespace) -> Dict[str, Dict[str, Any]]:
    """
    Merge defaults, the config file and command-line flags.

    Config file keys are configuration fields or flag names of the running
    subcommand; flags given on the command line win.

    Returns:
        Dictionary with the "model", "train" and "args" layers

    Raises:
        ArgumentError: On a config key the subcommand does not know
    """
    layers: Dict[str, Dict[str, Any]] = {"model": {}, "train": {}, "args": {}}
    flag_types = dict(GLOBAL_FLAG_TYPES)
    flag_types.update({a.dest: a.type for a in args._parser._actions if a.dest != "help"})
    file_values = read_config_file(args.config) if args.config else {}
    for key, value in file_values.items():
        name = FLAG_ALIASES.get(key, key)
        if key in flag_types and key not in RESERVED_KEYS:
            if getattr(args, key, None) is None:
                kind = flag_types[key]
                setattr(args, key, coerce(value, kind) if kind in (int, float) else value)
        elif name in MODEL_FIELDS:
            layers["model"][name] = value
        elif name in TRAIN_FIELDS:
            layers["train"][name] = value
        else:
            raise ArgumentError(f"unknown configuration key for {args.command}: {key}")

    for key, value in vars(args).items():
        if value is None or key in RESERVED_KEYS:
            continue
        name = FLAG_ALIASES.get(key, key)
        if name in MODEL_FIELDS:
            layers["model"][name] = value
        elif name in TRAIN_FIELDS:
            layers["train"][name] = value
    for key, default in args.defaults.items():
        if getattr(args, key, None) is None:
            setattr(args, key, default)
    if args.seed is not None:
        layers["model"]["seed"] = args.seed
        layers["train"]["seed"] = args.seed
    layers["args"] = {
        k: v for k, v in sorted(vars(args).items())
        if k not in ("func", "defaults", "question") and not k.startswith("_") and v is not None
    }
    return layers


def _settings_lines(settings: Dict[str, Dict[str, Any]]) -> List[str]:
    return [f"{k}={v}" for k, v in settings["args"].items()]


def _vocab_path(model_path: str) -> str:
    return f"{model_path}.vocab.tsv"


def _history_path(model_path: str) -> str:
    return f"{model_path}.history.json"


def _check_vocabulary_hash(ckpt: Checkpoint, index: Bm25Index) -> None:
    if ckpt.kb_hash and index.vocab_hash and ckpt.kb_hash != index.vocab_hash:
        raise DataError(
            "vocabulary hash mismatch: the model was trained against another knowledge base "
            f"than the index was built from (model {ckpt.kb_hash[:12]}, index {index.vocab_hash[:12]})"
        )


def cmd_synth(args: argparse.Namespace) -> int:
    """Generate the synthetic corpus plus its 60/20/20 split."""
    settings = resolve_settings(args)
    echo_config(_settings_lines(settings))
    seed = args.seed if args.seed is not None else 42
    kb_path, dataset_path = generate_synthetic(seed, args.entries, args.queries, args.out_dir)
    kb = KnowledgeBase.load(kb_path)
    splits = split(load_dataset(dataset_path, kb), seed)
    out = Path(args.out_dir)
    for name, triples in (("train", splits.train), ("valid", splits.valid), ("test", splits.test)):
        save_dataset(triples, str(out / f"{name}.jsonl"))
    print(f"Knowledge base: {kb_path} ({len(kb)} entries)")
    print(f"Dataset: {dataset_path} ({len(splits.train) + len(splits.valid) + len(splits.test)} triples)")
    print(f"Splits: train {len(splits.train)}, valid {len(splits.valid)}, test {len(splits.test)}")
    return 0


def cmd_index(args: argparse.Namespace) -> int:
    """Build and save the BM25 index."""
    settings = resolve_settings(args)
    echo_config(_settings_lines(settings))
    kb = KnowledgeBase.load(args.kb)
    weights = {"title": args.title_weight, "answer": args.answer_weight}
    index = Bm25Index.build(kb, tokenizer=args.tokenizer, k1=args.k1, b=args.b, field_weights=weights)
    index.save(args.out)
    print(f"Indexed {index.document_count} documents, {index.term_count} terms -> {args.out}")
    return 0


def cmd_train(args: argparse.Namespace) -> int:
    """Train a model and write the checkpoint, vocabulary and history."""
    settings = resolve_settings(args)
    train_values = dict(settings["train"])
    kb = KnowledgeBase.load(args.kb)
    train = load_dataset(args.train, kb)
    valid = load_dataset(args.valid, kb)
    if str(train_values.get("pos_weight", "")).lower() == "auto":
        train_values["pos_weight"] = balanced_pos_weight(train)
    cfg = ModelConfig.from_mapping(settings["model"])
    tcfg = TrainConfig.from_mapping(train_values)
    echo_config([f"model.{line}" for line in cfg.to_lines()] + [f"train.{line}" for line in tcfg.to_lines()]
                + _settings_lines(settings))

    vocab = build_vocabulary(kb, train, cfg.tokenizer)
    embeddings = None
    if args.embeddings:
        embeddings = load_pretrained(args.embeddings, vocab, cfg.embed_dim, np.random.default_rng(cfg.seed))
    index = Bm25Index.load(args.index) if args.index else None
    trainer = Trainer(kb, vocab, cfg, tcfg, embeddings=embeddings, index=index,
                      threads=thread_count(args.threads))
    ckpt, history = trainer.fit(train, valid)

    save_checkpoint(ckpt, args.out)
    vocab.save(_vocab_path(args.out))
    history_path = Path(_history_path(args.out))
    with open(history_path, 'w', encoding='utf-8') as f:
        json.dump(history, f, indent=2)
    best = ckpt.metadata
    print(f"Trained {cfg.variant} for {len(history)} epochs; best epoch {best['epoch']} "
          f"valid F1@1 {float(best['best_valid_f1']):.4f} at threshold {float(best['threshold']):.2f}")
    print(f"Checkpoint: {args.out}")
    print(f"History: {history_path}")
    return 0


def _parse_threshold(raw: str) -> Optional[float]:
    if raw == "auto":
        return None
    try:
        tau = float(raw)
    except ValueError:
        raise ArgumentError(f"threshold must be 'auto' or a number, got {raw!r}")
    if not 0.0 <= tau <= 1.0:
        raise ArgumentError(f"threshold must lie in [0, 1], got {tau}")
    return tau


def cmd_eval(args: argparse.Namespace) -> int:
    """Evaluate a model (and optionally the WordAverage baseline) on a test set."""
    settings = resolve_settings(args)
    echo_config(_settings_lines(settings))
    tau = _parse_threshold(args.threshold)
    ckpt = load_checkpoint(args.model)
    kb = KnowledgeBase.load(args.kb)
    index = Bm25Index.load(args.index)
    _check_vocabulary_hash(ckpt, index)
    test = load_dataset(args.test, kb)
    threads = thread_count(args.threads)

    scorers = [ckpt.matcher()]
    if args.baseline == WORD_AVERAGE:
        scorers.append(WordAverageBaseline(ckpt.params[EMBEDDINGS], ckpt.vocab, ckpt.model_config.tokenizer))
    reports = []
    for scorer in scorers:
        ranked = build_ranked_queries(test, scorer, kb, index, k=args.k, threads=threads)
        if tau is None:
            reports.append(threshold_sweep(ranked, step=args.step, method=scorer.name))
        else:
            reports.append(fixed_threshold_report(ranked, tau, method=scorer.name))
        logging.info(f"Evaluated {scorer.name} on {len(ranked)} queries")

    print(format_table(reports))
    if args.json_out:
        out = Path(args.json_out)
        out.parent.mkdir(parents=True, exist_ok=True)
        with open(out, 'w', encoding='utf-8') as f:
            json.dump([r.to_dict() for r in reports], f, indent=2, sort_keys=True)
        print(f"Report: {out}")
    return 0


def cmd_query(args: argparse.Namespace) -> int:
    """Answer one question."""
    question = " ".join(args.question).strip()
    if not question:
        args._parser.print_usage(sys.stderr)
        print("Error: the question is empty", file=sys.stderr)
        return 2
    settings = resolve_settings(args)
    echo_config(_settings_lines(settings))
    ckpt = load_checkpoint(args.model)
    kb = KnowledgeBase.load(args.kb)
    index = Bm25Index.load(args.index)
    _check_vocabulary_hash(ckpt, index)
    tau = args.threshold if args.threshold is not None else ckpt.threshold

    ids = [kb_id for kb_id, _ in index.search(question, args.k)]
    ranked = rank_candidates(question, ids, ckpt.matcher(), kb, threads=thread_count(args.threads))
    for rank, candidate in enumerate(ranked.candidates, start=1):
        print(f"{rank:>3}  {candidate.score:.4f}  {candidate.kb_id}  {kb.get(candidate.kb_id).title}")
    top = ranked.top
    if top is not None and top.score >= tau:
        print(f"Answer ({top.kb_id}, score {top.score:.4f}): {kb.get(top.kb_id).answer}")
    else:
        print("no confident answer")
    return 0


def cmd_gradcheck(args: argparse.Namespace) -> int:
    """Run the finite-difference gradient check on a small model."""
    settings = resolve_settings(args)
    echo_config(_settings_lines(settings))
    seed = args.seed if args.seed is not None else 0
    variants = VARIANTS if args.variant == "all" else (args.variant,)
    failures = []
    for variant in variants:
        cfg = small_config(variant, seed=seed, pool_mode=args.pool_mode, use_answer=not args.two_tower)
        errors = check_gradients(cfg, batch_count=args.batches, seed=seed, max_entries=args.max_entries)
        print(f"[{variant}]")
        for name, err in errors.items():
            status = "ok" if err <= TOLERANCE else "FAIL"
            print(f"  {name:<20} {err:.3e}  {status}")
            if err > TOLERANCE:
                failures.append(f"{variant}:{name}")
    if failures:
        raise GradientCheckError(f"gradient check failed for {', '.join(failures)}")
    print(f"All gradients within {TOLERANCE:g}")
    return 0


def cmd_bench(args: argparse.Namespace) -> int:
    """Time the per-triple scoring latency of a model."""
    settings = resolve_settings(args)
    echo_config(_settings_lines(settings))
    ckpt = load_checkpoint(args.model)
    matcher = ckpt.matcher()
    rng = np.random.default_rng(args.seed if args.seed is not None else 0)
    if args.kb:
        entries = list(KnowledgeBase.load(args.kb))
        picks = rng.choice(len(entries), size=min(args.probes, len(entries)), replace=False) if entries else []
        probes = [matcher.encode_triple(entries[int(i)].title, entries[int(i)]) for i in picks]
    else:
        vocab_size = len(ckpt.vocab)
        s = ckpt.model_config.seq_len
        probes = [
            tuple([int(x) for x in rng.integers(1, vocab_size, size=s)] for _ in range(3))
            for _ in range(args.probes)
        ]
    stats = latency_bench(matcher, probes, args.repetitions)
    print(f"{matcher.name} per-triple latency: {stats.describe()}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    """Build the argument parser with every subcommand."""
    parser = argparse.ArgumentParser(description='TCNN matching engine for retrieval-based question answering')
    parser.add_argument('--config', type=str, default=None, help='key=value config file (flags override it)')
    parser.add_argument('--seed', type=int, default=None, help='Seed for every random choice')
    parser.add_argument('--threads', type=int, default=None, help='Scoring threads (default: TCNN_THREADS or 1)')
    parser.add_argument('-v', '--verbose', action='count', default=0, help='-v for INFO, -vv for DEBUG logging')
    sub = parser.add_subparsers(dest='command', required=True)

    def add(name: str, func, help_text: str, defaults: Optional[Dict[str, Any]] = None):
        p = sub.add_parser(name, help=help_text)
        p.set_defaults(func=func, defaults=defaults or {}, _parser=p)
        return p

    p = add('synth', cmd_synth, 'Generate a synthetic FAQ corpus', {"entries": 500, "queries": 300})
    p.add_argument('--entries', type=int, default=None, help='Knowledge entries (default 500)')
    p.add_argument('--queries', type=int, default=None, help='Labeled queries, half related (default 300)')
    p.add_argument('--out-dir', type=str, required=True, help='Output directory')

    p = add('index', cmd_index, 'Build the BM25 index',
            {"k1": 1.2, "b": 0.75, "tokenizer": "whitespace", "title_weight": 2.0, "answer_weight": 1.0})
    p.add_argument('--kb', type=str, required=True, help='Knowledge base JSON lines')
    p.add_argument('--out', type=str, required=True, help='Index output path')
    p.add_argument('--k1', type=float, default=None, help='BM25 k1 (default 1.2)')
    p.add_argument('--b', type=float, default=None, help='BM25 b (default 0.75)')
    p.add_argument('--tokenizer', type=str, default=None, help='whitespace or cjk-char')
    p.add_argument('--title-weight', type=float, default=None, help='Title field weight (default 2.0)')
    p.add_argument('--answer-weight', type=float, default=None, help='Answer field weight (default 1.0)')

    p = add('train', cmd_train, 'Train a matching model')
    p.add_argument('--variant', choices=VARIANTS, default=None, help='Model variant (default tcnn)')
    p.add_argument('--kb', type=str, required=True, help='Knowledge base JSON lines')
    p.add_argument('--train', type=str, required=True, help='Training triples')
    p.add_argument('--valid', type=str, required=True, help='Validation triples')
    p.add_argument('--out', type=str, required=True, help='Checkpoint output path')
    p.add_argument('--index', type=str, default=None,
                   help='BM25 index for mined negatives and validation (built from the KB when omitted)')
    p.add_argument('--embeddings', type=str, default=None, help='Pretrained "token v1 ... vl" vectors')
    p.add_argument('--seq-len', type=int, default=None)
    p.add_argument('--embed-dim', type=int, default=None)
    p.add_argument('--window', type=int, default=None)
    p.add_argument('--filters', type=int, default=None)
    p.add_argument('--blocks', type=int, default=None)
    p.add_argument('--pool-mode', choices=("avg", "max"), default=None)
    p.add_argument('--tokenizer', type=str, default=None)
    p.add_argument('--use-answer', type=str, default=None, help='true or false (two-tower mode)')
    p.add_argument('--epochs', type=int, default=None, help='Maximum epochs')
    p.add_argument('--lr', type=float, default=None, help='AdaGrad learning rate')
    p.add_argument('--l2', type=float, default=None, help='L2 strength')
    p.add_argument('--batch-size', type=int, default=None)
    p.add_argument('--patience', type=int, default=None)
    p.add_argument('--pos-weight', type=str, default=None, help="Positive-class weight or 'auto'")
    p.add_argument('--negatives', type=int, default=None, help='Retrieved negatives per training query and epoch (default 4)')
    p.add_argument('--track-train-accuracy', action='store_const', const=True, default=None)

    p = add('eval', cmd_eval, 'Evaluate a model on labeled test triples',
            {"k": DEFAULT_K, "threshold": "auto", "step": 0.01})
    p.add_argument('--model', type=str, required=True, help='Checkpoint path')
    p.add_argument('--kb', type=str, required=True, help='Knowledge base JSON lines')
    p.add_argument('--index', type=str, required=True, help='BM25 index path')
    p.add_argument('--test', type=str, required=True, help='Test triples')
    p.add_argument('--threshold', type=str, default=None, help="'auto' (sweep) or a fixed threshold")
    p.add_argument('--step', type=float, default=None, help='Sweep grid step (default 0.01)')
    p.add_argument('--k', type=int, default=None, help='Retrieved candidates per query (default 15)')
    p.add_argument('--baseline', choices=(WORD_AVERAGE,), default=None, help='Add a baseline row')
    p.add_argument('--json-out', type=str, default=None, help='Write the report as JSON')

    p = add('query', cmd_query, 'Answer one question', {"k": DEFAULT_K})
    p.add_argument('--model', type=str, required=True, help='Checkpoint path')
    p.add_argument('--kb', type=str, required=True, help='Knowledge base JSON lines')
    p.add_argument('--index', type=str, required=True, help='BM25 index path')
    p.add_argument('--k', type=int, default=None, help='Candidates to show (default 15)')
    p.add_argument('--threshold', type=float, default=None, help='Answer threshold (default: from training)')
    p.add_argument('question', nargs='*', help='Question text')

    p = add('gradcheck', cmd_gradcheck, 'Check gradients against finite differences',
            {"variant": "all", "pool_mode": "avg", "batches": 3})
    p.add_argument('--variant', choices=VARIANTS + ("all",), default=None, help='Variant to check (default all)')
    p.add_argument('--pool-mode', choices=("avg", "max"), default=None)
    p.add_argument('--two-tower', action='store_true', help='Drop the answer tower')
    p.add_argument('--batches', type=int, default=None, help='Random batches (default 3)')
    p.add_argument('--max-entries', type=int, default=None, help='Sample this many entries per tensor')

    p = add('bench', cmd_bench, 'Measure scoring latency', {"repetitions": 100, "probes": 20})
    p.add_argument('--model', type=str, required=True, help='Checkpoint path')
    p.add_argument('--repetitions', type=int, default=None, help='Passes over the probes (default 100)')
    p.add_argument('--probes', type=int, default=None, help='Probe triples (default 20)')
    p.add_argument('--kb', type=str, default=None, help='Take probes from knowledge titles')
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Parse arguments, run the subcommand and map errors onto exit codes.

    Returns:
        Process exit code
    """
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(args.verbose)
    try:
        return args.func(args)
    except NumericError as e:
        print(f"Error: {e}", file=sys.stderr)
        return 3
    except (DataError, ArgumentError, ShapeError, CheckpointError, TCNNError) as e:
        print(f"Error: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"Error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
