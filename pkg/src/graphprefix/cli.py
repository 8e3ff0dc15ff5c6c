"""Command-line entry points for the whole pipeline.

Subcommands: gen, pretrain, train, eval, serialize, scale, gradcheck,
report.  Every subcommand accepts --config and --seed; failures exit
nonzero with a one-line diagnostic.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

import numpy as np

from . import tokenizer as tok_mod
from .backbone import BackboneLM, build_corpus, pretrain_and_freeze
from .baselines import GraphTextFormat, PromptTemplate, build_prompt
from .checkpoint import load_checkpoint, restore_parameters, save_checkpoint
from .config import TrainConfig
from .evaluate import Metrics, evaluate_model, read_metrics_csv, summarize, write_metrics_csv
from .gradcheck import TOLERANCE, run_gradient_suite
from .pipeline import GraphPrefixModel, PrefixOnlyModel, prepare_dataset
from .scaling import scaling_experiment, write_scaling_csv
from .taskgen import TASK_DEFAULTS, emit_jsonl, generate, generate_splits, load_jsonl
from .train import train_model


def _load_config(args) -> TrainConfig:
    cfg = TrainConfig.load(args.config) if args.config else TrainConfig()
    if args.seed is not None:
        cfg = cfg.replace(seed=args.seed)
    return cfg


def _build_backbone(cfg: TrainConfig, vocab_size: int, seed: int) -> BackboneLM:
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(1,)))
    return BackboneLM(vocab_size=vocab_size, d_model=cfg.backbone_dim,
                      n_layers=cfg.backbone_layers, n_heads=cfg.backbone_heads,
                      block_size=cfg.block_size, rng=rng)


def cmd_gen(args) -> int:
    cfg = _load_config(args)
    task = args.task
    if task not in TASK_DEFAULTS:
        raise ValueError(f"unknown task {task!r}; choose from {sorted(TASK_DEFAULTS)}")
    out = Path(args.out)
    if args.splits:
        sizes = tuple(int(s) for s in args.splits.split(","))
        parts = generate_splits(task, sizes, seed=cfg.seed, avg_n=args.avg_n)
        for name, insts in zip(("train", "val", "test"), parts):
            path = out.with_name(f"{out.stem}_{name}{out.suffix or '.jsonl'}")
            emit_jsonl(insts, path)
            print(f"wrote {len(insts)} instances to {path}")
    else:
        insts = generate(task, args.count, avg_n=args.avg_n, seed=cfg.seed)
        emit_jsonl(insts, out)
        print(f"wrote {len(insts)} instances to {out}")
    return 0


def cmd_pretrain(args) -> int:
    cfg = _load_config(args)
    tok = tok_mod.build_default()
    instances = load_jsonl(args.data)
    corpus = build_corpus(instances, tok, cfg.block_size, cfg.max_sequences)
    backbone = _build_backbone(cfg, tok.vocab_size, cfg.seed)
    rng = np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(2,)))
    losses = pretrain_and_freeze(backbone, corpus, rng, steps=cfg.pretrain_steps,
                                 lr=cfg.pretrain_lr, batch_size=cfg.pretrain_batch,
                                 target_loss=cfg.pretrain_target_loss,
                                 log_every=200)
    save_checkpoint(args.out, backbone.params, cfg, step=len(losses))
    tok.save(str(args.out) + ".vocab")
    print(f"pretrained {len(losses)} steps, final loss {losses[-1]:.4f}; "
          f"checkpoint at {args.out}")
    return 0


def _restore_backbone(path, cfg: TrainConfig, tok) -> BackboneLM:
    ckpt = load_checkpoint(path)
    backbone = _build_backbone(cfg, tok.vocab_size, cfg.seed)
    restore_parameters(backbone.params, ckpt.tensors)
    backbone.freeze()
    return backbone


def cmd_train(args) -> int:
    cfg = _load_config(args)
    tok = tok_mod.build_default()
    backbone = _restore_backbone(args.backbone, cfg, tok)
    rng = np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(3,)))
    if args.method == "graph_prefix":
        model = GraphPrefixModel(cfg, tok, backbone, rng)
    else:
        model = PrefixOnlyModel(cfg, tok, backbone, rng)
    dataset = prepare_dataset(load_jsonl(args.data), tok, cfg)
    t0 = time.time()
    opt, losses = train_model(model, dataset, cfg, log_every=args.log_every)
    save_checkpoint(args.out, model.all_parameters(), cfg, step=len(losses), optimizer=opt)
    print(f"trained {len(losses)} steps in {time.time() - t0:.1f}s, "
          f"final loss {losses[-1]:.4f}; checkpoint at {args.out}")
    if args.val:
        val = prepare_dataset(load_jsonl(args.val), tok, cfg)
        metrics = evaluate_model(model, val, cfg.max_new_tokens,
                                 method=args.method, seed=cfg.seed)
        print(f"validation exact match: {metrics.exact_match:.4f}")
    return 0


def cmd_eval(args) -> int:
    ckpt = load_checkpoint(args.checkpoint)
    cfg = ckpt.config if args.config is None else _load_config(args)
    tok = tok_mod.build_default()
    backbone = _build_backbone(cfg, tok.vocab_size, cfg.seed)
    rng = np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(3,)))
    is_graph = any(name.startswith("nodeenc.") for name in ckpt.tensors)
    model = (GraphPrefixModel(cfg, tok, backbone, rng) if is_graph
             else PrefixOnlyModel(cfg, tok, backbone, rng))
    restore_parameters(model.all_parameters(), ckpt.tensors)
    backbone.freeze()
    dataset = prepare_dataset(load_jsonl(args.data), tok, cfg)
    method = "graph_prefix" if is_graph else "prefix_tuning"
    metrics = evaluate_model(model, dataset, cfg.max_new_tokens, method=method,
                             seed=cfg.seed)
    print(f"exact match: {metrics.exact_match:.4f} on {metrics.n_instances} instances")
    if args.out:
        write_metrics_csv([metrics], args.out)
        print(f"metrics written to {args.out}")
    return 0


def cmd_serialize(args) -> int:
    _load_config(args)
    instances = load_jsonl(args.data)
    fmt = GraphTextFormat(args.format, args.format_seed)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    for i, inst in enumerate(instances[: args.limit]):
        tpl = PromptTemplate(args.mode, inst.task)
        text = build_prompt(inst, tpl, fmt)
        path = out_dir / f"{inst.task}_{args.mode}_{args.format}_{i:04d}.txt"
        path.write_text(text + "\n", encoding="utf-8")
    print(f"wrote {min(len(instances), args.limit)} prompts to {out_dir}")
    return 0


def cmd_scale(args) -> int:
    cfg = _load_config(args)
    sizes = [int(s) for s in args.sizes.split(",")]
    rows = scaling_experiment(args.task, sizes, cfg, seed=cfg.seed,
                              sample_size=args.sample_size)
    write_scaling_csv(rows, args.out)
    for r in rows:
        print(f"n={r.size:3d} {r.method:22s} context={r.context_tokens:8.1f}")
    print(f"scaling report written to {args.out}")
    return 0


def cmd_gradcheck(args) -> int:
    _load_config(args)
    results = run_gradient_suite(seed=args.seed if args.seed is not None else 0)
    worst = 0.0
    for name, err in results:
        status = "ok" if err < TOLERANCE else "FAIL"
        print(f"{status:4s} {name:28s} {err:.3e}")
        worst = max(worst, err)
    if worst >= TOLERANCE:
        raise ValueError(f"gradient check failed: worst error {worst:.3e} >= {TOLERANCE}")
    print(f"all gradient checks below {TOLERANCE}")
    return 0


def cmd_report(args) -> int:
    _load_config(args)
    rows: list[dict] = []
    for path in args.metrics:
        rows.extend(read_metrics_csv(path))
    table = summarize(rows)
    if args.out:
        Path(args.out).write_text(table, encoding="utf-8")
        print(f"report written to {args.out}")
    else:
        print(table, end="")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="graphprefix",
                                     description="graph-conditioned prefix tuning pipeline")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", default=None, help="key=value config file")
        p.add_argument("--seed", type=int, default=None)

    p = sub.add_parser("gen", help="generate task datasets as JSONL")
    common(p)
    p.add_argument("--task", required=True)
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--avg-n", type=int, default=None)
    p.add_argument("--splits", default=None, help="e.g. 2000,2000,6000")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("pretrain", help="pretrain and freeze the backbone LM")
    common(p)
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_pretrain)

    p = sub.add_parser("train", help="fine-tune prefixes on a dataset")
    common(p)
    p.add_argument("--data", required=True)
    p.add_argument("--backbone", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--val", default=None)
    p.add_argument("--method", choices=("graph_prefix", "prefix_tuning"),
                   default="graph_prefix")
    p.add_argument("--log-every", type=int, default=0)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a checkpoint")
    common(p)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("serialize", help="write serialized text prompts")
    common(p)
    p.add_argument("--data", required=True)
    p.add_argument("--format", choices=("adjacency_list", "edge_list_random"),
                   default="adjacency_list")
    p.add_argument("--format-seed", type=int, default=0)
    p.add_argument("--mode", choices=("zero_shot", "few_shot", "few_shot_cot"),
                   default="zero_shot")
    p.add_argument("--limit", type=int, default=10)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_serialize)

    p = sub.add_parser("scale", help="context scaling study over graph sizes")
    common(p)
    p.add_argument("--task", default="substructure_counting")
    p.add_argument("--sizes", default="15,25,35,45")
    p.add_argument("--sample-size", type=int, default=50)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_scale)

    p = sub.add_parser("gradcheck", help="run the finite-difference gradient suite")
    common(p)
    p.set_defaults(func=cmd_gradcheck)

    p = sub.add_parser("report", help="aggregate metric CSVs into a table")
    common(p)
    p.add_argument("--metrics", nargs="*", default=[])
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except SystemExit as exc:  # argparse errors already printed usage
        return int(exc.code or 0)
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
