"""Command-line entry points.

Subcommands: ingest, index, run, build-ratd, build-retrieval-data, eval,
sample-schedule. Reporting subcommands write delimited files plus rendered
figures into their output directory. HOPFORGE_SCORER_URL switches scoring
from the built-in deterministic stub to a remote service.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import random
import sys
from pathlib import Path

from . import corpus as corpus_mod
from . import figures
from .config import parse_config, pipeline_config_from
from .hnsw import HNSWIndex
from .index import ExactIndex, build_index, load_vectors, save_vectors
from .metrics import (
    MetricResult,
    binary_match,
    multichoice_em,
    numeracy_f1,
    paired_bootstrap,
    sentence_em_f1,
)
from .pipeline import IteratorPipeline, PipelineConfig
from .qa_factory import emit_ratd, write_qa_samples
from .sampler import Schedule, TaskSpec, run_schedule
from .scorers import scorers_from_env
from .train_builder import (
    PathParagraph,
    ReasoningPath,
    attach_negatives,
    build_evidence_samples,
    build_reranker_samples,
    expand_path,
    with_mined_negatives,
    write_retrieval_samples,
    write_sharednorm_pairs,
)

log = logging.getLogger(__name__)


def _read_jsonl(path: str | Path) -> list[dict]:
    records = []
    with open(path, encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if line:
                records.append(json.loads(line))
    return records


def _pipeline_config(args) -> PipelineConfig:
    cfg = pipeline_config_from(parse_config(args.config)) if args.config else PipelineConfig()
    for attr, flag in (
        ("k", "k"),
        ("t_max", "tmax"),
        ("w", "w"),
        ("threshold", "threshold"),
        ("budget", "budget"),
    ):
        val = getattr(args, flag, None)
        if val is not None:
            setattr(cfg, attr, val)
    return cfg


def _make_pipeline(args, cfg: PipelineConfig) -> IteratorPipeline:
    store = corpus_mod.load_store(args.store)
    matrix = load_vectors(args.vectors)
    if getattr(args, "hnsw", False):
        index = HNSWIndex(matrix, seed=0)
    else:
        index = ExactIndex(matrix)
    # stub embedder must produce queries at the indexed dimension
    triple = scorers_from_env(dim=matrix.dim)
    return IteratorPipeline(
        store, index, triple.embedder, triple.paragraph, triple.evidence, cfg
    )


def cmd_ingest(args) -> int:
    store = corpus_mod.ingest_file(args.docs)
    corpus_mod.save_store(store, args.out)
    print(f"ingested {len(store)} paragraphs across {len(store.title_to_doc)} documents -> {args.out}")
    return 0


def cmd_index(args) -> int:
    store = corpus_mod.load_store(args.store)
    triple = scorers_from_env(dim=args.dim)
    matrix = build_index(store, triple.embedder)
    save_vectors(matrix, args.out)
    print(f"indexed {len(matrix)} paragraphs at dim {matrix.dim} -> {args.out}")
    return 0


def cmd_run(args) -> int:
    cfg = _pipeline_config(args)
    pipe = _make_pipeline(args, cfg)
    with open(args.questions, encoding="utf-8") as f:
        lines = f.readlines()
    records = pipe.run_batch(lines, out_path=args.out)
    failures = sum(1 for r in records if "error" in r)
    print(f"wrote {len(records)} records ({failures} failures) -> {args.out}")
    return 0 if failures == 0 else 1


def cmd_build_ratd(args) -> int:
    cfg = _pipeline_config(args)
    if args.k is None:
        cfg.k = 60  # retrieval depth used for augmented-training builds
    pipe = _make_pipeline(args, cfg)
    samples = []
    for rec in _read_jsonl(args.qa):
        result = pipe.run_query(rec["question"], rec.get("initial_paragraph"))
        variants = ["full", "max4paras"] if args.variant == "both" else [args.variant]
        for variant in variants:
            samples.append(
                emit_ratd(
                    rec["question"],
                    rec["answer"],
                    result.packed,
                    variant=variant,
                    dataset=args.dataset,
                )
            )
    write_qa_samples(samples, args.out)
    print(f"wrote {len(samples)} samples -> {args.out}")
    return 0


def _load_path(rec: dict) -> ReasoningPath:
    def para(p: dict) -> PathParagraph:
        return PathParagraph.from_text(
            p["para_id"], p["title"], p["text"], p.get("gold_sents", ())
        )

    return ReasoningPath(
        question_id=str(rec["question_id"]),
        question=rec["question"],
        golds=[para(p) for p in rec["golds"]],
        negatives=[para(p) for p in rec.get("negatives", [])],
    )


def cmd_build_retrieval_data(args) -> int:
    store = corpus_mod.load_store(args.store)
    rng = random.Random(args.seed)
    retrieval, pairs = [], []
    for rec in _read_jsonl(args.paths):
        path = _load_path(rec)
        for sample in expand_path(path):
            retrieval.append(attach_negatives(sample, path, store, rng))
        mined = with_mined_negatives(path, store, rng)
        pairs.extend(build_reranker_samples(mined, rng))
        if any(g.gold_sents for g in mined.golds):
            pairs.extend(build_evidence_samples(mined, rng))
    prefix = Path(args.out_prefix)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    retrieval_path = Path(f"{prefix}.retrieval.jsonl")
    pairs_path = Path(f"{prefix}.pairs.jsonl")
    write_retrieval_samples(retrieval, retrieval_path)
    write_sharednorm_pairs(pairs, pairs_path)
    print(f"wrote {len(retrieval)} retrieval samples -> {retrieval_path}")
    print(f"wrote {len(pairs)} shared-norm pairs -> {pairs_path}")
    return 0


def _score_records(golds: list[dict], preds: dict[str, dict]) -> dict[str, MetricResult]:
    buckets: dict[str, list[float]] = {}
    for g in golds:
        pred = preds.get(str(g["id"]), {}).get("prediction", "")
        kind = g["type"]
        if kind in ("span", "num"):
            buckets.setdefault(f"{kind}_f1", []).append(numeracy_f1(pred, g["gold"]))
        elif kind == "binary":
            buckets.setdefault("binary_acc", []).append(
                float(binary_match(pred, g["gold"]))
            )
        elif kind == "mc":
            buckets.setdefault("mc_em", []).append(
                float(multichoice_em(pred, g["options"], g["gold"]))
            )
        elif kind == "sent_set":
            pred_set = {(p, i) for p, i in (pred or [])}
            gold_set = {(p, i) for p, i in g["gold"]}
            em, f1 = sentence_em_f1(pred_set, gold_set)
            buckets.setdefault("sent_em", []).append(float(em))
            buckets.setdefault("sent_f1", []).append(f1)
        else:
            raise ValueError(f"unknown gold type {kind!r} for id {g['id']}")
    return {
        name: MetricResult.from_scores(name, scores)
        for name, scores in sorted(buckets.items())
    }


def cmd_eval(args) -> int:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    golds = _read_jsonl(args.golds)
    preds = {str(r["id"]): r for r in _read_jsonl(args.preds)}
    results = _score_records(golds, preds)

    report: dict = {
        "metrics": {
            name: {"mean": r.mean, "count": len(r.per_sample)}
            for name, r in results.items()
        }
    }
    if args.compare:
        other = {str(r["id"]): r for r in _read_jsonl(args.compare)}
        other_results = _score_records(golds, other)
        comparisons = {}
        for name, r in results.items():
            boot = paired_bootstrap(
                r.per_sample,
                other_results[name].per_sample,
                resamples=args.bootstrap_b,
                rng=args.seed,
            )
            comparisons[name] = {
                "p_value": boot.p_value,
                "significant": boot.significant,
                "resamples": boot.resamples,
            }
        report["comparisons"] = comparisons

    with open(out_dir / "report.json", "w", encoding="utf-8") as f:
        json.dump(report, f, indent=2)
    with open(out_dir / "report.csv", "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["metric", "count", "mean"])
        for name, r in results.items():
            writer.writerow([name, len(r.per_sample), f"{r.mean:.6f}"])

    figures.save_metric_bars(
        [(name, r.mean) for name, r in results.items()],
        out_dir / "metric_means.png",
        "Evaluation metric means",
    )
    all_scores = [s for r in results.values() for s in r.per_sample]
    figures.save_score_histogram(
        all_scores, out_dir / "score_histogram.png", "Per-sample score distribution"
    )
    for name, r in results.items():
        print(f"{name}: mean {r.mean:.4f} over {len(r.per_sample)}")
    print(f"report -> {out_dir}")
    return 0


def cmd_sample_schedule(args) -> int:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    tasks = [
        TaskSpec(
            name=r["name"],
            group=r["group"],
            last_dev_accuracy=r.get("last_dev_accuracy"),
        )
        for r in _read_jsonl(args.tasks)
    ]
    schedule = Schedule(stage=args.stage)
    rng = random.Random(args.seed)
    draw_log = run_schedule(schedule, tasks, args.draws, rng)
    freqs = draw_log.frequencies()

    with open(out_dir / "draws.csv", "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["draw", "task"])
        for i, name in enumerate(draw_log.draws):
            writer.writerow([i, name])
    with open(out_dir / "frequencies.csv", "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["task", "frequency"])
        for name, freq in freqs.items():
            writer.writerow([name, f"{freq:.6f}"])
    figures.save_task_frequencies(
        freqs, out_dir / "task_frequencies.png", f"Stage {args.stage} draw frequencies"
    )
    for name, freq in freqs.items():
        print(f"{name}: {freq:.4f}")
    print(f"schedule report -> {out_dir}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hopforge",
        description="Multi-hop evidence retrieval engine and training-data factory",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="build a paragraph store from documents JSONL")
    p.add_argument("--docs", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("index", help="embed the store into a vector file")
    p.add_argument("--store", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--dim", type=int, default=64)
    p.set_defaults(func=cmd_index)

    p = sub.add_parser("run", help="run the hop loop over a question file")
    p.add_argument("--store", required=True)
    p.add_argument("--vectors", required=True)
    p.add_argument("--questions", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--tmax", type=int, default=None)
    p.add_argument("--w", type=float, default=None)
    p.add_argument("--threshold", type=float, default=None)
    p.add_argument("--budget", type=int, default=None)
    p.add_argument("--config", default=None)
    p.add_argument("--hnsw", action="store_true", help="approximate search backend")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("build-ratd", help="emit retrieval-augmented QA samples")
    p.add_argument("--store", required=True)
    p.add_argument("--vectors", required=True)
    p.add_argument("--qa", required=True, help="JSONL with question/answer records")
    p.add_argument("--out", required=True)
    p.add_argument("--variant", choices=["full", "max4paras", "both"], default="both")
    p.add_argument("--dataset", default="ratd")
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--tmax", type=int, default=None)
    p.add_argument("--w", type=float, default=None)
    p.add_argument("--threshold", type=float, default=None)
    p.add_argument("--budget", type=int, default=None)
    p.add_argument("--config", default=None)
    p.set_defaults(func=cmd_build_ratd)

    p = sub.add_parser(
        "build-retrieval-data", help="expand reasoning paths into training samples"
    )
    p.add_argument("--paths", required=True)
    p.add_argument("--store", required=True)
    p.add_argument("--out-prefix", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_build_retrieval_data)

    p = sub.add_parser("eval", help="score predictions and render a report")
    p.add_argument("--preds", required=True)
    p.add_argument("--golds", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--compare", default=None, help="second predictions file")
    p.add_argument("--bootstrap-b", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("sample-schedule", help="simulate the multitask sampler")
    p.add_argument("--tasks", required=True)
    p.add_argument("--draws", type=int, default=100000)
    p.add_argument("--stage", type=int, choices=[1, 2], default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_sample_schedule)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
