"""Command-line surface: convert, stats, eval, dedup, kg, rcanard, validate.

All failures exit nonzero with one machine-readable JSON error object on
stderr. Config files are JSON; command-line flags win over config values.
"""

from __future__ import annotations

import argparse
import json
import sys

from .candidates import ScoredCandidate
from .corpus import (
    Context,
    SingleTurnQA,
    emit_canard,
    emit_quac,
    load_dataset,
    validate_conversation,
)
from .dedup import merge_redundant
from .errors import ParseError, PipelineError
from .kg import build_graph, export_dot
from .metrics import dataset_stats, heq, human_f1_from_references, max_f1_over_references
from .pipeline import STAGES, PipelineConfig, run_pipeline
from .rewrite import build_rcanard
from .triples import extract_triples


def _emit_json(obj, stream=None) -> None:
    json.dump(obj, stream or sys.stdout, indent=2, sort_keys=True)
    (stream or sys.stdout).write("\n")


def _add_convert_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--input", required=True)
    p.add_argument("--format", default="squad2", choices=["squad2", "quac", "canard"])
    p.add_argument("--output", required=True)
    p.add_argument("--config", help="JSON config file; flags override its values")
    for stage in STAGES:
        p.add_argument(f"--backend.{stage}", dest=f"backend_{stage}", choices=["rule", "adapter"])
    p.add_argument("--adapter-cmd")
    p.add_argument("--adapter-addr")
    p.add_argument("--adapter-fallback", action="store_true", default=None)
    p.add_argument("--adapter-timeout", type=float)
    p.add_argument("--workers", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--max-turns", type=int)
    p.add_argument("--min-turns", type=int)
    p.add_argument("--max-unanswerable", type=int)
    p.add_argument("--dedup-threshold", type=float)
    p.add_argument("--dedup-denominator", choices=["union", "shorter"])
    p.add_argument("--report", dest="report_path")


def _build_config(args: argparse.Namespace) -> PipelineConfig:
    raw: dict = {}
    if args.config:
        with open(args.config, "r", encoding="utf-8") as f:
            raw = json.load(f)
    raw["input_path"] = args.input
    raw["output_path"] = args.output
    raw["input_format"] = args.format
    backends = dict(raw.get("backends", {}))
    for stage in STAGES:
        override = getattr(args, f"backend_{stage}")
        if override is not None:
            backends[stage] = override
    raw["backends"] = backends
    flag_map = {
        "adapter_cmd": args.adapter_cmd,
        "adapter_addr": args.adapter_addr,
        "adapter_fallback": args.adapter_fallback,
        "adapter_timeout": args.adapter_timeout,
        "workers": args.workers,
        "seed": args.seed,
        "max_turns": args.max_turns,
        "min_turns": args.min_turns,
        "max_unanswerable": args.max_unanswerable,
        "dedup_threshold": args.dedup_threshold,
        "dedup_denominator": args.dedup_denominator,
        "report_path": args.report_path,
    }
    for key, value in flag_map.items():
        if value is not None:
            raw[key] = value
    return PipelineConfig.from_dict(raw)


def cmd_convert(args) -> int:
    report = run_pipeline(_build_config(args))
    _emit_json(report)
    return 0


def cmd_stats(args) -> int:
    dataset = load_dataset(args.input, "quac")
    stats = dataset_stats(dataset)
    if args.json:
        _emit_json(stats.as_dict())
    else:
        print(f"dialogs:              {stats.num_dialogs}")
        print(f"questions:            {stats.num_questions}")
        print(f"tokens / question:    {stats.tokens_per_question:.1f}")
        print(f"tokens / answer:      {stats.tokens_per_answer:.1f}")
        print(f"F1(q_t, a_t):         {stats.f1_q_a:.1f}")
        print(f"F1(q_t, a_0:t-1):     {stats.f1_q_hist:.1f}")
    return 0


def cmd_eval(args) -> int:
    with open(args.predictions, "r", encoding="utf-8") as f:
        predictions = json.load(f)
    gold = load_dataset(args.gold, "quac")
    drop = not args.keep_stopwords
    model_f1: dict[str, float] = {}
    human_f1: dict[str, float] = {}
    dialogs: dict[str, list[str]] = {}
    for conv in gold.conversations:
        qids = []
        for turn in conv.turns:
            qid = turn.turn_id or f"{conv.conv_id}#q{turn.turn_index}"
            refs = list(turn.reference_answers) or [turn.answer_text]
            model_f1[qid] = max_f1_over_references(predictions.get(qid, ""), refs, drop)
            human_f1[qid] = human_f1_from_references(refs, drop)
            qids.append(qid)
        dialogs[conv.conv_id] = qids
    missing = sorted(set(model_f1) - set(predictions))
    if missing and not args.allow_missing:
        _emit_json({"error": "missing predictions", "question_ids": missing[:20]}, sys.stderr)
        return 3
    heq_q, heq_d = heq(model_f1, human_f1, dialogs)
    mean_f1 = 100.0 * sum(model_f1.values()) / len(model_f1)
    _emit_json({"f1": mean_f1, "heq_q": heq_q, "heq_d": heq_d, "questions": len(model_f1)})
    return 0


def cmd_dedup(args) -> int:
    candidates: list[ScoredCandidate] = []
    with open(args.input, "r", encoding="utf-8") as f:
        for i, line in enumerate(f):
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            span = None
            if rec.get("answer_start") is not None and rec.get("answer_end") is not None:
                span = (int(rec["answer_start"]), int(rec["answer_end"]))
            qa = SingleTurnQA(
                qa_id=str(rec.get("id", f"line{i}")),
                question=rec["question"],
                answer_text=rec.get("answer_text", ""),
                answer_span=span,
                is_unanswerable=span is None,
                origin=rec.get("origin", "generated"),
            )
            candidates.append(
                ScoredCandidate.from_logps(
                    qa, float(rec.get("logp_start", 0.0)), float(rec.get("logp_end", 0.0))
                )
            )
    kept, report = merge_redundant(candidates, args.threshold, args.denominator)
    with open(args.output, "w", encoding="utf-8") as f:
        for c in kept:
            rec = {
                "id": c.qa.qa_id,
                "question": c.qa.question,
                "answer_text": c.qa.answer_text,
                "answer_start": None if c.qa.answer_span is None else c.qa.answer_span[0],
                "answer_end": None if c.qa.answer_span is None else c.qa.answer_span[1],
                "logp_start": c.logp_start,
                "logp_end": c.logp_end,
            }
            f.write(json.dumps(rec, ensure_ascii=False) + "\n")
    _emit_json(
        {
            "input_candidates": len(candidates),
            "survivors": len(kept),
            "merged_sets": report.merged_sets,
            "set_sizes": sorted((len(s) for s in report.sets), reverse=True)[:50],
            "representatives": report.representatives,
        }
    )
    return 0


def cmd_kg(args) -> int:
    dataset = load_dataset(args.input, args.format)
    context = None
    for ctx in dataset.contexts:
        if ctx.id == args.context_id:
            context = ctx
            break
    if context is None:
        raise ParseError(f"context id {args.context_id!r} not found in {args.input}")
    graph = build_graph(extract_triples(context))
    dot = export_dot(graph)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as f:
            f.write(dot)
    else:
        sys.stdout.write(dot)
    return 0


def cmd_rcanard(args) -> int:
    dataset = load_dataset(args.input, "canard")
    flipped = build_rcanard(dataset.instances)
    emit_canard(flipped, args.output)
    _emit_json(
        {
            "instances": len(flipped),
            "skipped_missing_rewrite": dataset.skipped,
            "direction": flipped[0].direction if flipped else None,
        }
    )
    return 0


def cmd_validate(args) -> int:
    dataset = load_dataset(args.input, "quac")
    contexts = {c.id: c for c in dataset.contexts}
    problems: list[str] = []
    for conv in dataset.conversations:
        problems.extend(validate_conversation(conv, contexts[conv.context_id]))
    result = {
        "conversations": dataset.num_dialogs,
        "questions": dataset.num_questions,
        "problems": problems,
        "valid": not problems,
    }
    _emit_json(result, sys.stderr if problems else sys.stdout)
    return 1 if problems else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qa2conv",
        description="Convert single-turn QA datasets into multi-turn conversations",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("convert", help="run the full conversion pipeline")
    _add_convert_args(p)
    p.set_defaults(fn=cmd_convert)

    p = sub.add_parser("stats", help="corpus statistics of a multi-turn dataset")
    p.add_argument("--input", required=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=cmd_stats)

    p = sub.add_parser("eval", help="score predictions against a gold multi-turn file")
    p.add_argument("--predictions", required=True, help="JSON {question_id: answer}")
    p.add_argument("--gold", required=True)
    p.add_argument("--keep-stopwords", action="store_true")
    p.add_argument("--allow-missing", action="store_true")
    p.set_defaults(fn=cmd_eval)

    p = sub.add_parser("dedup", help="merge redundant candidates from JSON lines")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--denominator", choices=["union", "shorter"], default="union")
    p.set_defaults(fn=cmd_dedup)

    p = sub.add_parser("kg", help="export one context's knowledge graph as DOT")
    p.add_argument("--input", required=True)
    p.add_argument("--format", default="squad2", choices=["squad2", "quac"])
    p.add_argument("--context-id", required=True)
    p.add_argument("--out")
    p.set_defaults(fn=cmd_kg)

    p = sub.add_parser("rcanard", help="reverse a rewrite dataset (source<->target)")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.set_defaults(fn=cmd_rcanard)

    p = sub.add_parser("validate", help="check conversation invariants of a file")
    p.add_argument("--input", required=True)
    p.set_defaults(fn=cmd_validate)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except PipelineError as e:
        _emit_json({"error": type(e).__name__, "message": str(e)}, sys.stderr)
        return 2
    except (OSError, json.JSONDecodeError, KeyError, ValueError) as e:
        _emit_json({"error": type(e).__name__, "message": str(e)}, sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
