"""End-to-end conversion pipeline: load, generate, filter, dedup, graph,
walk, assemble, emit. Deterministic given the config and rule backends."""

from __future__ import annotations

import json
import threading
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from . import assemble as assemble_mod
from .adapter import AdapterClient
from .candidates import ScoredCandidate, bucket_candidates, filter_candidates, select_best_answer
from .corpus import Context, Conversation, SingleTurnQA, emit_quac, load_dataset
from .dedup import is_redundant, merge_redundant
from .errors import AdapterError, ConfigError, EmptyGraphError
from .generator import generate_candidates
from .kg import build_graph
from .reassemble import mark_nodes, walk_chains
from .rewrite import rewrite_question
from .triples import Triple, declarativize, extract_triples

STAGES = ("generate_candidates", "extract_triples", "rewrite")


@dataclass
class PipelineConfig:
    input_path: str
    output_path: str
    input_format: str = "squad2"
    backends: dict = field(default_factory=lambda: {s: "rule" for s in STAGES})
    adapter_cmd: str | None = None
    adapter_addr: str | None = None
    adapter_timeout: float = 60.0
    adapter_fallback: bool = False
    dedup_threshold: float = 0.5
    dedup_denominator: str = "union"
    max_turns: int = 12
    min_turns: int = 2
    max_unanswerable: int = 3
    seed: int = 42
    workers: int = 1
    report_path: str | None = None

    def validate(self) -> None:
        if not (self.max_turns >= self.min_turns >= 2):
            raise ConfigError(f"need max_turns >= min_turns >= 2, got {self.max_turns}/{self.min_turns}")
        if not (0.0 < self.dedup_threshold <= 1.0):
            raise ConfigError(f"dedup threshold must be in (0, 1], got {self.dedup_threshold}")
        if self.dedup_denominator not in ("union", "shorter"):
            raise ConfigError(f"unknown dedup denominator {self.dedup_denominator!r}")
        if self.max_unanswerable < 0:
            raise ConfigError("max_unanswerable must be >= 0")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        unknown = set(self.backends) - set(STAGES)
        if unknown:
            raise ConfigError(f"unknown backend stages: {sorted(unknown)}")
        for stage, mode in self.backends.items():
            if mode not in ("rule", "adapter"):
                raise ConfigError(f"backend for {stage} must be rule|adapter, got {mode!r}")
        if any(m == "adapter" for m in self.backends.values()):
            if (self.adapter_cmd is None) == (self.adapter_addr is None):
                raise ConfigError("adapter stages need exactly one of adapter_cmd / adapter_addr")

    @classmethod
    def from_dict(cls, raw: dict) -> "PipelineConfig":
        known = {f.name for f in cls.__dataclass_fields__.values()}
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        merged = {s: "rule" for s in STAGES}
        merged.update(raw.get("backends", {}))
        raw = dict(raw)
        raw["backends"] = merged
        return cls(**raw)


class _Backends:
    """Per-thread adapter connections with optional fallback to rules."""

    def __init__(self, config: PipelineConfig):
        self.config = config
        self._local = threading.local()
        self._all_clients: list[AdapterClient] = []
        self._lock = threading.Lock()
        self.uses_adapter = any(m == "adapter" for m in config.backends.values())

    def _client(self) -> AdapterClient:
        client = getattr(self._local, "client", None)
        if client is None:
            client = AdapterClient(
                cmd=self.config.adapter_cmd,
                address=self.config.adapter_addr,
                timeout=self.config.adapter_timeout,
            )
            self._local.client = client
            with self._lock:
                self._all_clients.append(client)
        return client

    def close(self) -> None:
        with self._lock:
            clients, self._all_clients = self._all_clients, []
        for client in clients:
            client.close()
        self._local.client = None

    def _drop_local(self) -> None:
        client = getattr(self._local, "client", None)
        if client is not None:
            client.close()
            with self._lock:
                if client in self._all_clients:
                    self._all_clients.remove(client)
            self._local.client = None

    def _call(self, kind: str, payload: dict, fallback):
        try:
            return self._client().call(kind, payload), True
        except AdapterError as e:
            if not self.config.adapter_fallback:
                raise
            warnings.warn(f"adapter {kind} failed ({e}); falling back to rule backend")
            self._drop_local()
            return fallback(), False

    def generate(self, context: Context) -> list[ScoredCandidate]:
        if self.config.backends["generate_candidates"] == "rule":
            return generate_candidates(context)
        payload, from_adapter = self._call(
            "generate_candidates",
            {"context_text": context.text},
            lambda: None,
        )
        if not from_adapter:
            return generate_candidates(context)
        out = []
        for i, rec in enumerate(payload.get("candidates", [])):
            span = (int(rec["answer_start"]), int(rec["answer_end"]))
            qa = SingleTurnQA(
                qa_id=f"{context.id}#g{i}",
                question=rec["question"],
                answer_text=rec["answer_text"],
                answer_span=span,
                is_unanswerable=False,
                origin="generated",
            )
            out.append(
                ScoredCandidate.from_logps(qa, float(rec["logp_start"]), float(rec["logp_end"]))
            )
        return out

    def triples_for_text(self, text: str) -> list[list[Triple]]:
        if self.config.backends["extract_triples"] == "rule":
            return extract_triples(Context.create(id="inline", title="", text=text))
        payload, from_adapter = self._call("extract_triples", {"context_text": text}, lambda: None)
        if not from_adapter:
            return extract_triples(Context.create(id="inline", title="", text=text))
        by_sentence: dict[int, list[Triple]] = {}
        for rec in payload.get("triples", []):
            t = Triple(
                subject=rec["subject"],
                relation=rec["relation"],
                object=rec.get("object", ""),
                sentence_index=int(rec["sentence_index"]),
                triple_index=int(rec["triple_index"]),
            )
            by_sentence.setdefault(t.sentence_index, []).append(t)
        if not by_sentence:
            return []
        return [
            sorted(by_sentence.get(i, []), key=lambda t: t.triple_index)
            for i in range(max(by_sentence) + 1)
        ]

    def context_triples(self, context: Context) -> list[list[Triple]]:
        if self.config.backends["extract_triples"] == "rule":
            return extract_triples(context)
        return self.triples_for_text(context.text)

    def rewrite(self, question: str, history: tuple, context_title: str) -> str:
        if self.config.backends["rewrite"] == "rule":
            return rewrite_question(question, history, context_title)
        payload, from_adapter = self._call(
            "rewrite",
            {"question": question, "history": [list(h) for h in history], "context_title": context_title},
            lambda: None,
        )
        if not from_adapter:
            return rewrite_question(question, history, context_title)
        rewritten = payload.get("question", "")
        return rewritten if rewritten else question


def _qa_statement_triples(backends: _Backends, question: str, answer: str) -> list[Triple]:
    statement = declarativize(question, answer)
    if not statement.strip():
        return []
    flat: list[Triple] = []
    for sentence_triples in backends.triples_for_text(statement):
        flat.extend(sentence_triples)
    return flat


def _process_context(
    config: PipelineConfig,
    backends: _Backends,
    context: Context,
    existing: list[SingleTurnQA],
) -> tuple[list[Conversation], dict]:
    counts = {
        "existing_qa": len(existing),
        "generated_candidates": 0,
        "candidates_after_selection": 0,
        "candidates_after_filter": 0,
        "candidates_after_dedup": 0,
        "em_fallbacks": 0,
        "triples": 0,
        "graph_nodes": 0,
        "graph_edges": 0,
        "marked_nodes": 0,
        "chains": 0,
        "conversations": 0,
        "turns": 0,
        "cannotanswer_turns": 0,
        "discarded_chains": 0,
    }

    generated = backends.generate(context)
    counts["generated_candidates"] = len(generated)

    # One answer per question: keep the highest-probability span.
    by_question: dict[str, list[ScoredCandidate]] = {}
    for c in generated:
        by_question.setdefault(c.qa.question, []).append(c)
    selected = [select_best_answer(group) for group in by_question.values()]
    counts["candidates_after_selection"] = len(selected)

    bucketed, model = bucket_candidates(selected, seed=config.seed)
    if model is None and bucketed:
        counts["em_fallbacks"] = 1
    kept = filter_candidates(bucketed)
    counts["candidates_after_filter"] = len(kept)

    deduped, _report = merge_redundant(kept, config.dedup_threshold, config.dedup_denominator)
    # Generated near-copies of gold questions add nothing; drop them too.
    existing_scored = [
        ScoredCandidate.from_logps(qa, 0.0, 0.0) for qa in existing
    ]
    survivors = []
    for cand in deduped:
        clash = any(
            is_redundant(cand, ex, config.dedup_threshold, config.dedup_denominator)
            for ex in existing_scored
            if (ex.qa.question + ex.qa.answer_text).strip()
        )
        if not clash:
            survivors.append(cand)
    counts["candidates_after_dedup"] = len(survivors)

    per_sentence = backends.context_triples(context)
    counts["triples"] = sum(len(s) for s in per_sentence)
    try:
        graph = build_graph(per_sentence)
    except EmptyGraphError:
        return [], counts
    counts["graph_nodes"] = len(graph.nodes)
    counts["graph_edges"] = len(graph.edges)

    pool = existing_scored + survivors
    qa_triples: dict[str, list[Triple]] = {}
    for cand in pool:
        if cand.source_triple is not None:
            qa_triples[cand.qa.qa_id] = [cand.source_triple]
        else:
            qa_triples[cand.qa.qa_id] = _qa_statement_triples(
                backends, cand.qa.question, cand.qa.answer_text
            )
    marking = mark_nodes(graph, pool, qa_triples)
    counts["marked_nodes"] = len(marking.assigned)

    chains = walk_chains(graph, marking)
    counts["chains"] = len(chains)

    conversations, stats = assemble_mod.assemble_conversations(
        chains,
        context,
        backends.rewrite,
        max_turns=config.max_turns,
        min_turns=config.min_turns,
        max_unanswerable=config.max_unanswerable,
    )
    counts["conversations"] = stats.conversations
    counts["turns"] = stats.turns
    counts["cannotanswer_turns"] = stats.cannotanswer_turns
    counts["discarded_chains"] = stats.discarded_chains
    return conversations, counts


def run_pipeline(config: PipelineConfig) -> dict:
    """Convert a single-turn dataset into conversations; returns the report."""
    config.validate()
    dataset = load_dataset(config.input_path, config.input_format)
    backends = _Backends(config)

    contexts = dataset.contexts
    jobs = [(ctx, dataset.qas_by_context.get(ctx.id, [])) for ctx in contexts]

    def work(job):
        ctx, existing = job
        return _process_context(config, backends, ctx, existing)

    if config.workers == 1 or len(jobs) <= 1:
        results = [work(j) for j in jobs]
    else:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(work, jobs))
    backends.close()

    all_conversations: list[Conversation] = []
    report: dict = {"contexts": len(contexts)}
    for conversations, counts in results:
        all_conversations.extend(conversations)
        for key, value in counts.items():
            report[key] = report.get(key, 0) + value

    emit_quac(all_conversations, contexts, config.output_path)
    report["output_path"] = config.output_path
    if config.report_path:
        with open(config.report_path, "w", encoding="utf-8") as f:
            json.dump(report, f, indent=2, sort_keys=True)
            f.write("\n")
    return report
