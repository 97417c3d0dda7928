"""Domain types and parsers/emitters for the three dataset families.

Formats handled: SQuAD-2.0-style single-turn JSON, QuAC-style multi-turn
JSON, and CANARD-style rewrite triplets. All character offsets are Unicode
scalar offsets. Loaded values are frozen and safe to share across threads.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, replace
from typing import Iterable, Literal

from .errors import ParseError, SpanValidationError
from .rewrite import RewriteInstance
from .text import split_sentences

CANNOTANSWER = "CANNOTANSWER"

MIN_TURNS = 2
MAX_TURNS = 12
MAX_UNANSWERABLE = 3


@dataclass(frozen=True)
class Context:
    """A document with sentence segmentation over stable character offsets."""

    id: str
    title: str
    text: str
    sentences: tuple[tuple[int, int], ...]

    @classmethod
    def create(cls, id: str, title: str, text: str) -> "Context":
        ctx = cls(id=id, title=title, text=text, sentences=tuple(split_sentences(text)))
        ctx.check()
        return ctx

    def check(self) -> None:
        prev_end = -1
        for start, end in self.sentences:
            if not (0 <= start < end <= len(self.text)):
                raise ValueError(f"context {self.id}: bad sentence span ({start}, {end})")
            if start < prev_end:
                raise ValueError(f"context {self.id}: overlapping sentence spans")
            if not self.text[start:end].strip():
                raise ValueError(f"context {self.id}: empty sentence span")
            prev_end = end
        covered = set()
        for start, end in self.sentences:
            covered.update(range(start, end))
        for i, ch in enumerate(self.text):
            if not ch.isspace() and i not in covered:
                raise ValueError(f"context {self.id}: non-whitespace char at {i} uncovered")

    def sentence_text(self, index: int) -> str:
        start, end = self.sentences[index]
        return self.text[start:end]


@dataclass(frozen=True)
class SingleTurnQA:
    qa_id: str
    question: str
    answer_text: str
    answer_span: tuple[int, int] | None
    is_unanswerable: bool
    origin: Literal["existing", "generated"]

    def verify_span(self, context: Context) -> None:
        if self.is_unanswerable:
            if self.answer_span is not None:
                raise SpanValidationError(self.qa_id, "unanswerable QA carries a span")
            return
        if self.answer_span is None:
            raise SpanValidationError(self.qa_id, "answerable QA missing its span")
        start, end = self.answer_span
        if not (0 <= start <= end <= len(context.text)):
            raise SpanValidationError(self.qa_id, f"span ({start}, {end}) outside context")
        if context.text[start:end] != self.answer_text:
            raise SpanValidationError(
                self.qa_id,
                f"span slices to {context.text[start:end]!r}, expected {self.answer_text!r}",
            )


@dataclass(frozen=True)
class Turn:
    turn_index: int
    question: str
    source_question: str
    answer_text: str
    answer_span: tuple[int, int] | None
    reference_answers: tuple[str, ...] = ()
    turn_id: str = ""

    @property
    def is_unanswerable(self) -> bool:
        return self.answer_text == CANNOTANSWER


@dataclass(frozen=True)
class Conversation:
    conv_id: str
    context_id: str
    turns: tuple[Turn, ...]


@dataclass
class SquadDataset:
    contexts: list[Context]
    qas_by_context: dict[str, list[SingleTurnQA]]

    @property
    def num_contexts(self) -> int:
        return len(self.contexts)

    @property
    def num_questions(self) -> int:
        return sum(len(v) for v in self.qas_by_context.values())


@dataclass
class QuacDataset:
    contexts: list[Context]
    conversations: list[Conversation]

    @property
    def num_contexts(self) -> int:
        return len(self.contexts)

    @property
    def num_dialogs(self) -> int:
        return len(self.conversations)

    @property
    def num_questions(self) -> int:
        return sum(len(c.turns) for c in self.conversations)

    def context_by_id(self, context_id: str) -> Context:
        for ctx in self.contexts:
            if ctx.id == context_id:
                return ctx
        raise KeyError(context_id)


@dataclass
class CanardDataset:
    instances: list[RewriteInstance]
    skipped: int = 0

    @property
    def num_questions(self) -> int:
        return len(self.instances)


def validate_turn(turn: Turn, context: Context, conv_id: str) -> list[str]:
    problems = []
    if (turn.answer_text == CANNOTANSWER) != (turn.answer_span is None):
        problems.append(
            f"{conv_id} turn {turn.turn_index}: CANNOTANSWER/span mismatch"
        )
    if turn.answer_span is not None:
        start, end = turn.answer_span
        if not (0 <= start <= end <= len(context.text)):
            problems.append(f"{conv_id} turn {turn.turn_index}: span outside context")
        elif context.text[start:end] != turn.answer_text:
            problems.append(f"{conv_id} turn {turn.turn_index}: span does not slice to answer")
    return problems


def validate_conversation(
    conv: Conversation,
    context: Context,
    min_turns: int = MIN_TURNS,
    max_turns: int = MAX_TURNS,
    max_unanswerable: int = MAX_UNANSWERABLE,
) -> list[str]:
    """All invariant violations for one conversation (empty list when valid)."""
    problems = []
    if not (min_turns <= len(conv.turns) <= max_turns):
        problems.append(f"{conv.conv_id}: {len(conv.turns)} turns outside [{min_turns}, {max_turns}]")
    for i, turn in enumerate(conv.turns, start=1):
        if turn.turn_index != i:
            problems.append(f"{conv.conv_id}: turn indices not contiguous from 1")
            break
    n_cannot = sum(1 for t in conv.turns if t.answer_text == CANNOTANSWER)
    if n_cannot > max_unanswerable:
        problems.append(f"{conv.conv_id}: {n_cannot} CANNOTANSWER turns > {max_unanswerable}")
    for turn in conv.turns:
        problems.extend(validate_turn(turn, context, conv.conv_id))
    return problems


# ---------------------------------------------------------------------------
# Loading


def _read_json(path: str):
    try:
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise ParseError(f"{path}: {e}") from e


def _load_squad(path: str) -> SquadDataset:
    raw = _read_json(path)
    if not isinstance(raw, dict) or "data" not in raw:
        raise ParseError(f"{path}: missing top-level 'data' array")
    contexts: list[Context] = []
    qas_by_context: dict[str, list[SingleTurnQA]] = {}
    for ai, article in enumerate(raw["data"]):
        title = article.get("title", f"article{ai}")
        for pi, para in enumerate(article.get("paragraphs", [])):
            try:
                text = para["context"]
            except (KeyError, TypeError) as e:
                raise ParseError(f"{path}: article {title} paragraph {pi}: {e}") from e
            ctx = Context.create(id=para.get("id", f"{title}#p{pi}"), title=title, text=text)
            contexts.append(ctx)
            qas: list[SingleTurnQA] = []
            for qa in para.get("qas", []):
                qa_id = str(qa.get("id", f"{ctx.id}#q{len(qas)}"))
                try:
                    question = qa["question"]
                    impossible = bool(qa.get("is_impossible", False))
                    if impossible:
                        record = SingleTurnQA(qa_id, question, "", None, True, "existing")
                    else:
                        ans = qa["answers"][0]
                        start = int(ans["answer_start"])
                        span = (start, start + len(ans["text"]))
                        record = SingleTurnQA(qa_id, question, ans["text"], span, False, "existing")
                except (KeyError, IndexError, TypeError, ValueError) as e:
                    raise ParseError(f"{path}: qa record {qa_id}: {e}") from e
                record.verify_span(ctx)
                qas.append(record)
            qas_by_context[ctx.id] = qas
    return SquadDataset(contexts=contexts, qas_by_context=qas_by_context)


def _verify_quac_answer(ctx: Context, qa_id: str, text: str, start: int) -> None:
    if text == CANNOTANSWER:
        return
    end = start + len(text)
    if not (0 <= start <= end <= len(ctx.text)):
        raise SpanValidationError(qa_id, f"answer span ({start}, {end}) outside context")
    if ctx.text[start:end] != text:
        raise SpanValidationError(qa_id, "answer span does not slice to answer text")


def _load_quac(path: str) -> QuacDataset:
    raw = _read_json(path)
    if not isinstance(raw, dict) or "data" not in raw:
        raise ParseError(f"{path}: missing top-level 'data' array")
    contexts: dict[str, Context] = {}
    conversations: list[Conversation] = []
    for ai, article in enumerate(raw["data"]):
        title = article.get("title", f"article{ai}")
        for pi, para in enumerate(article.get("paragraphs", [])):
            try:
                text = para["context"]
                conv_id = str(para.get("id", f"{title}#d{pi}"))
            except (KeyError, TypeError) as e:
                raise ParseError(f"{path}: article {title} paragraph {pi}: {e}") from e
            context_id = str(para.get("context_id", conv_id))
            if context_id in contexts:
                ctx = contexts[context_id]
                if ctx.text != text:
                    raise ParseError(f"{path}: context id {context_id} reused with different text")
            else:
                ctx = Context.create(id=context_id, title=title, text=text)
                contexts[context_id] = ctx
            turns: list[Turn] = []
            for qi, qa in enumerate(para.get("qas", []), start=1):
                qa_id = str(qa.get("id", f"{conv_id}#q{qi}"))
                try:
                    question = qa["question"]
                    orig = qa.get("orig_answer") or qa["answers"][0]
                    answer_text = orig["text"]
                    answer_start = int(orig["answer_start"])
                except (KeyError, IndexError, TypeError, ValueError) as e:
                    raise ParseError(f"{path}: qa record {qa_id}: {e}") from e
                _verify_quac_answer(ctx, qa_id, answer_text, answer_start)
                references = []
                for ref in qa.get("answers", []):
                    ref_text = ref.get("text", "")
                    ref_start = int(ref.get("answer_start", -1))
                    if ref_text != CANNOTANSWER and ref_start >= 0:
                        _verify_quac_answer(ctx, qa_id, ref_text, ref_start)
                    references.append(ref_text)
                if answer_text == CANNOTANSWER:
                    span = None
                else:
                    span = (answer_start, answer_start + len(answer_text))
                turns.append(
                    Turn(
                        turn_index=qi,
                        question=question,
                        source_question=qa.get("source_question", question),
                        answer_text=answer_text,
                        answer_span=span,
                        reference_answers=tuple(references),
                        turn_id=qa_id,
                    )
                )
            conversations.append(Conversation(conv_id=conv_id, context_id=context_id, turns=tuple(turns)))
    return QuacDataset(contexts=list(contexts.values()), conversations=conversations)


def _load_canard(path: str) -> CanardDataset:
    raw = _read_json(path)
    if not isinstance(raw, list):
        raise ParseError(f"{path}: expected a top-level array of rewrite records")
    instances: list[RewriteInstance] = []
    skipped = 0
    for i, rec in enumerate(raw):
        try:
            history_seq = list(rec["History"])
            question = rec["Question"]
        except (KeyError, TypeError) as e:
            raise ParseError(f"{path}: record {i}: {e}") from e
        rewrite = rec.get("Rewrite")
        if rewrite is None:
            skipped += 1
            continue
        direction = rec.get("direction", "canard")
        if direction not in ("canard", "r_canard"):
            raise ParseError(f"{path}: record {i}: unknown direction {direction!r}")
        # History starts with two title entries, then alternating (q, a) turns.
        titles = tuple(history_seq[:2])
        qa_flat = history_seq[2:]
        history = tuple(
            (qa_flat[j], qa_flat[j + 1] if j + 1 < len(qa_flat) else "")
            for j in range(0, len(qa_flat), 2)
        )
        instances.append(
            RewriteInstance(
                context_ref=titles,
                history=history,
                source_question=question,
                target_question=rewrite,
                direction=direction,
            )
        )
    return CanardDataset(instances=instances, skipped=skipped)


def load_dataset(path: str, format: str):
    """Parse a dataset file. format is one of squad2 | quac | canard."""
    loaders = {"squad2": _load_squad, "quac": _load_quac, "canard": _load_canard}
    if format not in loaders:
        raise ParseError(f"unknown format {format!r} (expected squad2 | quac | canard)")
    return loaders[format](path)


# ---------------------------------------------------------------------------
# Emitting


def _atomic_write(path: str, payload: str) -> None:
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8") as f:
        f.write(payload)
    os.replace(tmp, path)


def emit_quac(conversations: Iterable[Conversation], contexts: Iterable[Context], path: str) -> None:
    """Serialize conversations in QuAC JSON shape; refuses invalid input."""
    ctx_by_id = {c.id: c for c in contexts}
    articles = []
    for conv in conversations:
        ctx = ctx_by_id.get(conv.context_id)
        if ctx is None:
            raise SpanValidationError(conv.conv_id, f"unknown context {conv.context_id}")
        problems = validate_conversation(conv, ctx)
        if problems:
            raise SpanValidationError(conv.conv_id, "; ".join(problems))
        qas = []
        for turn in conv.turns:
            if turn.answer_span is None:
                answer = {"text": CANNOTANSWER, "answer_start": -1}
            else:
                answer = {"text": turn.answer_text, "answer_start": turn.answer_span[0]}
            qas.append(
                {
                    "id": turn.turn_id or f"{conv.conv_id}#q{turn.turn_index}",
                    "question": turn.question,
                    "source_question": turn.source_question,
                    "answers": [dict(answer)],
                    "orig_answer": dict(answer),
                    "followup": "n",
                    "yesno": "x",
                }
            )
        articles.append(
            {
                "title": ctx.title,
                "paragraphs": [
                    {
                        "context": ctx.text,
                        "id": conv.conv_id,
                        "context_id": ctx.id,
                        "qas": qas,
                    }
                ],
            }
        )
    _atomic_write(path, json.dumps({"data": articles}, ensure_ascii=False, indent=1))


def emit_canard(instances: Iterable[RewriteInstance], path: str) -> None:
    """Serialize rewrite instances in CANARD JSON shape (+ direction for reversed)."""
    records = []
    for inst in instances:
        history = list(inst.context_ref)
        for q, a in inst.history:
            history.extend([q, a])
        rec = {
            "History": history,
            "Question": inst.source_question,
            "Rewrite": inst.target_question,
        }
        if inst.direction != "canard":
            rec["direction"] = inst.direction
        records.append(rec)
    _atomic_write(path, json.dumps(records, ensure_ascii=False, indent=1))
