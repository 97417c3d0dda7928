"""Deterministic rule-based candidate QA generation from context triples.

Stands in for an external neural question generator behind the same record
shape. Each triple yields a wh-subject question answered by the full
clause span and a what-did question answered by the verb phrase span.
Pseudo log probabilities are derived from a content hash, so scores are
reproducible across runs, machines, and language runtimes.
"""

from __future__ import annotations

import hashlib

from .candidates import ScoredCandidate
from .corpus import Context, SingleTurnQA
from .text import female_names, male_names, tokenize
from .triples import Triple, extract_triples

_HONORIFICS = frozenset(
    {"mr", "mrs", "ms", "miss", "dr", "sir", "lady", "lord", "king", "queen",
     "prince", "princess"}
)


def pseudo_logps(question: str, answer_text: str) -> tuple[float, float]:
    """Stable pseudo log probabilities in [-6, 0) from a content hash."""
    digest = hashlib.sha256(f"{question}\x1f{answer_text}".encode("utf-8")).digest()
    u_start = (int.from_bytes(digest[0:3], "big") + 1) / (2**24 + 1)
    u_end = (int.from_bytes(digest[3:6], "big") + 1) / (2**24 + 1)
    return (-6.0 * u_start, -6.0 * u_end)


def _is_person(subject: str) -> bool:
    toks = tokenize(subject)
    return any(t in _HONORIFICS or t in female_names() or t in male_names() for t in toks)


def _span_text(context: Context, start: int, end: int) -> str:
    return context.text[start:end]


def generate_candidates(
    context: Context, per_sentence_triples: list[list[Triple]] | None = None
) -> list[ScoredCandidate]:
    """Candidate QA pairs for one context; answers are verified spans."""
    if per_sentence_triples is None:
        per_sentence_triples = extract_triples(context)
    out: list[ScoredCandidate] = []
    for triples in per_sentence_triples:
        for t in triples:
            if t.subject_span is None or t.relation_span is None:
                continue
            subj_text = _span_text(context, *t.subject_span)
            tail_span = t.object_span if t.object else t.relation_span
            wh = "Who" if _is_person(t.subject) else "What"
            rel_obj = _span_text(context, t.relation_span[0], tail_span[1])

            # Wh-subject question; the whole clause is the answer span.
            q1 = f"{wh} {rel_obj}?"
            span1 = (t.subject_span[0], tail_span[1])
            out.append(_candidate(context, len(out), q1, span1, t))

            # What-did question; the verb phrase is the answer span.
            q2 = f"What did {subj_text} do?"
            span2 = (t.relation_span[0], tail_span[1])
            out.append(_candidate(context, len(out), q2, span2, t))
    return out


def _candidate(
    context: Context, index: int, question: str, span: tuple[int, int], triple: Triple
) -> ScoredCandidate:
    answer_text = context.text[span[0] : span[1]]
    qa = SingleTurnQA(
        qa_id=f"{context.id}#g{index}",
        question=question,
        answer_text=answer_text,
        answer_span=span,
        is_unanswerable=False,
        origin="generated",
    )
    logp_start, logp_end = pseudo_logps(question, answer_text)
    return ScoredCandidate.from_logps(qa, logp_start, logp_end, source_triple=triple)


def candidate_wire_records(candidates: list[ScoredCandidate]) -> list[dict]:
    """Adapter wire shape for a candidate list."""
    records = []
    for c in candidates:
        start, end = c.qa.answer_span
        records.append(
            {
                "question": c.qa.question,
                "answer_text": c.qa.answer_text,
                "answer_start": start,
                "answer_end": end,
                "logp_start": c.logp_start,
                "logp_end": c.logp_end,
            }
        )
    return records
