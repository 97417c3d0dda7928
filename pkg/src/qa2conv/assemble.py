"""Turn QA chains into conversations with rewriting and termination rules.

A conversation follows one chain: each turn's question is rewritten against
the history built so far, failed or missing answer spans become
CANNOTANSWER turns, and assembly stops at the turn cap, at the chain end,
or just before a fourth unanswerable turn. Short results are discarded.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

from .corpus import CANNOTANSWER, Context, Conversation, Turn
from .reassemble import QAChain

RewriteFn = Callable[[str, tuple[tuple[str, str], ...], str], str]


@dataclass
class AssemblyStats:
    conversations: int = 0
    turns: int = 0
    cannotanswer_turns: int = 0
    discarded_chains: int = 0


def _span_ok(context: Context, span: tuple[int, int] | None, answer_text: str) -> bool:
    if span is None:
        return False
    start, end = span
    if not (0 <= start <= end <= len(context.text)):
        return False
    return context.text[start:end] == answer_text


def assemble_conversations(
    chains: Sequence[QAChain],
    context: Context,
    rewrite_fn: RewriteFn,
    max_turns: int = 12,
    min_turns: int = 2,
    max_unanswerable: int = 3,
) -> tuple[list[Conversation], AssemblyStats]:
    stats = AssemblyStats()
    conversations: list[Conversation] = []
    for chain_index, chain in enumerate(chains):
        conv_id = f"{context.id}#c{chain_index}"
        turns: list[Turn] = []
        history: list[tuple[str, str]] = []
        cannot = 0
        for cand in chain.candidates:
            if len(turns) >= max_turns:
                break
            qa = cand.qa
            question = rewrite_fn(qa.question, tuple(history), context.title)
            answerable = not qa.is_unanswerable and _span_ok(
                context, qa.answer_span, qa.answer_text
            )
            index = len(turns) + 1
            if answerable:
                answer_text, answer_span = qa.answer_text, qa.answer_span
            else:
                if cannot >= max_unanswerable:
                    break
                cannot += 1
                answer_text, answer_span = CANNOTANSWER, None
            turn = Turn(
                turn_index=index,
                question=question,
                source_question=qa.question,
                answer_text=answer_text,
                answer_span=answer_span,
                reference_answers=(answer_text,),
                turn_id=f"{conv_id}#q{index}",
            )
            turns.append(turn)
            history.append((question, turn.answer_text))
        if len(turns) >= min_turns:
            conversations.append(
                Conversation(conv_id=conv_id, context_id=context.id, turns=tuple(turns))
            )
            stats.conversations += 1
            stats.turns += len(turns)
            stats.cannotanswer_turns += cannot
        else:
            stats.discarded_chains += 1
    return conversations, stats
