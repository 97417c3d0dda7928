"""Reversed rewrite data construction and rule-based follow-up rewriting.

The rule backend turns self-contained questions into conversation-dependent
ones with two transformations: replace the longest phrase already seen in
the history (or context title) with a pronoun, then drop a leading
subordinate segment that the previous answer already stated.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterable, Literal, Sequence

from .text import female_names, male_names, stopwords, tokenize, tokenize_with_offsets, verb_lexicon

_WH_WORDS = frozenset(
    {"who", "whom", "whose", "what", "which", "when", "where", "why", "how"}
)
_AUXILIARIES = frozenset(
    {"do", "does", "did", "is", "are", "was", "were", "be", "been", "am",
     "has", "have", "had", "can", "could", "will", "would", "shall", "should",
     "may", "might", "must"}
)
_FEMALE_HONORIFICS = frozenset({"mrs", "ms", "miss", "lady", "queen", "princess", "madam", "madame"})
_MALE_HONORIFICS = frozenset({"mr", "sir", "lord", "king", "prince"})
_SUBORDINATORS = frozenset(
    {"after", "before", "when", "while", "during", "following", "since",
     "once", "although", "though", "if", "because", "as"}
)


@dataclass(frozen=True)
class RewriteInstance:
    context_ref: tuple[str, ...]
    history: tuple[tuple[str, str], ...]
    source_question: str
    target_question: str
    direction: Literal["canard", "r_canard"]

    def __post_init__(self):
        if not self.source_question:
            raise ValueError("source question must be non-empty")

    @property
    def turn(self) -> int:
        return len(self.history) + 1


def build_rcanard(instances: Iterable[RewriteInstance]) -> list[RewriteInstance]:
    """Swap source/target and flip direction; an involution on the pairing."""
    flipped = []
    for inst in instances:
        direction = "r_canard" if inst.direction == "canard" else "canard"
        flipped.append(
            replace(
                inst,
                source_question=inst.target_question,
                target_question=inst.source_question,
                direction=direction,
            )
        )
    return flipped


def _choose_pronoun(phrase_tokens: list[str]) -> str:
    for tok in phrase_tokens:
        if tok in _FEMALE_HONORIFICS:
            return "she"
        if tok in _MALE_HONORIFICS:
            return "he"
    for tok in phrase_tokens:
        if tok in female_names():
            return "she"
        if tok in male_names():
            return "he"
    if "and" in phrase_tokens:
        return "they"
    last = phrase_tokens[-1]
    if len(last) > 3 and last.endswith("s") and not last.endswith("ss"):
        return "they"
    return "it"


def _contains_run(haystack: list[str], needle: list[str]) -> bool:
    n, m = len(haystack), len(needle)
    if m == 0 or m > n:
        return False
    return any(haystack[i : i + m] == needle for i in range(n - m + 1))


def _phrase_replaceable(tokens: list[str]) -> bool:
    # Verb-led windows are clause fragments, not noun phrases; a verb further
    # in is allowed (titles like "Live at the Apollo" embed one).
    if any(t in _WH_WORDS or t in _AUXILIARIES for t in tokens):
        return False
    if tokens[0] in verb_lexicon():
        return False
    return any(t not in stopwords() for t in tokens)


def _pronominalize(question: str, seen_tokens: list[str]) -> str:
    toks = tokenize_with_offsets(question)
    n = len(toks)
    best: tuple[int, int] | None = None
    for length in range(n, 0, -1):
        for start in range(0, n - length + 1):
            window = [t for t, _, _ in toks[start : start + length]]
            if not _phrase_replaceable(window):
                continue
            if _contains_run(seen_tokens, window):
                best = (start, start + length)
                break
        if best is not None:
            break
    if best is None:
        return question
    s_tok, e_tok = best
    char_start = toks[s_tok][1]
    char_end = toks[e_tok - 1][2]
    pronoun = _choose_pronoun([t for t, _, _ in toks[s_tok:e_tok]])
    if question[:char_start].strip() == "":
        pronoun = pronoun.capitalize()
    return question[:char_start] + pronoun + question[char_end:]


def _elide_leading_segment(question: str, previous_answer: str) -> str:
    comma = question.find(",")
    if comma <= 0:
        return question
    lead = tokenize(question[:comma])
    if not lead or lead[0] not in _SUBORDINATORS or len(lead) < 2:
        return question
    if not _contains_run(tokenize(previous_answer), lead[1:]):
        return question
    rest = question[comma + 1 :].lstrip()
    if not rest:
        return question
    return rest[0].upper() + rest[1:]


def rewrite_question(
    question: str,
    history: Sequence[tuple[str, str]],
    context_title: str = "",
) -> str:
    """Rule-based follow-up rewriting; identity when no rule fires."""
    if not question:
        return question
    seen: list[str] = []
    for q, a in history:
        seen.extend(tokenize(q))
        seen.extend(tokenize(a))
    seen.extend(tokenize(context_title))
    out = _pronominalize(question, seen)
    if history:
        out = _elide_leading_segment(out, history[-1][1])
    return out if out else question
