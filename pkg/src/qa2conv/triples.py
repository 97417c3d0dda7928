"""Rule-based (subject, relation, object) extraction and entity containment.

The in-core extractor is a deterministic stand-in for a neural OpenIE
system: clauses are split on coordinating conjunctions, then each clause is
cut at its first finite-verb run from the shipped lexicon. Slot strings are
normalized to lowercase; character spans point into the original text.
"""

from __future__ import annotations

from dataclasses import dataclass

from .corpus import Context
from .text import tokenize, tokenize_with_offsets, verb_lexicon

_COORDINATORS = frozenset({"and", "but", "or"})
_ARTICLES = frozenset({"a", "an", "the"})


@dataclass(frozen=True)
class Triple:
    subject: str
    relation: str
    object: str
    sentence_index: int
    triple_index: int
    subject_span: tuple[int, int] | None = None
    relation_span: tuple[int, int] | None = None
    object_span: tuple[int, int] | None = None

    def __post_init__(self):
        if not self.subject or not self.relation:
            raise ValueError("triple subject and relation must be non-empty")

    @property
    def node_id(self) -> tuple[int, int]:
        return (self.sentence_index, self.triple_index)

    def slot_text(self) -> str:
        return f"{self.subject} {self.relation} {self.object}".strip()


def normalize_entity(s: str) -> list[str]:
    """Lowercase tokens with articles dropped; the containment alphabet."""
    return [t for t in tokenize(s) if t not in _ARTICLES]


def entity_contains(a: str, b: str) -> bool:
    """True when one entity's token sequence contains the other's (contiguous)."""
    if not a or not b:
        raise ValueError("entity strings must be non-empty")
    ta, tb = normalize_entity(a), normalize_entity(b)
    if not ta or not tb:
        return ta == tb
    if len(tb) > len(ta):
        ta, tb = tb, ta
    m = len(tb)
    return any(ta[i : i + m] == tb for i in range(len(ta) - m + 1))


def _split_clauses(tokens: list[tuple[str, int, int]]) -> list[list[tuple[str, int, int]]]:
    """Split a token stream at coordinating conjunctions when both halves
    contain a finite-verb candidate (so "Tom and Jerry ran" stays whole)."""
    lex = verb_lexicon()
    clauses: list[list[tuple[str, int, int]]] = []
    current: list[tuple[str, int, int]] = []
    for tok in tokens:
        if tok[0] in _COORDINATORS and current:
            left_has_verb = any(t in lex for t, _, _ in current)
            if left_has_verb:
                clauses.append(current)
                current = []
                continue
        current.append(tok)
    if current:
        clauses.append(current)
    # Merge back clauses that never got a verb of their own.
    merged: list[list[tuple[str, int, int]]] = []
    for clause in clauses:
        if merged and not any(t in lex for t, _, _ in clause):
            merged[-1].extend(clause)
        else:
            merged.append(clause)
    return merged


def _clause_triple(clause: list[tuple[str, int, int]]) -> tuple | None:
    """(subject, relation, object) token ranges for one clause, or None."""
    lex = verb_lexicon()
    verb_at = None
    for i, (tok, _, _) in enumerate(clause):
        if tok in lex and i >= 1:
            verb_at = i
            break
    if verb_at is None:
        return None
    verb_end = verb_at + 1
    while verb_end < len(clause) and clause[verb_end][0] in lex:
        verb_end += 1
    return (clause[:verb_at], clause[verb_at:verb_end], clause[verb_end:])


def _slot(tokens: list[tuple[str, int, int]], offset: int) -> tuple[str, tuple[int, int] | None]:
    if not tokens:
        return "", None
    text = " ".join(t for t, _, _ in tokens)
    return text, (offset + tokens[0][1], offset + tokens[-1][2])


def extract_triples(context: Context) -> list[list[Triple]]:
    """Per-sentence triples, ordered by appearance. Pure in the sentence text."""
    out: list[list[Triple]] = []
    for si in range(len(context.sentences)):
        start, _ = context.sentences[si]
        sentence = context.sentence_text(si)
        triples: list[Triple] = []
        for clause in _split_clauses(tokenize_with_offsets(sentence)):
            parts = _clause_triple(clause)
            if parts is None:
                continue
            subj_toks, rel_toks, obj_toks = parts
            subject, subject_span = _slot(subj_toks, start)
            relation, relation_span = _slot(rel_toks, start)
            obj, object_span = _slot(obj_toks, start)
            if not subject or not relation:
                continue
            triples.append(
                Triple(
                    subject=subject,
                    relation=relation,
                    object=obj,
                    sentence_index=si,
                    triple_index=len(triples),
                    subject_span=subject_span,
                    relation_span=relation_span,
                    object_span=object_span,
                )
            )
        out.append(triples)
    return out


def extract_triples_from_text(text: str, question_mode: bool = False) -> list[Triple]:
    """Triples for free-standing text (QA-pair matching); spans are local."""
    ctx = Context.create(id="inline", title="", text=text)
    flat: list[Triple] = []
    for triples in extract_triples(ctx):
        flat.extend(triples)
    return flat


_WH_LEADS = frozenset({"who", "whom", "whose", "what", "which"})
_WH_TAILS = frozenset({"when", "where", "why", "how"})
_AUX_AFTER_WH = frozenset({"did", "do", "does", "is", "was", "are", "were", "has", "have", "had"})


def declarativize(question: str, answer: str) -> str:
    """Best-effort statement form of a QA pair, for triple extraction.

    Entity questions substitute the answer for the leading wh word;
    when/where/why/how questions append the answer instead.
    """
    toks = tokenize(question)
    if not toks:
        return answer
    if toks[0] in _WH_LEADS:
        rest = toks[1:]
        if rest and rest[0] in _AUX_AFTER_WH and len(rest) > 1:
            rest = rest[1:]
        return " ".join(([answer] if answer else []) + rest)
    if toks[0] in _WH_TAILS:
        rest = toks[1:]
        if rest and rest[0] in _AUX_AFTER_WH and len(rest) > 1:
            rest = rest[1:]
        return " ".join(rest + ([answer] if answer else []))
    return " ".join(toks + ([answer] if answer else []))


def qa_pair_triples(question: str, answer: str) -> list[Triple]:
    """Triples carried by a QA pair, via its declarativized form."""
    statement = declarativize(question, answer)
    if not statement.strip():
        return []
    return extract_triples_from_text(statement)
