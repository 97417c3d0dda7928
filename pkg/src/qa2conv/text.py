"""Tokenization, sentence splitting, and the shipped word lists.

Everything downstream (overlap tests, entity containment, metrics) runs on
the tokenizer defined here, so it is deliberately small and deterministic:
lowercase, split on whitespace/punctuation, punctuation dropped, digits kept.
"""

from __future__ import annotations

import re
from collections import Counter
from functools import lru_cache
from importlib import resources

_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)

SENTENCE_TERMINATORS = ".?!"
# Characters allowed to trail a terminator and still belong to the sentence.
_CLOSERS = "\"')]}’”"


def _load_wordlist(name: str) -> frozenset[str]:
    data = resources.files("qa2conv.data").joinpath(name).read_text(encoding="utf-8")
    return frozenset(line.strip() for line in data.splitlines() if line.strip())


@lru_cache(maxsize=None)
def stopwords() -> frozenset[str]:
    return _load_wordlist("stopwords.txt")


@lru_cache(maxsize=None)
def abbreviations() -> frozenset[str]:
    return _load_wordlist("abbreviations.txt")


@lru_cache(maxsize=None)
def verb_lexicon() -> frozenset[str]:
    return _load_wordlist("verbs.txt")


@lru_cache(maxsize=None)
def female_names() -> frozenset[str]:
    return _load_wordlist("female_names.txt")


@lru_cache(maxsize=None)
def male_names() -> frozenset[str]:
    return _load_wordlist("male_names.txt")


def tokenize(s: str) -> list[str]:
    """Lowercased word tokens, in order. Punctuation is dropped, digits kept."""
    return _TOKEN_RE.findall(s.lower())


def tokenize_with_offsets(s: str) -> list[tuple[str, int, int]]:
    """Tokens plus their (start, end) character spans in the original string."""
    return [(m.group(0).lower(), m.start(), m.end()) for m in _TOKEN_RE.finditer(s)]


def token_bag(s: str) -> Counter:
    """Multiset view of tokenize(s)."""
    return Counter(tokenize(s))


def _is_abbreviation(text: str, dot_index: int) -> bool:
    """True when the '.' at dot_index terminates a guarded abbreviation."""
    j = dot_index
    start = j
    while start > 0 and (text[start - 1].isalpha()):
        start -= 1
    word = text[start:j].lower()
    return word in abbreviations()


def split_sentences(text: str) -> list[tuple[int, int]]:
    """Split text into sentence spans (half-open, character offsets).

    A terminator [.?!] ends a sentence when the next non-space character is
    uppercase, a digit, an opening quote, or end of text; '.' after a guarded
    abbreviation never splits. Spans are trimmed to non-whitespace and jointly
    cover every non-whitespace character.
    """
    n = len(text)
    spans: list[tuple[int, int]] = []
    sent_start = 0
    i = 0
    while i < n:
        ch = text[i]
        if ch in SENTENCE_TERMINATORS:
            if ch == "." and _is_abbreviation(text, i):
                i += 1
                continue
            end = i + 1
            while end < n and text[end] in _CLOSERS:
                end += 1
            j = end
            while j < n and text[j].isspace():
                j += 1
            nxt = text[j] if j < n else ""
            if j >= n or nxt.isupper() or nxt.isdigit() or nxt in "\"'‘“([{":
                spans.append((sent_start, end))
                sent_start = j
                i = end
                continue
        i += 1
    if sent_start < n and text[sent_start:].strip():
        spans.append((sent_start, n))

    trimmed: list[tuple[int, int]] = []
    for start, end in spans:
        while start < end and text[start].isspace():
            start += 1
        while end > start and text[end - 1].isspace():
            end -= 1
        if start < end:
            trimmed.append((start, end))
    return trimmed
