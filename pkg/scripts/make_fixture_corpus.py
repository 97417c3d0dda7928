#!/usr/bin/env python3
"""Generate a synthetic SQuAD-2.0-format corpus with exact answer spans.

Offline stand-in for the real single-turn data: entity-chained sentences
built from the package's own verb lexicon, gold wh-questions with verified
character spans, and a share of unanswerable questions. Deterministic for
a given seed.

Usage:
  python scripts/make_fixture_corpus.py --contexts 500 --seed 42 --out corpus.json
"""

from __future__ import annotations

import argparse
import json
import random

PEOPLE = [
    "Alice Parker", "Margaret Hale", "Victor Lane", "Henry Cole", "Emma Stone",
    "Walter Reed", "Clara Bow", "Arthur Dent", "Grace Field", "Samuel Park",
    "Helen Ward", "Oscar Wilde", "Ruth Hall", "Martin Shaw", "Julia Reyes",
    "Edward Nash", "Laura Palmer", "Frank Moss", "Diana Price", "Peter Quinn",
]
ORGS = [
    "Acme Corporation", "Orion Labs", "Vega Industries", "Mercury Press",
    "Atlas Foundry", "Polaris Group", "Nimbus Records", "Aurora Institute",
    "Titan Motors", "Europa Society", "Zenith Bank", "Lyra Pictures",
]
THINGS = [
    "the album Night Songs", "the novel White River", "the film Red Canyon",
    "the bridge over the Dart", "the museum of glass", "the first steam engine",
    "the city library", "the summer festival", "the research station",
    "the opera house", "the mountain railway", "the southern observatory",
]
PLACES = [
    "Boston", "Chicago", "Vienna", "Lisbon", "Oslo", "Madrid", "Dublin",
    "Prague", "Geneva", "Porto", "Athens", "Warsaw",
]
VERBS = [
    "founded", "joined", "acquired", "released", "recorded", "published",
    "launched", "established", "directed", "created", "produced", "won",
    "captured", "defeated", "visited", "supported", "opened", "restored",
    "designed", "composed", "organized", "sponsored",
]


def _pick_subject(rng: random.Random, prev_object: str | None):
    if prev_object is not None and rng.random() < 0.55:
        return prev_object
    pool = rng.choice([PEOPLE, ORGS])
    return rng.choice(pool)


def _pick_object(rng: random.Random, subject: str):
    pool = rng.choice([ORGS, THINGS, PEOPLE])
    obj = rng.choice(pool)
    while obj == subject:
        obj = rng.choice(pool)
    return obj


def build_context(rng: random.Random, index: int) -> dict:
    """One article paragraph plus its gold QA records."""
    n_sentences = rng.randint(4, 7)
    text_parts: list[str] = []
    facts = []  # (subject, verb, object, spans dict) in document order
    offset = 0
    prev_object = None
    for _ in range(n_sentences):
        subject = _pick_subject(rng, prev_object)
        verb = rng.choice(VERBS)
        obj = _pick_object(rng, subject)
        tail = ""
        if rng.random() < 0.5:
            tail = f" in {rng.choice(PLACES)}" if rng.random() < 0.5 else f" in {rng.randint(1880, 1999)}"
        sentence = f"{subject} {verb} {obj}{tail}."
        spans = {
            "subject": (offset, offset + len(subject)),
            "verb": (offset + len(subject) + 1, offset + len(subject) + 1 + len(verb)),
            "object": (
                offset + len(subject) + 1 + len(verb) + 1,
                offset + len(subject) + 1 + len(verb) + 1 + len(obj),
            ),
            "clause_end": offset + len(sentence) - 1,
        }
        facts.append((subject, verb, obj, spans))
        text_parts.append(sentence)
        offset += len(sentence) + 1
        prev_object = obj if rng.random() < 0.7 else subject
    text = " ".join(text_parts)

    qas = []
    n_questions = rng.randint(2, 4)
    asked = set()
    for qi in range(n_questions):
        subject, verb, obj, spans = rng.choice(facts)
        qa_id = f"synth{index}q{qi}"
        if rng.random() < 0.15:
            qas.append(
                {
                    "id": qa_id,
                    "question": f"Who destroyed {obj}?",
                    "answers": [],
                    "is_impossible": True,
                }
            )
            continue
        if (subject, verb) in asked or rng.random() < 0.4:
            start, end = spans["verb"][0], spans["object"][1]
            question = f"What did {subject} do?"
            answer = {"text": text[start:end], "answer_start": start}
        else:
            start, end = spans["subject"]
            question = f"Who {verb} {obj}?"
            answer = {"text": text[start:end], "answer_start": start}
        asked.add((subject, verb))
        qas.append(
            {
                "id": qa_id,
                "question": question,
                "answers": [answer],
                "is_impossible": False,
            }
        )
    title = facts[0][0]
    return {"title": title, "paragraphs": [{"context": text, "qas": qas}]}


def build_corpus(n_contexts: int, seed: int) -> dict:
    rng = random.Random(seed)
    return {
        "version": "synthetic-2.0",
        "data": [build_context(rng, i) for i in range(n_contexts)],
    }


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--contexts", type=int, default=100)
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("--out", required=True)
    args = ap.parse_args()
    corpus = build_corpus(args.contexts, args.seed)
    with open(args.out, "w", encoding="utf-8") as f:
        json.dump(corpus, f, ensure_ascii=False, indent=1)
    n_q = sum(len(p["qas"]) for a in corpus["data"] for p in a["paragraphs"])
    print(f"wrote {args.contexts} contexts / {n_q} questions to {args.out}")


if __name__ == "__main__":
    main()
