"""Word-level F1, human-equivalence scores, and corpus-level statistics."""

from __future__ import annotations

from dataclasses import dataclass

from .corpus import CANNOTANSWER, QuacDataset
from .errors import AlignmentError
from .text import stopwords, token_bag, tokenize


def word_f1(prediction: str, reference: str, drop_stopwords: bool = True) -> float:
    """Harmonic mean of precision/recall over token multisets.

    When both bags are empty after filtering, the score is 1.0 only for two
    empty strings or two CANNOTANSWER sentinels, else 0.0.
    """
    pred_bag = token_bag(prediction)
    ref_bag = token_bag(reference)
    if drop_stopwords:
        sw = stopwords()
        pred_bag = {t: c for t, c in pred_bag.items() if t not in sw}
        ref_bag = {t: c for t, c in ref_bag.items() if t not in sw}
    pred_total = sum(pred_bag.values())
    ref_total = sum(ref_bag.values())
    if pred_total == 0 and ref_total == 0:
        p, r = prediction.strip(), reference.strip()
        return 1.0 if (p == r and p in ("", CANNOTANSWER)) else 0.0
    if pred_total == 0 or ref_total == 0:
        return 0.0
    overlap = sum(min(c, ref_bag.get(t, 0)) for t, c in pred_bag.items())
    if overlap == 0:
        return 0.0
    precision = overlap / pred_total
    recall = overlap / ref_total
    return 2.0 * precision * recall / (precision + recall)


def max_f1_over_references(
    prediction: str, references: list[str], drop_stopwords: bool = True
) -> float:
    if not references:
        return 0.0
    return max(word_f1(prediction, r, drop_stopwords) for r in references)


def human_f1_from_references(references: list[str], drop_stopwords: bool = True) -> float:
    """Leave-one-out agreement between references; 1.0 for a lone reference."""
    if len(references) < 2:
        return 1.0
    best = 0.0
    for i, ref in enumerate(references):
        others = references[:i] + references[i + 1 :]
        best = max(best, max_f1_over_references(ref, others, drop_stopwords))
    return best


def heq(
    model_f1: dict[str, float],
    human_f1: dict[str, float],
    dialogs: dict[str, list[str]],
) -> tuple[float, float]:
    """(HEQ-Q, HEQ-D) percentages.

    HEQ-Q: share of questions where the model meets or beats the human
    score. HEQ-D: share of dialogs where that holds for every question.
    """
    missing = sorted(
        set(model_f1) ^ set(human_f1)
        | {q for qs in dialogs.values() for q in qs if q not in model_f1}
    )
    if missing:
        raise AlignmentError(missing)
    if not model_f1:
        raise ValueError("no questions to score")
    passed = {q: model_f1[q] >= human_f1[q] for q in model_f1}
    heq_q = 100.0 * sum(passed.values()) / len(passed)
    if not dialogs:
        raise ValueError("no dialogs to score")
    dialog_pass = [all(passed[q] for q in qs) for qs in dialogs.values() if qs]
    heq_d = 100.0 * sum(dialog_pass) / len(dialog_pass)
    return heq_q, heq_d


@dataclass(frozen=True)
class DatasetStats:
    tokens_per_question: float
    tokens_per_answer: float
    f1_q_a: float
    f1_q_hist: float
    num_dialogs: int
    num_questions: int

    def as_dict(self) -> dict:
        return {
            "tokens_per_question": self.tokens_per_question,
            "tokens_per_answer": self.tokens_per_answer,
            "f1_q_a": self.f1_q_a,
            "f1_q_hist": self.f1_q_hist,
            "num_dialogs": self.num_dialogs,
            "num_questions": self.num_questions,
        }


def dataset_stats(dataset: QuacDataset) -> DatasetStats:
    """Mean question/answer token counts and question-answer overlap F1s.

    Stopwords are kept: these are raw-bag statistics, not answer scoring.
    The history F1 compares each question against all previous answers
    joined; first turns score 0 there (empty history).
    """
    if not dataset.conversations:
        raise ValueError("dataset has no conversations")
    q_tokens = a_tokens = 0
    f1_qa_sum = f1_hist_sum = 0.0
    n = 0
    for conv in dataset.conversations:
        previous_answers: list[str] = []
        for turn in conv.turns:
            q_tokens += len(tokenize(turn.question))
            a_tokens += len(tokenize(turn.answer_text))
            f1_qa_sum += word_f1(turn.question, turn.answer_text, drop_stopwords=False)
            f1_hist_sum += word_f1(
                turn.question, " ".join(previous_answers), drop_stopwords=False
            )
            previous_answers.append(turn.answer_text)
            n += 1
    return DatasetStats(
        tokens_per_question=q_tokens / n,
        tokens_per_answer=a_tokens / n,
        f1_q_a=100.0 * f1_qa_sum / n,
        f1_q_hist=100.0 * f1_hist_sum / n,
        num_dialogs=dataset.num_dialogs,
        num_questions=n,
    )
