"""Candidate QA scoring, four-way EM bucketing, and extreme-bucket filtering.

A candidate's score is the negative sum of its answer-position log
probabilities; low scores are easy/clean, high scores challenging/noisy.
Scores are clustered into four buckets with a 1-D Gaussian mixture fitted
by EM, and only the two middle buckets survive filtering.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .corpus import SingleTurnQA
from .errors import DegenerateScores
from .triples import Triple

BUCKETS = ("low", "relatively_low", "medium", "high")
KEPT_BUCKETS = frozenset({"relatively_low", "medium"})

_VARIANCE_FLOOR = 1e-6
_MAX_ITER = 200
_TOL = 1e-6


def qae_score(logp_start: float, logp_end: float) -> float:
    """Negative sum of start/end log probabilities; 0 means certainty."""
    for v in (logp_start, logp_end):
        if not math.isfinite(v) or v > 0:
            raise ValueError(f"log probability must be finite and <= 0, got {v}")
    return -(logp_start + logp_end)


@dataclass(frozen=True)
class ScoredCandidate:
    qa: SingleTurnQA
    logp_start: float
    logp_end: float
    qae_score: float
    bucket: str | None = None
    source_triple: Triple | None = None

    def __post_init__(self):
        expected = -(self.logp_start + self.logp_end)
        if abs(self.qae_score - expected) > 1e-12:
            raise ValueError("qae_score must equal -(logp_start + logp_end)")
        if self.bucket is not None and self.bucket not in BUCKETS:
            raise ValueError(f"unknown bucket {self.bucket!r}")

    @classmethod
    def from_logps(
        cls,
        qa: SingleTurnQA,
        logp_start: float,
        logp_end: float,
        source_triple: Triple | None = None,
    ) -> "ScoredCandidate":
        return cls(
            qa=qa,
            logp_start=logp_start,
            logp_end=logp_end,
            qae_score=qae_score(logp_start, logp_end),
            source_triple=source_triple,
        )


@dataclass(frozen=True)
class BucketModel:
    means: tuple[float, ...]
    variances: tuple[float, ...]
    weights: tuple[float, ...]
    iterations: int
    log_likelihood: float

    def __post_init__(self):
        if abs(sum(self.weights) - 1.0) > 1e-9:
            raise ValueError("mixture weights must sum to 1")
        if any(v < _VARIANCE_FLOOR for v in self.variances):
            raise ValueError("variance below floor")
        if any(a >= b for a, b in zip(self.means, self.means[1:])):
            raise ValueError("means must be strictly sorted")


def _log_densities(x: np.ndarray, means, variances, weights) -> np.ndarray:
    """(n, k) matrix of log(w_k) + log N(x_i | mu_k, var_k)."""
    x = x[:, None]
    return (
        np.log(weights)[None, :]
        - 0.5 * np.log(2.0 * np.pi * variances)[None, :]
        - (x - means[None, :]) ** 2 / (2.0 * variances)[None, :]
    )


def _kmeanspp_init(x: np.ndarray, k: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    centers = [x[rng.integers(len(x))]]
    for _ in range(k - 1):
        d2 = np.min((x[:, None] - np.array(centers)[None, :]) ** 2, axis=1)
        total = d2.sum()
        if total <= 0:
            raise DegenerateScores("not enough spread for k-means++ init")
        centers.append(x[rng.choice(len(x), p=d2 / total)])
    return np.sort(np.array(centers))


def fit_buckets(scores, seed: int = 42) -> BucketModel:
    """EM fit of a 4-component 1-D Gaussian mixture over the scores.

    Deterministic given the seed. Raises DegenerateScores when the input is
    too small or too uniform; callers fall back to quartile bucketing.
    """
    x = np.asarray(list(scores), dtype=np.float64)
    if len(x) < 8 or len(np.unique(x)) < 4:
        raise DegenerateScores(
            f"need >= 8 scores with >= 4 distinct values, got {len(x)} / {len(np.unique(x))}"
        )
    k = 4
    means = _kmeanspp_init(x, k, seed)
    variances = np.full(k, max(float(np.var(x)) / k, _VARIANCE_FLOOR))
    weights = np.full(k, 1.0 / k)

    prev_ll = -np.inf
    iterations = 0
    for iterations in range(1, _MAX_ITER + 1):
        logd = _log_densities(x, means, variances, weights)
        norm = np.logaddexp.reduce(logd, axis=1)
        ll = float(norm.sum())
        # EM never decreases the likelihood; allow only float noise.
        assert ll >= prev_ll - 1e-9 * max(1.0, abs(prev_ll)), "EM log-likelihood decreased"
        converged = ll - prev_ll < _TOL
        prev_ll = ll
        if converged:
            break

        resp = np.exp(logd - norm[:, None])
        mass = resp.sum(axis=0) + 1e-300
        weights = mass / mass.sum()
        means = (resp * x[:, None]).sum(axis=0) / mass
        variances = (resp * (x[:, None] - means[None, :]) ** 2).sum(axis=0) / mass
        variances = np.maximum(variances, _VARIANCE_FLOOR)
    else:
        # Ran out of iterations: report the likelihood of the final parameters.
        logd = _log_densities(x, means, variances, weights)
        prev_ll = float(np.logaddexp.reduce(logd, axis=1).sum())

    order = np.argsort(means, kind="stable")
    means, variances, weights = means[order], variances[order], weights[order]
    if np.any(np.diff(means) <= 0):
        raise DegenerateScores("mixture collapsed to coincident means")
    return BucketModel(
        means=tuple(float(v) for v in means),
        variances=tuple(float(v) for v in variances),
        weights=tuple(float(v) for v in weights),
        iterations=iterations,
        log_likelihood=prev_ll,
    )


def assign_bucket(score: float, model: BucketModel) -> str:
    """Argmax-responsibility component; exact ties go to the lower mean."""
    logd = _log_densities(
        np.array([score]),
        np.array(model.means),
        np.array(model.variances),
        np.array(model.weights),
    )[0]
    return BUCKETS[int(np.argmax(logd))]


def quartile_buckets(scores) -> list[str]:
    """Rank-based fallback bucketing used when EM preconditions fail.

    All-identical scores land in 'medium' (no evidence to drop anything).
    """
    scores = list(scores)
    if not scores:
        return []
    if len(set(scores)) == 1:
        return ["medium"] * len(scores)
    order = sorted(range(len(scores)), key=lambda i: (scores[i], i))
    labels = [""] * len(scores)
    n = len(scores)
    for rank, idx in enumerate(order):
        labels[idx] = BUCKETS[min(rank * 4 // n, 3)]
    return labels


def bucket_candidates(
    candidates: list[ScoredCandidate], seed: int = 42
) -> tuple[list[ScoredCandidate], BucketModel | None]:
    """Attach bucket labels, via EM when possible, else score quartiles."""
    if not candidates:
        return [], None
    scores = [c.qae_score for c in candidates]
    try:
        model = fit_buckets(scores, seed=seed)
        labels = [assign_bucket(s, model) for s in scores]
    except DegenerateScores:
        model = None
        labels = quartile_buckets(scores)
    return [replace(c, bucket=b) for c, b in zip(candidates, labels)], model


def filter_candidates(candidates: list[ScoredCandidate]) -> list[ScoredCandidate]:
    """Drop the extreme buckets; keep relatively_low and medium, stable order."""
    for c in candidates:
        if c.bucket is None:
            raise RuntimeError(f"candidate {c.qa.qa_id} was never bucketed")
    return [c for c in candidates if c.bucket in KEPT_BUCKETS]


def select_best_answer(candidates: list[ScoredCandidate]) -> ScoredCandidate:
    """Highest joint log probability; ties: earliest start, then shortest."""
    if not candidates:
        raise ValueError("no candidates to select from")

    def key(c: ScoredCandidate):
        span = c.qa.answer_span or (2**62, 2**62)
        return (-(c.logp_start + c.logp_end), span[0], span[1] - span[0])

    return min(candidates, key=key)
