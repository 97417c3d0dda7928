"""Merge redundant QA pairs: union-find over a word-overlap relation.

Two pairs are redundant when more than half of their combined vocabulary
(multiset union of question + answer tokens) is shared. Each redundancy
set keeps its intermediate-score member as the representative.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

from .candidates import ScoredCandidate
from .text import token_bag


class UnionFind:
    """Array-based disjoint sets with path compression and union by rank."""

    def __init__(self, n: int):
        self.parent = list(range(n))
        self.rank = [0] * n
        self.successful_unions = 0

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, x: int, y: int) -> bool:
        rx, ry = self.find(x), self.find(y)
        if rx == ry:
            return False
        if self.rank[rx] < self.rank[ry]:
            rx, ry = ry, rx
        self.parent[ry] = rx
        if self.rank[rx] == self.rank[ry]:
            self.rank[rx] += 1
        self.successful_unions += 1
        return True

    def sets(self) -> list[list[int]]:
        groups: dict[int, list[int]] = {}
        for i in range(len(self.parent)):
            groups.setdefault(self.find(i), []).append(i)
        return [groups[r] for r in sorted(groups, key=lambda r: min(groups[r]))]


def combined_bag(candidate: ScoredCandidate) -> Counter:
    """Question and answer tokens combined, as one multiset."""
    return token_bag(candidate.qa.question) + token_bag(candidate.qa.answer_text)


def is_redundant(
    a: ScoredCandidate,
    b: ScoredCandidate,
    threshold: float = 0.5,
    denominator: str = "union",
) -> bool:
    """True when shared tokens exceed threshold x total tokens.

    denominator selects what counts as the total: the multiset union of
    both bags (default) or the smaller bag.
    """
    bag_a, bag_b = combined_bag(a), combined_bag(b)
    if not bag_a or not bag_b:
        raise ValueError("redundancy needs non-empty token bags on both sides")
    inter = sum((bag_a & bag_b).values())
    if denominator == "union":
        total = sum((bag_a | bag_b).values())
    elif denominator == "shorter":
        total = min(sum(bag_a.values()), sum(bag_b.values()))
    else:
        raise ValueError(f"unknown denominator {denominator!r}")
    return inter > threshold * total


@dataclass
class MergeReport:
    sets: list[list[str]] = field(default_factory=list)
    representatives: list[str] = field(default_factory=list)

    @property
    def merged_sets(self) -> int:
        return sum(1 for s in self.sets if len(s) > 1)


def merge_redundant(
    candidates: list[ScoredCandidate],
    threshold: float = 0.5,
    denominator: str = "union",
) -> tuple[list[ScoredCandidate], MergeReport]:
    """Collapse each transitive redundancy set to its median-score member.

    Even-sized sets keep the lower median (the less noisy pair). Output
    preserves the original relative order of the representatives.
    """
    uf = UnionFind(len(candidates))
    for i in range(len(candidates)):
        for j in range(i + 1, len(candidates)):
            if is_redundant(candidates[i], candidates[j], threshold, denominator):
                uf.union(i, j)
    report = MergeReport()
    keep: list[int] = []
    for members in uf.sets():
        ordered = sorted(members, key=lambda i: (candidates[i].qae_score, i))
        rep = ordered[(len(ordered) - 1) // 2]
        keep.append(rep)
        report.sets.append([candidates[i].qa.qa_id for i in members])
        report.representatives.append(candidates[rep].qa.qa_id)
    keep.sort()
    return [candidates[i] for i in keep], report
