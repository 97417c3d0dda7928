"""Match QA pairs onto graph nodes and cut the walk into sequential chains.

Marking requires both the subject and the object of one of the QA pair's
triples to be same-or-contained against the node triple's subject/object.
The walk is a depth-first traversal from the root with document-order
children; maximal runs of marked nodes become the QA chains.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .candidates import ScoredCandidate
from .kg import KnowledgeGraph, NodeId
from .text import token_bag
from .triples import Triple, entity_contains


@dataclass
class NodeMarking:
    assigned: dict[NodeId, ScoredCandidate] = field(default_factory=dict)
    unmatched: list[ScoredCandidate] = field(default_factory=list)


@dataclass(frozen=True)
class QAChain:
    candidates: tuple[ScoredCandidate, ...]
    node_ids: tuple[NodeId, ...]

    def __post_init__(self):
        if not self.candidates:
            raise ValueError("a chain holds at least one QA pair")


def _slot_match(qa_slot: str, node_slot: str) -> bool:
    if not qa_slot and not node_slot:
        return True
    if not qa_slot or not node_slot:
        return False
    return entity_contains(qa_slot, node_slot)


def triple_matches_node(qa_triple: Triple, node_triple: Triple) -> bool:
    return _slot_match(qa_triple.subject, node_triple.subject) and _slot_match(
        qa_triple.object, node_triple.object
    )


def node_overlap(candidate: ScoredCandidate, node_triple: Triple) -> float:
    """Jaccard similarity between the QA pair's tokens and the node's tokens."""
    qa_tokens = token_bag(f"{candidate.qa.question} {candidate.qa.answer_text}")
    node_tokens = token_bag(node_triple.slot_text())
    inter = sum((qa_tokens & node_tokens).values())
    union = sum((qa_tokens | node_tokens).values())
    return inter / union if union else 0.0


def mark_nodes(
    graph: KnowledgeGraph,
    candidates: list[ScoredCandidate],
    qa_triples: dict[str, list[Triple]],
) -> NodeMarking:
    """Assign at most one QA pair per node; existing pairs claim nodes first.

    qa_triples maps candidate qa_id to the triples extracted from the pair.
    Among several matching pairs the highest token overlap with the node
    wins; ties go to the lower scored (less noisy) pair.
    """
    marking = NodeMarking()
    taken: set[str] = set()
    for origin in ("existing", "generated"):
        pool = [c for c in candidates if c.qa.origin == origin]
        for node in graph.nodes:
            if node.node_id in marking.assigned:
                continue
            best = None
            best_key = None
            for idx, cand in enumerate(pool):
                if cand.qa.qa_id in taken:
                    continue
                triples = qa_triples.get(cand.qa.qa_id, [])
                if not any(triple_matches_node(t, node) for t in triples):
                    continue
                key = (-node_overlap(cand, node), cand.qae_score, idx)
                if best_key is None or key < best_key:
                    best, best_key = cand, key
            if best is not None:
                marking.assigned[node.node_id] = best
                taken.add(best.qa.qa_id)
    marking.unmatched = [c for c in candidates if c.qa.qa_id not in taken]
    return marking


def walk_order(graph: KnowledgeGraph) -> list[NodeId]:
    """Preorder DFS from the root, document-order children, then leftovers."""
    visited: list[NodeId] = []
    seen: set[NodeId] = set()
    stack: list[NodeId] = [graph.root]
    while stack:
        node_id = stack.pop()
        if node_id in seen:
            continue
        seen.add(node_id)
        visited.append(node_id)
        for child in reversed(graph.out_neighbors(node_id)):
            if child not in seen:
                stack.append(child)
    for t in graph.nodes:
        if t.node_id not in seen:
            seen.add(t.node_id)
            visited.append(t.node_id)
    return visited


def walk_chains(graph: KnowledgeGraph, marking: NodeMarking) -> list[QAChain]:
    """Maximal runs of marked nodes along the walk, as QA chains."""
    chains: list[QAChain] = []
    run_nodes: list[NodeId] = []
    for node_id in walk_order(graph):
        if node_id in marking.assigned:
            run_nodes.append(node_id)
        elif run_nodes:
            chains.append(
                QAChain(
                    candidates=tuple(marking.assigned[n] for n in run_nodes),
                    node_ids=tuple(run_nodes),
                )
            )
            run_nodes = []
    if run_nodes:
        chains.append(
            QAChain(
                candidates=tuple(marking.assigned[n] for n in run_nodes),
                node_ids=tuple(run_nodes),
            )
        )
    return chains


def chain_dump_line(context_id: str, chain_index: int, chain: QAChain) -> dict:
    return {
        "context_id": context_id,
        "chain_index": chain_index,
        "node_ids": [list(n) for n in chain.node_ids],
        "qa_ids": [c.qa.qa_id for c in chain.candidates],
    }
