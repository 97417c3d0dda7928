"""Per-context knowledge graph built by joining triples.

Three joining rules: entity overlap links triples pairwise (P1, within a
sentence and once across each sentence boundary), still-isolated triples
attach to an adjacent triple (P2), and adjacent sentences with no link yet
are bridged last-to-first (P3). A P3-style bridge is also applied between
leftover same-sentence fragments so the result is always weakly connected.
All edges point from the earlier triple to the later one (document order).
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import EmptyGraphError
from .triples import Triple, entity_contains

NodeId = tuple[int, int]


@dataclass(frozen=True)
class Edge:
    src: NodeId
    dst: NodeId
    principle: int


@dataclass(frozen=True)
class KnowledgeGraph:
    nodes: tuple[Triple, ...]
    edges: tuple[Edge, ...]
    root: NodeId

    def node(self, node_id: NodeId) -> Triple:
        for t in self.nodes:
            if t.node_id == node_id:
                return t
        raise KeyError(node_id)

    def out_neighbors(self, node_id: NodeId) -> list[NodeId]:
        return sorted(e.dst for e in self.edges if e.src == node_id)

    def undirected_neighbors(self, node_id: NodeId) -> list[NodeId]:
        out = {e.dst for e in self.edges if e.src == node_id}
        out.update(e.src for e in self.edges if e.dst == node_id)
        return sorted(out)


def _slots(t: Triple) -> list[str]:
    return [s for s in (t.subject, t.object) if s]


def principle1_match(a: Triple, b: Triple) -> bool:
    """Entity same-or-contained between any subject/object slots of a and b."""
    for sa in _slots(a):
        for sb in _slots(b):
            if entity_contains(sa, sb):
                return True
    return False


class _EdgeSet:
    def __init__(self):
        self.edges: list[Edge] = []
        self._seen: set[tuple[NodeId, NodeId]] = set()

    def add(self, src: Triple, dst: Triple, principle: int) -> bool:
        a, b = src.node_id, dst.node_id
        if a == b:
            return False
        if a > b:  # keep document-order direction
            a, b = b, a
        if (a, b) in self._seen:
            return False
        self._seen.add((a, b))
        self.edges.append(Edge(src=a, dst=b, principle=principle))
        return True

    def connected(self, a: NodeId, b: NodeId) -> bool:
        return (a, b) in self._seen or (b, a) in self._seen


def build_graph(per_sentence_triples: list[list[Triple]]) -> KnowledgeGraph:
    """Join per-sentence triples into one weakly connected graph."""
    nodes = [t for sent in per_sentence_triples for t in sent]
    if not nodes:
        raise EmptyGraphError("no triples to build a graph from")

    edges = _EdgeSet()

    # Intra-sentence: pairwise entity links.
    for sent in per_sentence_triples:
        for i in range(len(sent)):
            for j in range(i + 1, len(sent)):
                if principle1_match(sent[i], sent[j]):
                    edges.add(sent[i], sent[j], 1)

    # Intra-sentence: isolated triples attach to the previous (else next) one.
    for sent in per_sentence_triples:
        for i, t in enumerate(sent):
            degree = sum(
                1 for u in sent if u is not t and edges.connected(t.node_id, u.node_id)
            )
            if degree:
                continue
            if i > 0:
                edges.add(sent[i - 1], t, 2)
            elif i + 1 < len(sent):
                edges.add(t, sent[i + 1], 2)

    # Intra-sentence: bridge any remaining fragments (same last-to-first rule
    # as the sentence-boundary bridge, so the sentence is always connected).
    for sent in per_sentence_triples:
        comp = {t.node_id: t.node_id for t in sent}

        def find(x: NodeId) -> NodeId:
            while comp[x] != x:
                comp[x] = comp[comp[x]]
                x = comp[x]
            return x

        for e in edges.edges:
            if e.src in comp and e.dst in comp:
                comp[find(e.src)] = find(e.dst)
        for i in range(1, len(sent)):
            a, b = sent[i - 1], sent[i]
            if find(a.node_id) != find(b.node_id):
                edges.add(a, b, 3)
                comp[find(a.node_id)] = find(b.node_id)

    # Inter-sentence: one link per boundary, entity link first, bridge last.
    non_empty = [sent for sent in per_sentence_triples if sent]
    for k in range(len(non_empty) - 1):
        left, right = non_empty[k], non_empty[k + 1]
        linked = False
        for a in left:
            for b in right:
                if principle1_match(a, b):
                    edges.add(a, b, 1)
                    linked = True
                    break
            if linked:
                break
        if not linked:
            edges.add(left[-1], right[0], 3)

    return KnowledgeGraph(nodes=tuple(nodes), edges=tuple(edges.edges), root=nodes[0].node_id)


def export_dot(graph: KnowledgeGraph) -> str:
    """GraphViz DOT text with stable ordering; re-export is byte-identical."""
    lines = ["digraph context {"]
    for t in graph.nodes:
        si, ti = t.node_id
        label = f"s{si}.t{ti}: {t.subject}|{t.relation}|{t.object}"
        label = label.replace("\\", "\\\\").replace('"', '\\"')
        lines.append(f'  "s{si}.t{ti}" [label="{label}"];')
    for e in sorted(graph.edges, key=lambda e: (e.src, e.dst)):
        src = f"s{e.src[0]}.t{e.src[1]}"
        dst = f"s{e.dst[0]}.t{e.dst[1]}"
        lines.append(f'  "{src}" -> "{dst}" [label="P{e.principle}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
