"""Undirected social graphs and the betweenness measures used for relay ranking.

Centrality scores are exact rationals (``fractions.Fraction``), so identities
like "endpoint-included minus plain betweenness equals the reachable-vertex
count" hold without floating-point slack.  Graphs in this simulator stay small
(local views of a few dozen vertices), so exactness is cheap.
"""

from __future__ import annotations

from collections import deque
from fractions import Fraction
from typing import Iterable, Iterator

NodeId = int


class UnknownVertexError(KeyError):
    """An operation named a vertex that is not in the graph."""


class SocialGraph:
    """Simple undirected graph: no self loops, no parallel edges."""

    __slots__ = ("_adj",)

    def __init__(
        self,
        vertices: Iterable[NodeId] = (),
        edges: Iterable[tuple[NodeId, NodeId]] = (),
    ) -> None:
        self._adj: dict[NodeId, set[NodeId]] = {}
        for v in vertices:
            self.add_vertex(v)
        for u, v in edges:
            self.add_edge(u, v)

    # -- construction ------------------------------------------------------

    def add_vertex(self, v: NodeId) -> bool:
        """Insert ``v``; returns True if it was not already present."""
        if v in self._adj:
            return False
        self._adj[v] = set()
        return True

    def add_edge(self, u: NodeId, v: NodeId) -> bool:
        """Insert the undirected edge (u, v), adding missing endpoints.

        Returns True if the edge was new.  Self loops are rejected.
        """
        if u == v:
            raise ValueError(f"self loop at vertex {u}")
        self.add_vertex(u)
        self.add_vertex(v)
        if v in self._adj[u]:
            return False
        self._adj[u].add(v)
        self._adj[v].add(u)
        return True

    def remove_edge(self, u: NodeId, v: NodeId) -> bool:
        """Drop the edge if present; vertices stay.  Returns True if dropped."""
        if u in self._adj and v in self._adj[u]:
            self._adj[u].discard(v)
            self._adj[v].discard(u)
            return True
        return False

    def remove_vertex(self, v: NodeId) -> bool:
        """Drop ``v`` and every incident edge.  Returns True if dropped."""
        if v not in self._adj:
            return False
        for w in self._adj.pop(v):
            self._adj[w].discard(v)
        return True

    # -- queries -----------------------------------------------------------

    @property
    def vertices(self):
        """Set-like view of the vertex set."""
        return self._adj.keys()

    def neighbors(self, u: NodeId) -> set[NodeId]:
        if u not in self._adj:
            raise UnknownVertexError(u)
        return set(self._adj[u])

    def degree(self, u: NodeId) -> int:
        if u not in self._adj:
            raise UnknownVertexError(u)
        return len(self._adj[u])

    def has_edge(self, u: NodeId, v: NodeId) -> bool:
        return u in self._adj and v in self._adj[u]

    def edges(self) -> Iterator[tuple[NodeId, NodeId]]:
        """Each undirected edge once, as (min, max)."""
        for u, nbrs in self._adj.items():
            for v in nbrs:
                if u < v:
                    yield (u, v)

    def edge_count(self) -> int:
        return sum(len(n) for n in self._adj.values()) // 2

    def reachable_from(self, u: NodeId) -> set[NodeId]:
        """Vertices reachable from ``u``, excluding ``u`` itself."""
        if u not in self._adj:
            raise UnknownVertexError(u)
        seen = {u}
        queue = deque([u])
        while queue:
            v = queue.popleft()
            for w in self._adj[v]:
                if w not in seen:
                    seen.add(w)
                    queue.append(w)
        seen.discard(u)
        return seen

    def copy(self) -> "SocialGraph":
        g = SocialGraph()
        g._adj = {v: set(nbrs) for v, nbrs in self._adj.items()}
        return g

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SocialGraph):
            return NotImplemented
        return self._adj == other._adj

    def __repr__(self) -> str:
        return (
            f"SocialGraph(vertices={sorted(self._adj)}, "
            f"edges={sorted(self.edges())})"
        )


# -- shortest-path machinery ------------------------------------------------


def _sssp_counts(g: SocialGraph, s: NodeId):
    """BFS from ``s``: visit order, predecessor lists, path counts, distances."""
    dist: dict[NodeId, int] = {s: 0}
    sigma: dict[NodeId, int] = {s: 1}
    preds: dict[NodeId, list[NodeId]] = {s: []}
    order: list[NodeId] = []
    queue = deque([s])
    while queue:
        v = queue.popleft()
        order.append(v)
        for w in g._adj[v]:
            if w not in dist:
                dist[w] = dist[v] + 1
                sigma[w] = 0
                preds[w] = []
                queue.append(w)
            if dist[w] == dist[v] + 1:
                sigma[w] += sigma[v]
                preds[w].append(v)
    return order, preds, sigma, dist


def _brandes(g: SocialGraph, include_endpoints: bool) -> dict[NodeId, Fraction]:
    """Dependency accumulation over all sources; unordered pairs (halved)."""
    score: dict[NodeId, Fraction] = {v: Fraction(0) for v in g.vertices}
    for s in g.vertices:
        order, preds, sigma, _ = _sssp_counts(g, s)
        delta: dict[NodeId, Fraction] = {v: Fraction(0) for v in order}
        if include_endpoints:
            score[s] += len(order) - 1
        for w in reversed(order):
            for v in preds[w]:
                delta[v] += Fraction(sigma[v], sigma[w]) * (1 + delta[w])
            if w != s:
                score[w] += delta[w] + 1 if include_endpoints else delta[w]
    return {v: val / 2 for v, val in score.items()}


def betweenness(g: SocialGraph) -> dict[NodeId, Fraction]:
    """Shortest-path betweenness over unordered pairs, endpoints excluded.

    Unweighted (hop-count) paths; vertex pairs in different components
    contribute nothing.
    """
    return _brandes(g, include_endpoints=False)


def endpoint_betweenness(g: SocialGraph) -> dict[NodeId, Fraction]:
    """Betweenness variant that also credits a vertex for pairs it belongs to.

    Every shortest path trivially includes its own endpoints, so each
    mutually-reachable pair {s, t} adds exactly 1 to both s and t on top of
    the interior contributions.
    """
    return _brandes(g, include_endpoints=True)


def betweenness_by_enumeration(
    g: SocialGraph, include_endpoints: bool = False
) -> dict[NodeId, Fraction]:
    """Brute-force oracle: explicitly enumerate every shortest path.

    Exponential in the worst case; intended for validating the accumulation
    implementation on small graphs.
    """
    score: dict[NodeId, Fraction] = {v: Fraction(0) for v in g.vertices}
    verts = sorted(g.vertices)
    for i, s in enumerate(verts):
        _, preds, _, dist = _sssp_counts(g, s)
        for t in verts[i + 1 :]:
            if t not in dist:
                continue
            paths: list[list[NodeId]] = []

            def _back(v: NodeId, tail: list[NodeId]) -> None:
                if v == s:
                    paths.append([s] + tail)
                    return
                for p in preds[v]:
                    _back(p, [v] + tail)

            _back(t, [])
            share = Fraction(1, len(paths))
            for path in paths:
                members = path if include_endpoints else path[1:-1]
                for v in members:
                    score[v] += share
    return score


# -- expanded ego networks ---------------------------------------------------


def extract_expanded_ego(g: SocialGraph, ego: NodeId) -> SocialGraph:
    """The ego, its 1-hop and 2-hop neighbours, and the edges the ego can learn.

    Included edges are those incident to a 1-hop neighbour (ego-to-friend and
    friend-to-anything).  Edges joining two 2-hop vertices are excluded: they
    never appear in any direct neighbour's advertised adjacency.
    """
    if ego not in g.vertices:
        raise UnknownVertexError(ego)
    out = SocialGraph(vertices=[ego])
    for j in g.neighbors(ego):
        out.add_edge(ego, j)
        for k in g.neighbors(j):
            if k != ego:
                out.add_edge(j, k)
    return out


def expanded_ego_betweenness(
    g: SocialGraph, ego: NodeId, endpoint_biased: bool = False
) -> Fraction:
    """The ego's betweenness computed on its own expanded ego network."""
    sub = extract_expanded_ego(g, ego)
    scores = endpoint_betweenness(sub) if endpoint_biased else betweenness(sub)
    return scores[ego]


# -- debug dump format --------------------------------------------------------


def dump_edges(g: SocialGraph) -> str:
    """One edge per line as "u v"; isolated vertices as "u -"."""
    lines = [f"{u} {v}" for u, v in sorted(g.edges())]
    lines.extend(f"{u} -" for u in sorted(g.vertices) if g.degree(u) == 0)
    return "\n".join(lines) + ("\n" if lines else "")


def parse_edges(text: str) -> SocialGraph:
    """Inverse of :func:`dump_edges`."""
    g = SocialGraph()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"line {lineno}: expected 'u v' or 'u -'")
        u = int(parts[0])
        if parts[1] == "-":
            g.add_vertex(u)
        else:
            g.add_edge(u, int(parts[1]))
    return g
