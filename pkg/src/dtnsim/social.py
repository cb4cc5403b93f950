"""Per-node distributed social-network views built from hello exchange.

Each node keeps a local graph of its friends (peers whose link weight clears
the threshold) plus whatever adjacency those friends advertised in their
hello messages.  That local graph is, by construction, the node's expanded
ego network, so self-centrality is computed on it directly.

Hello payloads also piggyback the sender's self-computed centralities and
its above-threshold link weights; the routing conditions need both and the
hello is the only channel a DTN node has.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from dtnsim.contacts import ContactWindow
from dtnsim.graph import NodeId, SocialGraph, betweenness, endpoint_betweenness


@dataclass(frozen=True)
class HelloPayload:
    """What a node broadcasts: who it is friends with and how central it is."""

    sender: NodeId
    neighbor_list: frozenset[NodeId]
    sender_cb: Fraction | float = 0
    sender_ceb: Fraction | float = 0
    #: sender's link weights, restricted to peers above the friend threshold
    link_weights: Mapping[NodeId, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.sender in self.neighbor_list:
            raise ValueError("sender must not appear in its own neighbor list")


@dataclass(frozen=True)
class PeerRecord:
    """Last centrality values heard from a peer."""

    cb: Fraction | float
    ceb: Fraction | float
    stamped_at: float


class SocialNetworkView:
    """A node's locally maintained social network and peer caches."""

    def __init__(self, owner: NodeId) -> None:
        self.owner = owner
        self.graph = SocialGraph(vertices=[owner])
        self.peer_centrality: dict[NodeId, PeerRecord] = {}
        self.peer_weights: dict[NodeId, dict[NodeId, float]] = {}
        # last advertised neighbor list per peer; staged for the next maintain
        self._advertised: dict[NodeId, frozenset[NodeId]] = {}
        self.revision = 0
        self._centrality_cache: tuple[int, tuple[Fraction, Fraction]] | None = None

    # -- hello handling ------------------------------------------------------

    def apply_hello(self, payload: HelloPayload, now: float) -> None:
        """Cache a received hello.  Does not touch the graph; maintain does."""
        sender = payload.sender
        self.peer_centrality[sender] = PeerRecord(
            payload.sender_cb, payload.sender_ceb, now
        )
        self.peer_weights[sender] = dict(payload.link_weights)
        self._advertised[sender] = frozenset(payload.neighbor_list)

    def make_hello(
        self, now: float, link_weights: Mapping[NodeId, float] | None = None
    ) -> HelloPayload:
        """Build this node's broadcast payload.

        ``link_weights`` is supplied by the owner of the contact windows
        (this view has no access to them) and should already be filtered to
        above-threshold peers.
        """
        cb, ceb = self.my_centrality()
        return HelloPayload(
            sender=self.owner,
            neighbor_list=frozenset(self.graph.neighbors(self.owner)),
            sender_cb=cb,
            sender_ceb=ceb,
            link_weights=dict(link_weights or {}),
        )

    # -- centrality ------------------------------------------------------------

    def my_centrality(self) -> tuple[Fraction, Fraction]:
        """(plain, endpoint-biased) betweenness of the owner on its own view.

        The view graph is already the owner's expanded ego network, so no
        further extraction is needed.
        """
        if self._centrality_cache and self._centrality_cache[0] == self.revision:
            return self._centrality_cache[1]
        cb = betweenness(self.graph)[self.owner]
        ceb = endpoint_betweenness(self.graph)[self.owner]
        self._centrality_cache = (self.revision, (cb, ceb))
        return cb, ceb

    # -- maintenance -----------------------------------------------------------

    def maintain(
        self,
        now: float,
        *,
        threshold: float,
        windows: Mapping[NodeId, ContactWindow] | None = None,
        weights: Mapping[NodeId, float] | None = None,
    ) -> bool:
        """Re-derive the view from current link weights and staged hellos.

        For every peer with recorded contact history: above-threshold peers
        become (or stay) friends and their advertised adjacency is merged;
        everyone else is evicted along with the adjacency only they vouched
        for.  Peers are processed in ascending id order.  Returns True if
        the graph changed.
        """
        if weights is None:
            if windows is None:
                raise ValueError("maintain needs either windows or weights")
            weights = {j: w.link_weight(now) for j, w in windows.items()}
        before = {v: frozenset(self.graph.neighbors(v)) for v in self.graph.vertices}
        for j in sorted(weights):
            if j == self.owner:
                continue
            if weights[j] > threshold:
                self.graph.add_edge(self.owner, j)
                for k in self._advertised.get(j, ()):
                    if k != j:
                        self.graph.add_edge(j, k)
            elif j in self.graph.vertices:
                advertised = self._advertised.pop(j, frozenset())
                self.graph.remove_edge(self.owner, j)
                for k in advertised:
                    self.graph.remove_edge(j, k)
                self.graph.remove_vertex(j)
        # prune vertices no surviving friend vouches for
        for v in [v for v in self.graph.vertices if v != self.owner]:
            if self.graph.degree(v) == 0:
                self.graph.remove_vertex(v)
        after = {v: frozenset(self.graph.neighbors(v)) for v in self.graph.vertices}
        changed = before != after
        if changed:
            self.revision += 1
        return changed

    def __repr__(self) -> str:
        return f"SocialNetworkView(owner={self.owner}, graph={self.graph!r})"
