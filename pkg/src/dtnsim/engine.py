"""Deterministic tick-stepped simulation of store-carry-forward routing.

Each tick: advance positions, detect contacts (first-hello encounter,
missed-hello departure), update contact windows, exchange hellos and
maintain the per-node social views, run the forwarding protocol over every
in-range pair in ascending pair order, then expire TTLs.  The run ends when
every generated message has been delivered or has no live copy anywhere.

Link weights for all node pairs are evaluated every tick through a
vectorized cache of each window's gap decomposition; the cache shares its
arithmetic with :meth:`dtnsim.contacts.ContactWindow.link_weight`, so both
paths produce bit-identical values (the ``validate`` config flag makes the
engine assert exactly that, and disables the incremental maintain
scheduling in favour of maintaining every node every hello tick).
"""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass, field, replace
from typing import IO, Sequence

import numpy as np

from dtnsim.contacts import MAX_WEIGHT, ContactWindow
from dtnsim.graph import NodeId
from dtnsim.mobility import Arena, Trace, WaypointParams, generate_trace, load_trace
from dtnsim.routing import (
    Action,
    Buffer,
    ForwardAction,
    Message,
    Protocol,
    RelayContext,
    decide,
)
from dtnsim.social import HelloPayload, SocialNetworkView

_MESSAGE_STREAM_SALT = 0x6D5A


class TraceExhaustedError(RuntimeError):
    """The trace ended while messages were still undecided."""


class ContactEventKind(enum.Enum):
    ENCOUNTER = "encounter"
    DEPART = "depart"


@dataclass(frozen=True)
class ContactEvent:
    kind: ContactEventKind
    pair: tuple[NodeId, NodeId]
    time: float


@dataclass
class SimConfig:
    node_count: int = 25
    arena_width: float = 1000.0
    arena_height: float = 1500.0
    speed: float = 1.0
    pause: float = 0.0
    comm_range: float = 3.0
    window_size: float = 600.0
    threshold: float = 0.01
    ttl: float = 300.0
    message_count: int = 1000
    generation_span: float = 1000.0
    hello_period: float = 1.0
    missed_hello_limit: int = 3
    tick: float = 1.0
    protocol: Protocol = Protocol.EPIDEMIC
    seed: int = 1
    trace_path: str | None = None
    validate: bool = False

    def check(self) -> None:
        """Raise ValueError naming the first bad field."""
        positive = [
            ("node_count", self.node_count),
            ("arena_width", self.arena_width),
            ("arena_height", self.arena_height),
            ("speed", self.speed),
            ("comm_range", self.comm_range),
            ("window_size", self.window_size),
            ("ttl", self.ttl),
            ("message_count", self.message_count),
            ("generation_span", self.generation_span),
            ("hello_period", self.hello_period),
            ("missed_hello_limit", self.missed_hello_limit),
            ("tick", self.tick),
        ]
        for name, value in positive:
            if value <= 0:
                raise ValueError(f"{name} must be positive (got {value})")
        if self.node_count < 2:
            raise ValueError("node_count must be at least 2")
        if self.pause < 0:
            raise ValueError("pause must be non-negative")
        if self.threshold < 0:
            raise ValueError("threshold must be non-negative")
        ratio = self.hello_period / self.tick
        if abs(ratio - round(ratio)) > 1e-9:
            raise ValueError("hello_period must be a multiple of tick")
        if self.window_size <= self.missed_hello_limit * self.tick:
            raise ValueError(
                "window_size must exceed missed_hello_limit * tick "
                "(departures are stamped at the first missed hello)"
            )


@dataclass(frozen=True)
class MetricsReport:
    generated: int
    delivered: int
    total_forwards: int
    delivery_ratio: float
    delivery_cost: float
    delivery_efficiency: float
    #: False when delivery_cost is zero and the efficiency ratio is undefined
    efficiency_defined: bool


@dataclass(frozen=True)
class ReplicateReport:
    """Arithmetic means over independent runs, plus the per-run reports."""

    runs: tuple[MetricsReport, ...]
    delivery_ratio: float
    delivery_cost: float
    delivery_efficiency: float
    efficiency_defined: bool


class ContactTracker:
    """Pairwise encounter/departure state machine over position snapshots.

    A pair enters contact at the first tick within range (the first hello)
    and leaves it after ``missed_hello_limit`` consecutive ticks out of
    range, with the departure stamped at the first missed tick.
    """

    def __init__(
        self, node_count: int, comm_range: float, missed_hello_limit: int, tick: float
    ) -> None:
        self.n = node_count
        self.range_sq = comm_range * comm_range
        self.limit = missed_hello_limit
        self.tick = tick
        self.in_contact = np.zeros((node_count, node_count), dtype=bool)
        self.miss = np.zeros((node_count, node_count), dtype=np.int64)
        self.first_miss = np.zeros((node_count, node_count))
        self._upper = np.triu(np.ones((node_count, node_count), dtype=bool), k=1)

    def update(self, coords: np.ndarray, now: float):
        """Returns (events, in_range matrix) for this tick."""
        diff = coords[:, None, :] - coords[None, :, :]
        dist_sq = (diff * diff).sum(axis=2)
        in_range = dist_sq <= self.range_sq
        np.fill_diagonal(in_range, False)

        events: list[ContactEvent] = []

        missing = self.in_contact & ~in_range
        if missing.any():
            fresh_miss = missing & (self.miss == 0)
            self.first_miss[fresh_miss] = now
            self.miss[missing] += 1
            self.miss[self.in_contact & in_range] = 0
            departed = missing & (self.miss >= self.limit)
            if departed.any():
                for u, v in np.argwhere(departed & self._upper):
                    events.append(
                        ContactEvent(
                            ContactEventKind.DEPART,
                            (int(u), int(v)),
                            float(self.first_miss[u, v]),
                        )
                    )
                self.in_contact[departed] = False
                self.miss[departed] = 0
        elif self.in_contact.any():
            self.miss[self.in_contact & in_range] = 0

        encountered = in_range & ~self.in_contact
        if encountered.any():
            for u, v in np.argwhere(encountered & self._upper):
                events.append(
                    ContactEvent(ContactEventKind.ENCOUNTER, (int(u), int(v)), now)
                )
            self.in_contact[encountered] = True

        return events, in_range


def schedule_messages(config: SimConfig, seed: int | None = None) -> list[Message]:
    """The run's message workload, fully determined by the seed.

    Creation times are drawn on the tick grid, uniform over
    [window_size, window_size + generation_span) so the contact windows are
    warm before traffic starts.  Sources are uniform; destinations uniform
    over the other nodes.
    """
    config.check()
    rng = np.random.Generator(
        np.random.PCG64(
            np.random.SeedSequence([seed if seed is not None else config.seed, _MESSAGE_STREAM_SALT])
        )
    )
    n = config.node_count
    slots = max(1, int(round(config.generation_span / config.tick)))
    messages = []
    for mid in range(config.message_count):
        created = config.window_size + float(rng.integers(0, slots)) * config.tick
        src = int(rng.integers(0, n))
        dst = (src + 1 + int(rng.integers(0, n - 1))) % n
        messages.append(
            Message(id=mid, src=src, dst=dst, created_at=created, ttl=config.ttl)
        )
    return messages


class _Node:
    __slots__ = ("id", "view", "windows", "buffer")

    def __init__(self, node_id: NodeId) -> None:
        self.id = node_id
        self.view = SocialNetworkView(node_id)
        self.windows: dict[NodeId, ContactWindow] = {}
        self.buffer = Buffer()


class _WeightRow:
    """Read-only mapping view over one row of the weight matrix."""

    __slots__ = ("_row",)

    def __init__(self, row: np.ndarray) -> None:
        self._row = row

    def get(self, key: NodeId, default: float = 0.0) -> float:
        if 0 <= key < len(self._row):
            return float(self._row[key])
        return default


class Simulation:
    """One seeded run.  Build it, call :meth:`run` once."""

    def __init__(
        self,
        config: SimConfig,
        trace: Trace | None = None,
        messages: Sequence[Message] | None = None,
        event_log: str | IO[str] | None = None,
    ) -> None:
        config.check()
        self.cfg = config
        self.trace = trace if trace is not None else self._default_trace()
        if self.trace.node_count != config.node_count:
            raise ValueError(
                f"trace holds {self.trace.node_count} nodes, config wants "
                f"{config.node_count}"
            )
        if messages is None:
            messages = schedule_messages(config)
        self.messages = sorted(messages, key=lambda m: (m.created_at, m.id))
        self.nodes = [_Node(i) for i in range(config.node_count)]
        self.tracker = ContactTracker(
            config.node_count, config.comm_range, config.missed_hello_limit, config.tick
        )

        n = config.node_count
        self._fs = np.zeros((n, n))
        self._le = np.zeros((n, n))
        self._mid = np.zeros((n, n))
        self._open = np.zeros((n, n), dtype=bool)
        self._empty = np.zeros((n, n), dtype=bool)
        self._haswin = np.zeros((n, n), dtype=bool)
        self._refresh_at = np.full((n, n), np.inf)
        self._next_refresh = float("inf")
        self._upper = np.triu(np.ones((n, n), dtype=bool), k=1)
        self.weights = np.zeros((n, n))
        self.friends = np.zeros((n, n), dtype=bool)
        self._prev_friends = np.zeros((n, n), dtype=bool)
        self._dirty = np.zeros(n, dtype=bool)

        self.delivered: set[int] = set()
        self.delivered_to: dict[NodeId, set[int]] = {i: set() for i in range(n)}
        self.holders: dict[int, set[NodeId]] = {}
        self.total_forwards = 0
        self._resolved: set[int] = set()
        self._unresolved = len(self.messages)
        self._pending = deque(self.messages)
        self._expiries = deque(
            sorted(
                ((m.created_at + m.ttl + config.tick, m.id) for m in self.messages),
                key=lambda pair: pair,
            )
        )
        self.contact_log: list[ContactEvent] = []
        self.now = 0.0

        self._log_fh: IO[str] | None = None
        self._own_log = False
        if event_log is not None:
            if isinstance(event_log, str):
                self._log_fh = open(event_log, "w", encoding="ascii")
                self._own_log = True
            else:
                self._log_fh = event_log
            self._log_fh.write("time,event,msg_id,from,to\n")

    def _default_trace(self) -> Trace:
        cfg = self.cfg
        if cfg.trace_path:
            return load_trace(cfg.trace_path)
        duration = (
            cfg.window_size + cfg.generation_span + cfg.ttl + 2 * cfg.tick
        )
        params = WaypointParams(
            arena=Arena(cfg.arena_width, cfg.arena_height),
            speed_min=cfg.speed,
            speed_max=cfg.speed,
            pause=cfg.pause,
            seed=cfg.seed,
        )
        return generate_trace(params, cfg.node_count, duration, cfg.tick)

    # -- logging ---------------------------------------------------------------

    def _log(self, now: float, kind: str, msg_id: int, frm: int, to: int) -> None:
        if self._log_fh is not None:
            self._log_fh.write(f"{now!r},{kind},{msg_id},{frm},{to}\n")

    # -- weight cache ------------------------------------------------------------

    def _refresh_pair(self, i: NodeId, j: NodeId, now: float) -> None:
        win = self.nodes[i].windows[j]
        win.slide(now)
        state = win.weight_state(now)
        self._fs[i, j] = state.first_start
        self._le[i, j] = state.last_end
        self._mid[i, j] = state.mid_sum
        self._open[i, j] = state.open
        self._empty[i, j] = state.empty
        self._refresh_at[i, j] = state.next_refresh
        self._haswin[i, j] = True
        if state.next_refresh < self._next_refresh:
            self._next_refresh = state.next_refresh

    def _compute_weights(self, now: float) -> None:
        w = self.cfg.window_size
        w0 = now - w
        lead = np.maximum(self._fs - w0, 0.0)
        lead = np.where(self._empty, w, lead)
        trail = np.where(self._open | self._empty, 0.0, now - self._le)
        integral = (0.5 * lead * lead + self._mid) + 0.5 * trail * trail
        weights = np.full_like(integral, MAX_WEIGHT)
        np.divide(w, integral, out=weights, where=integral > 0.0)
        weights[~self._haswin] = 0.0
        self.weights = weights
        self.friends = weights > self.cfg.threshold
        if (self.friends != self._prev_friends).any():
            self._dirty |= (self.friends != self._prev_friends).any(axis=1)
        self._prev_friends = self.friends

    # -- tick phases -----------------------------------------------------------

    def _apply_contact_events(self, events: list[ContactEvent], now: float) -> None:
        for ev in events:
            u, v = ev.pair
            for a, b in ((u, v), (v, u)):
                node = self.nodes[a]
                win = node.windows.get(b)
                if win is None:
                    win = node.windows[b] = ContactWindow(b, self.cfg.window_size)
                if ev.kind is ContactEventKind.ENCOUNTER:
                    win.record_encounter(ev.time)
                else:
                    win.record_departure(ev.time)
                self._refresh_pair(a, b, now)
                # a newly tracked peer changes the maintain iteration set
                # even without a threshold flip
                self._dirty[a] = True
        if self.cfg.validate:
            self.contact_log.extend(events)

    def _due_refreshes(self, now: float) -> None:
        if now <= self._next_refresh:
            return
        for i, j in np.argwhere(self._refresh_at < now):
            self._refresh_pair(int(i), int(j), now)
        self._next_refresh = float(self._refresh_at.min())

    def _friend_weights(self, i: NodeId) -> dict[NodeId, float]:
        return {
            int(k): float(self.weights[i, k]) for k in np.nonzero(self.friends[i])[0]
        }

    def _hello_and_maintain(
        self, pairs: list[tuple[NodeId, NodeId]], now: float
    ) -> None:
        payloads: dict[NodeId, HelloPayload] = {}

        def payload_for(x: NodeId) -> HelloPayload:
            if x not in payloads:
                payloads[x] = self.nodes[x].view.make_hello(
                    now, link_weights=self._friend_weights(x)
                )
            return payloads[x]

        for u, v in pairs:
            self.nodes[v].view.apply_hello(payload_for(u), now)
            self.nodes[u].view.apply_hello(payload_for(v), now)
            self._dirty[u] = True
            self._dirty[v] = True

        if not (self._dirty.any() or self.cfg.validate):
            return
        for i in range(self.cfg.node_count):
            if not (self._dirty[i] or self.cfg.validate):
                continue
            node = self.nodes[i]
            weights_row = {j: float(self.weights[i, j]) for j in node.windows}
            changed = node.view.maintain(
                now, threshold=self.cfg.threshold, weights=weights_row
            )
            self._dirty[i] = changed

    def _inject(self, now: float) -> None:
        while self._pending and self._pending[0].created_at <= now:
            m = self._pending.popleft()
            self.nodes[m.src].buffer.insert(m)
            self.holders[m.id] = {m.src}
            self._log(now, "GEN", m.id, m.src, m.dst)

    def _route(self, pairs: list[tuple[NodeId, NodeId]], now: float) -> None:
        cfg = self.cfg
        for u, v in pairs:
            for i, j in ((u, v), (v, u)):
                node = self.nodes[i]
                if not len(node.buffer):
                    continue
                cb, ceb = node.view.my_centrality()
                ctx = RelayContext(
                    node=i,
                    buffer=node.buffer,
                    own_weights=_WeightRow(self.weights[i]),
                    own_cb=cb,
                    own_ceb=ceb,
                    members=node.view.graph.vertices,
                    peer_weights=node.view.peer_weights,
                    threshold=cfg.threshold,
                )
                record = node.view.peer_centrality.get(j)
                peer_hello = HelloPayload(
                    sender=j,
                    neighbor_list=frozenset(),
                    sender_cb=record.cb if record else 0,
                    sender_ceb=record.ceb if record else 0,
                    link_weights=node.view.peer_weights.get(j, {}),
                )
                peer_has = self.nodes[j].buffer.ids() | self.delivered_to[j]
                actions = decide(cfg.protocol, ctx, j, peer_hello, peer_has, now)
                self._apply_actions(i, j, actions, now)

    def _apply_actions(
        self, i: NodeId, j: NodeId, actions: list[ForwardAction], now: float
    ) -> None:
        for act in actions:
            m = self.nodes[i].buffer.get(act.message_id)
            self.total_forwards += 1
            if act.action is Action.DELIVER:
                self._log(now, "DLV", m.id, i, j)
                self.delivered_to[j].add(m.id)
                if m.id not in self.delivered:
                    self.delivered.add(m.id)
                    self._resolve(m.id)
            else:
                self._log(now, "FWD", m.id, i, j)
                self.nodes[j].buffer.accept(m, j)
                self.holders[m.id].add(j)
                if act.action is Action.FORWARD_AND_DELETE:
                    self.nodes[i].buffer.remove(m.id)
                    self.holders[m.id].discard(i)

    def _resolve(self, message_id: int) -> None:
        if message_id not in self._resolved:
            self._resolved.add(message_id)
            self._unresolved -= 1

    def _expire(self, now: float) -> None:
        while self._expiries and self._expiries[0][0] <= now:
            _, mid = self._expiries.popleft()
            for holder in sorted(self.holders.get(mid, ())):
                self.nodes[holder].buffer.remove(mid)
                self._log(now, "EXP", mid, holder, -1)
            self.holders[mid] = set()
            if mid not in self.delivered:
                self._resolve(mid)

    def _validate_tick(self, now: float) -> None:
        for i, node in enumerate(self.nodes):
            for j, win in node.windows.items():
                scalar = win.link_weight(now)
                cached = float(self.weights[i, j])
                if scalar != cached:
                    raise AssertionError(
                        f"weight cache drift at t={now} pair ({i},{j}): "
                        f"{scalar!r} != {cached!r}"
                    )
            friends = {j for j in range(self.cfg.node_count) if self.friends[i, j]}
            view_friends = node.view.graph.neighbors(node.id)
            if friends != view_friends:
                raise AssertionError(
                    f"threshold consistency broken at t={now} for node {i}: "
                    f"{sorted(friends)} vs {sorted(view_friends)}"
                )

    # -- main loop -------------------------------------------------------------

    def run(self) -> MetricsReport:
        cfg = self.cfg
        hello_every = int(round(cfg.hello_period / cfg.tick))
        finished = False
        try:
            for idx in range(self.trace.tick_count):
                now = idx * cfg.tick
                self.now = now
                coords = self.trace.at(idx)
                events, in_range = self.tracker.update(coords, now)
                self._apply_contact_events(events, now)
                self._due_refreshes(now)
                self._compute_weights(now)
                if in_range.any():
                    pairs = [
                        (int(u), int(v))
                        for u, v in np.argwhere(in_range & self._upper)
                    ]
                else:
                    pairs = []
                if idx % hello_every == 0:
                    self._hello_and_maintain(pairs, now)
                    if cfg.validate:
                        self._validate_tick(now)
                self._inject(now)
                self._route(pairs, now)
                self._expire(now)
                if self._unresolved == 0:
                    finished = True
                    break
            if not finished and self._unresolved > 0:
                raise TraceExhaustedError(
                    f"trace ended with {self._unresolved} undecided messages"
                )
        finally:
            if self._log_fh is not None:
                self._log_fh.flush()
                if self._own_log:
                    self._log_fh.close()
        return self._metrics()

    def _metrics(self) -> MetricsReport:
        generated = len(self.messages)
        delivered = len(self.delivered)
        ratio = delivered / generated
        cost = self.total_forwards / generated
        defined = cost > 0
        efficiency = ratio / cost if defined else 0.0
        return MetricsReport(
            generated=generated,
            delivered=delivered,
            total_forwards=self.total_forwards,
            delivery_ratio=ratio,
            delivery_cost=cost,
            delivery_efficiency=efficiency,
            efficiency_defined=defined,
        )


def run(
    config: SimConfig,
    trace: Trace | None = None,
    messages: Sequence[Message] | None = None,
    event_log: str | IO[str] | None = None,
) -> MetricsReport:
    """Run one simulation to completion."""
    return Simulation(config, trace=trace, messages=messages, event_log=event_log).run()


def summarize(reports: Sequence[MetricsReport]) -> ReplicateReport:
    """Arithmetic means of the three metrics over per-run reports."""
    if not reports:
        raise ValueError("need at least one report")
    def mean(values):
        return sum(values) / len(values)
    return ReplicateReport(
        runs=tuple(reports),
        delivery_ratio=mean([r.delivery_ratio for r in reports]),
        delivery_cost=mean([r.delivery_cost for r in reports]),
        delivery_efficiency=mean([r.delivery_efficiency for r in reports]),
        efficiency_defined=all(r.efficiency_defined for r in reports),
    )


def replicate(config: SimConfig, runs: int) -> ReplicateReport:
    """Average ``runs`` independent runs seeded seed+0 .. seed+runs-1."""
    if runs < 1:
        raise ValueError("runs must be at least 1")
    return summarize([run(replace(config, seed=config.seed + k)) for k in range(runs)])
