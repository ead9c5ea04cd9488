"""Reactive multipath controller and the two single-path baselines.

The multipath controller groups subflows into sessions through their
handshake keys and hands each new subflow the next path of the session's
per-direction path set. Everything that is not a recognised handshake step
is routed on the shortest path.

Session state lives in three tables:

``pending_capable``
    endpoints of an unanswered MP_CAPABLE SYN -> (initiator key, A->B set)
``pending_join``
    endpoints of an unanswered MP_JOIN SYN -> (joiner's key, set used)
``mptcp_connections``
    key -> (peer key, path set toward the key's owner)
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

from .netgraph import (
    DEFAULT_MAX_HOPS,
    DEFAULT_MAX_PATHS,
    PathSet,
    Topology,
    compute_path_set,
    shortest_path,
    spanning_tree,
)
from .wire import EndpointPair, MpCapable, MpJoin, Packet, PacketClass, classify

log = logging.getLogger(__name__)

__all__ = [
    "ControllerError",
    "UnknownHost",
    "UnknownSession",
    "HostNotOnPath",
    "PacketInEvent",
    "FlowRule",
    "Decision",
    "SessionTables",
    "handle_packet_in",
    "install_path",
    "baseline_spanning_tree",
    "baseline_shortest_path",
    "SmocController",
    "SpanningTreeController",
    "ShortestPathController",
    "make_controller",
    "audit_line",
    "CONTROLLERS",
]


class ControllerError(Exception):
    pass


class UnknownHost(ControllerError):
    pass


class UnknownSession(ControllerError):
    """MP_JOIN naming a key with no established session. Never raised out of
    ``handle_packet_in``; the flow falls back to the shortest path."""


class HostNotOnPath(ControllerError):
    pass


@dataclass(frozen=True)
class PacketInEvent:
    switch: str
    in_port: int
    packet: Packet
    time: float = 0.0


@dataclass(frozen=True)
class FlowRule:
    switch: str
    match: EndpointPair
    out_port: int


@dataclass(frozen=True)
class Decision:
    cls: PacketClass
    route: tuple
    rules: tuple
    table_delta: tuple = ()
    note: str = ""


@dataclass
class PendingEntry:
    key: int
    path_set: PathSet
    created: float = 0.0


@dataclass
class Connection:
    peer_key: int
    path_set: PathSet


@dataclass
class SessionTables:
    pending_capable: dict = field(default_factory=dict)
    pending_join: dict = field(default_factory=dict)
    mptcp_connections: dict = field(default_factory=dict)

    def expire(self, now: float, ttl: Optional[float]) -> list[str]:
        """Drop pending entries older than ``ttl``. Established connections
        are never evicted here."""
        if ttl is None:
            return []
        delta = []
        for name in ("pending_capable", "pending_join"):
            table = getattr(self, name)
            for ep in [ep for ep, e in table.items() if now - e.created > ttl]:
                del table[ep]
                delta.append(f"{name}-{ep}")
        return delta

    def snapshot(self) -> str:
        """Canonical text dump, used for golden-trace comparison."""
        lines = []
        for ep, e in sorted(self.pending_capable.items()):
            lines.append(f"pending_capable {ep} key={_hex(e.key)} {_ps(e.path_set)}")
        for ep, e in sorted(self.pending_join.items()):
            lines.append(f"pending_join {ep} key={_hex(e.key)} {_ps(e.path_set)}")
        for k, c in sorted(self.mptcp_connections.items()):
            lines.append(f"mptcp_connections {_hex(k)} peer={_hex(c.peer_key)} {_ps(c.path_set)}")
        return "\n".join(lines)


def _hex(key: int) -> str:
    return f"{key:016x}"


def _route(path) -> str:
    return ",".join(path)


def _ps(ps: PathSet) -> str:
    return f"cursor={ps.cursor} paths={'|'.join(_route(p) for p in ps.paths)}"


def _attachment(topo: Topology, ip) -> tuple[str, str]:
    host = topo.host_by_ip(ip)
    if host is None:
        raise UnknownHost(f"no host with ip {ip}")
    return host, topo.host_switch(host)


def _path_set(topo, s1, s2, max_hops, max_paths) -> PathSet:
    if s1 == s2:
        return PathSet(((s1,),))
    return compute_path_set(topo, s1, s2, max_hops=max_hops, max_paths=max_paths)


def install_path(topo: Topology, route, match: EndpointPair, src_host: str, dst_host: str) -> tuple:
    """One exact-match rule per switch of ``route``: toward the next hop, or
    toward ``dst_host`` on the last switch."""
    route = tuple(route)
    if not topo.is_valid_path(route):
        raise ValueError(f"route {route} is not a simple path of the topology")
    if topo.host_switch(dst_host) != route[-1]:
        raise HostNotOnPath(f"host {dst_host} is not attached to {route[-1]}")
    if topo.host_switch(src_host) != route[0]:
        raise HostNotOnPath(f"host {src_host} is not attached to {route[0]}")
    rules = []
    for here, nxt in zip(route, route[1:]):
        rules.append(FlowRule(here, match, topo.port_to(here, "switch", nxt)))
    rules.append(FlowRule(route[-1], match, topo.port_to(route[-1], "host", dst_host)))
    return tuple(rules)


def handle_packet_in(
    tables: SessionTables,
    topo: Topology,
    ev: PacketInEvent,
    max_hops: int = DEFAULT_MAX_HOPS,
    max_paths: Optional[int] = DEFAULT_MAX_PATHS,
) -> Decision:
    p = ev.packet
    ep = p.endpoints
    src_host, s_src = _attachment(topo, ep.src_ip)
    dst_host, s_dst = _attachment(topo, ep.dst_ip)
    cls = classify(p)
    delta: list[str] = []

    def path_set(a, b):
        return _path_set(topo, a, b, max_hops, max_paths)

    def decide(route, note):
        rules = install_path(topo, route, ep, src_host, dst_host)
        return Decision(cls, tuple(route), rules, tuple(delta), note)

    def fallback(note):
        return decide(shortest_path(topo, s_src, s_dst), note)

    def serves(ps: PathSet) -> bool:
        return ps.src == s_src and ps.dst == s_dst

    if cls is PacketClass.MpCapableSyn:
        key = p.mptcp.key
        entry = tables.pending_capable.get(ep)
        if entry is not None and entry.key == key:
            return decide(entry.path_set.last(), "retransmit")
        if key in tables.mptcp_connections or any(
            e.key == key for other, e in tables.pending_capable.items() if other != ep
        ):
            log.error("key collision on MP_CAPABLE %s key=%s", ep, _hex(key))
            return fallback("fallback:key-collision")
        if ep in tables.pending_join:
            return fallback("fallback:endpoint-conflict")
        ab = path_set(s_src, s_dst)
        tables.pending_capable[ep] = PendingEntry(key, ab, ev.time)
        delta.append(f"pending_capable{'~' if entry else '+'}{ep}")
        return decide(ab.next(), "new")

    if cls is PacketClass.MpCapableSynAck:
        entry = tables.pending_capable.get(ep.reversed())
        if entry is None:
            return fallback("fallback:lookup-miss")
        init_key, resp_key = entry.key, p.mptcp.key
        if resp_key == init_key or resp_key in tables.mptcp_connections or init_key in tables.mptcp_connections:
            log.error("key collision on MP_CAPABLE reply %s key=%s", ep, _hex(resp_key))
            return fallback("fallback:key-collision")
        ba = path_set(s_src, s_dst)
        tables.mptcp_connections[init_key] = Connection(resp_key, ba)
        tables.mptcp_connections[resp_key] = Connection(init_key, entry.path_set)
        del tables.pending_capable[ep.reversed()]
        delta += [
            f"mptcp_connections+{_hex(init_key)}",
            f"mptcp_connections+{_hex(resp_key)}",
            f"pending_capable-{ep.reversed()}",
        ]
        return decide(ba.next(), "established")

    if cls is PacketClass.MpJoinSyn:
        conn = tables.mptcp_connections.get(p.mptcp.peer_key)
        if conn is None:
            log.warning("%s", UnknownSession(f"MP_JOIN {ep} names unknown key {_hex(p.mptcp.peer_key)}"))
            return fallback("fallback:unknown-session")
        if not serves(conn.path_set) or ep in tables.pending_capable:
            return fallback("fallback:endpoint-conflict")
        known = ep in tables.pending_join
        tables.pending_join[ep] = PendingEntry(conn.peer_key, conn.path_set, ev.time)
        delta.append(f"pending_join{'~' if known else '+'}{ep}")
        return decide(conn.path_set.next(), "join")

    if cls is PacketClass.MpJoinSynAck:
        entry = tables.pending_join.get(ep.reversed())
        if entry is None:
            return fallback("fallback:lookup-miss")
        conn = tables.mptcp_connections.get(entry.key)
        del tables.pending_join[ep.reversed()]
        delta.append(f"pending_join-{ep.reversed()}")
        if conn is None or not serves(conn.path_set):
            return fallback("fallback:lookup-miss")
        return decide(conn.path_set.next(), "join-reply")

    return fallback("plain" if cls is PacketClass.PlainTcp else "non-handshake")


def _baseline(topo: Topology, routing_graph: Topology, ev: PacketInEvent, note: str) -> Decision:
    ep = ev.packet.endpoints
    src_host, s_src = _attachment(topo, ep.src_ip)
    dst_host, s_dst = _attachment(topo, ep.dst_ip)
    route = shortest_path(routing_graph, s_src, s_dst)
    return Decision(classify(ev.packet), route, install_path(topo, route, ep, src_host, dst_host), (), note)


def baseline_spanning_tree(topo: Topology, ev: PacketInEvent, tree: Optional[Topology] = None) -> Decision:
    """Route along the unique path of the breadth-first spanning tree."""
    return _baseline(topo, tree if tree is not None else spanning_tree(topo), ev, "spanning-tree")


def baseline_shortest_path(topo: Topology, ev: PacketInEvent) -> Decision:
    return _baseline(topo, topo, ev, "shortest-path")


def audit_line(ev: PacketInEvent, d: Decision) -> str:
    """One ``key=value`` record per decision; values never contain spaces."""
    return (
        f"class={d.cls} switch={ev.switch} in_port={ev.in_port} flow={ev.packet.endpoints} "
        f"route={_route(d.route)} rules={len(d.rules)} note={d.note or '-'} "
        f"delta={';'.join(d.table_delta) or '-'}"
    )


class _Controller:
    name = ""

    def __init__(self, topo: Topology):
        self.topo = topo
        self.audit_log: list[str] = []

    def decide(self, ev: PacketInEvent) -> Decision:
        raise NotImplementedError

    def handle(self, ev: PacketInEvent) -> Decision:
        decision = self.decide(ev)
        line = audit_line(ev, decision)
        self.audit_log.append(line)
        log.debug("%s", line)
        return decision


class SmocController(_Controller):
    """Multipath controller. Confine each instance to one event loop."""

    name = "smoc"

    def __init__(
        self,
        topo: Topology,
        pending_ttl: Optional[float] = None,
        max_hops: int = DEFAULT_MAX_HOPS,
        max_paths: Optional[int] = DEFAULT_MAX_PATHS,
    ):
        super().__init__(topo)
        self.tables = SessionTables()
        self.pending_ttl = pending_ttl
        self.max_hops = max_hops
        self.max_paths = max_paths

    def decide(self, ev):
        expired = self.tables.expire(ev.time, self.pending_ttl)
        d = handle_packet_in(self.tables, self.topo, ev, self.max_hops, self.max_paths)
        if expired:
            d = Decision(d.cls, d.route, d.rules, tuple(expired) + d.table_delta, d.note)
        return d


class SpanningTreeController(_Controller):
    name = "stp"

    def __init__(self, topo: Topology):
        super().__init__(topo)
        self.tree = spanning_tree(topo)

    def decide(self, ev):
        return baseline_spanning_tree(self.topo, ev, self.tree)


class ShortestPathController(_Controller):
    name = "spf"

    def decide(self, ev):
        return baseline_shortest_path(self.topo, ev)


CONTROLLERS = {
    "smoc": SmocController,
    "stp": SpanningTreeController,
    "spanning-tree": SpanningTreeController,
    "spf": ShortestPathController,
    "shortest-path": ShortestPathController,
}


def make_controller(name: str, topo: Topology, **kwargs) -> _Controller:
    try:
        cls = CONTROLLERS[name]
    except KeyError:
        raise ValueError(f"unknown controller {name!r}; choose from {sorted(CONTROLLERS)}") from None
    return cls(topo, **kwargs)
