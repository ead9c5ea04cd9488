"""Topology model, simple-path enumeration and path-set construction.

Routing treats links as unweighted: the metric is hop count. Capacities are
carried on links only for the simulator. Every ordering decision falls back
on the lexicographic order of switch-id sequences so results never depend on
dict or set iteration order.
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field
from ipaddress import IPv4Address
from typing import Iterable, Iterator, Optional, Sequence

log = logging.getLogger(__name__)

__all__ = [
    "Topology",
    "PathSet",
    "TopologyError",
    "UnknownSwitch",
    "NoPath",
    "TopologyParseError",
    "edge",
    "hop_len",
    "path_edges",
    "shortest_path",
    "all_simple_paths",
    "shared_edges",
    "compute_path_set",
    "next_path",
    "spanning_tree",
    "parse_topology",
    "load_topology",
    "format_topology",
    "DEFAULT_MAX_HOPS",
    "DEFAULT_MAX_PATHS",
]

DEFAULT_MAX_HOPS = 16
DEFAULT_MAX_PATHS = 64

Path = tuple  # tuple of switch ids


class TopologyError(ValueError):
    pass


class UnknownSwitch(KeyError):
    pass


class NoPath(RuntimeError):
    pass


class TopologyParseError(ValueError):
    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


def edge(u: str, v: str) -> tuple[str, str]:
    """Canonical undirected edge key."""
    return (u, v) if u <= v else (v, u)


@dataclass(frozen=True)
class Topology:
    """Immutable undirected switch graph with host attachment points.

    ``links`` maps a canonical ``edge(u, v)`` key to its capacity; ``hosts``
    maps host id to ``(switch id, ip)``.
    """

    switches: frozenset
    links: dict
    hosts: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "switches", frozenset(str(s) for s in self.switches))
        links = {}
        for (u, v), cap in self.links.items():
            u, v = str(u), str(v)
            if u == v:
                raise TopologyError(f"self-loop on switch {u}")
            for s in (u, v):
                if s not in self.switches:
                    raise TopologyError(f"link {u}-{v} references unknown switch {s}")
            key = edge(u, v)
            if key in links:
                raise TopologyError(f"duplicate link {u}-{v}")
            cap = float(cap)
            if not cap > 0:
                raise TopologyError(f"link {u}-{v} capacity must be positive, got {cap}")
            links[key] = cap
        object.__setattr__(self, "links", dict(sorted(links.items())))

        hosts = {}
        seen_ips = {}
        for hid, (sw, ip) in self.hosts.items():
            sw, ip = str(sw), IPv4Address(ip)
            if sw not in self.switches:
                raise TopologyError(f"host {hid} attaches to unknown switch {sw}")
            if ip in seen_ips:
                raise TopologyError(f"host {hid} reuses ip {ip} of host {seen_ips[ip]}")
            seen_ips[ip] = hid
            hosts[str(hid)] = (sw, ip)
        object.__setattr__(self, "hosts", dict(sorted(hosts.items())))

        adj: dict[str, list[str]] = {s: [] for s in self.switches}
        for u, v in links:
            adj[u].append(v)
            adj[v].append(u)
        object.__setattr__(self, "_adj", {s: tuple(sorted(n)) for s, n in adj.items()})
        object.__setattr__(self, "_by_ip", {ip: h for h, (_, ip) in hosts.items()})

        if not self.switches:
            raise TopologyError("topology has no switches")
        if len(_bfs_order(self, min(self.switches))) != len(self.switches):
            raise TopologyError("topology is not connected")

    def __eq__(self, other):
        if not isinstance(other, Topology):
            return NotImplemented
        return (self.switches, self.links, self.hosts) == (other.switches, other.links, other.hosts)

    def __hash__(self):
        return hash((self.switches, tuple(self.links.items()), tuple(self.hosts.items())))

    def neighbors(self, s: str) -> tuple[str, ...]:
        """Neighbors of ``s`` in ascending id order."""
        try:
            return self._adj[s]
        except KeyError:
            raise UnknownSwitch(s) from None

    def capacity(self, u: str, v: str) -> float:
        return self.links[edge(u, v)]

    def has_link(self, u: str, v: str) -> bool:
        return edge(u, v) in self.links

    def host_switch(self, host: str) -> str:
        return self.hosts[host][0]

    def host_ip(self, host: str) -> IPv4Address:
        return self.hosts[host][1]

    def host_by_ip(self, ip) -> Optional[str]:
        return self._by_ip.get(IPv4Address(ip))

    def ports(self, s: str) -> dict[int, tuple[str, str]]:
        """Port map of a switch: port -> ("switch" | "host", peer id).

        Ports are numbered from 1, neighbor switches first in id order, then
        attached hosts in id order.
        """
        peers = [("switch", n) for n in self.neighbors(s)]
        peers += [("host", h) for h, (sw, _) in self.hosts.items() if sw == s]
        return {i: p for i, p in enumerate(peers, start=1)}

    def port_to(self, s: str, kind: str, peer: str) -> int:
        for port, p in self.ports(s).items():
            if p == (kind, peer):
                return port
        raise KeyError(f"switch {s} has no port toward {kind} {peer}")

    def is_valid_path(self, path: Sequence[str]) -> bool:
        if not path or len(set(path)) != len(path):
            return False
        if any(s not in self.switches for s in path):
            return False
        return all(self.has_link(u, v) for u, v in zip(path, path[1:]))


def _bfs_order(g: Topology, root: str) -> list[str]:
    seen = {root}
    order = [root]
    queue = deque([root])
    while queue:
        u = queue.popleft()
        for v in g._adj[u]:
            if v not in seen:
                seen.add(v)
                order.append(v)
                queue.append(v)
    return order


def _require(g: Topology, *switches: str) -> None:
    for s in switches:
        if s not in g.switches:
            raise UnknownSwitch(s)


def hop_len(path: Sequence[str]) -> int:
    return len(path) - 1


def path_edges(path: Sequence[str]) -> set[tuple[str, str]]:
    return {edge(u, v) for u, v in zip(path, path[1:])}


def shortest_path(g: Topology, s1: str, s2: str) -> Path:
    """Minimum-hop path; ties go to the lexicographically smallest sequence."""
    _require(g, s1, s2)
    dist = {s2: 0}
    queue = deque([s2])
    while queue:
        u = queue.popleft()
        for v in g.neighbors(u):
            if v not in dist:
                dist[v] = dist[u] + 1
                queue.append(v)
    if s1 not in dist:
        raise NoPath(f"{s1} and {s2} are disconnected")
    # Greedy descent picking the smallest neighbor one hop closer.
    path = [s1]
    while path[-1] != s2:
        here = path[-1]
        path.append(next(v for v in g.neighbors(here) if dist.get(v) == dist[here] - 1))
    return tuple(path)


def iter_simple_paths(g: Topology, s1: str, s2: str, max_hops: int) -> Iterator[Path]:
    """Depth-first enumeration; visiting neighbors in id order yields paths
    in lexicographic order."""
    if s1 == s2 or max_hops < 1:
        return
    stack = [iter(g.neighbors(s1))]
    path = [s1]
    on_path = {s1}
    while stack:
        nxt = next(stack[-1], None)
        if nxt is None:
            stack.pop()
            on_path.discard(path.pop())
            continue
        if nxt in on_path:
            continue
        if nxt == s2:
            yield tuple(path) + (s2,)
            continue
        if len(path) < max_hops:
            path.append(nxt)
            on_path.add(nxt)
            stack.append(iter(g.neighbors(nxt)))


def all_simple_paths(g: Topology, s1: str, s2: str, max_hops: int = DEFAULT_MAX_HOPS) -> list[Path]:
    _require(g, s1, s2)
    if s1 == s2:
        raise ValueError("all_simple_paths needs distinct endpoints")
    return list(iter_simple_paths(g, s1, s2, max_hops))


def shared_edges(p: Sequence[str], q: Sequence[str]) -> int:
    """Number of undirected edges common to both paths."""
    return len(path_edges(p) & path_edges(q))


@dataclass
class PathSet:
    """Cyclic sequence of paths for one direction of one session.

    The cursor belongs to a single controller event loop; do not share a
    PathSet between threads.
    """

    paths: tuple
    cursor: int = 0

    def __post_init__(self):
        self.paths = tuple(tuple(p) for p in self.paths)
        if not self.paths:
            raise ValueError("PathSet needs at least one path")
        self.cursor %= len(self.paths)

    def __len__(self) -> int:
        return len(self.paths)

    @property
    def primary(self) -> Path:
        return self.paths[0]

    @property
    def src(self) -> str:
        return self.paths[0][0]

    @property
    def dst(self) -> str:
        return self.paths[0][-1]

    def next(self) -> Path:
        path = self.paths[self.cursor]
        self.cursor = (self.cursor + 1) % len(self.paths)
        return path

    def last(self) -> Path:
        """Path handed out by the most recent ``next()`` call."""
        return self.paths[(self.cursor - 1) % len(self.paths)]


def next_path(ps: PathSet) -> Path:
    return ps.next()


def path_set_key(path: Sequence[str], primary: Sequence[str]) -> tuple:
    return (shared_edges(path, primary), hop_len(path), tuple(path))


def compute_path_set(
    g: Topology,
    s1: str,
    s2: str,
    max_hops: int = DEFAULT_MAX_HOPS,
    max_paths: Optional[int] = DEFAULT_MAX_PATHS,
) -> PathSet:
    """Primary shortest path followed by every other simple path, ordered by
    edges shared with the primary, then hop count, then switch sequence.

    ``max_paths`` caps the total set size by dropping the tail of the sorted
    alternates; ``None`` keeps everything within ``max_hops``.
    """
    _require(g, s1, s2)
    if s1 == s2:
        raise ValueError("compute_path_set needs distinct endpoints")
    primary = shortest_path(g, s1, s2)
    alternates = [p for p in iter_simple_paths(g, s1, s2, max_hops) if p != primary]
    alternates.sort(key=lambda p: path_set_key(p, primary))
    paths = [primary] + alternates
    if max_paths is not None and len(paths) > max_paths:
        log.debug("path set %s->%s truncated from %d to %d", s1, s2, len(paths), max_paths)
        paths = paths[:max_paths]
    return PathSet(tuple(paths))


def spanning_tree(g: Topology) -> Topology:
    """Breadth-first tree rooted at the smallest switch id."""
    root = min(g.switches)
    parent = {root: None}
    queue = deque([root])
    kept = {}
    while queue:
        u = queue.popleft()
        for v in g.neighbors(u):
            if v not in parent:
                parent[v] = u
                kept[edge(u, v)] = g.links[edge(u, v)]
                queue.append(v)
    return Topology(g.switches, kept, dict(g.hosts))


# -- topology file grammar -------------------------------------------------
#
#   format=1
#   switch <id>
#   link <id1> <id2> <capacity>
#   host <id> <switch> <ip>
#
# Blank lines and '#' comments are ignored. Switches must be declared before
# links and hosts reference them.

FORMAT_VERSION = "1"


def _content_lines(lines: Iterable[str]) -> Iterator[tuple[int, list[str]]]:
    for lineno, raw in enumerate(lines, start=1):
        text = raw.split("#", 1)[0].strip()
        if text:
            yield lineno, text.split()


def check_format_header(lineno: int, words: list[str]) -> None:
    if len(words) != 1 or not words[0].startswith("format="):
        raise TopologyParseError(lineno, "expected 'format=1' header line")
    version = words[0].split("=", 1)[1]
    if version != FORMAT_VERSION:
        raise TopologyParseError(lineno, f"unsupported format version {version!r}")


def parse_topology(text: str) -> Topology:
    switches: list[str] = []
    links: dict = {}
    hosts: dict = {}
    header_seen = False
    for lineno, words in _content_lines(text.splitlines()):
        if not header_seen:
            check_format_header(lineno, words)
            header_seen = True
            continue
        kind, args = words[0], words[1:]
        try:
            if kind == "switch":
                if len(args) != 1:
                    raise ValueError("usage: switch <id>")
                if args[0] in switches:
                    raise ValueError(f"switch {args[0]} declared twice")
                switches.append(args[0])
            elif kind == "link":
                if len(args) != 3:
                    raise ValueError("usage: link <id1> <id2> <capacity>")
                u, v, cap = args
                for s in (u, v):
                    if s not in switches:
                        raise ValueError(f"unknown switch {s}")
                if u == v:
                    raise ValueError(f"self-loop on switch {u}")
                if edge(u, v) in links:
                    raise ValueError(f"duplicate link {u}-{v}")
                capacity = float(cap)
                if not capacity > 0:
                    raise ValueError(f"capacity must be positive, got {cap}")
                links[edge(u, v)] = capacity
            elif kind == "host":
                if len(args) != 3:
                    raise ValueError("usage: host <id> <switch> <ip>")
                hid, sw, ip = args
                if sw not in switches:
                    raise ValueError(f"unknown switch {sw}")
                if hid in hosts:
                    raise ValueError(f"host {hid} declared twice")
                hosts[hid] = (sw, IPv4Address(ip))
            else:
                raise ValueError(f"unknown directive {kind!r}")
        except ValueError as exc:
            raise TopologyParseError(lineno, str(exc)) from None
    if not header_seen:
        raise TopologyParseError(1, "empty topology file")
    try:
        return Topology(frozenset(switches), links, hosts)
    except TopologyError as exc:
        raise TopologyParseError(lineno, str(exc)) from None


def load_topology(path) -> Topology:
    with open(path, encoding="utf-8") as fh:
        return parse_topology(fh.read())


def format_topology(g: Topology) -> str:
    def cap(c: float) -> str:
        return f"{c:g}"

    lines = ["format=1"]
    lines += [f"switch {s}" for s in sorted(g.switches)]
    lines += [f"link {u} {v} {cap(c)}" for (u, v), c in g.links.items()]
    lines += [f"host {h} {sw} {ip}" for h, (sw, ip) in g.hosts.items()]
    return "\n".join(lines) + "\n"
