"""Discrete-time fluid simulation of a switch fabric driven by a controller.

Each step: activate rules whose installation delay has elapsed, let sessions
that start now emit their handshakes (a table miss raises a packet-in and the
controller's rules are scheduled for ``now + install_delay``), mark subflows
whose forward and reverse paths are fully installed as established, share
link capacity max-min fairly among established subflows and record rates.

Data flows from initiator to listener only. Handshake packets carry no
bandwidth. Links are undirected: both directions draw on one capacity.
"""

from __future__ import annotations

import heapq
import io
import logging
import math
import re
from collections import Counter
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from .controller import ControllerError, FlowRule, PacketInEvent, make_controller
from .netgraph import NoPath, Topology, edge
from .wire import EndpointPair, MpCapable, MpJoin, Packet, TcpFlag

log = logging.getLogger(__name__)

__all__ = [
    "ConfigError",
    "SimulationError",
    "SimConfig",
    "Session",
    "Subflow",
    "SubflowState",
    "SwitchState",
    "Forward",
    "Miss",
    "MISS",
    "deliver",
    "maxmin_allocate",
    "ThroughputSeries",
    "SessionSummary",
    "run",
]

EPS = 1e-9
LISTEN_PORT = 5001
SRC_PORT_BASE = 40000
MAX_SUBFLOWS = 100


class ConfigError(ValueError):
    pass


class SimulationError(RuntimeError):
    pass


@dataclass(frozen=True)
class SimConfig:
    step: float = 0.5
    duration: float = 10.0
    install_delay: float = 0.0
    seed: int = 0

    def validate(self) -> None:
        if not self.step > 0:
            raise ConfigError(f"step must be positive, got {self.step}")
        if not self.duration >= 0:
            raise ConfigError(f"duration must be non-negative, got {self.duration}")
        if not self.install_delay >= 0:
            raise ConfigError(f"install_delay must be non-negative, got {self.install_delay}")

    def times(self) -> np.ndarray:
        n = int(math.floor(self.duration / self.step + EPS))
        return np.arange(n + 1) * self.step


@dataclass(frozen=True)
class Session:
    sid: str
    initiator: str
    listener: str
    subflows: int = 4
    start: float = 0.0
    keys: Optional[tuple] = None


class SubflowState:
    HANDSHAKING = "handshaking"
    ESTABLISHED = "established"
    BLOCKED = "blocked"


@dataclass
class Subflow:
    endpoints: EndpointPair
    session: str
    index: int
    route: Optional[tuple] = None
    state: str = SubflowState.HANDSHAKING
    established_at: Optional[float] = None


@dataclass(frozen=True)
class Forward:
    port: int


@dataclass(frozen=True)
class Miss:
    pass


MISS = Miss()


@dataclass
class SwitchState:
    switch: str
    ports: dict
    flow_table: dict = field(default_factory=dict)

    def install(self, rule: FlowRule) -> None:
        if rule.switch != self.switch:
            raise ValueError(f"rule for {rule.switch} installed on {self.switch}")
        if rule.out_port not in self.ports:
            raise ValueError(f"switch {self.switch} has no port {rule.out_port}")
        self.flow_table[rule.match] = rule


def deliver(sw: SwitchState, p: Packet) -> Union[Forward, Miss]:
    """Exact 5-tuple lookup. Rules are directional."""
    rule = sw.flow_table.get(p.endpoints)
    return MISS if rule is None else Forward(rule.out_port)


def maxmin_allocate(flows: Sequence[tuple], topo: Topology) -> dict:
    """Progressive filling over ``(flow id, path)`` pairs.

    All unfrozen flows rise together; when a link saturates, every flow
    crossing it freezes at the current level. A flow whose path has no link
    is unconstrained and gets ``inf``.
    """
    flow_links = {}
    for fid, path in flows:
        if not topo.is_valid_path(path):
            raise ValueError(f"flow {fid!r} has invalid path {path!r}")
        flow_links[fid] = frozenset(edge(u, v) for u, v in zip(path, path[1:]))
    rates = {fid: math.inf for fid, links in flow_links.items() if not links}
    active = {fid for fid, links in flow_links.items() if links}
    residual = {l: topo.links[l] for links in flow_links.values() for l in links}
    level = 0.0
    while active:
        counts = Counter(l for fid in active for l in flow_links[fid])
        inc = min(residual[l] / n for l, n in counts.items())
        level += inc
        saturated = set()
        for l, n in counts.items():
            residual[l] -= inc * n
            if residual[l] <= EPS * topo.links[l]:
                saturated.add(l)
        frozen = {fid for fid in active if flow_links[fid] & saturated}
        for fid in frozen:
            rates[fid] = level
        active -= frozen
    return rates


@dataclass
class SessionSummary:
    sid: str
    aggregate: float
    onset: Optional[float]
    steady_from: float
    time_to_steady: float


def _fmt(x: float) -> str:
    return f"{x:.6f}"


@dataclass
class ThroughputSeries:
    """Per-step rates. ``session_rates`` is steps x sessions, ``link_util``
    is steps x links, in ``session_ids`` / ``link_ids`` order."""

    controller: str
    times: np.ndarray
    session_ids: list
    session_starts: list
    session_rates: np.ndarray
    link_ids: list
    link_util: np.ndarray
    subflows: list = field(default_factory=list)

    @property
    def aggregate(self) -> np.ndarray:
        return self.session_rates.sum(axis=1)

    def steady_state(self) -> float:
        return float(self.aggregate[-1]) if len(self.times) else 0.0

    def to_csv(self) -> str:
        out = io.StringIO()
        out.write("# format=1\n")
        header = ["time"]
        header += [f"session:{s}" for s in self.session_ids]
        header += [f"link:{u}-{v}" for u, v in self.link_ids]
        out.write(",".join(header) + "\n")
        for i, t in enumerate(self.times):
            row = [_fmt(t)]
            row += [_fmt(x) for x in self.session_rates[i]]
            row += [_fmt(x) for x in self.link_util[i]]
            out.write(",".join(row) + "\n")
        return out.getvalue()

    def summary(self) -> list:
        result = []
        for j, sid in enumerate(self.session_ids):
            col = self.session_rates[:, j]
            final = float(col[-1])
            tol = EPS * max(1.0, abs(final))
            steady = len(col) - 1
            while steady > 0 and abs(col[steady - 1] - final) <= tol:
                steady -= 1
            positive = np.nonzero(col > tol)[0]
            onset = float(self.times[positive[0]]) if len(positive) else None
            steady_from = float(self.times[steady])
            result.append(
                SessionSummary(sid, final, onset, steady_from, max(0.0, steady_from - self.session_starts[j]))
            )
        return result

    def summary_text(self) -> str:
        lines = ["format=1", f"controller={self.controller}"]
        total = 0.0
        for s in self.summary():
            onset = "none" if s.onset is None else _fmt(s.onset)
            lines.append(
                f"session={s.sid} aggregate={_fmt(s.aggregate)} onset={onset} "
                f"steady_from={_fmt(s.steady_from)} time_to_steady={_fmt(s.time_to_steady)}"
            )
            total += s.aggregate
        lines.append(f"total={_fmt(total)}")
        return "\n".join(lines) + "\n"


def _natural_key(sid: str):
    return [(0, int(tok), "") if tok.isdigit() else (1, 0, tok) for tok in re.findall(r"\d+|\D+", str(sid))]


def _assign_keys(sessions: Sequence[Session], seed: int) -> dict:
    rng = np.random.default_rng(seed)
    used = set()
    for s in sessions:
        if s.keys is not None:
            used.update(s.keys)
    keys = {}
    for s in sessions:
        if s.keys is not None:
            keys[s.sid] = tuple(s.keys)
            continue
        pair = []
        while len(pair) < 2:
            k = int(rng.integers(1, 2**64, dtype=np.uint64))
            if k not in used:
                used.add(k)
                pair.append(k)
        keys[s.sid] = tuple(pair)
    return keys


def _validate(topo: Topology, sessions: Sequence[Session], cfg: SimConfig) -> None:
    cfg.validate()
    seen = set()
    all_keys = []
    for s in sessions:
        if s.sid in seen:
            raise ConfigError(f"duplicate session id {s.sid}")
        seen.add(s.sid)
        for h in (s.initiator, s.listener):
            if h not in topo.hosts:
                raise ConfigError(f"session {s.sid}: unknown host {h}")
        if s.initiator == s.listener:
            raise ConfigError(f"session {s.sid}: initiator and listener are the same host")
        if topo.host_switch(s.initiator) == topo.host_switch(s.listener):
            raise ConfigError(f"session {s.sid}: hosts share a switch, no capacity-limited link between them")
        if not 1 <= s.subflows <= MAX_SUBFLOWS:
            raise ConfigError(f"session {s.sid}: subflow count must be in 1..{MAX_SUBFLOWS}")
        if not 0 <= s.start <= cfg.duration:
            raise ConfigError(f"session {s.sid}: start {s.start} outside [0, {cfg.duration}]")
        if s.keys is not None:
            if len(s.keys) != 2 or s.keys[0] == s.keys[1]:
                raise ConfigError(f"session {s.sid}: needs two distinct keys")
            all_keys += list(s.keys)
    if len(all_keys) != len(set(all_keys)):
        raise ConfigError("session keys are not unique")


class _Fabric:
    def __init__(self, topo: Topology, controller, install_delay: float):
        self.topo = topo
        self.controller = controller
        self.install_delay = install_delay
        self.switches = {s: SwitchState(s, topo.ports(s)) for s in sorted(topo.switches)}
        self._pending: list = []
        self._seq = 0

    def activate(self, now: float) -> None:
        while self._pending and self._pending[0][0] <= now + EPS:
            _, _, rule = heapq.heappop(self._pending)
            self.switches[rule.switch].install(rule)

    def send(self, p: Packet, now: float) -> bool:
        """Inject at the sender's switch. False if the packet is dropped."""
        topo = self.topo
        src_host = topo.host_by_ip(p.endpoints.src_ip)
        dst_host = topo.host_by_ip(p.endpoints.dst_ip)
        sw = topo.host_switch(src_host)
        in_port = topo.port_to(sw, "host", src_host)
        for _ in range(len(self.switches) + 1):
            res = deliver(self.switches[sw], p)
            if isinstance(res, Miss):
                ev = PacketInEvent(sw, in_port, p, now)
                try:
                    decision = self.controller.handle(ev)
                except (ControllerError, NoPath, ValueError, KeyError) as exc:
                    log.error("controller failed on %s at %s: %s", p.endpoints, sw, exc)
                    return False
                for rule in decision.rules:
                    heapq.heappush(self._pending, (now + self.install_delay, self._seq, rule))
                    self._seq += 1
                self.activate(now)
                # The controller hands the packet back along its route.
                return True
            kind, peer = self.switches[sw].ports[res.port]
            if kind == "host":
                return peer == dst_host
            in_port = topo.port_to(peer, "switch", sw)
            sw = peer
        log.error("forwarding loop for %s", p.endpoints)
        return False

    def walk(self, ep: EndpointPair) -> Optional[tuple]:
        """Switch path an ``ep`` packet takes over active rules, or None."""
        topo = self.topo
        src_host = topo.host_by_ip(ep.src_ip)
        dst_host = topo.host_by_ip(ep.dst_ip)
        sw = topo.host_switch(src_host)
        path = [sw]
        for _ in range(len(self.switches) + 1):
            rule = self.switches[sw].flow_table.get(ep)
            if rule is None:
                return None
            kind, peer = self.switches[sw].ports[rule.out_port]
            if kind == "host":
                return tuple(path) if peer == dst_host else None
            if peer in path:
                return None
            path.append(peer)
            sw = peer
        return None


def _handshake(s: Session, idx: int, k: int, keys: tuple, topo: Topology) -> tuple:
    ep = EndpointPair(
        topo.host_ip(s.initiator), SRC_PORT_BASE + MAX_SUBFLOWS * idx + k, topo.host_ip(s.listener), LISTEN_PORT
    )
    init_key, listen_key = keys
    if k == 0:
        syn = Packet(ep, TcpFlag.SYN, MpCapable(init_key))
        synack = Packet(ep.reversed(), TcpFlag.SYN | TcpFlag.ACK, MpCapable(listen_key))
    else:
        syn = Packet(ep, TcpFlag.SYN, MpJoin(listen_key))
        synack = Packet(ep.reversed(), TcpFlag.SYN | TcpFlag.ACK, MpJoin(init_key))
    return ep, syn, synack


def run(topo: Topology, sessions: Sequence[Session], controller, cfg: SimConfig) -> ThroughputSeries:
    """Simulate ``sessions`` under ``controller`` ("smoc", "stp", "spf" or a
    controller instance)."""
    _validate(topo, sessions, cfg)
    if isinstance(controller, str):
        try:
            controller = make_controller(controller, topo)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
    sessions = sorted(sessions, key=lambda s: _natural_key(s.sid))
    keys = _assign_keys(sessions, cfg.seed)
    fabric = _Fabric(topo, controller, cfg.install_delay)

    times = cfg.times()
    link_ids = list(topo.links)
    link_index = {l: i for i, l in enumerate(link_ids)}
    session_index = {s.sid: j for j, s in enumerate(sessions)}
    rates = np.zeros((len(times), len(sessions)))
    util = np.zeros((len(times), len(link_ids)))
    subflows: list[Subflow] = []
    started: set = set()

    for i, now in enumerate(times):
        now = float(now)
        fabric.activate(now)
        for idx, s in enumerate(sessions):
            if s.sid in started or now + EPS < s.start:
                continue
            started.add(s.sid)
            for k in range(s.subflows):
                ep, syn, synack = _handshake(s, idx, k, keys[s.sid], topo)
                sf = Subflow(ep, s.sid, k)
                subflows.append(sf)
                if not (fabric.send(syn, now) and fabric.send(synack, now)):
                    sf.state = SubflowState.BLOCKED

        for sf in subflows:
            if sf.state != SubflowState.HANDSHAKING:
                continue
            fwd = fabric.walk(sf.endpoints)
            if fwd is not None and fabric.walk(sf.endpoints.reversed()) is not None:
                sf.route, sf.state, sf.established_at = fwd, SubflowState.ESTABLISHED, now

        live = [sf for sf in subflows if sf.state == SubflowState.ESTABLISHED]
        alloc = maxmin_allocate([(n, sf.route) for n, sf in enumerate(live)], topo)
        for n, sf in enumerate(live):
            rate = alloc[n]
            rates[i, session_index[sf.session]] += rate
            for u, v in zip(sf.route, sf.route[1:]):
                util[i, link_index[edge(u, v)]] += rate
        for l, j in link_index.items():
            if util[i, j] > topo.links[l] * (1 + EPS):
                raise SimulationError(f"link {l} over capacity at t={now}: {util[i, j]}")

    return ThroughputSeries(
        controller=getattr(controller, "name", type(controller).__name__),
        times=times,
        session_ids=[s.sid for s in sessions],
        session_starts=[float(s.start) for s in sessions],
        session_rates=rates,
        link_ids=link_ids,
        link_util=util,
        subflows=subflows,
    )
