"""Scenario files: which sessions to run, under which controller and clock.

::

    format=1
    topology topo1.txt          # optional, relative to the scenario file
    controller smoc             # smoc | stp | spf
    step 0.5
    duration 10
    install_delay 0
    seed 1
    session <id> <src_host> <dst_host> <subflows> <start_time>
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Optional

from .netgraph import Topology, TopologyParseError, _content_lines, check_format_header
from .sim import Session, SimConfig

__all__ = ["Scenario", "ScenarioParseError", "parse_scenario", "load_scenario", "CONTROLLER_SELECTORS"]

CONTROLLER_SELECTORS = ("smoc", "stp", "spf")


class ScenarioParseError(TopologyParseError):
    pass


@dataclass
class Scenario:
    sessions: list
    controller: str = "smoc"
    config: SimConfig = field(default_factory=SimConfig)
    topology_path: Optional[str] = None
    session_lines: dict = field(default_factory=dict)

    def check_against(self, topo: Topology) -> None:
        for s in self.sessions:
            for h in (s.initiator, s.listener):
                if h not in topo.hosts:
                    raise ScenarioParseError(self.session_lines.get(s.sid, 0), f"unknown host {h}")


def _number(text: str, kind=float):
    try:
        return kind(text)
    except ValueError:
        raise ValueError(f"not a valid {kind.__name__}: {text!r}") from None


def parse_scenario(text: str, base_dir: Optional[str] = None) -> Scenario:
    sessions = []
    lines = {}
    controller = "smoc"
    cfg = {}
    topology_path = None
    header_seen = False
    for lineno, words in _content_lines(text.splitlines()):
        if not header_seen:
            try:
                check_format_header(lineno, words)
            except TopologyParseError as exc:
                raise ScenarioParseError(exc.lineno, str(exc).split(": ", 1)[1]) from None
            header_seen = True
            continue
        kind, args = words[0], words[1:]
        try:
            if kind == "session":
                if len(args) != 5:
                    raise ValueError("usage: session <id> <src_host> <dst_host> <subflows> <start_time>")
                sid, src, dst, n, start = args
                if sid in lines:
                    raise ValueError(f"session {sid} declared twice")
                n = _number(n, int)
                start = _number(start)
                if n < 1:
                    raise ValueError("subflow count must be at least 1")
                if start < 0:
                    raise ValueError("start time must be non-negative")
                sessions.append(Session(sid, src, dst, n, start))
                lines[sid] = lineno
            elif kind in ("controller", "topology", "step", "duration", "install_delay", "seed"):
                if len(args) != 1:
                    raise ValueError(f"usage: {kind} <value>")
                value = args[0]
                if kind == "controller":
                    if value not in CONTROLLER_SELECTORS:
                        raise ValueError(f"controller must be one of {', '.join(CONTROLLER_SELECTORS)}")
                    controller = value
                elif kind == "topology":
                    topology_path = value if base_dir is None else os.path.join(base_dir, value)
                elif kind == "seed":
                    cfg["seed"] = _number(value, int)
                else:
                    cfg[kind] = _number(value)
            else:
                raise ValueError(f"unknown directive {kind!r}")
        except ValueError as exc:
            raise ScenarioParseError(lineno, str(exc)) from None
    if not header_seen:
        raise ScenarioParseError(1, "empty scenario file")
    config = SimConfig(**cfg)
    try:
        config.validate()
    except ValueError as exc:
        raise ScenarioParseError(lineno, str(exc)) from None
    return Scenario(sessions, controller, config, topology_path, lines)


def load_scenario(path) -> Scenario:
    with open(path, encoding="utf-8") as fh:
        return parse_scenario(fh.read(), base_dir=os.path.dirname(os.path.abspath(path)))
