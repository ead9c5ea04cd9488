"""Multipath routing controller for MPTCP subflows over a simulated SDN fabric."""

from .controller import (
    Decision,
    FlowRule,
    PacketInEvent,
    SessionTables,
    ShortestPathController,
    SmocController,
    SpanningTreeController,
    baseline_shortest_path,
    baseline_spanning_tree,
    handle_packet_in,
    install_path,
    make_controller,
)
from .netgraph import (
    PathSet,
    Topology,
    all_simple_paths,
    compute_path_set,
    load_topology,
    next_path,
    parse_topology,
    shared_edges,
    shortest_path,
    spanning_tree,
)
from .sim import Session, SimConfig, ThroughputSeries, deliver, maxmin_allocate, run
from .wire import (
    EndpointPair,
    MpCapable,
    MpJoin,
    Packet,
    PacketClass,
    TcpFlag,
    classify,
    decode_packet,
    encode_packet,
)

__version__ = "0.1.0"
