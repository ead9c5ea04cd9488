"""
Following one session through the controller
============================================

Replay the packet-in events of a session with three subflows and print the
audit line and the session tables after each event.
"""

from pathlib import Path

from smoc.controller import PacketInEvent, SmocController
from smoc.netgraph import load_topology
from smoc.wire import EndpointPair, MpCapable, MpJoin, Packet, TcpFlag

topo = load_topology(Path(__file__).resolve().parent.parent / "fixtures" / "diamond.txt")
ctrl = SmocController(topo)

key_a, key_b = 0x1111, 0x2222
syn, synack = TcpFlag.SYN, TcpFlag.SYN | TcpFlag.ACK

events = []
for k in range(3):
    ep = EndpointPair("10.0.0.1", 40000 + k, "10.0.0.2", 5001)
    fwd = MpCapable(key_a) if k == 0 else MpJoin(key_b)
    back = MpCapable(key_b) if k == 0 else MpJoin(key_a)
    events.append(PacketInEvent("a", 4, Packet(ep, syn, fwd)))
    events.append(PacketInEvent("d", 4, Packet(ep.reversed(), synack, back)))

for ev in events:
    decision = ctrl.handle(ev)
    print(ctrl.audit_log[-1])
    for line in ctrl.tables.snapshot().splitlines():
        print("    " + line)

# The first subflow took the direct link, the joins took the two detours.
