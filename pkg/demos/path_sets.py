"""
Path sets on the two testbed topologies
=======================================

A path set starts with the shortest path between two switches and then lists
every other simple path, least overlap with the first path first. Subflows
take paths from it in turn.
"""

from pathlib import Path

from smoc.netgraph import compute_path_set, load_topology, next_path, shared_edges

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"

# Topology 1: four isolated paths. All alternates share nothing with the
# primary, so four subflows land on four different paths.
topo1 = load_topology(FIXTURES / "topo1.txt")
ps = compute_path_set(topo1, "a", "b")
for p in ps.paths:
    print(" -> ".join(p), "shared:", shared_edges(p, ps.primary))

# Topology 2: paths share uplinks in pairs. The alternate that reuses the
# primary's uplink is pushed to the back.
topo2 = load_topology(FIXTURES / "topo2.txt")
ps = compute_path_set(topo2, "a", "b")
for p in ps.paths:
    print(" -> ".join(p), "shared:", shared_edges(p, ps.primary))

# Cycling wraps around once every path has been handed out.
print([" -> ".join(next_path(ps)) for _ in range(6)])
