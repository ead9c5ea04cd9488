"""
Throughput under the three controllers
======================================

Run one four-subflow session on both testbed topologies with the multipath
controller and the two single-path baselines, using a 2 s rule installation
delay. Writes ``throughput.png`` next to this script if matplotlib is
installed.
"""

from pathlib import Path

from smoc.netgraph import load_topology
from smoc.sim import Session, SimConfig, run

HERE = Path(__file__).resolve().parent
FIXTURES = HERE.parent / "fixtures"

cfg = SimConfig(step=0.5, duration=10.0, install_delay=2.0)
sessions = [Session("1", "hA", "hB", subflows=4, start=1.0)]

results = {}
for name in ("topo1", "topo2"):
    topo = load_topology(FIXTURES / f"{name}.txt")
    for controller in ("smoc", "stp", "spf"):
        series = run(topo, sessions, controller, cfg)
        results[name, controller] = series
        print(f"{name} {controller}: steady aggregate {series.steady_state():.1f}")

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
except ImportError:
    plt = None

if plt is not None:
    fig, axes = plt.subplots(1, 2, figsize=(9, 3.5), sharey=True)
    for ax, name in zip(axes, ("topo1", "topo2")):
        for controller in ("smoc", "stp", "spf"):
            s = results[name, controller]
            ax.step(s.times, s.aggregate, where="post", label=controller)
        ax.set_title(name)
        ax.set_xlabel("time (s)")
    axes[0].set_ylabel("aggregate rate (units)")
    axes[0].legend()
    fig.tight_layout()
    fig.savefig(HERE / "throughput.png", dpi=120)
