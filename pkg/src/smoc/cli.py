"""Command-line front end: ``smoc run | paths | decode``.

Exit codes: 0 success, 2 bad input (parse errors, unknown switches, bad
hex), 3 simulation failure.
"""

from __future__ import annotations

import argparse
import binascii
import sys

from . import netgraph, wire
from .netgraph import TopologyParseError, load_topology
from .scenario import load_scenario
from .sim import ConfigError, SimulationError, run

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_SIM = 3


def _fail(code: int, message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


def _write(text: str, out_path) -> None:
    if out_path:
        with open(out_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_run(args) -> int:
    if len(args.files) == 2:
        topo_file, scn_file = args.files
    else:
        topo_file, scn_file = None, args.files[0]
    try:
        scenario = load_scenario(scn_file)
        topo_file = topo_file or scenario.topology_path
        if topo_file is None:
            return _fail(EXIT_INPUT, f"{scn_file}: no topology given on the command line or in the scenario")
        topo = load_topology(topo_file)
        scenario.check_against(topo)
    except TopologyParseError as exc:
        return _fail(EXIT_INPUT, f"{exc}")
    except OSError as exc:
        return _fail(EXIT_INPUT, str(exc))
    try:
        series = run(topo, scenario.sessions, scenario.controller, scenario.config)
    except (ConfigError, SimulationError) as exc:
        return _fail(EXIT_SIM, str(exc))

    csv_text = series.to_csv()
    if args.out:
        _write(csv_text, args.out)
    elif args.csv:
        sys.stdout.write(csv_text)
    if not args.quiet:
        sys.stdout.write(series.summary_text())
    return EXIT_OK


def format_path_set(ps: netgraph.PathSet) -> str:
    lines = []
    for i, p in enumerate(ps.paths):
        lines.append(
            f"{i} {','.join(p)} shared={netgraph.shared_edges(p, ps.primary)} hops={netgraph.hop_len(p)}"
        )
    return "\n".join(lines) + "\n"


def cmd_paths(args) -> int:
    try:
        topo = load_topology(args.topology)
    except (TopologyParseError, OSError) as exc:
        return _fail(EXIT_INPUT, str(exc))
    for s in (args.src, args.dst):
        if s not in topo.switches:
            return _fail(EXIT_INPUT, f"unknown switch {s}")
    if args.src == args.dst:
        return _fail(EXIT_INPUT, "source and destination switch are the same")
    ps = netgraph.compute_path_set(topo, args.src, args.dst, max_hops=args.max_hops, max_paths=args.max_paths)
    _write(format_path_set(ps), args.out)
    return EXIT_OK


def cmd_decode(args) -> int:
    text = "".join(args.hex.split())
    if len(text) % 2:
        return _fail(EXIT_INPUT, "hex string has odd length")
    try:
        frame = binascii.unhexlify(text)
    except binascii.Error:
        return _fail(EXIT_INPUT, "not a hex string")
    try:
        report = wire.describe(wire.decode_packet(frame))
    except wire.FrameError as exc:
        report = f"{type(exc).__name__}: {exc}"
    _write(report + "\n", args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="smoc", description="Multipath controller simulator and tools.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="simulate a scenario and report throughput")
    p.add_argument("files", nargs="+", metavar="FILE", help="[topology] scenario")
    p.add_argument("--out", help="write the per-step CSV to this file")
    p.add_argument("--csv", action="store_true", help="print the per-step CSV on stdout")
    p.add_argument("--quiet", action="store_true", help="suppress the summary")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("paths", help="list the path set between two switches")
    p.add_argument("topology")
    p.add_argument("src")
    p.add_argument("dst")
    p.add_argument("--max-hops", type=int, default=netgraph.DEFAULT_MAX_HOPS)
    p.add_argument("--max-paths", type=int, default=netgraph.DEFAULT_MAX_PATHS)
    p.add_argument("--out")
    p.add_argument("--csv", action="store_true", help=argparse.SUPPRESS)
    p.add_argument("--quiet", action="store_true", help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_paths)

    p = sub.add_parser("decode", help="decode a hex-encoded frame")
    p.add_argument("hex", nargs="?", default="")
    p.add_argument("--out")
    p.add_argument("--csv", action="store_true", help=argparse.SUPPRESS)
    p.add_argument("--quiet", action="store_true", help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_decode)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "run" and len(args.files) > 2:
        parser.error("run takes at most two files: [topology] scenario")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
