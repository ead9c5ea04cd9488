"""Packet model and binary codec for simplified TCP + MPTCP handshake frames.

Frame layout, network byte order::

    [0..4)   src ip          [4..8)   dst ip
    [8..10)  src port        [10..12) dst port
    [12]     flags (bit0 SYN, bit1 ACK, bit2 FIN, bit3 RST)
    [13..15) payload length  [15]     option length L (0 or 10)
    if L == 10:
    [16]     subtype (0x00 MP_CAPABLE, 0x01 MP_JOIN)
    [17]     reserved, 0x00
    [18..26) 64-bit key

MP_CAPABLE carries the sender's own key. MP_JOIN carries the key of the
peer whose session is being joined (keys stand in for tokens).
"""

from __future__ import annotations

import enum
import struct
from dataclasses import dataclass
from ipaddress import IPv4Address
from typing import Optional, Union

__all__ = [
    "TcpFlag",
    "EndpointPair",
    "MpCapable",
    "MpJoin",
    "Packet",
    "PacketClass",
    "FrameError",
    "TruncatedFrame",
    "UnknownSubtype",
    "BadLength",
    "encode_packet",
    "decode_packet",
    "classify",
    "suspicious_keys",
    "HEADER_LEN",
    "OPTION_LEN",
]

HEADER_LEN = 16
OPTION_LEN = 10

SUBTYPE_MP_CAPABLE = 0x00
SUBTYPE_MP_JOIN = 0x01

_HEADER = struct.Struct("!4s4sHHBHB")
_OPTION = struct.Struct("!BBQ")

KEY_MAX = (1 << 64) - 1


class TcpFlag(enum.IntFlag):
    SYN = 0x01
    ACK = 0x02
    FIN = 0x04
    RST = 0x08


_ALL_FLAGS = TcpFlag.SYN | TcpFlag.ACK | TcpFlag.FIN | TcpFlag.RST


def _flag_names(flags: TcpFlag) -> str:
    names = [f.name for f in (TcpFlag.SYN, TcpFlag.ACK, TcpFlag.FIN, TcpFlag.RST) if f in flags]
    return "|".join(names) if names else "-"


@dataclass(frozen=True, order=True)
class EndpointPair:
    """Directed TCP 4-tuple. Protocol is always TCP."""

    src_ip: IPv4Address
    src_port: int
    dst_ip: IPv4Address
    dst_port: int

    def __post_init__(self):
        object.__setattr__(self, "src_ip", IPv4Address(self.src_ip))
        object.__setattr__(self, "dst_ip", IPv4Address(self.dst_ip))
        for port in (self.src_port, self.dst_port):
            if not isinstance(port, int) or not 0 <= port <= 0xFFFF:
                raise ValueError(f"port out of range: {port!r}")
        if (self.src_ip, self.src_port) == (self.dst_ip, self.dst_port):
            raise ValueError("source and destination endpoints are identical")

    def reversed(self) -> "EndpointPair":
        return EndpointPair(self.dst_ip, self.dst_port, self.src_ip, self.src_port)

    def __str__(self) -> str:
        return f"{self.src_ip}:{self.src_port}>{self.dst_ip}:{self.dst_port}"


def _check_key(value: int) -> None:
    if not isinstance(value, int) or not 0 <= value <= KEY_MAX:
        raise ValueError(f"key is not a 64-bit unsigned value: {value!r}")


@dataclass(frozen=True)
class MpCapable:
    key: int

    def __post_init__(self):
        _check_key(self.key)


@dataclass(frozen=True)
class MpJoin:
    peer_key: int

    def __post_init__(self):
        _check_key(self.peer_key)


MptcpOption = Union[MpCapable, MpJoin]


@dataclass(frozen=True)
class Packet:
    endpoints: EndpointPair
    tcp_flags: TcpFlag
    mptcp: Optional[MptcpOption] = None
    payload_len: int = 0

    def __post_init__(self):
        flags = TcpFlag(self.tcp_flags)
        object.__setattr__(self, "tcp_flags", flags)
        if int(flags) & ~int(_ALL_FLAGS):
            raise ValueError(f"unknown TCP flag bits: {int(flags):#x}")
        if self.mptcp is not None and not isinstance(self.mptcp, (MpCapable, MpJoin)):
            raise TypeError(f"unsupported MPTCP option: {self.mptcp!r}")
        if not isinstance(self.payload_len, int) or not 0 <= self.payload_len <= 0xFFFF:
            raise ValueError(f"payload_len out of range: {self.payload_len!r}")
        if TcpFlag.SYN in flags and self.mptcp is not None and self.payload_len != 0:
            raise ValueError("MPTCP handshake packet must carry no payload")


class PacketClass(enum.Enum):
    MpCapableSyn = "MpCapableSyn"
    MpCapableSynAck = "MpCapableSynAck"
    MpJoinSyn = "MpJoinSyn"
    MpJoinSynAck = "MpJoinSynAck"
    PlainTcp = "PlainTcp"
    NonHandshake = "NonHandshake"

    def __str__(self) -> str:
        return self.value


class FrameError(ValueError):
    """A byte sequence that is not a valid frame."""


class TruncatedFrame(FrameError):
    pass


class UnknownSubtype(FrameError):
    pass


class BadLength(FrameError):
    pass


def encode_packet(p: Packet) -> bytes:
    e = p.endpoints
    opt = p.mptcp
    header = _HEADER.pack(
        e.src_ip.packed,
        e.dst_ip.packed,
        e.src_port,
        e.dst_port,
        int(p.tcp_flags),
        p.payload_len,
        0 if opt is None else OPTION_LEN,
    )
    if opt is None:
        return header
    if isinstance(opt, MpCapable):
        return header + _OPTION.pack(SUBTYPE_MP_CAPABLE, 0, opt.key)
    return header + _OPTION.pack(SUBTYPE_MP_JOIN, 0, opt.peer_key)


def decode_packet(b: bytes) -> Packet:
    """Parse one frame.

    Raises TruncatedFrame, BadLength or UnknownSubtype for structural
    problems and plain FrameError for content that no valid Packet encodes
    to (unknown flag bits, non-zero reserved byte, invariant violations).
    """
    b = bytes(b)
    if len(b) < HEADER_LEN:
        raise TruncatedFrame(f"frame has {len(b)} bytes, header needs {HEADER_LEN}")
    src, dst, sport, dport, flags, payload_len, opt_len = _HEADER.unpack_from(b)
    if opt_len not in (0, OPTION_LEN):
        raise BadLength(f"option length {opt_len} is neither 0 nor {OPTION_LEN}")
    declared = HEADER_LEN + opt_len
    if len(b) < declared:
        raise TruncatedFrame(f"frame has {len(b)} bytes, declared {declared}")
    if len(b) > declared:
        raise BadLength(f"{len(b) - declared} trailing bytes after declared frame end")
    if flags & ~int(_ALL_FLAGS):
        raise FrameError(f"unknown flag bits {flags:#04x}")

    option: Optional[MptcpOption] = None
    if opt_len:
        subtype, reserved, key = _OPTION.unpack_from(b, HEADER_LEN)
        if subtype == SUBTYPE_MP_CAPABLE:
            option = MpCapable(key)
        elif subtype == SUBTYPE_MP_JOIN:
            option = MpJoin(key)
        else:
            raise UnknownSubtype(f"MPTCP subtype {subtype:#04x}")
        if reserved:
            raise FrameError(f"reserved byte is {reserved:#04x}, expected 0x00")

    try:
        return Packet(
            EndpointPair(IPv4Address(src), sport, IPv4Address(dst), dport),
            TcpFlag(flags),
            option,
            payload_len,
        )
    except ValueError as exc:
        raise FrameError(str(exc)) from exc


def classify(p: Packet) -> PacketClass:
    flags = p.tcp_flags
    if TcpFlag.SYN not in flags:
        return PacketClass.NonHandshake
    ack = TcpFlag.ACK in flags
    if isinstance(p.mptcp, MpCapable):
        return PacketClass.MpCapableSynAck if ack else PacketClass.MpCapableSyn
    if isinstance(p.mptcp, MpJoin):
        return PacketClass.MpJoinSynAck if ack else PacketClass.MpJoinSyn
    return PacketClass.PlainTcp


def suspicious_keys(p: Packet) -> list[str]:
    """Validator warnings for a packet. A zero key is legal but unusual."""
    warnings = []
    if isinstance(p.mptcp, MpCapable) and p.mptcp.key == 0:
        warnings.append("MP_CAPABLE key is zero")
    if isinstance(p.mptcp, MpJoin) and p.mptcp.peer_key == 0:
        warnings.append("MP_JOIN peer key is zero")
    return warnings


def describe(p: Packet) -> str:
    """Two-line human readable summary: class and key, then addressing."""
    cls = classify(p)
    head = str(cls)
    if isinstance(p.mptcp, MpCapable):
        head += f" key={p.mptcp.key:#018x}"
    elif isinstance(p.mptcp, MpJoin):
        head += f" peer_key={p.mptcp.peer_key:#018x}"
    e = p.endpoints
    body = (
        f"src={e.src_ip}:{e.src_port} dst={e.dst_ip}:{e.dst_port} "
        f"flags={_flag_names(p.tcp_flags)} payload_len={p.payload_len}"
    )
    return f"{head}\n{body}"
