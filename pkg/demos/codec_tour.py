"""
Encoding and decoding handshake frames
======================================
"""

from smoc.wire import (
    EndpointPair,
    FrameError,
    MpCapable,
    MpJoin,
    Packet,
    TcpFlag,
    classify,
    decode_packet,
    encode_packet,
)

ep = EndpointPair("10.0.0.1", 40000, "10.0.0.2", 5001)

# An MP_CAPABLE SYN is a 16-byte header plus a 10-byte option.
frame = encode_packet(Packet(ep, TcpFlag.SYN, MpCapable(0x0102030405060708)))
print(len(frame), frame.hex())

# An MP_JOIN names the peer's key.
join = decode_packet(encode_packet(Packet(ep, TcpFlag.SYN, MpJoin(0xA1A2A3A4A5A6A7A8))))
print(classify(join), hex(join.mptcp.peer_key))

# Damaged frames raise a specific FrameError subclass.
for bad in (b"", frame[:20], frame[:16] + b"\x07" + frame[17:]):
    try:
        decode_packet(bad)
    except FrameError as exc:
        print(type(exc).__name__, exc)
