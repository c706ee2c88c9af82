"""Message kinds and the common 13-byte header.

Header: ``[1 kind][2 sender][2 receiver][4 session][4 payload length]``,
big-endian. ``session`` names the sub-protocol instance a message belongs to:
the RBC instance for VAL/ECHO/READY_RBC, the segment for FETCH/FRAG_REPLY and
the batch instance for the hbAVSS kinds.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from enum import IntEnum

HEADER = struct.Struct(">BHHII")
HEADER_BYTES = HEADER.size  # 13


class Kind(IntEnum):
    VAL = 1
    ECHO = 2
    READY_RBC = 3
    FRAG = 4
    FRAG_ACK = 5
    FRAG_READY = 6
    FETCH = 7
    FRAG_REPLY = 8
    OK = 9
    READY = 10
    IMPLICATE = 11
    R1 = 12
    R2 = 13


# RBC instance ids carried in the session field
RBC_COMMITMENTS = 0
RBC_ROOTS = 1


class MalformedMessage(ValueError):
    pass


@dataclass(frozen=True)
class Msg:
    """An outbound message before framing; the sender is implied by the node."""

    receiver: int
    kind: Kind
    session: int
    payload: bytes = b""


def frame(kind: int, sender: int, receiver: int, session: int, payload: bytes) -> bytes:
    return HEADER.pack(kind, sender, receiver, session, len(payload)) + payload


def unframe(data: bytes) -> tuple[Kind, int, int, int, bytes]:
    if len(data) < HEADER_BYTES:
        raise MalformedMessage("short header")
    kind, sender, receiver, session, length = HEADER.unpack_from(data)
    if len(data) != HEADER_BYTES + length:
        raise MalformedMessage("payload length mismatch")
    try:
        kind = Kind(kind)
    except ValueError:
        raise MalformedMessage(f"unknown kind {kind}") from None
    return kind, sender, receiver, session, data[HEADER_BYTES:]


def multicast(n: int, kind: Kind, session: int, payload: bytes = b"") -> list[Msg]:
    return [Msg(j, kind, session, payload) for j in range(1, n + 1)]
