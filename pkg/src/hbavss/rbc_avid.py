"""Erasure-coded reliable broadcast and batch information dispersal.

Both are message-driven state machines: ``handle`` consumes one
authenticated inbound message and returns outbound :class:`~hbavss.wire.Msg`
objects. Results (delivery, dispersal completion, retrieved values) are
reported through callbacks, whose return values are more outbound messages.

Reliable broadcast follows Cachin and Tessaro: the dealer sends each party
one (N-2f, N)-coded shard with its Merkle branch, parties echo shards, and
Bracha-style READY messages decide. Dispersal codes every value with a
(t+1, n) code, broadcasts the vector of Merkle roots with one RBC, sends
party j fragment j of every value and completes after an ACK/READY round.
Retrieval is pull-based (FETCH / FRAG_REPLY).
"""

from __future__ import annotations

import struct
from collections import defaultdict
from typing import Callable

from .codes import CodingError, MerkleBranch, MerkleTree, Shard, merkle_verify, rs_decode, rs_encode
from .wire import RBC_ROOTS, Kind, Msg, multicast

ROOT_BYTES = 32

Outbox = list[Msg]


class RetrieveFailure(Exception):
    """The agreed root admits no consistent decoding (dealer is faulty)."""


def _encode_leaf(root: bytes | None, shard: Shard, branch: MerkleBranch) -> bytes:
    return (root or b"") + shard.to_bytes() + branch.to_bytes()


def _parse_leaf(payload: bytes, with_root: bool,
                offset: int = 0) -> tuple[bytes | None, Shard, MerkleBranch, int]:
    off = offset
    root = None
    if with_root:
        if len(payload) < off + ROOT_BYTES:
            raise CodingError("truncated root")
        root, off = bytes(payload[off:off + ROOT_BYTES]), off + ROOT_BYTES
    shard, off = Shard.parse(payload, off)
    branch, off = MerkleBranch.parse(payload, off)
    return root, shard, branch, off


def encode_and_commit(payload: bytes, k: int, n: int) -> tuple[list[Shard], MerkleTree]:
    shards = rs_encode(payload, k, n)
    return shards, MerkleTree([s.to_bytes() for s in shards])


# -- reliable broadcast -------------------------------------------------------

def rbc_dealer_start(payload: bytes, n: int, f: int, session: int) -> Outbox:
    shards, tree = encode_and_commit(payload, n - 2 * f, n)
    return [Msg(j, Kind.VAL, session, _encode_leaf(tree.root, shards[j - 1], tree.branch(j - 1)))
            for j in range(1, n + 1)]


class RbcNode:
    def __init__(self, me: int, n: int, f: int, dealer: int, session: int,
                 on_deliver: Callable[[bytes], Outbox]):
        self.me, self.n, self.f = me, n, f
        self.k = n - 2 * f
        self.dealer = dealer
        self.session = session
        self.on_deliver = on_deliver
        self.phase = "init"
        self.echo_sent = False
        self.ready_sent = False
        self.delivered: bytes | None = None
        self.echoes: dict[bytes, dict[int, Shard]] = defaultdict(dict)
        self.echo_senders: set[int] = set()
        self.readies: dict[bytes, set[int]] = defaultdict(set)
        self.ready_senders: set[int] = set()
        self.bad_roots: set[bytes] = set()
        self.waste = 0

    def handle(self, sender: int, kind: Kind, payload: bytes) -> Outbox:
        if self.delivered is not None:
            self.waste += 1
            return []
        try:
            if kind == Kind.VAL:
                return self._on_val(sender, payload)
            if kind == Kind.ECHO:
                return self._on_echo(sender, payload)
            if kind == Kind.READY_RBC:
                return self._on_ready(sender, payload)
        except CodingError:
            pass
        return []

    def _valid_leaf(self, root, shard: Shard, branch: MerkleBranch, owner: int) -> bool:
        return (shard.index == owner and branch.index == owner - 1
                and merkle_verify(root, shard.to_bytes(), branch, self.n))

    def _on_val(self, sender: int, payload: bytes) -> Outbox:
        if sender != self.dealer or self.echo_sent:
            return []
        root, shard, branch, end = _parse_leaf(payload, True)
        if end != len(payload) or not self._valid_leaf(root, shard, branch, self.me):
            return []
        self.echo_sent = True
        self.phase = "echoed"
        return multicast(self.n, Kind.ECHO, self.session, payload)

    def _on_echo(self, sender: int, payload: bytes) -> Outbox:
        if sender in self.echo_senders:
            return []
        root, shard, branch, end = _parse_leaf(payload, True)
        if end != len(payload) or not self._valid_leaf(root, shard, branch, sender):
            return []
        self.echo_senders.add(sender)
        self.echoes[root][sender] = shard
        out: Outbox = []
        if (len(self.echoes[root]) >= self.n - self.f and not self.ready_sent
                and root not in self.bad_roots):
            if self._reconstruct(root) is None:
                self.bad_roots.add(root)
            else:
                out += self._send_ready(root)
        return out + self._try_deliver(root)

    def _on_ready(self, sender: int, payload: bytes) -> Outbox:
        if sender in self.ready_senders or len(payload) != ROOT_BYTES:
            return []
        root = bytes(payload)
        self.ready_senders.add(sender)
        self.readies[root].add(sender)
        out: Outbox = []
        if len(self.readies[root]) >= self.f + 1 and not self.ready_sent:
            out += self._send_ready(root)
        return out + self._try_deliver(root)

    def _send_ready(self, root: bytes) -> Outbox:
        self.ready_sent = True
        self.phase = "ready_sent"
        return multicast(self.n, Kind.READY_RBC, self.session, root)

    def _reconstruct(self, root: bytes) -> bytes | None:
        shards = list(self.echoes[root].values())
        try:
            value = rs_decode(shards, self.k, self.n)
        except CodingError:
            return None
        _, tree = encode_and_commit(value, self.k, self.n)
        return value if tree.root == root else None

    def _try_deliver(self, root: bytes) -> Outbox:
        if (self.delivered is not None or len(self.readies[root]) < 2 * self.f + 1
                or len(self.echoes[root]) < self.k):
            return []
        value = self._reconstruct(root)
        if value is None:
            return []
        self.delivered = value
        self.phase = "delivered"
        return self.on_deliver(value)


# -- dispersal ----------------------------------------------------------------

def avid_disperse_start(values: list[bytes], n: int, t: int) -> Outbox:
    """Dealer side: one RBC of the root vector plus one FRAG message per party."""
    if not values:
        raise ValueError("dispersal needs at least one value")
    coded = [encode_and_commit(v, t + 1, n) for v in values]
    roots = b"".join(tree.root for _, tree in coded)
    out = rbc_dealer_start(roots, n, t, RBC_ROOTS)
    for j in range(1, n + 1):
        body = struct.pack("<I", len(values)) + b"".join(
            _encode_leaf(None, shards[j - 1], tree.branch(j - 1)) for shards, tree in coded)
        out.append(Msg(j, Kind.FRAG, 0, body))
    return out


class AvidNode:
    def __init__(self, me: int, n: int, t: int, dealer: int,
                 on_complete: Callable[[], Outbox],
                 on_retrieved: Callable[[int, bytes | None], Outbox]):
        self.me, self.n, self.t = me, n, t
        self.dealer = dealer
        self.on_complete = on_complete
        self.on_retrieved = on_retrieved
        self.rbc = RbcNode(me, n, t, dealer, RBC_ROOTS, self._roots_delivered)
        self.roots: list[bytes] | None = None
        self.frag_payload: bytes | None = None
        self.fragments: dict[int, tuple[Shard, MerkleBranch]] = {}
        self.ack_sent = False
        self.ready_sent = False
        self.acks: set[int] = set()
        self.readies: set[int] = set()
        self.complete = False
        self.pending_fetch: dict[int, set[int]] = defaultdict(set)
        self.answered: set[tuple[int, int]] = set()
        self.requested: set[int] = set()
        self.replies: dict[int, dict[int, Shard]] = defaultdict(dict)
        self.buffered_replies: list[tuple[int, int, bytes]] = []
        self.results: dict[int, bytes | None] = {}
        self.waste = 0

    @property
    def segments(self) -> int:
        return len(self.roots) if self.roots is not None else 0

    def handle(self, sender: int, kind: Kind, session: int, payload: bytes) -> Outbox:
        if kind in (Kind.VAL, Kind.ECHO, Kind.READY_RBC):
            return self.rbc.handle(sender, kind, payload)
        try:
            if kind == Kind.FRAG:
                return self._on_frag(sender, payload)
            if kind == Kind.FRAG_ACK:
                return self._on_ack(sender)
            if kind == Kind.FRAG_READY:
                return self._on_ready(sender)
            if kind == Kind.FETCH:
                return self._on_fetch(sender, session)
            if kind == Kind.FRAG_REPLY:
                return self._on_reply(sender, session, payload)
        except CodingError:
            pass
        return []

    def _roots_delivered(self, value: bytes) -> Outbox:
        if len(value) % ROOT_BYTES or not value:
            self.roots = []  # unusable root vector: nothing will ever verify
            return []
        self.roots = [value[i: i + ROOT_BYTES] for i in range(0, len(value), ROOT_BYTES)]
        out = self._check_fragments()
        for sender, seg, payload in self.buffered_replies:
            out += self._on_reply(sender, seg, payload)
        self.buffered_replies = []
        return out + self._maybe_complete()

    def _on_frag(self, sender: int, payload: bytes) -> Outbox:
        if sender != self.dealer or self.frag_payload is not None:
            return []
        self.frag_payload = bytes(payload)
        return self._check_fragments()

    def _check_fragments(self) -> Outbox:
        if self.roots is None or self.frag_payload is None or self.ack_sent:
            return []
        buf = self.frag_payload
        if len(buf) < 4:
            return []
        (count,) = struct.unpack_from("<I", buf)
        off = 4
        all_valid = count == len(self.roots) and count > 0
        for seg in range(min(count, len(self.roots))):
            try:
                _, shard, branch, off = _parse_leaf(buf, False, off)
            except CodingError:
                all_valid = False
                break
            if (shard.index == self.me and branch.index == self.me - 1
                    and merkle_verify(self.roots[seg], shard.to_bytes(), branch, self.n)):
                self.fragments[seg] = (shard, branch)
            else:
                all_valid = False
        out: Outbox = []
        for seg, requesters in list(self.pending_fetch.items()):
            if seg in self.fragments:
                for r in sorted(requesters):
                    out += self._reply(r, seg)
                del self.pending_fetch[seg]
        if all_valid:
            self.ack_sent = True
            out += multicast(self.n, Kind.FRAG_ACK, 0)
        return out

    def _on_ack(self, sender: int) -> Outbox:
        if sender in self.acks:
            return []
        self.acks.add(sender)
        if len(self.acks) >= 2 * self.t + 1 and not self.ready_sent:
            self.ready_sent = True
            return multicast(self.n, Kind.FRAG_READY, 0)
        return []

    def _on_ready(self, sender: int) -> Outbox:
        if sender in self.readies:
            return []
        self.readies.add(sender)
        out: Outbox = []
        if len(self.readies) >= self.t + 1 and not self.ready_sent:
            self.ready_sent = True
            out += multicast(self.n, Kind.FRAG_READY, 0)
        return out + self._maybe_complete()

    def _maybe_complete(self) -> Outbox:
        if self.complete or self.roots is None or len(self.readies) < 2 * self.t + 1:
            return []
        self.complete = True
        return self.on_complete()

    # -- retrieval --

    def retrieve(self, seg: int) -> Outbox:
        if seg in self.results:
            return self.on_retrieved(seg, self.results[seg])
        if seg in self.requested:
            return []
        if self.roots is not None and not 0 <= seg < len(self.roots):
            self.results[seg] = None
            return self.on_retrieved(seg, None)
        self.requested.add(seg)
        return multicast(self.n, Kind.FETCH, seg)

    def _reply(self, requester: int, seg: int) -> Outbox:
        if (requester, seg) in self.answered:
            return []
        self.answered.add((requester, seg))
        shard, branch = self.fragments[seg]
        return [Msg(requester, Kind.FRAG_REPLY, seg, _encode_leaf(None, shard, branch))]

    def _on_fetch(self, sender: int, seg: int) -> Outbox:
        if seg in self.fragments:
            return self._reply(sender, seg)
        if self.roots is None or seg < len(self.roots):
            self.pending_fetch[seg].add(sender)
        return []

    def _on_reply(self, sender: int, seg: int, payload: bytes) -> Outbox:
        if seg in self.results or seg not in self.requested:
            self.waste += 1
            return []
        if self.roots is None:
            self.buffered_replies.append((sender, seg, bytes(payload)))
            return []
        if seg >= len(self.roots) or sender in self.replies[seg]:
            return []
        _, shard, branch, end = _parse_leaf(payload, False)
        if (end != len(payload) or shard.index != sender or branch.index != sender - 1
                or not merkle_verify(self.roots[seg], shard.to_bytes(), branch, self.n)):
            return []
        self.replies[seg][sender] = shard
        if len(self.replies[seg]) < self.t + 1:
            return []
        value = self._decode(seg)
        self.results[seg] = value
        del self.replies[seg]
        return self.on_retrieved(seg, value)

    def _decode(self, seg: int) -> bytes | None:
        try:
            value = rs_decode(list(self.replies[seg].values()), self.t + 1, self.n)
        except CodingError:
            return None
        _, tree = encode_and_commit(value, self.t + 1, self.n)
        return value if tree.root == self.roots[seg] else None
