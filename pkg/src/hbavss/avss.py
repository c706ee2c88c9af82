"""hbAVSS: dealer encoding, share validation, agreement, implication, recovery.

A batch of ``B`` instances shares one reliable broadcast (all ``B*(t+1)``
commitments) and one dispersal (segment ``(i, b)`` holds party i's ``t+1``
ciphertexts of instance b). Everything else is per instance except the
implication bookkeeping: a party implicates at most once per batch, each
accuser is examined at most once, and one confirmed implication starts
recovery in every instance.

Bivariate layout: ``phi(x, y)`` with x the party index and y the column; the
secrets sit at ``phi(0, k)`` for k in 1..t+1, party i's shares are
``phi(i, 1..t+1)``.
"""

from __future__ import annotations

import logging
import random
import struct
from dataclasses import dataclass, field
from typing import Callable, Sequence

from . import pke
from .fieldmath import (BivariatePolynomial, FieldError, NotYetDecodable, Polynomial,
                        lagrange_interpolate, robust_interpolate, sample_bivariate)
from .groups import MalformedElement
from .polycommit import CommitAux, EvalWitness, PolyCommitment
from .rbc_avid import AvidNode, RbcNode, avid_disperse_start, rbc_dealer_start
from .wire import RBC_COMMITMENTS, Kind, MalformedMessage, Msg, multicast, unframe

log = logging.getLogger(__name__)

Outbox = list[Msg]


class TooFewParties(ValueError):
    pass


@dataclass(frozen=True)
class DealerInput:
    secrets: tuple[int, ...]


@dataclass(frozen=True)
class ImplicationEvidence:
    accuser: int
    sk: int
    instance: int
    k: int


@dataclass(frozen=True)
class OutputShares:
    instance: int
    shares: tuple[int, ...]
    witnesses: tuple[EvalWitness, ...] | None  # None on the recovery path
    path: str


def segment_index(party: int, instance: int, n: int) -> int:
    return instance * n + (party - 1)


def segment_owner(seg: int, n: int) -> tuple[int, int]:
    """(party, instance) for a segment index."""
    return seg % n + 1, seg // n


def enc_context(receiver: int, instance: int, k: int) -> bytes:
    return struct.pack("<HII", receiver, instance, k)


def _split_ciphertexts(segment: bytes, count: int, element_size: int) -> list[pke.HybridCiphertext]:
    out, off = [], 0
    for _ in range(count):
        ct, off = pke.HybridCiphertext.parse(segment, element_size, off)
        out.append(ct)
    if off != len(segment):
        raise pke.DecryptionFailure("trailing bytes in segment")
    return out


# -- dealer ---------------------------------------------------------------------

PlaintextHook = Callable[[int, int, int, int, EvalWitness], tuple[int, EvalWitness]]
CiphertextHook = Callable[[int, int, int, pke.HybridCiphertext], pke.HybridCiphertext]


class Dealer:
    """Runs the whole dealer role in ``deal``; it never reacts to messages."""

    def __init__(self, n: int, t: int, sp, pks: Sequence, inputs: Sequence[DealerInput],
                 rng: random.Random, me: int | None = None,
                 plaintext_hook: PlaintextHook | None = None,
                 ciphertext_hook: CiphertextHook | None = None):
        if n < 3 * t + 1:
            raise TooFewParties(f"n={n} < 3t+1={3 * t + 1}")
        if len(pks) != n:
            raise TooFewParties(f"need {n} public keys, got {len(pks)}")
        self.n, self.t, self.sp = n, t, sp
        self.pks = list(pks)
        self.inputs = list(inputs)
        self.rng = rng
        self.me = me if me is not None else n + 1
        self.plaintext_hook = plaintext_hook
        self.ciphertext_hook = ciphertext_hook
        self.bivariates: list[BivariatePolynomial] = []
        self.hiding: list[BivariatePolynomial] = []
        self.commitments: list[list[PolyCommitment]] = []
        self.segments: list[bytes] = []

    def start(self) -> Outbox:
        return self.deal()

    def handle(self, sender: int, data: bytes) -> Outbox:
        return []

    def deal(self) -> Outbox:
        n, t, sp = self.n, self.t, self.sp
        grp = sp.group
        segments: list[bytes] = [b""] * (n * len(self.inputs))
        for b, inp in enumerate(self.inputs):
            phi = sample_bivariate(sp.field, list(inp.secrets), t, self.rng)
            phi_hat = BivariatePolynomial.random(sp.field, t, self.rng)
            cols = [phi.column(k) for k in range(1, t + 2)]
            auxes = [CommitAux(phi_hat.column(k)) for k in range(1, t + 2)]
            cs = [sp.commit(col, aux=aux)[0] for col, aux in zip(cols, auxes)]
            self.bivariates.append(phi)
            self.hiding.append(phi_hat)
            self.commitments.append(cs)
            for i in range(1, n + 1):
                cts = []
                for k in range(1, t + 2):
                    w = sp.create_witness(cols[k - 1], auxes[k - 1], i)
                    y = cols[k - 1](i)
                    if self.plaintext_hook:
                        y, w = self.plaintext_hook(b, i, k, y, w)
                    ct = pke.encrypt(grp, self.pks[i - 1], sp.encode_field(y) + sp.encode_witness(w),
                                     self.rng, enc_context(i, b, k))
                    if self.ciphertext_hook:
                        ct = self.ciphertext_hook(b, i, k, ct)
                    cts.append(ct.to_bytes())
                segments[segment_index(i, b, n)] = b"".join(cts)
        self.segments = segments
        rbc_payload = b"".join(sp.encode_commitment(c) for cs in self.commitments for c in cs)
        return rbc_dealer_start(rbc_payload, n, t, RBC_COMMITMENTS) + avid_disperse_start(segments, n, t)


# -- party ------------------------------------------------------------------------

@dataclass
class InstanceState:
    b: int
    commitments: list[PolyCommitment] | None = None
    ext_commitments: list[PolyCommitment] | None = None  # columns 1..n
    valid: bool | None = None
    shares: list[int] | None = None
    witnesses: list[EvalWitness] | None = None
    ok_senders: set[int] = field(default_factory=set)
    ready_senders: set[int] = field(default_factory=set)
    ok_sent: bool = False
    ready_sent: bool = False
    ready_gate: bool = False
    output: OutputShares | None = None
    r1_sent: bool = False
    r1_points: dict[int, tuple[int, EvalWitness]] = field(default_factory=dict)
    r1_rejected: set[int] = field(default_factory=set)
    column: Polynomial | None = None
    r2_points: dict[int, int] = field(default_factory=dict)
    recovered: list[int] | None = None
    buffered: list[tuple[int, Kind, bytes]] = field(default_factory=list)


class AvssParty:
    def __init__(self, me: int, n: int, t: int, batch: int, sp, pks: Sequence, sk: int,
                 dealer: int | None = None):
        if n < 3 * t + 1:
            raise TooFewParties(f"n={n} < 3t+1={3 * t + 1}")
        self.me, self.n, self.t, self.batch = me, n, t, batch
        self.sp = sp
        self.group = sp.group
        self.pks = list(pks)
        self.sk = sk
        self.dealer = dealer if dealer is not None else n + 1
        self.rbc = RbcNode(me, n, t, self.dealer, RBC_COMMITMENTS, self._on_commitments)
        self.avid = AvidNode(me, n, t, self.dealer, self._on_dispersed, self._on_retrieved)
        self.instances = [InstanceState(b) for b in range(batch)]
        self.commitments_ready = False
        self.aborted = False
        self.dispersed = False
        self.implicate_sent = False
        self.processed_accusers: set[int] = set()
        self.pending_evidence: list[ImplicationEvidence] = []
        self.awaiting: dict[int, list[ImplicationEvidence]] = {}
        self.recovery = False
        self.events: list[tuple] = []
        self.dropped = 0

    # -- plumbing --

    @property
    def outputs(self) -> dict[int, OutputShares]:
        return {s.b: s.output for s in self.instances if s.output is not None}

    def _event(self, *ev) -> None:
        self.events.append(ev)

    def start(self) -> Outbox:
        return []

    def handle(self, sender: int, data: bytes) -> Outbox:
        try:
            kind, hdr_sender, receiver, session, payload = unframe(data)
        except MalformedMessage:
            self.dropped += 1
            return []
        if hdr_sender != sender or receiver != self.me or self.aborted:
            self.dropped += 1
            return []
        if kind in (Kind.VAL, Kind.ECHO, Kind.READY_RBC) and session == RBC_COMMITMENTS:
            return self.rbc.handle(sender, kind, payload)
        if kind in (Kind.VAL, Kind.ECHO, Kind.READY_RBC, Kind.FRAG, Kind.FRAG_ACK,
                    Kind.FRAG_READY, Kind.FETCH, Kind.FRAG_REPLY):
            return self.avid.handle(sender, kind, session, payload)
        if not 0 <= session < self.batch:
            self.dropped += 1
            return []
        inst = self.instances[session]
        try:
            if kind == Kind.OK:
                return self.handle_ok(inst, sender)
            if kind == Kind.READY:
                return self.handle_ready(inst, sender)
            if kind == Kind.IMPLICATE:
                return self.handle_implicate(sender, session, payload)
            if kind == Kind.R1:
                return self.handle_r1(inst, sender, payload)
            if kind == Kind.R2:
                return self.handle_r2(inst, sender, payload)
        except (FieldError, MalformedElement, struct.error) as exc:
            log.debug("party %d dropped %s from %d: %s", self.me, kind.name, sender, exc)
            self.dropped += 1
        return []

    # -- broadcast and dispersal results --

    def _on_commitments(self, payload: bytes) -> Outbox:
        size = self.sp.commitment_size()
        per = self.t + 1
        if len(payload) != size * per * self.batch:
            self.aborted = True
            self._event("abort", "commitment payload size")
            return []
        try:
            cs = [self.sp.decode_commitment(payload[j * size:(j + 1) * size])
                  for j in range(per * self.batch)]
        except (MalformedElement, ValueError):
            self.aborted = True
            self._event("abort", "malformed commitment")
            return []
        for inst in self.instances:
            inst.commitments = cs[inst.b * per:(inst.b + 1) * per]
        self.commitments_ready = True
        self._event("commitments")
        return self._after_inputs()

    def _on_dispersed(self) -> Outbox:
        self.dispersed = True
        self._event("dispersed")
        return self._after_inputs()

    def _after_inputs(self) -> Outbox:
        if not (self.commitments_ready and self.dispersed):
            return []
        out: Outbox = []
        for inst in self.instances:
            out += self.avid.retrieve(segment_index(self.me, inst.b, self.n))
        out += self._drain_evidence()
        if self.recovery:
            for inst in self.instances:
                out += self.begin_recovery(inst)
        return out

    def _on_retrieved(self, seg: int, value: bytes | None) -> Outbox:
        party, b = segment_owner(seg, self.n)
        out: Outbox = []
        if party == self.me and b < self.batch and self.instances[b].valid is None:
            out += self.validate_payload(self.instances[b], value)
        for ev in self.awaiting.pop(seg, []):
            out += self._judge_evidence(ev, value)
        return out

    # -- validation --

    def _open_slot(self, segment: bytes | None, owner: int, sk: int, b: int,
                   k: int) -> tuple[int, EvalWitness]:
        """Decrypt and parse slot k of a segment; raises on any failure."""
        if segment is None:
            raise pke.DecryptionFailure("segment not retrievable")
        cts = _split_ciphertexts(segment, self.t + 1, self.group.element_size)
        plain = pke.decrypt(self.group, sk, cts[k - 1], enc_context(owner, b, k))
        if len(plain) != 32 + self.sp.witness_size():
            raise pke.DecryptionFailure("bad plaintext length")
        return self.sp.decode_field(plain[:32]), self.sp.decode_witness(plain[32:])

    def validate_payload(self, inst: InstanceState, segment: bytes | None) -> Outbox:
        """Decrypt and check own shares; OK on success, IMPLICATE on the first failure."""
        t = self.t
        opened: list[tuple[int, EvalWitness] | None] = []
        for k in range(1, t + 2):
            try:
                opened.append(self._open_slot(segment, self.me, self.sk, inst.b, k))
            except (pke.DecryptionFailure, FieldError, MalformedElement, ValueError):
                opened.append(None)
        bad = next((k for k, o in enumerate(opened, 1) if o is None), None)
        if bad is None:
            items = [(inst.commitments[k], y, w) for k, (y, w) in enumerate(opened)]
            if not self.sp.batch_verify_eval(items, self.me):
                bad = next(k for k, (c, y, w) in enumerate(items, 1)
                           if not self.sp.verify_eval(c, self.me, y, w))
        out: Outbox = []
        if bad is None:
            inst.valid = True
            inst.shares = [y for y, _ in opened]
            inst.witnesses = [w for _, w in opened]
            inst.ok_sent = True
            self._event("validated", inst.b, True)
            out += multicast(self.n, Kind.OK, inst.b)
        else:
            inst.valid = False
            self._event("validated", inst.b, False, bad)
            if not self.implicate_sent:
                self.implicate_sent = True
                self._event("implicate_sent", inst.b, bad)
                payload = self.sp.encode_field(self.sk) + struct.pack("<H", bad)
                out += multicast(self.n, Kind.IMPLICATE, inst.b, payload)
        if self.recovery:
            out += self.begin_recovery(inst)
        out += self._try_recover(inst)
        return out + self._try_output(inst)

    # -- agreement --

    def handle_ok(self, inst: InstanceState, sender: int) -> Outbox:
        if sender in inst.ok_senders:
            return []
        inst.ok_senders.add(sender)
        if len(inst.ok_senders) >= 2 * self.t + 1 and not inst.ready_sent:
            inst.ready_sent = True
            self._event("ready_sent", inst.b, "ok")
            return multicast(self.n, Kind.READY, inst.b)
        return []

    def handle_ready(self, inst: InstanceState, sender: int) -> Outbox:
        if sender in inst.ready_senders:
            return []
        inst.ready_senders.add(sender)
        out: Outbox = []
        if len(inst.ready_senders) >= self.t + 1 and not inst.ready_sent:
            inst.ready_sent = True
            self._event("ready_sent", inst.b, "amplify")
            out += multicast(self.n, Kind.READY, inst.b)
        if len(inst.ready_senders) >= 2 * self.t + 1 and not inst.ready_gate:
            inst.ready_gate = True
            self._event("ready_gate", inst.b, len(inst.ready_senders))
        return out + self._try_output(inst)

    def _try_output(self, inst: InstanceState) -> Outbox:
        if inst.output is not None or not inst.ready_gate:
            return []
        if inst.valid:
            inst.output = OutputShares(inst.b, tuple(inst.shares), tuple(inst.witnesses), "normal")
        elif inst.recovered is not None:
            inst.output = OutputShares(inst.b, tuple(inst.recovered), None, "recovery")
        else:
            return []
        self._event("output", inst.b, inst.output.path)
        return []

    # -- implication --

    def handle_implicate(self, sender: int, b: int, payload: bytes) -> Outbox:
        if len(payload) != 34 or sender in self.processed_accusers:
            return []
        sk = int.from_bytes(payload[:32], "little")
        (k,) = struct.unpack("<H", payload[32:])
        if not pke.verify_key(self.group, self.pks[sender - 1], sk):
            self._event("implication", sender, "bad-key")
            return []
        self.processed_accusers.add(sender)
        if not 1 <= k <= self.t + 1:
            self._event("implication", sender, "discarded")
            return []
        self.pending_evidence.append(ImplicationEvidence(sender, sk, b, k))
        return self._drain_evidence()

    def _drain_evidence(self) -> Outbox:
        if not (self.commitments_ready and self.dispersed):
            return []
        out: Outbox = []
        pending, self.pending_evidence = self.pending_evidence, []
        for ev in pending:
            seg = segment_index(ev.accuser, ev.instance, self.n)
            self.awaiting.setdefault(seg, []).append(ev)
            out += self.avid.retrieve(seg)
        return out

    def _judge_evidence(self, ev: ImplicationEvidence, segment: bytes | None) -> Outbox:
        try:
            y, w = self._open_slot(segment, ev.accuser, ev.sk, ev.instance, ev.k)
            c = self.instances[ev.instance].commitments[ev.k - 1]
            confirmed = not self.sp.verify_eval(c, ev.accuser, y, w)
        except (pke.DecryptionFailure, FieldError, MalformedElement, ValueError):
            confirmed = True
        self._event("implication", ev.accuser, "confirmed" if confirmed else "discarded")
        if not confirmed:
            return []
        return self._enter_recovery()

    # -- recovery --

    def _enter_recovery(self) -> Outbox:
        if self.recovery:
            return []
        self.recovery = True
        self._event("recovery_start")
        out: Outbox = []
        for inst in self.instances:
            out += self.begin_recovery(inst)
        return out

    def begin_recovery(self, inst: InstanceState) -> Outbox:
        if not self.recovery or inst.commitments is None:
            return []
        out: Outbox = []
        if inst.ext_commitments is None:
            inst.ext_commitments = self.sp.interpolate_commitments(
                inst.commitments, range(1, self.n + 1))
            buffered, inst.buffered = inst.buffered, []
            for sender, kind, payload in buffered:
                handler = self.handle_r1 if kind == Kind.R1 else self.handle_r2
                try:
                    out += handler(inst, sender, payload)
                except (FieldError, MalformedElement, struct.error) as exc:
                    log.debug("party %d dropped buffered %s from %d: %s",
                              self.me, kind.name, sender, exc)
                    self.dropped += 1
        if inst.valid and not inst.r1_sent:
            inst.r1_sent = True
            f = self.sp.field
            row = lagrange_interpolate(f, list(zip(range(1, self.t + 2), inst.shares)), self.t)
            wits = self.sp.interpolate_witnesses(inst.witnesses, range(1, self.n + 1))
            self._event("r1_sent", inst.b)
            for j in range(1, self.n + 1):
                payload = (struct.pack("<H", j) + f.encode(row(j))
                           + self.sp.encode_witness(wits[j - 1]))
                out.append(Msg(j, Kind.R1, inst.b, payload))
        return out

    def handle_r1(self, inst: InstanceState, sender: int, payload: bytes) -> Outbox:
        if inst.ext_commitments is None:
            if len(inst.buffered) < 4 * self.n:
                inst.buffered.append((sender, Kind.R1, bytes(payload)))
            return []
        if inst.column is not None or sender in inst.r1_points or sender in inst.r1_rejected:
            return []
        (col,) = struct.unpack("<H", payload[:2])
        value = self.sp.decode_field(payload[2:34])
        wit = self.sp.decode_witness(payload[34:])
        if col != self.me or not self.sp.verify_eval(inst.ext_commitments[self.me - 1],
                                                     sender, value, wit):
            inst.r1_rejected.add(sender)
            return []
        inst.r1_points[sender] = (value, wit)
        if len(inst.r1_points) < self.t + 1:
            return []
        pts = [(k, v) for k, (v, _) in sorted(inst.r1_points.items())]
        inst.column = lagrange_interpolate(self.sp.field, pts, self.t)
        self._event("column", inst.b, tuple(sorted(inst.r1_points)))
        f = self.sp.field
        return [Msg(j, Kind.R2, inst.b, struct.pack("<H", self.me) + f.encode(inst.column(j)))
                for j in range(1, self.n + 1)]

    def handle_r2(self, inst: InstanceState, sender: int, payload: bytes) -> Outbox:
        if inst.ext_commitments is None:
            if len(inst.buffered) < 4 * self.n:
                inst.buffered.append((sender, Kind.R2, bytes(payload)))
            return []
        if sender in inst.r2_points or len(payload) != 34:
            return []
        (col,) = struct.unpack("<H", payload[:2])
        if col != sender:
            return []
        inst.r2_points[sender] = self.sp.decode_field(payload[2:])
        return self._try_recover(inst)

    def _try_recover(self, inst: InstanceState) -> Outbox:
        if inst.valid is not False or inst.recovered is not None:
            return []
        if len(inst.r2_points) < 2 * self.t + 1:
            return []
        pts = sorted(inst.r2_points.items())
        try:
            row = robust_interpolate(self.sp.field, pts, self.t, 2 * self.t + 1)
        except NotYetDecodable:
            return []
        inst.recovered = [row(k) for k in range(1, self.t + 2)]
        self._event("r2_decoded", inst.b, len(pts))
        return self._try_output(inst)
