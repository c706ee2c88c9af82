"""Deterministic asynchronous network simulator with fault injection and metering.

A run wires one dealer and ``n`` parties to a single message pool. The
scheduler picks which pending message is delivered next; the pool is drained
completely (quiescence). Every delivery is recorded as a trace line, bytes are
metered from the framed encodings, and invariant checks turn the run into a
verdict table.

Byzantine parties are wrappers around honest :class:`~hbavss.avss.AvssParty`
objects that rewrite, add or drop outgoing messages.
"""

from __future__ import annotations

import hashlib
import logging
import random
import struct
from collections import Counter, deque
from dataclasses import dataclass, field
from typing import Sequence

from . import pke
from .avss import AvssParty, Dealer, DealerInput, OutputShares, segment_owner
from .codes import HASH_NAME
from .fieldmath import FieldError, Polynomial, interpolate_at, lagrange_interpolate
from .polycommit import setup
from .rbc_avid import RbcNode, rbc_dealer_start
from .wire import HEADER_BYTES, RBC_COMMITMENTS, Kind, Msg, frame, multicast, unframe

log = logging.getLogger(__name__)

SCHEDULERS = ("fifo", "random", "adversarial-delay")
DEALER_FAULTS = ("honest", "garble", "wrong-shares", "crash-after-first-round", "partial")
PARTY_FAULTS = ("honest", "crash", "silent", "spurious-implicate", "lie-r1", "lie-r2", "equivocate")
PHASES = ("broadcast", "dispersal", "agreement", "implication", "recovery")


class ScenarioError(ValueError):
    pass


class NonQuiescent(RuntimeError):
    """With an honest dealer, a correct party went idle without output."""


def _parse_set(arg: str) -> frozenset[int]:
    try:
        return frozenset(int(x) for x in arg.split(",") if x.strip())
    except ValueError:
        raise ScenarioError(f"bad party list {arg!r}") from None


@dataclass(frozen=True)
class Scenario:
    """One run. Fault strings: ``kind`` or ``kind:arg`` (see DEALER_FAULTS/PARTY_FAULTS)."""

    n: int
    t: int
    batch: int = 1
    seed: int = 0
    scheduler: str = "random"
    backend: str = "pairing"
    dealer_fault: str = "honest"
    party_faults: tuple[tuple[int, str], ...] = ()
    trials: int = 1

    def __post_init__(self):
        if self.t < 1 or self.n < 3 * self.t + 1:
            raise ScenarioError(f"need t >= 1 and n >= 3t+1, got n={self.n}, t={self.t}")
        if self.batch < 1:
            raise ScenarioError("batch must be >= 1")
        if self.trials < 1:
            raise ScenarioError("trials must be >= 1")
        if self.backend not in ("pairing", "dlog"):
            raise ScenarioError(f"unknown backend {self.backend!r}")
        sched, _, arg = self.scheduler.partition(":")
        if sched not in SCHEDULERS:
            raise ScenarioError(f"unknown scheduler {self.scheduler!r}")
        if sched == "adversarial-delay" and not self.delayed:
            raise ScenarioError("adversarial-delay needs a target list")
        if any(not 1 <= j <= self.n for j in self.delayed):
            raise ScenarioError("delay target out of range")
        kind, _, arg = self.dealer_fault.partition(":")
        if kind not in DEALER_FAULTS:
            raise ScenarioError(f"unknown dealer fault {self.dealer_fault!r}")
        if any(not 1 <= j <= self.n for j in self.dealer_targets):
            raise ScenarioError("dealer fault target out of range")
        seen = set()
        for idx, beh in self.party_faults:
            if not 1 <= idx <= self.n or idx in seen:
                raise ScenarioError(f"bad faulty party index {idx}")
            seen.add(idx)
            kind, _, arg = beh.partition(":")
            if kind not in PARTY_FAULTS:
                raise ScenarioError(f"unknown party fault {beh!r}")
            if kind == "crash":
                try:
                    int(arg or 0)
                except ValueError:
                    raise ScenarioError(f"bad crash point {beh!r}") from None
        if len(self.faulty) > self.t:
            raise ScenarioError(f"{len(self.faulty)} faulty parties exceed t={self.t}")

    @property
    def delayed(self) -> frozenset[int]:
        sched, _, arg = self.scheduler.partition(":")
        return _parse_set(arg) if sched == "adversarial-delay" else frozenset()

    @property
    def dealer_kind(self) -> str:
        return self.dealer_fault.partition(":")[0]

    @property
    def dealer_targets(self) -> frozenset[int]:
        return _parse_set(self.dealer_fault.partition(":")[2])

    @property
    def faulty(self) -> frozenset[int]:
        return frozenset(i for i, beh in self.party_faults if beh != "honest")

    @property
    def correct(self) -> list[int]:
        return [i for i in range(1, self.n + 1) if i not in self.faulty]

    def with_seed(self, seed: int) -> "Scenario":
        return Scenario(self.n, self.t, self.batch, seed, self.scheduler, self.backend,
                        self.dealer_fault, self.party_faults, self.trials)

    def digest(self) -> str:
        text = repr((self.n, self.t, self.batch, self.seed, self.scheduler, self.backend,
                     self.dealer_fault, self.party_faults))
        return hashlib.sha256(text.encode()).hexdigest()[:16]


# -- Byzantine wrappers ----------------------------------------------------------

class Wrapper:
    def __init__(self, inner: AvssParty):
        self.inner = inner
        self.me = inner.me

    def start(self) -> list[Msg]:
        return self.mutate(self.inner.start())

    def handle(self, sender: int, data: bytes) -> list[Msg]:
        return self.mutate(self.inner.handle(sender, data))

    def mutate(self, out: list[Msg]) -> list[Msg]:
        return out


class Crash(Wrapper):
    """Behaves honestly for ``after`` deliveries, then falls permanently silent."""

    def __init__(self, inner: AvssParty, after: int):
        super().__init__(inner)
        self.after = after
        self.seen = 0

    def handle(self, sender: int, data: bytes) -> list[Msg]:
        self.seen += 1
        if self.seen > self.after:
            return []
        return super().handle(sender, data)


class Silent(Wrapper):
    def handle(self, sender: int, data: bytes) -> list[Msg]:
        self.inner.handle(sender, data)
        return []


class SpuriousImplicate(Wrapper):
    """Honest (including OK), plus an IMPLICATE with its real key in every instance."""

    def __init__(self, inner: AvssParty):
        super().__init__(inner)
        self.sent: set[int] = set()

    def mutate(self, out: list[Msg]) -> list[Msg]:
        extra = []
        for m in out:
            if m.kind == Kind.OK and m.session not in self.sent:
                self.sent.add(m.session)
                sp = self.inner.sp
                payload = sp.encode_field(self.inner.sk) + struct.pack("<H", 1)
                extra += multicast(self.inner.n, Kind.IMPLICATE, m.session, payload)
        return out + extra


class LieR1(Wrapper):
    """Shifts every R1 value; the witness no longer matches."""

    def mutate(self, out: list[Msg]) -> list[Msg]:
        f = self.inner.sp.field
        res = []
        for m in out:
            if m.kind == Kind.R1:
                v = f.decode(m.payload[2:34])
                m = Msg(m.receiver, m.kind, m.session,
                        m.payload[:2] + f.encode(f.add(v, 1)) + m.payload[34:])
            res.append(m)
        return res


class LieR2(Wrapper):
    """Sends a different wrong R2 value to every receiver."""

    def mutate(self, out: list[Msg]) -> list[Msg]:
        f = self.inner.sp.field
        res = []
        for m in out:
            if m.kind == Kind.R2:
                v = f.decode(m.payload[2:34])
                m = Msg(m.receiver, m.kind, m.session,
                        m.payload[:2] + f.encode(f.add(v, m.receiver + 1)))
            res.append(m)
        return res


class Equivocate(Wrapper):
    """Even-numbered receivers get corrupted payloads; votes to them are dropped."""

    def mutate(self, out: list[Msg]) -> list[Msg]:
        res = []
        for m in out:
            if m.receiver % 2 == 0:
                if m.kind in (Kind.OK, Kind.READY, Kind.FRAG_ACK, Kind.FRAG_READY):
                    continue
                if m.payload:
                    p = bytearray(m.payload)
                    p[-1] ^= 0x5A
                    m = Msg(m.receiver, m.kind, m.session, bytes(p))
            res.append(m)
        return res


def _wrap(party: AvssParty, behavior: str):
    kind, _, arg = behavior.partition(":")
    if kind == "honest":
        return party
    if kind == "crash":
        return Crash(party, int(arg or 0))
    if kind == "silent":
        return Silent(party)
    if kind == "spurious-implicate":
        return SpuriousImplicate(party)
    if kind == "lie-r1":
        return LieR1(party)
    if kind == "lie-r2":
        return LieR2(party)
    return Equivocate(party)


class PartialDealer:
    """Dealer whose first-round messages reach only ``targets``."""

    def __init__(self, dealer: Dealer, targets: frozenset[int]):
        self.inner = dealer
        self.me = dealer.me
        self.targets = targets

    def start(self) -> list[Msg]:
        return [m for m in self.inner.start() if m.receiver in self.targets]

    def handle(self, sender: int, data: bytes) -> list[Msg]:
        return []


# -- scheduling -------------------------------------------------------------------

@dataclass
class Envelope:
    seq: int
    sender: int
    receiver: int
    data: bytes


class Pool:
    """Pending messages; ``pop`` realises the scheduling policy."""

    def __init__(self, policy: str, rng: random.Random, delayed: frozenset[int]):
        self.policy = policy.partition(":")[0]
        self.rng = rng
        self.delayed = delayed
        self.fifo: deque[Envelope] = deque()
        self.free: list[Envelope] = []
        self.held: list[Envelope] = []

    def __len__(self) -> int:
        return len(self.fifo) + len(self.free) + len(self.held)

    def push(self, env: Envelope) -> None:
        if self.policy == "fifo":
            self.fifo.append(env)
        elif self.policy == "adversarial-delay" and env.receiver in self.delayed:
            self.held.append(env)
        else:
            self.free.append(env)

    def _take(self, items: list[Envelope]) -> Envelope:
        j = self.rng.randrange(len(items))
        items[j], items[-1] = items[-1], items[j]
        return items.pop()

    def pop(self) -> Envelope:
        if self.policy == "fifo":
            return self.fifo.popleft()
        if self.free:
            return self._take(self.free)
        return self._take(self.held)


# -- trace and metrics --------------------------------------------------------------

@dataclass(frozen=True)
class TraceRecord:
    step: int
    kind: Kind
    sender: int
    receiver: int
    instance: int
    nbytes: int

    def line(self) -> str:
        return f"{self.step},{self.kind.name},{self.sender},{self.receiver},{self.instance},{self.nbytes}"


@dataclass
class Metrics:
    counts: dict[str, int] = field(default_factory=dict)
    kind_bytes: dict[str, int] = field(default_factory=dict)
    phase_bytes: dict[str, int] = field(default_factory=lambda: dict.fromkeys(PHASES, 0))
    total_bytes: int = 0
    messages: int = 0
    self_messages: int = 0
    secrets: int = 0
    waste: int = 0
    hash_name: str = HASH_NAME

    @property
    def bytes_per_secret(self) -> float:
        return self.total_bytes / self.secrets if self.secrets else 0.0


def phase_of(rec: TraceRecord, n: int) -> str:
    k = rec.kind
    if k in (Kind.VAL, Kind.ECHO, Kind.READY_RBC):
        return "broadcast" if rec.instance == RBC_COMMITMENTS else "dispersal"
    if k in (Kind.FRAG, Kind.FRAG_ACK, Kind.FRAG_READY):
        return "dispersal"
    if k in (Kind.FETCH, Kind.FRAG_REPLY):
        requester = rec.sender if k == Kind.FETCH else rec.receiver
        owner, _ = segment_owner(rec.instance, n)
        return "dispersal" if owner == requester else "implication"
    if k in (Kind.OK, Kind.READY):
        return "agreement"
    if k == Kind.IMPLICATE:
        return "implication"
    return "recovery"


def account(trace: Sequence[TraceRecord], n: int = 0, batch: int = 1, t: int = 0) -> Metrics:
    """Byte and message totals. Loopback deliveries (a party to itself) are free."""
    m = Metrics(secrets=batch * (t + 1) if trace else 0)
    counts: Counter = Counter()
    kbytes: Counter = Counter()
    for rec in trace:
        if rec.sender == rec.receiver:
            m.self_messages += 1
            continue
        counts[rec.kind.name] += 1
        kbytes[rec.kind.name] += rec.nbytes
        m.phase_bytes[phase_of(rec, n)] += rec.nbytes
        m.total_bytes += rec.nbytes
        m.messages += 1
    m.counts = dict(sorted(counts.items()))
    m.kind_bytes = dict(sorted(kbytes.items()))
    return m


def trace_hash(trace: Sequence[TraceRecord]) -> str:
    h = hashlib.sha256()
    for rec in trace:
        h.update(rec.line().encode() + b"\n")
    return h.hexdigest()


# -- run ------------------------------------------------------------------------------

@dataclass
class RunResult:
    scenario: Scenario
    trace: list[TraceRecord]
    metrics: Metrics
    verdicts: dict[str, bool]
    outputs: dict[int, dict[int, OutputShares]]
    events: dict[int, list[tuple]]
    secrets: list[tuple[int, ...]]
    dealer: Dealer
    parties: dict[int, AvssParty]
    sp: object

    @property
    def passed(self) -> bool:
        return all(self.verdicts.values())

    @property
    def trace_hash(self) -> str:
        return trace_hash(self.trace)


def drive(nodes: dict, pool: Pool, starts: list[tuple[int, list[Msg]]],
          max_steps: int = 50_000_000, after=None) -> list[TraceRecord]:
    """Deliver until the pool is empty; returns the delivery trace."""
    seq = 0

    def post(sender: int, msgs: list[Msg]) -> None:
        nonlocal seq
        for m in msgs:
            pool.push(Envelope(seq, sender, m.receiver,
                               frame(m.kind, sender, m.receiver, m.session, m.payload)))
            seq += 1

    for sender, msgs in starts:
        post(sender, msgs)
    trace: list[TraceRecord] = []
    step = 0
    while len(pool):
        if step >= max_steps:
            raise NonQuiescent(f"step budget {max_steps} exhausted")
        env = pool.pop()
        kind, _, _, session, _ = unframe(env.data)
        trace.append(TraceRecord(step, kind, env.sender, env.receiver, session, len(env.data)))
        node = nodes.get(env.receiver)
        if node is not None:
            post(env.receiver, node.handle(env.sender, env.data))
            if after is not None:
                after(step, env.receiver)
        step += 1
    return trace


def build(sc: Scenario):
    """Instantiate parameters, keys, dealer and parties for a scenario."""
    rng = random.Random(sc.seed)
    sp = setup(sc.t, rng, sc.backend)
    keys = [pke.keygen(sp.group, rng) for _ in range(sc.n)]
    pks = [k.pk for k in keys]
    secrets = [tuple(sp.field.random(rng) for _ in range(sc.t + 1)) for _ in range(sc.batch)]
    targets = sc.dealer_targets
    t = sc.t
    f = sp.field
    pt_hook = ct_hook = None
    if sc.dealer_kind == "wrong-shares":
        def pt_hook(b, i, k, y, w):
            return (f.add(y, 1), w) if i in targets and k == t + 1 else (y, w)
    elif sc.dealer_kind == "garble":
        def ct_hook(b, i, k, ct):
            if i in targets and k == t + 1:
                body = bytearray(ct.body)
                body[0] ^= 0x01
                return pke.HybridCiphertext(ct.ephemeral, bytes(body), ct.tag)
            return ct
    dealer = Dealer(sc.n, sc.t, sp, pks, [DealerInput(s) for s in secrets], rng,
                    plaintext_hook=pt_hook, ciphertext_hook=ct_hook)
    parties = {i: AvssParty(i, sc.n, sc.t, sc.batch, sp, pks, keys[i - 1].sk)
               for i in range(1, sc.n + 1)}
    return rng, sp, secrets, dealer, parties


def run(sc: Scenario, max_steps: int = 50_000_000, check_liveness: bool = True) -> RunResult:
    rng, sp, secrets, dealer, parties = build(sc)
    behaviors = dict(sc.party_faults)
    nodes: dict[int, object] = {i: _wrap(p, behaviors.get(i, "honest")) for i, p in parties.items()}
    dnode = PartialDealer(dealer, sc.dealer_targets) if sc.dealer_kind == "partial" else dealer
    nodes[dealer.me] = dnode
    pool = Pool(sc.scheduler, random.Random(rng.getrandbits(64)), sc.delayed)
    events: dict[int, list[tuple]] = {i: [] for i in parties}
    consumed = dict.fromkeys(parties, 0)

    def collect(step: int, receiver: int) -> None:
        p = parties.get(receiver)
        if p is not None:
            for ev in p.events[consumed[receiver]:]:
                events[receiver].append((step,) + ev)
            consumed[receiver] = len(p.events)

    starts = [(dealer.me, dnode.start())] + [(i, nodes[i].start()) for i in sorted(parties)]
    trace = drive(nodes, pool, starts, max_steps, collect)

    metrics = account(trace, sc.n, sc.batch, sc.t)
    metrics.waste = sum(p.rbc.waste + p.avid.waste + p.avid.rbc.waste for p in parties.values())
    outputs = {i: parties[i].outputs for i in sc.correct}
    result = RunResult(sc, trace, metrics, {}, outputs, events, secrets, dealer, parties, sp)
    result.verdicts = evaluate(result)
    honest_dealer = sc.dealer_kind in ("honest", "crash-after-first-round")
    if check_liveness and honest_dealer and not result.verdicts["correct_parties_output"]:
        missing = [i for i in sc.correct if len(outputs[i]) < sc.batch]
        raise NonQuiescent(f"seed {sc.seed}: parties {missing} idle without output")
    return result


# -- verdicts ------------------------------------------------------------------------

def _bivariate_rows(field, rows: dict[int, tuple[int, ...]], t: int):
    """Check rows lie on one degree-(t,t) bivariate; returns its coefficient view or None.

    The bivariate is identified by its values on the grid (x in first t+1
    parties, y in 1..t+1); two row sets agree iff these grids agree.
    """
    parties = sorted(rows)
    if len(parties) < t + 1:
        return None
    base = parties[: t + 1]
    for k in range(t + 1):
        pts = [(i, rows[i][k]) for i in parties]
        try:
            lagrange_interpolate(field, pts, t)
        except FieldError:
            return False
    return tuple(tuple(rows[i]) for i in base), tuple(base)


def _value_at(field, rows: dict[int, tuple[int, ...]], x: int, k: int, t: int) -> int:
    pts = [(i, rows[i][k]) for i in sorted(rows)[: t + 1]]
    return interpolate_at(field, pts, x)


def evaluate(res: RunResult) -> dict[str, bool]:
    sc, sp = res.scenario, res.sp
    f, t, n = sp.field, sc.t, sc.n
    honest_dealer = sc.dealer_kind in ("honest", "crash-after-first-round")
    correct = sc.correct
    v = dict.fromkeys(["correct_parties_output", "correctness", "agreement", "bivariate_consistency",
                       "strong_commitment", "claim1", "claim2", "outputs_verify", "secrecy"], True)
    for b in range(sc.batch):
        outs = {i: res.outputs[i][b] for i in correct if b in res.outputs[i]}
        if len(outs) != len(correct):
            v["correct_parties_output"] = False
            if outs:
                v["agreement"] = False
        if not outs:
            continue
        rows = {i: o.shares for i, o in outs.items()}
        if len(rows) >= t + 1:
            if _bivariate_rows(f, rows, t) is False:
                v["bivariate_consistency"] = False
            else:
                # first vs last t+1 outputs, by output step
                order = sorted(outs, key=lambda i: _output_step(res.events[i], b))
                first = {i: rows[i] for i in order[: t + 1]}
                last = {i: rows[i] for i in order[-(t + 1):]}
                for x in range(0, n + 1):
                    for k in range(t + 1):
                        if _value_at(f, first, x, k, t) != _value_at(f, last, x, k, t):
                            v["strong_commitment"] = False
                if honest_dealer:
                    for k in range(t + 1):
                        if _value_at(f, rows, 0, k, t) != res.secrets[b][k]:
                            v["correctness"] = False
        cs = res.parties[correct[0]].instances[b].commitments
        for i, o in outs.items():
            if o.witnesses is not None:
                items = [(cs[k], o.shares[k], o.witnesses[k]) for k in range(t + 1)]
                if not all(sp.verify_eval(c, i, y, w) for c, y, w in items):
                    v["outputs_verify"] = False
            elif len(rows) >= t + 1:
                # recovered rows carry no witness: they must sit on the bivariate
                # fixed by the witnessed rows
                witnessed = {j: r for j, r in rows.items() if outs[j].witnesses is not None}
                if len(witnessed) < t + 1 or any(
                        _value_at(f, witnessed, i, k, t) != o.shares[k] for k in range(t + 1)):
                    v["outputs_verify"] = False
        gates = [i for i in correct if any(e[1] == "ready_gate" and e[2] == b for e in res.events[i])]
        if len(gates) != len(correct):
            v["claim1"] = False
        valid = [i for i in correct
                 if any(e[1] == "validated" and e[2] == b and e[3] for e in res.events[i])]
        if len(valid) < t + 1:
            v["claim2"] = False
    if honest_dealer:
        for i in correct:
            if any(e[1] in ("recovery_start",) or (e[1] == "implication" and e[3] == "confirmed")
                   for e in res.events[i]):
                v["secrecy"] = False
    if honest_dealer and not v["correct_parties_output"]:
        v["correctness"] = False
    if not honest_dealer and not any(res.outputs[i] for i in correct):
        # a faulty dealer may legitimately leave everyone without output
        v["correct_parties_output"] = True
    return v


def _output_step(events: list[tuple], b: int) -> int:
    return next((e[0] for e in events if e[1] == "output" and e[2] == b), -1)


# -- fuzzing ----------------------------------------------------------------------------

@dataclass
class FuzzReport:
    trials: int
    failures: list[tuple[int, str]] = field(default_factory=list)  # (seed, reason)
    verdict_failures: Counter = field(default_factory=Counter)

    @property
    def passed(self) -> bool:
        return not self.failures


def trial_seeds(master: int, trials: int) -> list[int]:
    rng = random.Random(master)
    return [rng.getrandbits(48) for _ in range(trials)]


def schedule_fuzz(template: Scenario, trials: int | None = None, runner=run) -> FuzzReport:
    trials = template.trials if trials is None else trials
    if trials < 1:
        raise ScenarioError("trials must be >= 1")
    report = FuzzReport(trials)
    for seed in trial_seeds(template.seed, trials) if trials > 1 else [template.seed]:
        sc = template.with_seed(seed)
        try:
            res = runner(sc)
        except NonQuiescent as exc:
            report.failures.append((seed, f"non-quiescent: {exc}"))
            continue
        bad = [k for k, ok in res.verdicts.items() if not ok]
        if bad:
            report.verdict_failures.update(bad)
            report.failures.append((seed, ",".join(bad)))
    return report


# -- reliable broadcast in isolation ------------------------------------------------------

RBC_DEALERS = ("honest", "equivocate", "inconsistent", "partial")


class _RbcAdapter:
    def __init__(self, node: RbcNode):
        self.node = node

    def handle(self, sender: int, data: bytes) -> list[Msg]:
        try:
            kind, hdr_sender, _, _, payload = unframe(data)
        except ValueError:
            return []
        if hdr_sender != sender:
            return []
        return self.node.handle(sender, kind, payload)


class _ByzantineRbc:
    """Echoes a corrupted shard and votes READY for a bogus root."""

    def __init__(self, me: int, n: int, session: int, rng: random.Random):
        self.me, self.n, self.session = me, n, session
        self.rng = rng
        self.done = False

    def handle(self, sender: int, data: bytes) -> list[Msg]:
        if self.done:
            return []
        self.done = True
        kind, _, _, _, payload = unframe(data)
        bogus = self.rng.getrandbits(256).to_bytes(32, "little")
        out = multicast(self.n, Kind.READY_RBC, self.session, bogus)
        if kind == Kind.VAL and payload:
            p = bytearray(payload)
            p[-1] ^= 0xFF
            out += multicast(self.n, Kind.ECHO, self.session, bytes(p))
        return out


@dataclass
class RbcTrial:
    seed: int
    dealer: str
    delivered: dict[int, bytes | None]
    sent: list[bytes]

    @property
    def agreement(self) -> bool:
        vals = {v for v in self.delivered.values() if v is not None}
        return len(vals) <= 1

    @property
    def totality(self) -> bool:
        got = [v is not None for v in self.delivered.values()]
        return all(got) or not any(got)

    @property
    def validity(self) -> bool:
        if self.dealer != "honest":
            return True
        return all(v == self.sent[0] for v in self.delivered.values())


def _inconsistent_start(n: int, f: int, session: int, rng: random.Random) -> list[Msg]:
    """Shards that do not form a codeword, committed under one valid Merkle tree."""
    from .codes import MerkleTree, Shard, shard_size
    from .rbc_avid import _encode_leaf

    size = shard_size(32, n - 2 * f)
    shards = [Shard(j, rng.randbytes(size)) for j in range(1, n + 1)]
    tree = MerkleTree([s.to_bytes() for s in shards])
    return [Msg(j, Kind.VAL, session, _encode_leaf(tree.root, shards[j - 1], tree.branch(j - 1)))
            for j in range(1, n + 1)]


def rbc_trial(n: int, f: int, seed: int, dealer: str = "honest", byzantine: int | None = None) -> RbcTrial:
    """One broadcast with ``byzantine`` (default f) corrupted parties under a random schedule."""
    if dealer not in RBC_DEALERS:
        raise ScenarioError(f"unknown RBC dealer {dealer!r}")
    rng = random.Random(seed)
    nb = f if byzantine is None else byzantine
    bad = set(rng.sample(range(1, n + 1), nb))
    session = RBC_COMMITMENTS
    me_dealer = n + 1
    delivered: dict[int, bytes | None] = {i: None for i in range(1, n + 1) if i not in bad}

    def deliver_cb(i):
        def cb(value: bytes) -> list[Msg]:
            delivered[i] = value
            return []
        return cb

    nodes: dict[int, object] = {}
    for i in range(1, n + 1):
        if i in bad:
            nodes[i] = _ByzantineRbc(i, n, session, rng)
        else:
            nodes[i] = _RbcAdapter(RbcNode(i, n, f, me_dealer, session, deliver_cb(i)))
    a, b = rng.randbytes(rng.randrange(1, 200)), rng.randbytes(rng.randrange(1, 200))
    if dealer == "honest":
        start, sent = rbc_dealer_start(a, n, f, session), [a]
    elif dealer == "equivocate":
        split = set(rng.sample(range(1, n + 1), rng.randrange(0, n + 1)))
        start = ([m for m in rbc_dealer_start(a, n, f, session) if m.receiver in split]
                 + [m for m in rbc_dealer_start(b, n, f, session) if m.receiver not in split])
        sent = [a, b]
    elif dealer == "inconsistent":
        start, sent = _inconsistent_start(n, f, session, rng), []
    else:
        keep = set(rng.sample(range(1, n + 1), rng.randrange(0, n + 1)))
        start = [m for m in rbc_dealer_start(a, n, f, session) if m.receiver in keep]
        sent = [a]
    pool = Pool("random", random.Random(rng.getrandbits(64)), frozenset())
    drive(nodes, pool, [(me_dealer, start)])
    return RbcTrial(seed, dealer, delivered, sent)
