import math
import random

import pytest

from hbavss.rbc_avid import AvidNode, RbcNode, avid_disperse_start, rbc_dealer_start
from hbavss.simnet import Pool, account, drive, rbc_trial
from hbavss.wire import Kind, Msg, unframe

DEALER = 99


class Adapter:
    def __init__(self, node, avid=False):
        self.node, self.avid = node, avid

    def handle(self, sender, data):
        kind, _, _, session, payload = unframe(data)
        if self.avid:
            return self.node.handle(sender, kind, session, payload)
        return self.node.handle(sender, kind, payload)


def rbc_network(n, f, payload, policy="fifo", seed=0, silent=()):
    got = {}
    nodes = {}
    for i in range(1, n + 1):
        if i in silent:
            continue
        node = RbcNode(i, n, f, DEALER, 0, lambda v, i=i: got.__setitem__(i, v) or [])
        nodes[i] = Adapter(node)
    trace = drive(nodes, Pool(policy, random.Random(seed), frozenset()),
                  [(DEALER, rbc_dealer_start(payload, n, f, 0))])
    return got, nodes, trace


def test_dealer_uses_n_minus_2f_code():
    msgs = rbc_dealer_start(b"x" * 100, 4, 1, 0)
    assert len(msgs) == 4 and all(m.kind == Kind.VAL for m in msgs)
    assert msgs == rbc_dealer_start(b"x" * 100, 4, 1, 0)


def test_honest_fifo_delivery():
    got, _, _ = rbc_network(4, 1, b"commitments")
    assert got == {i: b"commitments" for i in range(1, 5)}


def test_thresholds_n4():
    node = RbcNode(1, 4, 1, DEALER, 0, lambda v: [])
    start = rbc_dealer_start(b"payload!", 4, 1, 0)
    assert node.handle(DEALER, Kind.VAL, start[0].payload)[0].kind == Kind.ECHO
    # peers' echoes are the VAL payloads they received
    assert node.handle(2, Kind.ECHO, start[1].payload) == []
    assert node.handle(2, Kind.ECHO, start[1].payload) == []  # duplicate ignored
    assert len(node.echo_senders) == 1
    assert node.handle(3, Kind.ECHO, start[2].payload) == []
    out = node.handle(4, Kind.ECHO, start[3].payload)  # n - f = 3 echoes
    assert {m.kind for m in out} == {Kind.READY_RBC}
    root = out[0].payload
    amp = RbcNode(2, 4, 1, DEALER, 0, lambda v: [])
    assert amp.handle(3, Kind.READY_RBC, root) == []
    assert {m.kind for m in amp.handle(4, Kind.READY_RBC, root)} == {Kind.READY_RBC}  # f+1 = 2
    delivered = []
    node2 = RbcNode(1, 4, 1, DEALER, 0, lambda v: delivered.append(v) or [])
    for j in (2, 3):
        node2.handle(j, Kind.ECHO, start[j - 1].payload)
    node2.handle(2, Kind.READY_RBC, root)
    node2.handle(3, Kind.READY_RBC, root)
    assert not delivered
    node2.handle(4, Kind.READY_RBC, root)  # 2f+1 = 3
    assert delivered == [b"payload!"]


def test_random_schedules_with_silent_party():
    for seed in range(20):
        got, _, _ = rbc_network(7, 2, b"v" * 50, "random", seed, silent=(3, 6))
        assert set(got.values()) == {b"v" * 50} and len(got) == 5


def test_rbc_fuzz_harness_properties():
    for dealer in ("honest", "equivocate", "inconsistent", "partial"):
        for seed in range(15):
            tr = rbc_trial(4, 1, seed, dealer)
            assert tr.agreement and tr.totality and tr.validity


def test_rbc_byte_cost_structure():
    """Total = c1 * n^2 |v| / (n-2f) + c2 * n^2 log n * 32; both constants stay bounded."""
    for n, f in [(4, 1), (7, 2), (10, 3), (16, 5)]:
        small, large = 1000, 9000
        totals = [account(rbc_network(n, f, bytes(size))[2], n).total_bytes for size in (small, large)]
        c1 = (totals[1] - totals[0]) / (n * n * (large - small) / (n - 2 * f))
        c2 = (totals[0] - c1 * n * n * small / (n - 2 * f)) / (n * n * math.log2(n) * 32)
        assert 0.5 < c1 < 1.1
        assert 0 < c2 < 4


def avid_network(n, t, values, policy="fifo", seed=0, silent=(), start=None):
    nodes, done, fetched = {}, set(), {}
    avids = {}
    for i in range(1, n + 1):
        if i in silent:
            continue
        node = AvidNode(i, n, t, DEALER, lambda i=i: done.add(i) or [],
                        lambda seg, v, i=i: fetched.__setitem__((i, seg), v) or [])
        avids[i] = node
        nodes[i] = Adapter(node, avid=True)
    pool = Pool(policy, random.Random(seed), frozenset())
    drive(nodes, pool, [(DEALER, start if start is not None else avid_disperse_start(values, n, t))])
    return avids, nodes, done, fetched, pool


def retrieve_all(avids, nodes, pool, requests):
    starts = [(i, avids[i].retrieve(seg)) for i, seg in requests]
    drive(nodes, pool, starts)


def test_avid_disperse_and_retrieve():
    values = [bytes([j]) * (10 + j) for j in range(7)]
    avids, nodes, done, fetched, pool = avid_network(7, 2, values, "random", 1)
    assert done == set(range(1, 8))
    retrieve_all(avids, nodes, pool, [(i, seg) for i in range(1, 8) for seg in range(7)])
    assert all(fetched[(i, seg)] == values[seg] for i in range(1, 8) for seg in range(7))


def test_avid_single_value_and_silent_peers():
    avids, nodes, done, fetched, pool = avid_network(4, 1, [b"only"], silent=(2,))
    assert done == {1, 3, 4}
    retrieve_all(avids, nodes, pool, [(1, 0)])
    assert fetched[(1, 0)] == b"only"


def test_avid_retrieval_consistent_under_bad_fragments():
    # dealer corrupts the fragment for party 2 in segment 0 of its FRAG message
    n, t = 4, 1
    values = [b"a" * 30, b"b" * 30]
    start = avid_disperse_start(values, n, t)
    msgs = []
    for m in start:
        if m.kind == Kind.FRAG and m.receiver == 2:
            p = bytearray(m.payload)
            p[20] ^= 0xFF
            m = Msg(m.receiver, m.kind, m.session, bytes(p))
        msgs.append(m)
    avids, nodes, done, fetched, pool = avid_network(n, t, values, start=msgs)
    assert done == set(range(1, 5))
    retrieve_all(avids, nodes, pool, [(i, 0) for i in range(1, 5)])
    assert {fetched[(i, 0)] for i in range(1, 5)} == {b"a" * 30}
