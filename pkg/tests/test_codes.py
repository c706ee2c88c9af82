import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from hbavss.codes import (BadParameters, IndexOutOfRange, MerkleBranch, MerkleTree, Shard,
                          TooFewShards, leaf_hash, merkle_root, merkle_verify, node_hash,
                          rs_decode, rs_decode_field, rs_encode, rs_encode_field)
from hbavss.fieldmath import PrimeField

F13 = PrimeField(13)


def test_field_code_example():
    assert rs_encode_field(F13, [1, 2], 4) == [3, 5, 7, 9]
    assert rs_decode_field(F13, [(3, 7), (4, 9)], 2) == [1, 2]
    with pytest.raises(TooFewShards):
        rs_decode_field(F13, [(3, 7)], 2)


def test_parameters():
    with pytest.raises(BadParameters):
        rs_encode(b"abc", 5, 4)
    with pytest.raises(BadParameters):
        rs_encode(b"abc", 0, 4)


def test_systematic_layout():
    payload = b"hello world, coded"
    shards = rs_encode(payload, 4, 4)
    joined = b"".join(s.data for s in shards)
    assert joined[4:4 + len(payload)] == payload
    assert rs_decode(rs_encode(payload, 3, 7)[:3], 3, 7) == payload


def test_decode_every_subset_small_n():
    rng = random.Random(0)
    for n in range(1, 9):
        for k in range(1, n + 1):
            payload = rng.randbytes(rng.randrange(0, 40))
            shards = rs_encode(payload, k, n)
            for subset in itertools.combinations(shards, k):
                assert rs_decode(list(subset), k, n) == payload
            if k > 1:
                with pytest.raises(TooFewShards):
                    rs_decode(shards[: k - 1], k, n)


@settings(max_examples=40, deadline=None)
@given(st.binary(max_size=600), st.integers(1, 40), st.integers(0, 2**32))
def test_decode_sampled_subsets(payload, n, seed):
    rng = random.Random(seed)
    k = rng.randrange(1, n + 1)
    shards = rs_encode(payload, k, n)
    assert rs_decode(rng.sample(shards, k), k, n) == payload


def test_shard_serialisation():
    s = Shard(3, b"abc")
    assert Shard.parse(s.to_bytes()) == (s, len(s.to_bytes()))


def test_merkle_basics():
    assert merkle_root([b"x"]) == leaf_hash(b"x")
    tree = MerkleTree([b"a", b"b", b"c", b"d"])
    for j, leaf in enumerate([b"a", b"b", b"c", b"d"]):
        br = tree.branch(j)
        assert len(br.siblings) == 2
        assert merkle_verify(tree.root, leaf, br, 4)
        assert MerkleBranch.parse(br.to_bytes())[0] == br
    assert not merkle_verify(tree.root, b"b", tree.branch(0), 4)
    with pytest.raises(IndexOutOfRange):
        tree.branch(4)


def test_merkle_domain_separation():
    tree = MerkleTree([b"a", b"b", b"c", b"d"])
    # an interior node presented as a leaf does not verify one level up
    inner = node_hash(leaf_hash(b"a"), leaf_hash(b"b"))
    fake = MerkleBranch(0, (tree.levels[1][1],))
    assert not merkle_verify(tree.root, inner, fake)


def test_merkle_bitflip_fuzz():
    rng = random.Random(1)
    leaves = [rng.randbytes(20) for _ in range(7)]
    tree = MerkleTree(leaves)
    for _ in range(10_000):
        j = rng.randrange(7)
        br = tree.branch(j)
        d = rng.randrange(len(br.siblings))
        sib = bytearray(br.siblings[d])
        sib[rng.randrange(32)] ^= 1 << rng.randrange(8)
        bad = MerkleBranch(j, br.siblings[:d] + (bytes(sib),) + br.siblings[d + 1:])
        assert not merkle_verify(tree.root, leaves[j], bad, 7)
