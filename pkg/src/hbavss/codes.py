"""Reed-Solomon erasure coding and Merkle trees.

Byte payloads are coded systematically over GF(2^8): shard ``j`` (1-based)
is the evaluation at point ``j`` of the degree < k polynomial whose values at
1..k are the data shards. Field payloads can instead be coded as polynomial
coefficients over a prime field (``rs_encode_field``).
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .fieldmath import PrimeField, lagrange_interpolate, poly_eval, Polynomial

HASH_NAME = "sha256"
LEAF_TAG = b"\x00"
NODE_TAG = b"\x01"
EMPTY_LEAF = bytes(32)


class CodingError(ValueError):
    pass


class BadParameters(CodingError):
    pass


class TooFewShards(CodingError):
    pass


class IndexOutOfRange(CodingError):
    pass


# -- GF(2^8) ----------------------------------------------------------------

def _gf_tables():
    exp = np.zeros(512, dtype=np.int32)
    log = np.zeros(256, dtype=np.int32)
    x = 1
    for i in range(255):
        exp[i] = x
        log[x] = i
        x <<= 1
        if x & 0x100:
            x ^= 0x11D
    exp[255:510] = exp[:255]
    a = np.arange(256)
    mul = exp[(log[a][:, None] + log[a][None, :]) % 255].astype(np.uint8)
    mul[0, :] = 0
    mul[:, 0] = 0
    return exp, log, mul


_EXP, _LOG, _MUL = _gf_tables()


def gf_mul(a: int, b: int) -> int:
    return int(_MUL[a, b])


def gf_inv(a: int) -> int:
    if a == 0:
        raise ZeroDivisionError("inverse of zero in GF(256)")
    return int(_EXP[255 - _LOG[a]])


def _gf_lagrange(xs: Sequence[int], target: int) -> list[int]:
    out = []
    for j, xj in enumerate(xs):
        num, den = 1, 1
        for m, xm in enumerate(xs):
            if m != j:
                num = gf_mul(num, target ^ xm)
                den = gf_mul(den, xj ^ xm)
        out.append(gf_mul(num, gf_inv(den)))
    return out


def _combine(coeffs: Sequence[int], rows: Sequence[np.ndarray]) -> np.ndarray:
    acc = np.zeros_like(rows[0])
    for c, row in zip(coeffs, rows):
        if c:
            acc ^= _MUL[c][row]
    return acc


# -- shards -----------------------------------------------------------------

@dataclass(frozen=True)
class Shard:
    index: int  # 1-based evaluation point
    data: bytes

    def to_bytes(self) -> bytes:
        return struct.pack("<II", self.index, len(self.data)) + self.data

    @classmethod
    def parse(cls, buf: bytes, offset: int = 0) -> tuple["Shard", int]:
        if len(buf) < offset + 8:
            raise CodingError("truncated shard header")
        index, length = struct.unpack_from("<II", buf, offset)
        end = offset + 8 + length
        if len(buf) < end:
            raise CodingError("truncated shard")
        return cls(index, bytes(buf[offset + 8: end])), end


def shard_size(payload_len: int, k: int) -> int:
    return -(-(payload_len + 4) // k)


def rs_encode(payload: bytes, k: int, n: int) -> list[Shard]:
    if not 1 <= k <= n or n > 255:
        raise BadParameters(f"need 1 <= k <= n <= 255, got k={k}, n={n}")
    size = shard_size(len(payload), k)
    padded = struct.pack("<I", len(payload)) + payload
    padded += bytes(k * size - len(padded))
    data = np.frombuffer(padded, dtype=np.uint8).reshape(k, size)
    shards = [Shard(j + 1, data[j].tobytes()) for j in range(k)]
    xs = list(range(1, k + 1))
    rows = [data[j] for j in range(k)]
    for m in range(k + 1, n + 1):
        shards.append(Shard(m, _combine(_gf_lagrange(xs, m), rows).tobytes()))
    return shards


def rs_decode(shards: Sequence[Shard], k: int, n: int) -> bytes:
    if not 1 <= k <= n or n > 255:
        raise BadParameters(f"need 1 <= k <= n <= 255, got k={k}, n={n}")
    by_index: dict[int, Shard] = {}
    for s in shards:
        if not 1 <= s.index <= n:
            raise CodingError(f"shard index {s.index} out of range")
        by_index.setdefault(s.index, s)
    if len(by_index) < k:
        raise TooFewShards(f"need {k} distinct shards, got {len(by_index)}")
    use = [by_index[i] for i in sorted(by_index)[:k]]
    size = len(use[0].data)
    if any(len(s.data) != size for s in use):
        raise CodingError("shard sizes differ")
    rows = [np.frombuffer(s.data, dtype=np.uint8) for s in use]
    xs = [s.index for s in use]
    data = []
    for j in range(1, k + 1):
        if j in by_index and len(by_index[j].data) == size:
            data.append(by_index[j].data)
        else:
            data.append(_combine(_gf_lagrange(xs, j), rows).tobytes())
    padded = b"".join(data)
    if len(padded) < 4:
        raise CodingError("decoded payload too short")
    (length,) = struct.unpack_from("<I", padded)
    if length > len(padded) - 4:
        raise CodingError("bad length prefix")
    return padded[4: 4 + length]


def rs_encode_field(field: PrimeField, coeffs: Sequence[int], n: int) -> list[int]:
    """Evaluations at 1..n of the polynomial with the given coefficients."""
    if not 1 <= len(coeffs) <= n:
        raise BadParameters(f"need 1 <= k <= n, got k={len(coeffs)}, n={n}")
    poly = Polynomial(field, coeffs)
    return [poly_eval(poly, x) for x in range(1, n + 1)]


def rs_decode_field(field: PrimeField, points: Sequence[tuple[int, int]], k: int) -> list[int]:
    if len({x for x, _ in points}) < k:
        raise TooFewShards(f"need {k} distinct points, got {len(points)}")
    poly = lagrange_interpolate(field, list(points)[:k], k - 1)
    return list(poly.coeffs) + [0] * (k - len(poly.coeffs))


# -- Merkle trees -------------------------------------------------------------

def _h(*parts: bytes) -> bytes:
    h = hashlib.new(HASH_NAME)
    for p in parts:
        h.update(p)
    return h.digest()


def leaf_hash(leaf: bytes) -> bytes:
    return _h(LEAF_TAG, leaf)


def node_hash(left: bytes, right: bytes) -> bytes:
    return _h(NODE_TAG, left, right)


@dataclass(frozen=True)
class MerkleBranch:
    index: int  # 0-based leaf index
    siblings: tuple[bytes, ...]

    def to_bytes(self) -> bytes:
        return struct.pack("<IB", self.index, len(self.siblings)) + b"".join(self.siblings)

    @classmethod
    def parse(cls, buf: bytes, offset: int = 0) -> tuple["MerkleBranch", int]:
        if len(buf) < offset + 5:
            raise CodingError("truncated branch header")
        index, depth = struct.unpack_from("<IB", buf, offset)
        end = offset + 5 + 32 * depth
        if len(buf) < end:
            raise CodingError("truncated branch")
        sib = tuple(bytes(buf[offset + 5 + 32 * i: offset + 37 + 32 * i]) for i in range(depth))
        return cls(index, sib), end


class MerkleTree:
    def __init__(self, leaves: Sequence[bytes]):
        if not leaves:
            raise BadParameters("Merkle tree needs at least one leaf")
        self.n_leaves = len(leaves)
        width = 1
        while width < len(leaves):
            width *= 2
        level = [leaf_hash(x) for x in leaves] + [EMPTY_LEAF] * (width - len(leaves))
        self.levels = [level]
        while len(level) > 1:
            level = [node_hash(level[i], level[i + 1]) for i in range(0, len(level), 2)]
            self.levels.append(level)

    @property
    def root(self) -> bytes:
        return self.levels[-1][0]

    def branch(self, j: int) -> MerkleBranch:
        if not 0 <= j < self.n_leaves:
            raise IndexOutOfRange(f"leaf {j} of {self.n_leaves}")
        sib = []
        idx = j
        for level in self.levels[:-1]:
            sib.append(level[idx ^ 1])
            idx //= 2
        return MerkleBranch(j, tuple(sib))


def merkle_root(leaves: Sequence[bytes]) -> bytes:
    return MerkleTree(leaves).root


def merkle_branch(tree: MerkleTree, j: int) -> MerkleBranch:
    return tree.branch(j)


def merkle_verify(root: bytes, leaf: bytes, branch: MerkleBranch, n_leaves: int | None = None) -> bool:
    """Check ``leaf`` sits at ``branch.index`` under ``root``.

    With ``n_leaves`` given, the branch depth and index must also match a
    tree over exactly that many leaves.
    """
    if n_leaves is not None:
        depth = max(n_leaves - 1, 0).bit_length()
        if len(branch.siblings) != depth or not 0 <= branch.index < n_leaves:
            return False
    h = leaf_hash(leaf)
    idx = branch.index
    for s in branch.siblings:
        h = node_hash(s, h) if idx & 1 else node_hash(h, s)
        idx >>= 1
    return idx == 0 and h == root
