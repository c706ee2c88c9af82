"""Prime-order groups used for commitments and encryption keys.

Two instantiations share one small interface (written multiplicatively):

* ``BLS12381G1`` -- G1 of BLS12-381 through ``py_arkworks_bls12381``; also
  exposes the pairing needed by the constant-size commitment scheme.
* ``SchnorrGroup`` -- quadratic residues modulo a 256-bit safe prime. Fast
  and pairing-free; a test group, not a production parameter choice.
"""

from __future__ import annotations

import hashlib
import random

import py_arkworks_bls12381 as ark

from .fieldmath import BLS12_381_R, DLOG_Q, PrimeField


class MalformedElement(ValueError):
    pass


class SchnorrGroup:
    name = "dlog"
    element_size = 32

    def __init__(self) -> None:
        self.q = DLOG_Q
        self.p = 2 * DLOG_Q + 1
        self.field = PrimeField(self.q)
        self.g = 4  # 2^2 is a quadratic residue, hence a generator of the order-q subgroup

    def generator(self) -> int:
        return self.g

    def identity(self) -> int:
        return 1

    def mul(self, a: int, b: int) -> int:
        return a * b % self.p

    def inv(self, a: int) -> int:
        return pow(a, -1, self.p)

    def exp(self, a: int, e: int) -> int:
        return pow(a, e % self.q, self.p)

    def msm(self, bases, exps) -> int:
        p, q = self.p, self.q
        acc = 1
        for b, e in zip(bases, exps):
            e %= q
            if e:
                acc = acc * pow(b, e, p) % p
        return acc

    def hash_to_element(self, label: bytes) -> int:
        x = int.from_bytes(hashlib.sha512(b"hbavss/h2g/" + label).digest(), "little") % self.p
        return x * x % self.p

    def encode(self, a: int) -> bytes:
        return a.to_bytes(32, "little")

    def decode(self, data: bytes) -> int:
        if len(data) != 32:
            raise MalformedElement("group element must be 32 bytes")
        x = int.from_bytes(data, "little")
        if not 0 < x < self.p or pow(x, self.q, self.p) != 1:
            raise MalformedElement("not in the prime-order subgroup")
        return x

    def eq(self, a: int, b: int) -> bool:
        return a == b


class BLS12381G1:
    name = "pairing"
    element_size = 48

    def __init__(self) -> None:
        self.q = BLS12_381_R
        self.field = PrimeField(self.q)
        self._g = ark.G1Point()
        self._id = ark.G1Point.identity()
        self.g2 = ark.G2Point()

    def generator(self):
        return self._g

    def identity(self):
        return self._id

    def mul(self, a, b):
        return a + b

    def inv(self, a):
        return -a

    def exp(self, a, e: int):
        return a * ark.Scalar(e % self.q)

    def msm(self, bases, exps):
        bases = list(bases)
        scalars = [ark.Scalar(e % self.q) for e in exps]
        if not bases:
            return self._id
        return ark.G1Point.multiexp_unchecked(bases, scalars)

    def g2_exp(self, e: int):
        return self.g2 * ark.Scalar(e % self.q)

    def pairing_check(self, g1s, g2s) -> bool:
        """True iff prod e(g1s[i], g2s[i]) is the identity of GT."""
        return ark.GT.multi_pairing(list(g1s), list(g2s)) == ark.GT.one()

    def random_element(self, rng: random.Random):
        return self._g * ark.Scalar(rng.randrange(1, self.q))

    def encode(self, a) -> bytes:
        return bytes(a.to_compressed_bytes())

    def decode(self, data: bytes):
        if len(data) != 48:
            raise MalformedElement("G1 element must be 48 bytes")
        try:
            # checked decompression: curve and subgroup membership
            pt = ark.G1Point.from_compressed_bytes(bytes(data))
        except (ValueError, TypeError) as exc:
            raise MalformedElement(str(exc)) from None
        # the library tolerates junk bits in an identity encoding
        if bytes(pt.to_compressed_bytes()) != bytes(data):
            raise MalformedElement("non-canonical G1 encoding")
        return pt

    def eq(self, a, b) -> bool:
        return a == b


_GROUPS: dict[str, object] = {}


def get_group(name: str):
    if name not in _GROUPS:
        if name == "dlog":
            _GROUPS[name] = SchnorrGroup()
        elif name == "pairing":
            _GROUPS[name] = BLS12381G1()
        else:
            raise ValueError(f"unknown group backend {name!r}")
    return _GROUPS[name]
