"""Hybrid DH encryption with PK = g^SK.

The symmetric key is derived from ``PK^r`` together with the ephemeral
element and a caller-supplied context (receiver index, instance, slot), so
anyone later handed SK can re-derive exactly what the receiver would have
decrypted. Bodies are SHAKE-256 keystream XOR with an HMAC-SHA256 tag.

Wire layout: ``[ephemeral element][4-byte LE body length][body][32-byte tag]``.
"""

from __future__ import annotations

import hashlib
import hmac
import random
import struct
from dataclasses import dataclass

from .groups import MalformedElement

TAG_BYTES = 32


class DecryptionFailure(Exception):
    pass


class MalformedKey(ValueError):
    pass


@dataclass(frozen=True)
class Keypair:
    sk: int
    pk: object


@dataclass(frozen=True)
class HybridCiphertext:
    ephemeral: bytes
    body: bytes
    tag: bytes

    def to_bytes(self) -> bytes:
        return self.ephemeral + struct.pack("<I", len(self.body)) + self.body + self.tag

    @classmethod
    def parse(cls, data: bytes, element_size: int, offset: int = 0) -> tuple["HybridCiphertext", int]:
        """Parse one ciphertext at ``offset``; returns it and the next offset."""
        head = offset + element_size
        if len(data) < head + 4:
            raise DecryptionFailure("truncated ciphertext header")
        (blen,) = struct.unpack_from("<I", data, head)
        end = head + 4 + blen + TAG_BYTES
        if len(data) < end:
            raise DecryptionFailure("truncated ciphertext body")
        return cls(bytes(data[offset:head]), bytes(data[head + 4: head + 4 + blen]),
                   bytes(data[end - TAG_BYTES: end])), end


def ciphertext_size(group, plaintext_len: int) -> int:
    return group.element_size + 4 + plaintext_len + TAG_BYTES


def keygen(group, rng: random.Random) -> Keypair:
    sk = rng.randrange(1, group.q)
    return Keypair(sk, group.exp(group.generator(), sk))


def verify_key(group, pk, sk: int) -> bool:
    try:
        if isinstance(pk, (bytes, bytearray)):
            pk = group.decode(bytes(pk))
    except MalformedElement:
        return False
    if not 0 < sk < group.q:
        return False
    return group.eq(group.exp(group.generator(), sk), pk)


def _keys(group, shared, ephemeral: bytes, context: bytes) -> tuple[bytes, bytes]:
    material = hashlib.sha512(b"hbavss/kdf" + group.encode(shared) + ephemeral
                              + struct.pack("<I", len(context)) + context).digest()
    return material[:32], material[32:]


def encrypt(group, pk, message: bytes, rng: random.Random, context: bytes = b"") -> HybridCiphertext:
    if isinstance(pk, (bytes, bytearray)):
        try:
            pk = group.decode(bytes(pk))
        except MalformedElement as exc:
            raise MalformedKey(str(exc)) from None
    r = rng.randrange(1, group.q)
    eph = group.encode(group.exp(group.generator(), r))
    enc_key, mac_key = _keys(group, group.exp(pk, r), eph, context)
    stream = hashlib.shake_256(enc_key).digest(len(message))
    body = bytes(a ^ b for a, b in zip(message, stream))
    tag = hmac.new(mac_key, eph + body, hashlib.sha256).digest()
    return HybridCiphertext(eph, body, tag)


def decrypt(group, sk: int, ct: HybridCiphertext | bytes, context: bytes = b"") -> bytes:
    if isinstance(ct, (bytes, bytearray)):
        data = bytes(ct)
        ct, end = HybridCiphertext.parse(data, group.element_size)
        if end != len(data):
            raise DecryptionFailure("trailing bytes")
    if len(ct.ephemeral) != group.element_size or len(ct.tag) != TAG_BYTES:
        raise DecryptionFailure("malformed ciphertext")
    try:
        eph = group.decode(ct.ephemeral)
    except MalformedElement:
        raise DecryptionFailure("ephemeral element not in group") from None
    enc_key, mac_key = _keys(group, group.exp(eph, sk), ct.ephemeral, context)
    expect = hmac.new(mac_key, ct.ephemeral + ct.body, hashlib.sha256).digest()
    if not hmac.compare_digest(expect, ct.tag):
        raise DecryptionFailure("authentication tag mismatch")
    stream = hashlib.shake_256(enc_key).digest(len(ct.body))
    return bytes(a ^ b for a, b in zip(ct.body, stream))
