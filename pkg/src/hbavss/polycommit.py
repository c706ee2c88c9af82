"""Additively homomorphic polynomial commitments with evaluation witnesses.

``KzgPedParams`` is PolyCommitPed (Kate et al.) over BLS12-381: one G1
element per commitment, one G1 element plus a hiding evaluation per witness,
checked with a pairing. ``PedersenParams`` commits coefficient-wise with
Pedersen commitments in a pairing-free group and verifies Feldman-style; its
commitments grow with ``t`` and it exists for cross-checking and fast runs.

Both expose the same methods, so protocol code only ever sees ``sp``.
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

from .fieldmath import Polynomial, PrimeField, lagrange_coefficients
from .groups import BLS12381G1, MalformedElement, SchnorrGroup, get_group

__all__ = [
    "BackendMismatch", "CommitAux", "DegreeTooHigh", "EvalWitness", "InvalidDegree",
    "KzgPedParams", "MalformedElement", "PedersenParams", "PolyCommitment", "WrongCount",
    "setup",
]


class InvalidDegree(ValueError):
    pass


class DegreeTooHigh(ValueError):
    pass


class BackendMismatch(ValueError):
    pass


class WrongCount(ValueError):
    pass


@dataclass(frozen=True)
class PolyCommitment:
    backend: str
    value: object  # G1Point, or a tuple of group ints for the Pedersen backend


@dataclass(frozen=True)
class CommitAux:
    hiding: Polynomial


@dataclass(frozen=True)
class EvalWitness:
    backend: str
    proof: object  # G1Point, or None for the Pedersen backend
    hiding_eval: int


def _padded(poly: Polynomial, t: int) -> list[int]:
    if poly.degree() > t:
        raise DegreeTooHigh(f"degree {poly.degree()} exceeds bound {t}")
    c = list(poly.coeffs[: t + 1])
    return c + [0] * (t + 1 - len(c))


class _Scheme:
    backend: str
    t: int
    field: PrimeField

    # -- shared operations ---------------------------------------------------

    def commit(self, phi: Polynomial, rng: random.Random | None = None,
               aux: CommitAux | None = None) -> tuple[PolyCommitment, CommitAux]:
        _padded(phi, self.t)
        if aux is None:
            if rng is None:
                raise ValueError("commit needs an rng or an explicit hiding polynomial")
            aux = CommitAux(Polynomial.random(self.field, self.t, rng))
        return self._commit(phi, aux.hiding), aux

    def _check_backend(self, items) -> None:
        for x in items:
            if x.backend != self.backend:
                raise BackendMismatch(f"{x.backend} object given to {self.backend} scheme")

    def interpolate_commitments(self, cs: Sequence[PolyCommitment],
                                targets: Sequence[int]) -> list[PolyCommitment]:
        """Commitments to columns at ``targets`` from those at 1..t+1."""
        if len(cs) != self.t + 1:
            raise WrongCount(f"need {self.t + 1} commitments, got {len(cs)}")
        xs = list(range(1, self.t + 2))
        out = []
        for k in targets:
            if 1 <= k <= self.t + 1:
                out.append(cs[k - 1])
            else:
                out.append(self.combine_commitments(cs, lagrange_coefficients(self.field, xs, k)))
        return out

    def interpolate_witnesses(self, ws: Sequence[EvalWitness],
                              targets: Sequence[int]) -> list[EvalWitness]:
        if len(ws) != self.t + 1:
            raise WrongCount(f"need {self.t + 1} witnesses, got {len(ws)}")
        xs = list(range(1, self.t + 2))
        out = []
        for k in targets:
            if 1 <= k <= self.t + 1:
                out.append(ws[k - 1])
            else:
                out.append(self.combine_witnesses(ws, lagrange_coefficients(self.field, xs, k)))
        return out

    def batch_verify_eval(self, items: Sequence[tuple[PolyCommitment, int, EvalWitness]],
                          i: int) -> bool:
        """All ``(C, y, w)`` open correctly at the same index ``i``."""
        return all(self.verify_eval(c, i, y, w) for c, y, w in items)

    def encode_field(self, x: int) -> bytes:
        return self.field.encode(x)

    def decode_field(self, data: bytes) -> int:
        return self.field.decode(data)


class KzgPedParams(_Scheme):
    backend = "pairing"

    def __init__(self, t: int, group: BLS12381G1, g_pows, h_pows, g2_alpha):
        self.t = t
        self.group = group
        self.field = group.field
        self.g_pows = list(g_pows)
        self.h_pows = list(h_pows)
        self.g2 = group.g2
        self.g2_alpha = g2_alpha
        self._shifted = lru_cache(maxsize=4096)(self._g2_shift)

    def _g2_shift(self, i: int):
        # g2^(alpha - i)
        return self.g2_alpha - self.group.g2_exp(i)

    def params_bytes(self) -> bytes:
        enc = self.group.encode
        return b"".join([enc(x) for x in self.g_pows + self.h_pows]
                        + [bytes(self.g2_alpha.to_compressed_bytes())])

    def commitment_size(self) -> int:
        return self.group.element_size

    def witness_size(self) -> int:
        return self.group.element_size + 32

    def _commit(self, phi: Polynomial, hiding: Polynomial) -> PolyCommitment:
        t = self.t
        return PolyCommitment(self.backend, self.group.msm(
            self.g_pows + self.h_pows, _padded(phi, t) + _padded(hiding, t)))

    def create_witness(self, phi: Polynomial, aux: CommitAux, i: int) -> EvalWitness:
        t = self.t
        _padded(phi, t)
        psi = _padded(phi.quotient_by_root(i), t - 1)
        psi_hat = _padded(aux.hiding.quotient_by_root(i), t - 1)
        proof = self.group.msm(self.g_pows[:t] + self.h_pows[:t], psi + psi_hat)
        return EvalWitness(self.backend, proof, aux.hiding(i))

    def _opening(self, y: int, y_hat: int):
        return self.group.msm([self.g_pows[0], self.h_pows[0]], [y, y_hat])

    def verify_eval(self, c: PolyCommitment, i: int, y: int, w: EvalWitness) -> bool:
        self._check_backend([c, w])
        lhs = c.value - self._opening(y, w.hiding_eval)
        return self.group.pairing_check([lhs, -w.proof], [self.g2, self._shifted(i % self.field.p)])

    def batch_verify_eval(self, items, i: int) -> bool:
        if len(items) <= 1:
            return all(self.verify_eval(c, i, y, w) for c, y, w in items)
        self._check_backend([x for c, _, w in items for x in (c, w)])
        q = self.field.p
        h = hashlib.sha256(b"hbavss/batch-verify")
        h.update(i.to_bytes(4, "little"))
        for c, y, w in items:
            h.update(self.group.encode(c.value) + self.group.encode(w.proof))
            h.update(self.field.encode(y) + self.field.encode(w.hiding_eval))
        seed = h.digest()
        rho = [int.from_bytes(hashlib.sha256(seed + k.to_bytes(4, "little")).digest(), "little") % q
               for k in range(len(items))]
        sum_y = sum(r * y for r, (_, y, _) in zip(rho, items)) % q
        sum_h = sum(r * w.hiding_eval for r, (_, _, w) in zip(rho, items)) % q
        comb_c = self.group.msm([c.value for c, _, _ in items], rho)
        comb_w = self.group.msm([w.proof for _, _, w in items], rho)
        lhs = comb_c - self._opening(sum_y, sum_h)
        return self.group.pairing_check([lhs, -comb_w], [self.g2, self._shifted(i % q)])

    def combine_commitments(self, cs: Sequence[PolyCommitment],
                            lams: Sequence[int]) -> PolyCommitment:
        if len(cs) != len(lams):
            raise BackendMismatch("commitment and coefficient counts differ")
        self._check_backend(cs)
        return PolyCommitment(self.backend, self.group.msm([c.value for c in cs], lams))

    def combine_witnesses(self, ws: Sequence[EvalWitness], lams: Sequence[int]) -> EvalWitness:
        if len(ws) != len(lams):
            raise BackendMismatch("witness and coefficient counts differ")
        self._check_backend(ws)
        q = self.field.p
        return EvalWitness(self.backend, self.group.msm([w.proof for w in ws], lams),
                           sum(l * w.hiding_eval for l, w in zip(lams, ws)) % q)

    def encode_commitment(self, c: PolyCommitment) -> bytes:
        self._check_backend([c])
        return self.group.encode(c.value)

    def decode_commitment(self, data: bytes) -> PolyCommitment:
        return PolyCommitment(self.backend, self.group.decode(data))

    def encode_witness(self, w: EvalWitness) -> bytes:
        self._check_backend([w])
        return self.group.encode(w.proof) + self.field.encode(w.hiding_eval)

    def decode_witness(self, data: bytes) -> EvalWitness:
        if len(data) != self.witness_size():
            raise MalformedElement("bad witness length")
        try:
            return EvalWitness(self.backend, self.group.decode(data[:48]),
                               self.field.decode(data[48:]))
        except ValueError as exc:
            raise MalformedElement(str(exc)) from None


class PedersenParams(_Scheme):
    backend = "dlog"

    def __init__(self, t: int, group: SchnorrGroup, h: int):
        self.t = t
        self.group = group
        self.field = group.field
        self.g = group.generator()
        self.h = h

    def params_bytes(self) -> bytes:
        return self.group.encode(self.g) + self.group.encode(self.h)

    def commitment_size(self) -> int:
        return self.group.element_size * (self.t + 1)

    def witness_size(self) -> int:
        return 32

    def _commit(self, phi: Polynomial, hiding: Polynomial) -> PolyCommitment:
        t = self.t
        grp = self.group
        return PolyCommitment(self.backend, tuple(
            grp.msm([self.g, self.h], [a, b]) for a, b in zip(_padded(phi, t), _padded(hiding, t))))

    def create_witness(self, phi: Polynomial, aux: CommitAux, i: int) -> EvalWitness:
        _padded(phi, self.t)
        return EvalWitness(self.backend, None, aux.hiding(i))

    def verify_eval(self, c: PolyCommitment, i: int, y: int, w: EvalWitness) -> bool:
        self._check_backend([c, w])
        q = self.field.p
        powers, xp = [], 1
        for _ in range(self.t + 1):
            powers.append(xp)
            xp = xp * i % q
        rhs = self.group.msm(c.value, powers)
        return self.group.msm([self.g, self.h], [y, w.hiding_eval]) == rhs

    def combine_commitments(self, cs: Sequence[PolyCommitment],
                            lams: Sequence[int]) -> PolyCommitment:
        if len(cs) != len(lams):
            raise BackendMismatch("commitment and coefficient counts differ")
        self._check_backend(cs)
        grp = self.group
        return PolyCommitment(self.backend, tuple(
            grp.msm([c.value[j] for c in cs], lams) for j in range(self.t + 1)))

    def combine_witnesses(self, ws: Sequence[EvalWitness], lams: Sequence[int]) -> EvalWitness:
        if len(ws) != len(lams):
            raise BackendMismatch("witness and coefficient counts differ")
        self._check_backend(ws)
        q = self.field.p
        return EvalWitness(self.backend, None, sum(l * w.hiding_eval for l, w in zip(lams, ws)) % q)

    def encode_commitment(self, c: PolyCommitment) -> bytes:
        self._check_backend([c])
        return b"".join(self.group.encode(x) for x in c.value)

    def decode_commitment(self, data: bytes) -> PolyCommitment:
        if len(data) != self.commitment_size():
            raise MalformedElement("bad commitment length")
        return PolyCommitment(self.backend, tuple(
            self.group.decode(data[32 * j: 32 * j + 32]) for j in range(self.t + 1)))

    def encode_witness(self, w: EvalWitness) -> bytes:
        self._check_backend([w])
        return self.field.encode(w.hiding_eval)

    def decode_witness(self, data: bytes) -> EvalWitness:
        try:
            return EvalWitness(self.backend, None, self.field.decode(data))
        except ValueError as exc:
            raise MalformedElement(str(exc)) from None


def setup(t: int, rng: random.Random, backend: str = "pairing") -> KzgPedParams | PedersenParams:
    """System parameters for degree bound ``t``; the trapdoor is not retained."""
    if t < 1:
        raise InvalidDegree(f"degree bound must be >= 1, got {t}")
    group = get_group(backend)
    if backend == "dlog":
        return PedersenParams(t, group, group.hash_to_element(rng.getrandbits(256).to_bytes(32, "little")))
    q = group.q
    alpha = rng.randrange(1, q)
    beta = rng.randrange(1, q)
    g = group.generator()
    h = group.exp(g, beta)
    powers = [pow(alpha, j, q) for j in range(t + 1)]
    sp = KzgPedParams(t, group, [group.exp(g, a) for a in powers],
                      [group.exp(h, a) for a in powers], group.g2_exp(alpha))
    del alpha, beta
    return sp
