import random

import pytest

from hbavss.fieldmath import BivariatePolynomial, Polynomial
from hbavss.polycommit import (BackendMismatch, CommitAux, DegreeTooHigh, InvalidDegree, WrongCount,
                               setup)
from hbavss.groups import MalformedElement

from conftest import params

BACKENDS = ["pairing", "dlog"]


def test_setup_structure_and_determinism():
    a = setup(1, random.Random(0))
    b = setup(1, random.Random(0))
    assert len(a.g_pows) == 2 and len(a.h_pows) == 2
    assert a.params_bytes() == b.params_bytes()
    with pytest.raises(InvalidDegree):
        setup(0, random.Random(0))
    assert setup(2, random.Random(5), "dlog").params_bytes() == setup(2, random.Random(5), "dlog").params_bytes()


def test_zero_polynomial_commits_to_identity():
    sp = params(1)
    zero = Polynomial(sp.field, [0])
    c, _ = sp.commit(zero, aux=CommitAux(zero))
    assert sp.group.eq(c.value, sp.group.identity())


@pytest.mark.parametrize("backend", BACKENDS)
def test_witnesses_verify_and_bind(backend):
    sp = params(2, backend)
    rng = random.Random(1)
    phi = Polynomial.random(sp.field, 2, rng)
    c, aux = sp.commit(phi, rng)
    for i in range(1, 8):
        w = sp.create_witness(phi, aux, i)
        assert sp.verify_eval(c, i, phi(i), w)
    w3 = sp.create_witness(phi, aux, 3)
    assert not sp.verify_eval(c, 4, phi(4), w3)
    assert not sp.verify_eval(c, 3, sp.field.add(phi(3), 1), w3)
    other, _ = sp.commit(Polynomial.random(sp.field, 2, rng), rng)
    assert not sp.verify_eval(other, 3, phi(3), w3)
    with pytest.raises(DegreeTooHigh):
        sp.commit(Polynomial.random(sp.field, 3, rng), rng)


@pytest.mark.parametrize("backend", BACKENDS)
def test_batch_verify_matches_individual(backend):
    sp = params(2, backend)
    rng = random.Random(2)
    items = []
    for _ in range(3):
        phi = Polynomial.random(sp.field, 2, rng)
        c, aux = sp.commit(phi, rng)
        items.append((c, phi(5), sp.create_witness(phi, aux, 5)))
    assert sp.batch_verify_eval(items, 5)
    c, y, w = items[1]
    items[1] = (c, sp.field.add(y, 1), w)
    assert not sp.batch_verify_eval(items, 5)


@pytest.mark.parametrize("backend", BACKENDS)
def test_homomorphic_combination(backend):
    sp = params(1, backend)
    rng = random.Random(3)
    a, b = Polynomial.random(sp.field, 1, rng), Polynomial.random(sp.field, 1, rng)
    ca, xa = sp.commit(a, rng)
    cb, xb = sp.commit(b, rng)
    direct, _ = sp.commit(a + b, aux=CommitAux(xa.hiding + xb.hiding))
    comb = sp.combine_commitments([ca, cb], [1, 1])
    assert sp.encode_commitment(comb) == sp.encode_commitment(direct)
    assert sp.encode_commitment(sp.combine_commitments([ca], [1])) == sp.encode_commitment(ca)
    wa, wb = sp.create_witness(a, xa, 4), sp.create_witness(b, xb, 4)
    w = sp.combine_witnesses([wa, wb], [1, 1])
    assert sp.verify_eval(comb, 4, sp.field.add(a(4), b(4)), w)
    assert sp.encode_witness(sp.combine_witnesses([wa], [1])) == sp.encode_witness(wa)
    with pytest.raises(BackendMismatch):
        sp.combine_witnesses([wa, wb], [1])
    with pytest.raises(BackendMismatch):
        params(1, "dlog" if backend == "pairing" else "pairing").combine_commitments([ca], [1])


@pytest.mark.parametrize("backend", BACKENDS)
def test_interpolated_commitments_and_witnesses_match_recommit(backend):
    t = 2
    sp = params(t, backend)
    rng = random.Random(4)
    phi = BivariatePolynomial.random(sp.field, t, rng)
    hid = BivariatePolynomial.random(sp.field, t, rng)
    cols = {k: sp.commit(phi.column(k), aux=CommitAux(hid.column(k)))[0] for k in range(1, 3 * t + 2)}
    base = [cols[k] for k in range(1, t + 2)]
    ext = sp.interpolate_commitments(base, range(1, 3 * t + 2))
    for k in range(1, 3 * t + 2):
        assert sp.encode_commitment(ext[k - 1]) == sp.encode_commitment(cols[k])
    assert ext[0] is base[0]
    i = 5
    ws = [sp.create_witness(phi.column(k), CommitAux(hid.column(k)), i) for k in range(1, t + 2)]
    wext = sp.interpolate_witnesses(ws, [t + 2, 3 * t + 1])
    assert sp.verify_eval(ext[t + 1], i, phi(i, t + 2), wext[0])
    assert sp.verify_eval(ext[3 * t], i, phi(i, 3 * t + 1), wext[1])
    with pytest.raises(WrongCount):
        sp.interpolate_commitments(base[:t], [1])
    with pytest.raises(WrongCount):
        sp.interpolate_witnesses(ws[:t], [1])


@pytest.mark.parametrize("backend", BACKENDS)
def test_encoding_roundtrip_and_malformed(backend):
    sp = params(1, backend)
    rng = random.Random(6)
    phi = Polynomial.random(sp.field, 1, rng)
    c, aux = sp.commit(phi, rng)
    w = sp.create_witness(phi, aux, 2)
    enc_c, enc_w = sp.encode_commitment(c), sp.encode_witness(w)
    assert len(enc_c) == sp.commitment_size() and len(enc_w) == sp.witness_size()
    assert sp.verify_eval(sp.decode_commitment(enc_c), 2, phi(2), sp.decode_witness(enc_w))
    with pytest.raises(MalformedElement):
        sp.decode_commitment(b"\xff" * sp.commitment_size())
    with pytest.raises(MalformedElement):
        sp.decode_witness(b"\xff" * sp.witness_size())


def test_pairing_sizes():
    sp = params(1)
    assert sp.commitment_size() == 48
    assert sp.witness_size() == 80
