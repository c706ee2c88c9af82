import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from hbavss.fieldmath import (BLS12_381_R, AmbiguousDecoding, BivariatePolynomial, DuplicatePoint,
                              InconsistentExtraPoint, NotYetDecodable, Polynomial, PrimeField,
                              WrongSecretCount, berlekamp_welch, interpolate_at, lagrange_coefficients,
                              lagrange_interpolate, poly_eval, robust_interpolate, sample_bivariate)

F13 = PrimeField(13)
FR = PrimeField(BLS12_381_R)


def naive_eval(coeffs, x, p):
    return sum(c * pow(x, j, p) for j, c in enumerate(coeffs)) % p


def test_poly_eval_examples():
    p = Polynomial(F13, [1, 2])
    assert poly_eval(p, 0) == 1
    assert poly_eval(p, 3) == 7
    assert poly_eval(Polynomial(F13, [0]), 11) == 0


def test_lagrange_coefficients_examples():
    assert lagrange_coefficients(F13, [1, 2], 0) == [2, 12]
    assert lagrange_coefficients(F13, [5], 5) == [1]
    with pytest.raises(DuplicatePoint):
        lagrange_coefficients(F13, [1, 1], 0)


def test_lagrange_interpolate_examples():
    assert lagrange_interpolate(F13, [(1, 3), (2, 5)], 1).coeffs == (1, 2)
    assert lagrange_interpolate(F13, [(1, 6), (2, 6)], 1).coeffs == (6, 0)
    with pytest.raises(DuplicatePoint):
        lagrange_interpolate(F13, [(1, 3), (1, 4)], 1)
    with pytest.raises(InconsistentExtraPoint):
        lagrange_interpolate(F13, [(1, 3), (2, 5), (3, 8)], 1)


def test_field_encoding_rejects_noncanonical():
    with pytest.raises(ValueError):
        FR.decode(BLS12_381_R.to_bytes(32, "little"))
    assert FR.decode(FR.encode(12345)) == 12345


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(0, 12), min_size=1, max_size=6), st.integers(0, 12))
def test_horner_matches_naive_sum(coeffs, x):
    assert poly_eval(Polynomial(F13, coeffs), x) == naive_eval(coeffs, x, 13)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(0, BLS12_381_R - 1), min_size=1, max_size=5),
       st.integers(0, BLS12_381_R - 1))
def test_lagrange_weights_sum_to_one_and_reconstruct(coeffs, target):
    poly = Polynomial(FR, coeffs)
    xs = list(range(1, len(coeffs) + 1))
    lams = lagrange_coefficients(FR, xs, target)
    assert sum(lams) % BLS12_381_R == 1
    assert sum(l * poly(x) for l, x in zip(lams, xs)) % BLS12_381_R == poly(target)
    again = lagrange_interpolate(FR, [(x, poly(x)) for x in xs], len(coeffs) - 1)
    assert again(target) == poly(target)


def test_sample_bivariate_constraints_and_determinism():
    a = sample_bivariate(F13, [4, 9], 1, random.Random(3))
    b = sample_bivariate(F13, [4, 9], 1, random.Random(3))
    assert a == b
    assert a(0, 1) == 4 and a(0, 2) == 9
    with pytest.raises(WrongSecretCount):
        sample_bivariate(F13, [4], 1, random.Random(0))


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 4), st.integers(0, 2**32))
def test_bivariate_rows_and_columns_agree(t, seed):
    rng = random.Random(seed)
    secrets = [FR.random(rng) for _ in range(t + 1)]
    phi = sample_bivariate(FR, secrets, t, rng)
    for k in range(1, t + 2):
        assert phi(0, k) == secrets[k - 1]
    for i in range(0, 3 * t + 2):
        assert phi.row(i)(t + 1) == phi.column(t + 1)(i) == phi(i, t + 1)
        assert phi.row(i).degree() <= t and phi.column(i).degree() <= t


def test_polynomial_arithmetic():
    a, b = Polynomial(F13, [1, 2, 3]), Polynomial(F13, [5, 1])
    q, r = (a * b + Polynomial(F13, [4])).divmod(b)
    assert q == a and r.coeffs == (4,)
    quot = a.quotient_by_root(2)
    assert quot * Polynomial(F13, [-2, 1]) + Polynomial(F13, [a(2)]) == a


def test_robust_interpolate_example():
    pts = [(1, 2), (2, 3), (3, 9), (4, 5), (5, 6)]
    assert robust_interpolate(F13, pts, 1, 4).coeffs == (1, 1)
    assert robust_interpolate(F13, [(1, 2), (2, 3), (4, 5)], 1, 3).coeffs == (1, 1)


def test_robust_interpolate_not_yet_decodable():
    # quorum-1 consistent points plus two points on a different line
    pts = [(1, 2), (2, 3), (3, 4), (4, 0), (5, 7)]
    with pytest.raises(NotYetDecodable):
        robust_interpolate(F13, pts, 1, 5)
    with pytest.raises(NotYetDecodable):
        robust_interpolate(F13, pts[:3], 1, 4)
    with pytest.raises(DuplicatePoint):
        robust_interpolate(F13, [(1, 1), (1, 2), (2, 2)], 1, 2)


def test_robust_interpolate_ambiguity_is_reported():
    pts = [(1, 1), (2, 2), (3, 3), (4, 5), (5, 8)]  # y=x has 3 points, no other line has 3
    with pytest.raises(AmbiguousDecoding):
        robust_interpolate(F13, [(1, 1), (2, 2), (3, 6), (4, 9)], 1, 2)
    assert robust_interpolate(F13, pts, 1, 3).coeffs == (0, 1)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 4), st.integers(0, 2**32), st.data())
def test_robust_interpolate_corrects_up_to_t_errors(t, seed, data):
    rng = random.Random(seed)
    poly = Polynomial.random(FR, t, rng)
    m = data.draw(st.integers(2 * t + 1, 3 * t + 1))
    errors = data.draw(st.integers(0, m - (2 * t + 1)))
    bad = set(rng.sample(range(m), errors))
    pts = [(x, poly(x) if j not in bad else FR.add(poly(x), 1 + j))
           for j, x in enumerate(range(1, m + 1))]
    rng.shuffle(pts)
    assert robust_interpolate(FR, pts, t, 2 * t + 1) == poly


def test_berlekamp_welch_detects_too_many_errors():
    poly = Polynomial(F13, [3, 1])
    pts = [(x, poly(x)) for x in range(1, 6)]
    pts[0] = (1, 0)
    assert berlekamp_welch(F13, pts, 1, 1) == poly
    assert berlekamp_welch(F13, pts, 1, 0) is None


def test_interpolate_at_zero_reconstructs_secret():
    poly = Polynomial(F13, [7, 3, 5])
    pts = [(x, poly(x)) for x in (2, 5, 11)]
    assert interpolate_at(F13, pts, 0) == 7


def test_bivariate_random_degree():
    phi = BivariatePolynomial.random(F13, 2, random.Random(1))
    assert phi.t == 2 and len(phi.coeffs) == 3
