"""Prime-field arithmetic, polynomials and (robust) interpolation.

Field elements are plain Python ints in ``[0, p)``; a :class:`PrimeField`
carries the modulus and does the reductions. Polynomials store coefficients
lowest degree first.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from typing import Iterable, Sequence

# BLS12-381 scalar field order.
BLS12_381_R = 0x73EDA753299D7D483339D80809A1D80553BDA402FFFE5BFEFFFFFFFF00000001
# Order of the quadratic-residue subgroup of the 256-bit safe-prime test group.
DLOG_Q = 0x5C8D5134479343D8CE97D574ABD3940C1AC5E6BF9EFD69751F1F8FE7F1D4E1EB

ELEMENT_BYTES = 32


class FieldError(ValueError):
    pass


class DuplicatePoint(FieldError):
    pass


class InconsistentExtraPoint(FieldError):
    pass


class WrongSecretCount(FieldError):
    pass


class NotYetDecodable(FieldError):
    """Raised when no polynomial reaches the agreement quorum (yet)."""


class AmbiguousDecoding(FieldError):
    """More than one polynomial reaches the quorum: parameters are misused."""


class PrimeField:
    def __init__(self, p: int):
        if p < 2:
            raise FieldError(f"not a prime modulus: {p}")
        self.p = p

    def __repr__(self) -> str:
        return f"PrimeField({self.p:#x})" if self.p > 1 << 32 else f"PrimeField({self.p})"

    def __eq__(self, other: object) -> bool:
        return isinstance(other, PrimeField) and other.p == self.p

    def __hash__(self) -> int:
        return hash(self.p)

    def __call__(self, x: int) -> int:
        return x % self.p

    def add(self, a: int, b: int) -> int:
        return (a + b) % self.p

    def sub(self, a: int, b: int) -> int:
        return (a - b) % self.p

    def mul(self, a: int, b: int) -> int:
        return (a * b) % self.p

    def neg(self, a: int) -> int:
        return (-a) % self.p

    def inv(self, a: int) -> int:
        a %= self.p
        if a == 0:
            raise ZeroDivisionError("inverse of zero")
        return pow(a, -1, self.p)

    def div(self, a: int, b: int) -> int:
        return a * self.inv(b) % self.p

    def random(self, rng: random.Random) -> int:
        return rng.randrange(self.p)

    def encode(self, a: int) -> bytes:
        return (a % self.p).to_bytes(ELEMENT_BYTES, "little")

    def decode(self, data: bytes) -> int:
        if len(data) != ELEMENT_BYTES:
            raise FieldError(f"field element must be {ELEMENT_BYTES} bytes, got {len(data)}")
        x = int.from_bytes(data, "little")
        if x >= self.p:
            raise FieldError("non-canonical field element")
        return x


@dataclass(frozen=True)
class Polynomial:
    field: PrimeField
    coeffs: tuple[int, ...]

    def __init__(self, field: PrimeField, coeffs: Iterable[int]):
        object.__setattr__(self, "field", field)
        object.__setattr__(self, "coeffs", tuple(c % field.p for c in coeffs) or (0,))

    @classmethod
    def random(cls, field: PrimeField, degree: int, rng: random.Random,
               constant: int | None = None) -> "Polynomial":
        coeffs = [field.random(rng) for _ in range(degree + 1)]
        if constant is not None:
            coeffs[0] = constant
        return cls(field, coeffs)

    def degree(self) -> int:
        """Effective degree; the zero polynomial reports 0."""
        d = len(self.coeffs) - 1
        while d > 0 and self.coeffs[d] == 0:
            d -= 1
        return d

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def __call__(self, x: int) -> int:
        return poly_eval(self, x)

    def __add__(self, other: "Polynomial") -> "Polynomial":
        n = max(len(self.coeffs), len(other.coeffs))
        a = self.coeffs + (0,) * (n - len(self.coeffs))
        b = other.coeffs + (0,) * (n - len(other.coeffs))
        return Polynomial(self.field, (x + y for x, y in zip(a, b)))

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        return self + other.scale(-1)

    def scale(self, c: int) -> "Polynomial":
        return Polynomial(self.field, (c * x for x in self.coeffs))

    def __mul__(self, other: "Polynomial") -> "Polynomial":
        p = self.field.p
        out = [0] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    out[i + j] = (out[i + j] + a * b) % p
        return Polynomial(self.field, out)

    def divmod(self, divisor: "Polynomial") -> tuple["Polynomial", "Polynomial"]:
        f = self.field
        dd = divisor.degree()
        if divisor.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs[: self.degree() + 1])
        lead_inv = f.inv(divisor.coeffs[dd])
        quot = [0] * max(len(rem) - dd, 1)
        for i in range(len(rem) - 1, dd - 1, -1):
            c = rem[i] * lead_inv % f.p
            if c == 0:
                continue
            quot[i - dd] = c
            for j in range(dd + 1):
                rem[i - dd + j] = (rem[i - dd + j] - c * divisor.coeffs[j]) % f.p
        return Polynomial(f, quot), Polynomial(f, rem[:dd] or [0])

    def quotient_by_root(self, x0: int) -> "Polynomial":
        """(p(X) - p(x0)) / (X - x0) by synthetic division."""
        p = self.field.p
        n = len(self.coeffs)
        if n == 1:
            return Polynomial(self.field, [0])
        out = [0] * (n - 1)
        acc = 0
        for i in range(n - 1, 0, -1):
            acc = (acc * x0 + self.coeffs[i]) % p
            out[i - 1] = acc
        return Polynomial(self.field, out)


def poly_eval(poly: Polynomial, x: int) -> int:
    p = poly.field.p
    acc = 0
    for c in reversed(poly.coeffs):
        acc = (acc * x + c) % p
    return acc


def _check_distinct(xs: Sequence[int]) -> None:
    if len(set(xs)) != len(xs):
        raise DuplicatePoint(f"duplicate evaluation points in {list(xs)}")


def lagrange_coefficients(field: PrimeField, xs: Sequence[int], target: int) -> list[int]:
    """Weights lambda_j with f(target) = sum lambda_j f(xs[j]) for deg f < len(xs)."""
    p = field.p
    xs = [x % p for x in xs]
    _check_distinct(xs)
    target %= p
    out = []
    for j, xj in enumerate(xs):
        num, den = 1, 1
        for m, xm in enumerate(xs):
            if m != j:
                num = num * (target - xm) % p
                den = den * (xj - xm) % p
        out.append(num * pow(den, -1, p) % p)
    return out


def lagrange_interpolate(field: PrimeField, points: Sequence[tuple[int, int]],
                         degree: int) -> Polynomial:
    """Interpolate through the first ``degree + 1`` points and check the rest."""
    p = field.p
    xs = [x % p for x, _ in points]
    _check_distinct(xs)
    if len(points) < degree + 1:
        raise FieldError(f"need {degree + 1} points, got {len(points)}")
    base = points[: degree + 1]
    coeffs = [0] * (degree + 1)
    bx = [x % p for x, _ in base]
    for j, (xj, yj) in enumerate(base):
        # basis numerator prod_{m != j} (X - x_m), built incrementally
        basis = [1]
        den = 1
        for m, xm in enumerate(bx):
            if m == j:
                continue
            basis = [(-xm * basis[0]) % p] + [
                (basis[i - 1] - xm * basis[i]) % p for i in range(1, len(basis))
            ] + [basis[-1]]
            den = den * (xj - xm) % p
        scale = yj * pow(den, -1, p) % p
        for i, c in enumerate(basis):
            coeffs[i] = (coeffs[i] + c * scale) % p
    poly = Polynomial(field, coeffs)
    for x, y in points[degree + 1:]:
        if poly_eval(poly, x) != y % p:
            raise InconsistentExtraPoint(f"point ({x}, {y}) is off the interpolant")
    return poly


def interpolate_at(field: PrimeField, points: Sequence[tuple[int, int]], target: int) -> int:
    lams = lagrange_coefficients(field, [x for x, _ in points], target)
    return sum(l * y for l, (_, y) in zip(lams, points)) % field.p


@dataclass(frozen=True)
class BivariatePolynomial:
    """phi(x, y) = sum_{a,b} coeffs[a][b] x^a y^b with degree <= t in each variable."""

    field: PrimeField
    coeffs: tuple[tuple[int, ...], ...]

    @property
    def t(self) -> int:
        return len(self.coeffs) - 1

    @classmethod
    def random(cls, field: PrimeField, t: int, rng: random.Random) -> "BivariatePolynomial":
        return cls(field, tuple(tuple(field.random(rng) for _ in range(t + 1))
                                for _ in range(t + 1)))

    def __call__(self, x: int, y: int) -> int:
        p = self.field.p
        acc = 0
        for row in reversed(self.coeffs):
            inner = 0
            for c in reversed(row):
                inner = (inner * y + c) % p
            acc = (acc * x + inner) % p
        return acc

    def column(self, k: int) -> Polynomial:
        """phi(., k) as a polynomial in x."""
        p = self.field.p
        out = []
        for row in self.coeffs:
            inner = 0
            for c in reversed(row):
                inner = (inner * k + c) % p
            out.append(inner)
        return Polynomial(self.field, out)

    def row(self, i: int) -> Polynomial:
        """phi(i, .) as a polynomial in y."""
        p = self.field.p
        t = self.t
        out = [0] * (t + 1)
        xp = 1
        for row in self.coeffs:
            for b, c in enumerate(row):
                out[b] = (out[b] + c * xp) % p
            xp = xp * i % p
        return Polynomial(self.field, out)


def sample_bivariate(field: PrimeField, secrets: Sequence[int], t: int,
                     rng: random.Random) -> BivariatePolynomial:
    """Random degree-(t,t) phi with phi(0, k) = secrets[k-1] for k in 1..t+1."""
    if len(secrets) != t + 1:
        raise WrongSecretCount(f"expected {t + 1} secrets, got {len(secrets)}")
    p = field.p
    # Rows a >= 1 are free; row 0 is phi(0, y), the unique degree-t polynomial
    # through (k, s_k).
    row0 = lagrange_interpolate(field, [(k, s % p) for k, s in enumerate(secrets, 1)], t)
    rest = [tuple(field.random(rng) for _ in range(t + 1)) for _ in range(t)]
    return BivariatePolynomial(field, (tuple(row0.coeffs + (0,) * (t + 1 - len(row0.coeffs))),
                                       *rest))


# -- robust interpolation ---------------------------------------------------

def _solve_mod(field: PrimeField, rows: list[list[int]], rhs: list[int]) -> list[int] | None:
    """Any solution of rows * x = rhs over the field, or None if inconsistent."""
    p = field.p
    m = len(rows)
    ncols = len(rows[0]) if rows else 0
    aug = [r[:] + [b] for r, b in zip(rows, rhs)]
    pivots = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, m) if aug[i][c]), None)
        if piv is None:
            continue
        aug[r], aug[piv] = aug[piv], aug[r]
        inv = pow(aug[r][c], -1, p)
        aug[r] = [v * inv % p for v in aug[r]]
        for i in range(m):
            if i != r and aug[i][c]:
                f = aug[i][c]
                aug[i] = [(a - f * b) % p for a, b in zip(aug[i], aug[r])]
        pivots.append(c)
        r += 1
        if r == m:
            break
    for i in range(r, m):
        if aug[i][ncols]:
            return None
    x = [0] * ncols
    for i, c in enumerate(pivots):
        x[c] = aug[i][ncols]
    return x


def berlekamp_welch(field: PrimeField, points: Sequence[tuple[int, int]], degree: int,
                    errors: int) -> Polynomial | None:
    """Decode assuming at most ``errors`` corrupted points; None on failure."""
    p = field.p
    m = len(points)
    if m < degree + 1 + 2 * errors:
        return None
    # Unknowns: E_0..E_{e-1} (E monic of degree e), Q_0..Q_{d+e}.
    nq = degree + errors + 1
    rows, rhs = [], []
    for x, y in points:
        row = []
        xp = 1
        for _ in range(errors):
            row.append(-y * xp % p)
            xp = xp * x % p
        rhs.append(y * xp % p)  # y * x^e from the monic term
        xp = 1
        for _ in range(nq):
            row.append(xp)
            xp = xp * x % p
        rows.append(row)
    sol = _solve_mod(field, rows, rhs)
    if sol is None:
        return None
    E = Polynomial(field, sol[:errors] + [1])
    Q = Polynomial(field, sol[errors:])
    quot, rem = Q.divmod(E)
    if not rem.is_zero() or quot.degree() > degree:
        return None
    return quot


def _agreement(poly: Polynomial, points: Sequence[tuple[int, int]]) -> int:
    p = poly.field.p
    return sum(1 for x, y in points if poly_eval(poly, x) == y % p)


def robust_interpolate(field: PrimeField, points: Sequence[tuple[int, int]], degree: int,
                       quorum: int) -> Polynomial:
    """The unique degree-``degree`` polynomial agreeing with >= ``quorum`` points.

    Raises NotYetDecodable when none exists (the caller waits for more points)
    and AmbiguousDecoding when several do.
    """
    p = field.p
    points = [(x % p, y % p) for x, y in points]
    _check_distinct([x for x, _ in points])
    if quorum < degree + 1:
        raise FieldError("quorum must be at least degree + 1")
    m = len(points)
    if m < quorum:
        raise NotYetDecodable(f"{m} points < quorum {quorum}")
    found = None
    for e in range((m - degree - 1) // 2 + 1):
        cand = berlekamp_welch(field, points, degree, e)
        if cand is not None and _agreement(cand, points) >= quorum:
            found = cand
            break
    if m <= 2 * quorum - degree - 1:
        # A quorum polynomial then has at most m - quorum errors, inside the
        # decoding radius, and two distinct ones would need m >= 2*quorum - degree.
        if found is None:
            raise NotYetDecodable("no polynomial reaches the quorum")
        return found
    # Any quorum polynomial has >= degree+1 points among the first
    # m - quorum + degree + 1, so enumerating subsets of that window is exhaustive.
    window = points[: m - quorum + degree + 1]
    results: dict[tuple[int, ...], Polynomial] = {}
    for subset in itertools.combinations(window, degree + 1):
        cand = lagrange_interpolate(field, list(subset), degree)
        key = cand.coeffs[: degree + 1] + (0,) * (degree + 1 - len(cand.coeffs))
        if key not in results and _agreement(cand, points) >= quorum:
            results[key] = cand
    if not results:
        raise NotYetDecodable("no polynomial reaches the quorum")
    if len(results) > 1:
        raise AmbiguousDecoding(f"{len(results)} polynomials reach quorum {quorum}")
    return next(iter(results.values()))
