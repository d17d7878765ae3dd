import cmath
from fractions import Fraction
from itertools import product

import pytest
from hypothesis import given, settings, strategies as st

from artifact.cyclotomic import CyclotomicValue, magnitude_power_leq
from artifact.errors import InstanceError, PrecisionError
from artifact.field import FieldDescriptor, first_irreducible, is_prime
from artifact.laurent import LaurentElement, vector_ord
from artifact.poly import (NEG_INF, Poly, all_polys, factor, gcd_many, irreducibles, is_irreducible,
                           mobius, monics, necklace_count, poly_gcd, poly_xgcd)

FIELDS = [FieldDescriptor(2), FieldDescriptor(3), FieldDescriptor(5), FieldDescriptor(2, 3),
          FieldDescriptor(3, 2)]


@pytest.mark.parametrize("fd", FIELDS, ids=str)
def test_field_axioms_exhaustive(fd):
    q = fd.q
    els = range(q)
    for a in els:
        assert fd.add(a, fd.neg(a)) == 0
        assert fd.mul(a, 1) == a
        if a:
            assert fd.mul(a, fd.inv(a)) == 1
            assert fd.pow(a, q - 1) == 1
        assert fd.pow(a, q) == a
    for a, b in product(els, repeat=2):
        assert fd.add(a, b) == fd.add(b, a)
        assert fd.mul(a, b) == fd.mul(b, a)


@pytest.mark.parametrize("fd", FIELDS, ids=str)
def test_trace_is_additive_onto_prime_field(fd):
    traces = [fd.trace(a) for a in range(fd.q)]
    assert set(traces) == set(range(fd.p))
    # each value hit q/p times
    assert all(traces.count(v) == fd.q // fd.p for v in range(fd.p))
    for a, b in product(range(fd.q), repeat=2):
        assert fd.trace(fd.add(a, b)) == (fd.trace(a) + fd.trace(b)) % fd.p


@given(st.data())
@settings(max_examples=200, deadline=None)
def test_field_distributive(data):
    fd = data.draw(st.sampled_from(FIELDS))
    a, b, c = (data.draw(st.integers(0, fd.q - 1)) for _ in range(3))
    assert fd.mul(a, fd.add(b, c)) == fd.add(fd.mul(a, b), fd.mul(a, c))
    assert fd.mul(a, fd.mul(b, c)) == fd.mul(fd.mul(a, b), c)


def test_field_descriptor_validation():
    assert is_prime(7) and not is_prime(9)
    with pytest.raises(InstanceError):
        FieldDescriptor(4)
    with pytest.raises(InstanceError):
        FieldDescriptor(3, 2, (1, 0, 1, 0))
    assert first_irreducible(3, 2) == FieldDescriptor(3, 2).modulus
    assert FieldDescriptor.parse(str(FieldDescriptor(3, 2))) == FieldDescriptor(3, 2)


@pytest.mark.parametrize("fd", FIELDS[:3] + FIELDS[4:], ids=str)
def test_element_text_round_trip(fd):
    for a in range(fd.q):
        assert fd.parse_element(fd.format_element(a)) == a


def polys(fd, max_deg=4):
    return st.lists(st.integers(0, fd.q - 1), min_size=0, max_size=max_deg + 1).map(
        lambda c: Poly(fd, tuple(c)))


@given(st.data())
@settings(max_examples=150, deadline=None)
def test_poly_division_and_bezout(data):
    fd = data.draw(st.sampled_from(FIELDS))
    a = data.draw(polys(fd))
    b = data.draw(polys(fd).filter(lambda g: not g.is_zero()))
    qt, r = divmod(a, b)
    assert qt * b + r == a
    assert r.is_zero() or r.degree < b.degree
    g = poly_gcd(a, b)
    assert g.is_monic()
    assert (a % g).is_zero() and (b % g).is_zero()
    d, s, t = poly_xgcd(a, b)
    assert s * a + t * b == d
    assert d == g


@pytest.mark.parametrize("fd", FIELDS[:3] + FIELDS[4:], ids=str)
def test_irreducible_counts_match_necklaces(fd):
    for D in range(1, 4 if fd.q < 5 else 3):
        brute = sum(1 for g in monics(fd, D) if is_irreducible(g))
        assert brute == necklace_count(fd.q, D)
    assert len(irreducibles(fd, 2)) == necklace_count(fd.q, 1) + necklace_count(fd.q, 2)


def test_factor_and_mobius():
    fd = FieldDescriptor(3)
    for deg in range(1, 5):
        for g in monics(fd, deg):
            fs = factor(g)
            prod = Poly.one(fd)
            for pi, e in fs:
                assert is_irreducible(pi)
                prod = prod * pi**e
            assert prod == g
            expect = 0 if any(e > 1 for _, e in fs) else (-1) ** len(fs)
            assert mobius(g) == expect


def test_poly_norms_and_boxes():
    fd = FieldDescriptor(3)
    assert Poly(fd, (1, 0, 1)).norm() == 9
    assert Poly.zero(fd).norm() == 0
    assert Poly.zero(fd).degree == NEG_INF
    assert len(list(all_polys(fd, 2))) == 9
    assert gcd_many([Poly(fd, (0, 1)), Poly(fd, (0, 0, 1))]) == Poly(fd, (0, 1))
    assert Poly.parse(fd, "1,0,2") == Poly(fd, (1, 0, 2))


@given(st.data())
@settings(max_examples=100, deadline=None)
def test_laurent_fraction_expansion(data):
    fd = data.draw(st.sampled_from(FIELDS[:3]))
    den = data.draw(polys(fd, 3).filter(lambda g: g.degree >= 1))
    num = data.draw(polys(fd, 2))
    depth = 8
    back = LaurentElement.from_fraction(num, den, depth) * den
    # precision floor -depth moves up by deg den after the product
    for i in range(den.degree - depth + 1, max(num.degree, den.degree) + 2):
        assert back.digit(i) == (num.coeff(i) if i >= 0 else 0)


def test_laurent_precision_and_ord():
    fd = FieldDescriptor(3)
    x = LaurentElement.from_digit_vector(fd, [1, 2], -1)
    assert x.top == -1
    with pytest.raises(PrecisionError):
        x.digit(-5)
    exact = LaurentElement.from_digit_vector(fd, [0, 2], -1, NEG_INF)
    assert exact.ord == -2
    assert vector_ord((exact, LaurentElement.from_poly(Poly(fd, (1, 1))))) == 1


def test_cyclotomic_basics():
    p = 5
    total = CyclotomicValue.integer(p, 0)
    for j in range(p):
        total = total + CyclotomicValue.zeta(p, j)
    assert total.is_integer() and total.to_int() == 0
    # quadratic Gauss sum has |g|^2 = p
    g = CyclotomicValue.from_exponents(p, [(x * x) % p for x in range(p)])
    assert g.abs2().is_integer() and g.abs2().to_int() == p
    assert abs(g.to_complex()) == pytest.approx(p ** 0.5)
    assert magnitude_power_leq([g], 2, p)
    assert not magnitude_power_leq([g], 2, p - 1)


@given(st.lists(st.integers(0, 6), min_size=1, max_size=20))
def test_cyclotomic_matches_complex_embedding(exps):
    p = 7
    v = CyclotomicValue.from_exponents(p, exps)
    z = sum(cmath.exp(2j * cmath.pi * e / p) for e in exps)
    assert abs(v.to_complex() - z) < 1e-9
    # a bound off the quarter grid is never hit exactly by these values
    bound = Fraction(round(z.real * 4), 4) + Fraction(1, 8)
    if abs(z.real - float(bound)) > 1e-6:
        assert v.compare_real(bound) == (1 if z.real > bound else -1)
    assert v.compare_real(len(exps)) <= 0
