from fractions import Fraction

import pytest

from artifact.forms import shift
from artifact.localdata import (count_mod, euler_sigma, local_factor_A, local_factor_A_from_sums,
                                prime_power_count, series_csv, singular_integral, singular_series,
                                valuation_decomposition)
from artifact.poly import digits_box, gcd_many

from conftest import T


def _oracle(sh, g):
    """(N(g), N*(g)) by enumerating y mod g with plain polynomial arithmetic."""
    total = prim = 0
    for y in digits_box(sh.fd, sh.n, g.degree):
        if all((v % g).is_zero() for v in sh.evaluate(y)):
            total += 1
            if gcd_many(list(y) + [g]).degree == 0:
                prim += 1
    return total, prim


MODULI = [(0, 1), (1, 1), (0, 0, 1), (1, 0, 1), (2, 1, 1)]


@pytest.mark.parametrize("coeffs", MODULI)
def test_counts_match_oracle(conic3, quadric3, coeffs):
    for sys_ in (conic3, quadric3):
        sh = shift(sys_)
        g = T(sys_.fd, *coeffs)
        c = count_mod(sh, g)
        assert (c.total, c.primitive) == _oracle(sh, g)


@pytest.mark.parametrize("e", [1, 2, 3])
def test_local_methods_agree(quadric3, conic3, e):
    for sys_ in (conic3, quadric3):
        sh = shift(sys_)
        pi = T(sys_.fd, 0, 1)
        ref = prime_power_count(sh, pi, e, "lift")
        for method in ("scan", "census", "hensel"):
            if method == "scan" and sys_.fd.q ** (sys_.n * e) > 600_000:
                continue
            if method == "census" and e != 1:
                continue
            got = prime_power_count(sh, pi, e, method)
            assert (got.total, got.primitive) == (ref.total, ref.primitive), method


def test_crt_multiplicativity(quadric3):
    sh = shift(quadric3)
    fd = quadric3.fd
    a, b = T(fd, 0, 1), T(fd, 1, 0, 1)
    assert count_mod(sh, a * b).total == count_mod(sh, a).total * count_mod(sh, b).total


def test_frozen_ladders(quadric3):
    sh = shift(quadric3)
    fd = quadric3.fd
    # values computed by exhaustive scan and frozen
    assert [prime_power_count(sh, T(fd, 0, 1), e).primitive for e in (1, 2, 3, 4)] == \
        [32, 864, 23328, 629856]
    assert [(c.total, c.primitive) for c in
            (prime_power_count(sh, T(fd, 1, 0, 1), e, "lift") for e in (1, 2))] == \
        [(801, 800), (589761, 583200)]


def test_local_factors(quadric3, conic3):
    sq, sc = shift(quadric3), shift(conic3)
    t = T(quadric3.fd, 0, 1)
    assert local_factor_A(sq, t) == Fraction(2, 9)
    assert local_factor_A(sc, t) == 0
    assert local_factor_A(sq, T(quadric3.fd, 1)) == 1
    for g in (t, T(quadric3.fd, 1, 1), t * t):
        assert local_factor_A_from_sums(sq, g) == local_factor_A(sq, g)
    assert euler_sigma(sq, t) == Fraction(4, 3)
    assert sum(local_factor_A(sq, t**j) for j in range(7)) == Fraction(2915, 2187)


def test_valuation_decomposition_sums_to_total(quadric3):
    sh = shift(quadric3)
    t = T(quadric3.fd, 0, 1)
    for e in (1, 2, 3):
        assert valuation_decomposition(sh, t, e) == prime_power_count(sh, t, e).total


def test_series_and_integral(quadric3):
    sh = shift(quadric3)
    assert [singular_series(sh, B).value for B in range(3)] == [1, Fraction(5, 3), Fraction(7, 3)]
    assert [singular_integral(quadric3, B) for B in range(4)] == \
        [1, 3, Fraction(11, 3), Fraction(35, 9)]
    text = series_csv(singular_series(sh, 2))
    assert text.splitlines()[0].count(",") >= 1


def test_conic_complete_sums_at_t(conic3):
    from artifact.charsum import complete_sum
    sh = shift(conic3)
    fd = conic3.fd
    t = T(fd, 0, 1)
    # fibres of f over F_3 by an independent loop: sizes of f(y) = c for c = 0, 1, 2
    fib = [0, 0, 0]
    for y in digits_box(fd, 3, 1):
        fib[conic3.evaluate(y)[0].coeff(0)] += 1
    assert fib == [9, 6, 12]
    s1 = complete_sum(sh, t, (T(fd, 1),))
    s2 = complete_sum(sh, t, (T(fd, 2),))
    assert not s1.value.is_integer()
    assert s1.value == s2.value.conj()
    assert (s1.value + s2.value).to_int() == 0
    assert euler_sigma(sh, t) == Fraction(4, 3)
    assert singular_series(sh, 1).value == 1
