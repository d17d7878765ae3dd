import json
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from artifact.characters import psi
from artifact.charsum import (archimedean_integral, box_sum, box_sum_naive, complete_sum,
                              sufficient_depth, value_histogram)
from artifact.cyclotomic import CyclotomicValue
from artifact.errors import BudgetExceeded, InstanceError
from artifact.forms import FormSystem, shift, smoothness_check
from artifact.laurent import LaurentElement
from artifact.poly import NEG_INF, all_polys, digits_box

from conftest import T, conic_twisted


def test_instance_round_trip(quadric3):
    again = FormSystem.from_json(json.dumps(quadric3.to_dict()))
    assert again == quadric3


@pytest.mark.parametrize("bad", [
    {"field": "4^1", "n": 2, "d": 2, "R": 1, "forms": [[{"exps": [2, 0], "c": "1"}]]},
    {"field": "3^1", "n": 2, "d": 2, "R": 1, "forms": [[{"exps": [1, 0], "c": "1"}]]},
    {"field": "3^1", "n": 2, "d": 2, "R": 2, "forms": [[{"exps": [2, 0], "c": "1"}]]},
])
def test_instance_validation(bad):
    with pytest.raises(InstanceError):
        FormSystem.from_dict(bad)


def test_projective_points_and_smoothness(quadric3, conic3):
    # a smooth conic has q+1 points, the split quadric surface (q+1)^2
    assert smoothness_check(conic3, 2).point_counts == {1: 4, 2: 10}
    assert smoothness_check(quadric3, 1).point_counts[1] == 16
    assert smoothness_check(quadric3, 2).smooth
    cone = FormSystem.from_dict({"field": "3^1", "n": 3, "d": 2, "R": 1,
                                 "forms": [[{"exps": [2, 0, 0], "c": "1"},
                                            {"exps": [0, 2, 0], "c": "1"}]]})
    assert not smoothness_check(cone, 1).smooth


def _direct_box_count(sh, P):
    return sum(1 for y in digits_box(sh.fd, sh.n, P) if all(v.is_zero() for v in sh.evaluate(y)))


@pytest.mark.parametrize("P", [1, 2])
def test_histogram_zero_count_matches_oracle(conic3, P):
    for sh in (shift(conic3), conic_twisted(conic3)):
        assert value_histogram(sh, P).zero_count() == _direct_box_count(sh, P)
        assert value_histogram(sh, P).total == conic3.fd.q ** (conic3.n * P)


@given(st.lists(st.integers(0, 2), min_size=4, max_size=4))
@settings(max_examples=40, deadline=None)
def test_box_sum_matches_naive(digits):
    conic = FormSystem.from_dict({"field": "3^1", "n": 3, "d": 2, "R": 1,
                                  "forms": [[{"exps": [1, 1, 0], "c": "1"},
                                             {"exps": [0, 0, 2], "c": "2"}]]})
    sh = shift(conic)
    alpha = (LaurentElement.from_digit_vector(conic.fd, digits, -1, NEG_INF),)
    assert box_sum(sh, alpha, 1) == box_sum_naive(sh, alpha, 1)


def _complete_sum_oracle(sh, g, a):
    fd = sh.fd
    acc = CyclotomicValue.integer(fd.p, 0)
    for y in digits_box(fd, sh.n, g.degree):
        vals = sh.evaluate(y)
        x = LaurentElement(fd)
        for ak, v in zip(a, vals):
            x = x + LaurentElement.from_fraction(ak * v % g, g, g.degree + 2)
        acc = acc + psi(x, fd)
    return acc


def test_complete_sums_match_oracle(quadric3, conic3):
    for sys_ in (conic3, quadric3):
        sh = shift(sys_)
        fd = sys_.fd
        for g in (T(fd, 0, 1), T(fd, 1, 1)):
            for a in all_polys(fd, g.degree):
                if a.is_zero():
                    continue
                s = complete_sum(sh, g, (a,))
                assert s.scale == -sys_.n * g.degree
                assert s.value == _complete_sum_oracle(sh, g, (a,))


def test_archimedean_integral_values(quadric3):
    fd = quadric3.fd
    t = LaurentElement.from_poly(T(fd, 0, 1))
    zero = LaurentElement(fd)
    assert archimedean_integral(quadric3, (zero,)).as_fraction() == 1
    assert archimedean_integral(quadric3, (t,)).as_fraction() == Fraction(1, 9)


@pytest.mark.parametrize("k", [0, 1, 2])
def test_archimedean_integral_stable_beyond_certified_depth(quadric3, conic3, k):
    for sys_ in (quadric3, conic3):
        gamma = (LaurentElement.from_poly(T(sys_.fd, 0, 1) ** k),)
        L = sufficient_depth(sys_.d, gamma)
        # three extra digits, capped where the box passes 3^16 points
        top = min(L + 3, 16 // sys_.n)
        assert top >= L + 2
        vals = [archimedean_integral(sys_, gamma, D, certify=False) for D in range(L, top + 1)]
        assert all(v == vals[0] for v in vals)


def test_budget_is_enforced(quadric3):
    with pytest.raises(BudgetExceeded):
        value_histogram(shift(quadric3), 2, budget=100)
