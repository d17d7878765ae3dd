import json

import pytest
from hypothesis import given, settings, strategies as st

from artifact.arcs import (direct_count, factorization_hypothesis, integral_count,
                           major_arc_locate, verify_factorization)
from artifact.forms import shift
from artifact.laurent import LaurentElement
from artifact.poly import NEG_INF, Poly, digits_box
from artifact.weyl import (ALT_I, ALT_II, AuxQuery, alternative_tests, beta_grid, check_shrinking,
                           check_tNbf, classify_alternatives, count_Naux, count_Nv, nv_sizes,
                           shrinking_csv, theta_d, two_sum_check, weyl_inequality_check)

from conftest import T


def L(fd, digits: dict):
    return LaurentElement.from_digits(fd, digits)


def _nv_oracle(sys_, J, P, beta, v):
    """d = 2 only: count u with |u| < q^size and ||sum_k beta_k Psi^(k)(u)|| < q^{-T}."""
    assert sys_.d == 2
    size = nv_sizes(2, J, P, v)[0]
    T_ = (v + 1) * P - v * J
    hits = 0
    for u in digits_box(sys_.fd, sys_.n, size):
        ok = True
        for i in range(sys_.n):
            acc = LaurentElement(sys_.fd)
            for k, b in enumerate(beta):
                acc = acc + b * sys_.multilinear_psi(k, i, u)
            if any(acc.digit(-s) for s in range(1, T_ + 1)):
                ok = False
                break
        hits += ok
    return hits


@pytest.mark.parametrize("digits", [{-3: 1}, {-2: 1, -4: 2}, {-1: 1}, {-2: 2}])
@pytest.mark.parametrize("v", [0, 1])
def test_count_Nv_matches_oracle(quadric3, digits, v):
    beta = (L(quadric3.fd, digits),)
    assert count_Nv(quadric3, AuxQuery(1, 2, beta, v)) == _nv_oracle(quadric3, 1, 2, beta, v)


def test_frozen_aux_counts(quadric3):
    fd = quadric3.fd
    assert count_Nv(quadric3, AuxQuery(1, 1, (L(fd, {-3: 1}),), 1)) == 81
    assert count_Naux(quadric3, 1, (L(fd, {1: 1}),)) == 1
    assert count_Naux(quadric3, 2, (LaurentElement(fd),)) == 6561
    assert count_Naux(quadric3, 1, (L(fd, {-1: 1}),)) == 81


def test_aux_query_validation():
    with pytest.raises(ValueError):
        AuxQuery(3, 2, (), 0)
    with pytest.raises(ValueError):
        AuxQuery(0, 2, (), 0)


def test_shrinking_grid_and_monotonicity(quadric3):
    reports = [check_shrinking(quadric3, 1, 2, b) for b in beta_grid(quadric3.fd, 1, 4)]
    assert all(r.passed for r in reports)
    for r in reports:
        assert all(a >= b for a, b in zip(r.counts, r.counts[1:]))
    header = shrinking_csv(reports).splitlines()[0]
    assert header.startswith("J,P,beta_exp")


@given(st.integers(2, 5), st.integers(1, 6), st.integers(1, 6), st.integers(-40, 10))
@settings(max_examples=300)
def test_alternatives_are_exclusive(d, J, P, M):
    if J > P:
        return
    first, window = alternative_tests(d, J, P, M)
    assert first != window


def test_classification_on_grid(quadric3):
    fd = quadric3.fd
    kinds = {}
    for M in range(-5, 2):
        alt = classify_alternatives(quadric3, 1, 2, (L(fd, {M: 1}),))
        kinds[M] = alt.kind
        if alt.kind == ALT_II:
            assert alt.counts[0] == alt.counts[1]
    assert {M for M, k in kinds.items() if k == ALT_II} == {-2, -1}
    assert all(k == ALT_I for M, k in kinds.items() if M not in (-2, -1))


def test_theta_and_tNbf(quadric3):
    assert theta_d(2, 3) == 3
    assert theta_d(3, 1) == 1
    assert theta_d(4, 3) == 2
    fd = quadric3.fd
    rep = check_tNbf(quadric3, 1, 1, (L(fd, {1: 1}),), {"projective": 0, "log_count": 0})
    assert rep.count == 1
    assert all(rep.theorem.values())
    assert rep.corollary


def test_weyl_and_two_sum(quadric3):
    sh = shift(quadric3)
    fd = quadric3.fd
    alpha = (L(fd, {-3: 1}),)
    w = weyl_inequality_check(sh, 1, 2, alpha)
    assert w["pass"] and w["bound"] == 531441
    assert two_sum_check(sh, 1, 2, alpha, (L(fd, {-2: 2}),))["pass"]


def test_factorization_frozen(quadric3, conic3):
    sh = shift(quadric3)
    fd = quadric3.fd
    zero = (LaurentElement(fd),)
    rep = verify_factorization(sh, T(fd, 0, 1), (T(fd, 1),), zero, 3)
    assert rep.status == "PASS" and rep.lhs.to_int() == 59049
    assert verify_factorization(sh, T(fd, 1), (Poly.zero(fd),), zero, 2).lhs.to_int() == 6561
    twisted = shift(conic3, T(fd, 0, 1), ("1", "1", "1"))
    rep = verify_factorization(twisted, T(fd, 1), (Poly.zero(fd),), (L(fd, {-8: 1}),), 4)
    assert rep.status == "PASS"
    assert json.loads(rep.to_json())["equal"] is True


def test_factorization_hypothesis_region(quadric3):
    sh = shift(quadric3)
    fd = quadric3.fd
    ok, boundary, _ = factorization_hypothesis(sh, T(fd, 0, 0, 1), (LaurentElement(fd),), 2)
    assert ok and boundary
    ok, _, why = factorization_hypothesis(sh, T(fd, 0, 1), (L(fd, {-1: 1}),), 3)
    assert not ok and "beta" in why
    rep = verify_factorization(sh, T(fd, 0, 0, 0, 1), (T(fd, 1),), (LaurentElement(fd),), 2)
    assert rep.status == "SKIP"


@pytest.mark.parametrize("P,expected", [(1, 33), (2, 513)])
def test_round_trip_quadric(quadric3, P, expected):
    sh = shift(quadric3)
    assert direct_count(sh, P) == integral_count(sh, P) == expected


def test_round_trip_conic(conic3):
    assert [direct_count(shift(conic3), P) for P in (1, 2)] == [9, 33]
    twisted = shift(conic3, T(conic3.fd, 0, 1), ("1", "1", "1"))
    assert integral_count(twisted, 2) == 15


def test_major_arc_locate(quadric3):
    fd = quadric3.fd
    one = Poly.one(fd)
    res = major_arc_locate((LaurentElement.from_fraction(T(fd, 1), T(fd, 0, 1), 8),), 1, 3, one, 2)
    assert res.found
    assert res.approx.g == T(fd, 0, 1) and res.approx.a == (T(fd, 1),)
    # non-overlap on a full grid where 2J <= d(P-1)
    for beta in beta_grid(fd, 1, 6):
        major_arc_locate(beta, 2, 3, one, 2)


def test_overlap_allowed_outside_the_separation_range():
    from artifact.field import FieldDescriptor
    fd = FieldDescriptor(3)
    x = (LaurentElement.from_digits(fd, {-1: 1}, NEG_INF),)
    # 2J > d(P-1): arcs may overlap and every centre is reported
    res = major_arc_locate(x, 2, 1, Poly.one(fd), 2)
    assert res.found and len(res.centers) > 1
