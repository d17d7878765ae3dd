import math

import pytest

from artifact.errors import InstanceError
from artifact.forms import shift
from artifact.moduli import (CensusSpec, census_csv, count_orbit_direct, count_tuples,
                             count_tuples_naive, expected_dims, hypothesis_profile, lines_on,
                             moduli_count, moduli_count_b, n_bound, pgl2_order,
                             primitive_count_direct, primitive_count_mobius, smallest_q_nonempty,
                             split_quadric, trend_rows, trend_table)


def test_tuple_census_matches_naive(quadric3):
    for e in (0, 1):
        spec = CensusSpec(quadric3, e)
        assert count_tuples(spec) == count_tuples_naive(spec)
    assert count_tuples(CensusSpec(quadric3, 1)) == 384
    assert count_tuples(CensusSpec(quadric3, 0)) == 32


def test_moduli_counts_and_lines(quadric3, quadric5, conic3):
    assert [moduli_count(s, 1).M_count for s in (quadric3, quadric5, conic3)] == [8, 12, 0]
    assert [lines_on(s) for s in (quadric3, quadric5, conic3)] == [8, 12, 0]
    # a smooth quadric surface carries 2(q+1) lines
    assert lines_on(split_quadric(7)) == 16


def test_pgl2_divisibility(quadric3):
    res = moduli_count(quadric3, 1)
    assert res.N_qe == pgl2_order(3) * (3 - 1) * res.M_count
    assert pgl2_order(3) == 24


def test_constrained_census(quadric3):
    spec = CensusSpec(quadric3, 1, ((0, (1, 1, 1, 1)),))
    assert moduli_count_b(spec).M_count == 12
    assert count_tuples(spec) == count_tuples_naive(spec)
    assert count_orbit_direct(spec) == 24
    incompatible = CensusSpec(quadric3, 0, ((0, (1, 0, 0, 0)), (1, (0, 1, 0, 0))))
    assert count_tuples(incompatible) == 0


@pytest.mark.parametrize("bad", [((0, (1, 1, 1, 1)), (0, (1, 0, 0, 0))),
                                 ((0, (0, 0, 0, 0)),),
                                 ((0, (1, 1, 0, 0)),),
                                 ((0, (1, 1, 1)),)])
def test_census_spec_validation(quadric3, bad):
    with pytest.raises(InstanceError):
        CensusSpec(quadric3, 1, bad)


def test_expected_dimensions():
    assert expected_dims(4, 2, 1, 1, 0) == (1, 4)
    assert expected_dims(4, 2, 1, 1, 1) == (1, 2)


def test_trend_over_q():
    rows = trend_rows([split_quadric(p) for p in (3, 5, 7)], 1)
    assert [(r.q, r.N_qe, r.M_count) for r in rows] == [(3, 384, 8), (5, 5760, 12), (7, 32256, 16)]
    devs = [abs(r.dim_estimate - r.expected_dim) for r in rows]
    assert devs == sorted(devs, reverse=True)
    assert devs[0] == pytest.approx(math.log(8, 3) - 1)
    assert smallest_q_nonempty(rows) == 3
    assert trend_table(rows).count("\n") == 3
    assert census_csv(rows).splitlines()[0] == "q,e,b,N_qe,M_count,dim_estimate,expected_dim"


@pytest.mark.parametrize("P", [1, 2, 3])
def test_mobius_matches_direct(conic3, P):
    assert primitive_count_mobius(conic3, P) == primitive_count_direct(conic3, P)


def test_mobius_frozen(quadric3, conic3):
    assert [primitive_count_mobius(quadric3, P) for P in (1, 2)] == [32, 416]
    assert [primitive_count_mobius(conic3, P) for P in (2, 3)] == [8, 56]


def test_mobius_needs_trivial_shift(conic3):
    from conftest import conic_twisted
    with pytest.raises(ValueError):
        primitive_count_mobius(conic_twisted(conic3), 1)
    assert primitive_count_mobius(shift(conic3), 1) == primitive_count_mobius(conic3, 1)


def test_hypothesis_profile():
    prof = hypothesis_profile(4, 2, 1, 1, 0, 3, 0)
    assert prof["n_threshold"] == 33 == n_bound(2, 1)
    assert prof["n_bound_ok"] is False
    assert prof["delta0"] == 2
    assert prof["mu"] == 1 and prof["dim_M_eb"] == 4
    assert n_bound(3, 1) == 97
