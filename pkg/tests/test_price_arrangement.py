from collections import Counter
from fractions import Fraction

import pytest
from pydantic import ValidationError

from models.market_model import scale_market
from solver.price_arrangement import Hyperplane, HyperplaneKind, build_hyperplanes, enumerate_candidates
from tests.helpers import empty_market, make_market

F = Fraction


def test_cola_hyperplanes(cola_market):
    hyperplanes = build_hyperplanes(cola_market)
    assert len(hyperplanes) == 11
    kinds = Counter(h.kind for h in hyperplanes)
    assert kinds == {HyperplaneKind.BUDGET: 6, HyperplaneKind.INDIFFERENCE: 3, HyperplaneKind.AXIS: 2}
    assert hyperplanes[0].label == "budget[high:0]"
    assert hyperplanes[6].label == "indifference[high:0,1]"
    assert hyperplanes[-1].label == "axis[1]"


def test_unit_market_candidates(unit):
    candidates = enumerate_candidates(unit)
    assert len(candidates.hyperplanes) == 5
    assert {p.prices for p in candidates.points} == {(0, 0), (1, 0), (0, 1), (1, 1)}


def test_cola_contains_exact_vertices(cola_market, cola_candidates):
    prices = {p.prices for p in cola_candidates.points}
    # medium indifference with the cola axis, and the low/high budget corner
    assert (F(5, 4), F(0)) in prices
    assert (F(93, 17), F(47, 10)) in prices
    assert len(cola_candidates) <= 55


def test_every_candidate_lies_on_m_hyperplanes(cola_market, cola_candidates):
    for point in cola_candidates.points:
        assert all(p >= 0 for p in point.prices)
        assert len(point.generators) >= cola_market.m
        for k in point.generators:
            assert cola_candidates.hyperplanes[k].contains(point.prices)


def test_candidates_are_sorted_and_unique(cola_candidates):
    prices = [p.prices for p in cola_candidates.points]
    assert prices == sorted(set(prices))


def test_scaling_leaves_candidates_unchanged(cola_market, cola_candidates):
    scaled = enumerate_candidates(scale_market(cola_market, F(5, 2)))
    assert [p.prices for p in scaled.points] == [p.prices for p in cola_candidates.points]


def test_empty_market_has_only_the_origin():
    candidates = enumerate_candidates(empty_market())
    assert [p.prices for p in candidates.points] == [(0, 0)]


def test_single_product_market():
    market = make_market([((2,), (4,), (1,))], taxed=(0,), m=1)
    assert [p.prices for p in enumerate_candidates(market).points] == [(0,), (F(1, 2),)]


def test_three_products_solve_three_way_intersections():
    market = make_market([((1, 2, 3), (1, 1, 1), (1, 1, 1))], taxed=(2,), m=3)
    candidates = enumerate_candidates(market)
    assert (F(1), F(2), F(3)) in {p.prices for p in candidates.points}
    for point in candidates.points:
        assert len(point.generators) >= 3


def test_without_removes_one_point(cola_candidates):
    target = (F(93, 17), F(47, 10))
    reduced = cola_candidates.without(target)
    assert len(reduced) == len(cola_candidates) - 1
    assert target not in {p.prices for p in reduced.points}


def test_generator_labels(unit):
    candidates = enumerate_candidates(unit)
    origin = candidates.points[0]
    assert origin.prices == (0, 0)
    assert set(candidates.generator_labels(origin)) == {"indifference[c0:0,1]", "axis[0]", "axis[1]"}


def test_hyperplane_needs_a_direction():
    with pytest.raises(ValidationError):
        Hyperplane(kind=HyperplaneKind.AXIS, coefficients=(F(0), F(0)), constant=F(0))
