from fractions import Fraction

import pytest

from solver.company_response import profile_candidates, select_response
from solver.price_arrangement import CandidateSet, enumerate_candidates
from solver.tax_optimizer import break_even_alpha, break_evens, optimize, welfare_curve
from solver.welfare import WelfareMode
from tests.helpers import empty_market, make_market

F = Fraction
POINT_22 = (F(93, 17), F(47, 10))


def test_break_even_outside_the_unit_interval_is_discarded():
    # printed revenues of candidates 9 and 13
    alpha = break_even_alpha(F("22424.36"), F("18212.5"), F("32980.92"), F("21176.46"))
    assert alpha > 1
    assert round(float(alpha), 2) == 4.56


def test_parallel_net_lines_never_cross():
    assert break_even_alpha(F(1), F(2), F(3), F(2)) is None
    assert break_even_alpha(F(0), F(2), F(1), F(0)) == F(1, 2)


def test_break_evens_are_sorted_unique_and_bracketed(cola_market, cola_candidates):
    rates = [b.alpha for b in break_evens(cola_market, cola_candidates)]
    assert rates[0] == 0 and rates[-1] == 1
    assert rates == sorted(set(rates))
    assert all(0 <= r <= 1 for r in rates)


def test_break_even_records_the_crossing_pair(tie):
    found = break_evens(tie, enumerate_candidates(tie))
    assert [b.alpha for b in found] == [0, F(1, 2), 1]
    middle = found[1]
    assert middle.first.prices == middle.second.prices == (1, 2)


def test_cola_definition_mode(cola_market, cola_candidates):
    solution = optimize(cola_market, cola_candidates, WelfareMode.DEFINITION)
    assert solution.alpha == 0
    assert solution.point.prices == POINT_22
    assert solution.welfare_value == pytest.approx(109316.4)
    assert len(solution.staircase) == 1
    step = solution.staircase[0]
    assert (step.lower, step.upper) == (0, 1)
    assert step.welfare_lower == step.welfare_upper


def test_cola_paper_example_mode(cola_market, cola_candidates):
    solution = optimize(cola_market, cola_candidates, WelfareMode.PAPER_EXAMPLE)
    assert solution.alpha == 1
    assert solution.point.prices == POINT_22
    assert solution.welfare_value == pytest.approx(156043.8)
    assert solution.response.tax_paid == F("46727.4")
    assert solution.welfare_value == max(e.welfare.total for e in solution.evaluated)


def test_evaluated_rates_are_the_break_evens(cola_market, cola_candidates):
    solution = optimize(cola_market, cola_candidates)
    assert [e.alpha for e in solution.evaluated] == [b.alpha for b in solution.break_evens]


def test_two_step_staircase(tie):
    candidates = enumerate_candidates(tie)
    solution = optimize(tie, candidates, WelfareMode.DEFINITION)
    steps = [(s.lower, s.upper, s.assignment) for s in solution.staircase]
    assert steps == [(0, F(1, 2), (1,)), (F(1, 2), 1, (0,))]
    assert solution.alpha == 0
    assert solution.welfare_value == 2

    paper = optimize(tie, candidates, WelfareMode.PAPER_EXAMPLE)
    assert paper.alpha == F(1, 2)
    assert paper.welfare_value == 3
    assert paper.response.assignment == (1,)


def test_staircase_matches_midpoint_responses(cola_market, cola_candidates, tie):
    for market, candidates in ((cola_market, cola_candidates), (tie, enumerate_candidates(tie))):
        profiles = profile_candidates(market, candidates)
        solution = optimize(market, candidates)
        for step in solution.staircase:
            middle = (step.lower + step.upper) / 2
            chosen = select_response(profiles, middle)
            assert (chosen.point, chosen.assignment) == (step.point, step.assignment)
        bounds = [(s.lower, s.upper) for s in solution.staircase]
        assert bounds[0][0] == 0 and bounds[-1][1] == 1
        assert all(a[1] == b[0] for a, b in zip(bounds, bounds[1:]))


def test_empty_consumer_market():
    market = empty_market()
    candidates = enumerate_candidates(market)
    solution = optimize(market, candidates)
    assert solution.welfare_value == 0
    assert solution.alpha == 0
    assert [b.alpha for b in solution.break_evens] == [0, 1]


def test_market_without_taxed_products_in_paper_mode():
    market = make_market([((1, 1), (1, 1), (1, 1))], taxed=())
    solution = optimize(market, enumerate_candidates(market), WelfareMode.PAPER_EXAMPLE)
    # welfare is flat in alpha, and paper-example mode keeps the largest rate
    assert solution.alpha == 1
    assert optimize(market, enumerate_candidates(market)).alpha == 0


def test_optimize_needs_candidates(cola_market):
    with pytest.raises(ValueError):
        optimize(cola_market, CandidateSet(hyperplanes=(), points=()))


def test_welfare_curve_rows(cola_market, cola_candidates):
    curve = welfare_curve(cola_market, cola_candidates, WelfareMode.DEFINITION, samples=5)
    alphas = [row.alpha for row in curve.samples]
    assert alphas == sorted(alphas)
    assert {F(k, 4) for k in range(5)} <= set(alphas)
    for row in curve.samples:
        assert row.point.prices == POINT_22
        assert row.step == 0
        assert row.welfare_definition == pytest.approx(109316.4)
        assert row.welfare_paper_example - row.welfare_definition == pytest.approx(float(row.alpha * F("46727.4")))


def test_welfare_curve_steps_follow_the_mode(tie):
    candidates = enumerate_candidates(tie)
    curve = welfare_curve(tie, candidates, WelfareMode.PAPER_EXAMPLE, samples=3)
    assert [row.step for row in curve.samples] == [0, 0, 1]
    assert curve.samples[1].welfare_paper_example == 3


def test_welfare_curve_needs_two_samples(cola_market, cola_candidates):
    with pytest.raises(ValueError):
        welfare_curve(cola_market, cola_candidates, samples=1)
