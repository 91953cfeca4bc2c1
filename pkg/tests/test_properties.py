"""Randomized properties of the solver, seeded for reproducibility."""

import random
from fractions import Fraction

import pytest

from models.market_model import Consumer, TieRule, scale_market
from solver.company_response import profile_candidates, select_response
from solver.consumer_choice import NO_PURCHASE, assignment, choose
from solver.price_arrangement import enumerate_candidates
from solver.tax_optimizer import break_evens, optimize
from solver.welfare import WelfareMode
from tests.helpers import random_market

F = Fraction


def _random_prices(rng, m):
    return tuple(F(rng.randint(0, 1200), 100) for _ in range(m))


@pytest.mark.parametrize("tie_rule", list(TieRule))
def test_raising_an_unchosen_price_keeps_the_choice(tie_rule):
    rng = random.Random(20240601)
    for _ in range(1000):
        m = rng.choice((2, 3))
        market = random_market(rng, n=1, m=m, tie_rule=tie_rule)
        consumer = market.consumers[0]
        prices = _random_prices(rng, m)
        # snap one price onto a budget line now and then so ties and zero utilities occur
        if rng.random() < 0.3:
            j = rng.randrange(m)
            prices = prices[:j] + (consumer.utilities[j].budget_price(),) + prices[j + 1:]
        before = choose(consumer, prices, market.products, tie_rule)

        j = rng.randrange(m)
        raised = prices[:j] + (prices[j] + F(rng.randint(1, 300), 100),) + prices[j + 1:]
        after = choose(consumer, raised, market.products, tie_rule)

        if before != j:
            assert after == before
        elif after == j:
            assert raised[j] <= consumer.utilities[j].budget_price()
        else:
            assert after is NO_PURCHASE or after != j


@pytest.mark.parametrize("seed", range(10))
def test_uniform_scaling_keeps_candidates_and_choices(market_factory, seed):
    market = market_factory(seed)
    factor = random.Random(seed).choice((F(1, 3), F(2), F(7, 5)))
    scaled = scale_market(market, factor)
    original = enumerate_candidates(market)
    rescaled = enumerate_candidates(scaled)
    assert [p.prices for p in rescaled.points] == [p.prices for p in original.points]
    for point in original.points:
        assert assignment(scaled, point.prices) == assignment(market, point.prices)


@pytest.mark.parametrize("seed", range(10))
def test_surplus_is_nonnegative_and_modes_differ_by_tax(market_factory, seed):
    market = market_factory(seed)
    for profile in profile_candidates(market, enumerate_candidates(market)):
        assert profile.consumer_surplus >= 0
        for alpha in (F(0), F(1, 2), F(1)):
            difference = profile.welfare_at(alpha, WelfareMode.PAPER_EXAMPLE) - profile.welfare_at(alpha)
            assert difference == pytest.approx(float(alpha * profile.taxed_revenue))


@pytest.mark.parametrize("seed", range(10))
def test_zero_demand_duplicate_changes_nothing(market_factory, seed):
    market = market_factory(seed)
    source = market.consumers[0]
    ghost = Consumer(id="ghost", utilities=source.utilities, demands=tuple(F(0) for _ in source.demands))
    padded = market.model_copy(update={"consumers": market.consumers + (ghost,)})

    before = enumerate_candidates(market)
    after = enumerate_candidates(padded)
    assert [b.alpha for b in break_evens(padded, after)] == [b.alpha for b in break_evens(market, before)]
    for mode in WelfareMode:
        plain = optimize(market, before, mode)
        ghosted = optimize(padded, after, mode)
        assert ghosted.welfare_value == pytest.approx(plain.welfare_value)
        assert ghosted.alpha == plain.alpha
        assert [(s.lower, s.upper, s.point.prices) for s in ghosted.staircase] == [
            (s.lower, s.upper, s.point.prices) for s in plain.staircase
        ]


@pytest.mark.slow
@pytest.mark.parametrize("seed", range(50))
def test_best_response_is_constant_between_break_evens(seed):
    rng = random.Random(1000 + seed)
    market = random_market(rng, n=rng.randint(1, 5))
    profiles = profile_candidates(market, enumerate_candidates(market))
    rates = [b.alpha for b in break_evens(market, enumerate_candidates(market))]
    for lower, upper in zip(rates, rates[1:]):
        first = select_response(profiles, lower + (upper - lower) / 3)
        second = select_response(profiles, lower + 2 * (upper - lower) / 3)
        assert (first.point, first.assignment) == (second.point, second.assignment)

    values = [select_response(profiles, F(k, 100)).net_at(F(k, 100)) for k in range(101)]
    assert all(b <= a for a, b in zip(values, values[1:]))
    assert all(values[k - 1] + values[k + 1] >= 2 * values[k] for k in range(1, 100))


@pytest.mark.parametrize("seed", range(10))
@pytest.mark.parametrize("taxed", [0, 1])
def test_every_after_tax_response_is_profiled(market_factory, seed, taxed):
    market = market_factory(seed, taxed=taxed)
    profiles = profile_candidates(market, enumerate_candidates(market))
    profiled = {(p.point.prices, p.assignment) for p in profiles}
    for profile in profiles:
        prices = profile.point.prices
        for alpha in (F(0), F(1, 1000), F(1, 2), F(1)):
            assert (prices, assignment(market, prices, alpha)) in profiled
