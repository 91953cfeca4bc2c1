from fractions import Fraction
from typing import Any, List, Optional, Sequence, Tuple

from models.market_model import Consumer, Market, PriceVector, Product, TieRule, raw_utility

# A product index, or None for "no purchase"
Choice = Optional[int]
# One Choice per consumer, in market consumer order
Assignment = Tuple[Choice, ...]

NO_PURCHASE: Choice = None


def _tie_key(
    consumer: Consumer, j: int, prices: PriceVector, products: Sequence[Product], tie_rule: TieRule, alpha: Fraction
):
    revenue = consumer.demands[j] * prices[j]
    if tie_rule == TieRule.TAXED_FIRST:
        return (products[j].taxed, revenue, -j)
    # The firm keeps (1 - alpha) of taxed revenue
    if products[j].taxed:
        revenue *= 1 - alpha
    return (revenue, -j)


def _maximal_affordable(consumer: Consumer, prices: PriceVector, m: int) -> List[int]:
    utilities = [raw_utility(consumer, j, prices) for j in range(m)]
    affordable = [j for j, u in enumerate(utilities) if u >= 0]
    if not affordable:
        return []
    best = max(utilities[j] for j in affordable)
    return [j for j in affordable if utilities[j] == best]


def choose(
    consumer: Consumer,
    prices: PriceVector,
    products: Sequence[Product],
    tie_rule: TieRule = TieRule.REVENUE,
    alpha: Any = 0,
) -> Choice:
    """Pick the consumer's product at the given prices.

    Only products with nonnegative raw utility are affordable. Among the
    affordable products of maximal utility the tie rule decides: larger
    revenue contribution D*p first (optionally preceded by "taxed product
    first"), then the lowest product index. Under the revenue rule the
    contribution is what the firm keeps at tax rate `alpha`; at the default
    alpha = 0 that is the gross contribution.

    Args:
        consumer: The consumer
        prices: One price per product
        products: The market's products
        tie_rule: Convention for utility ties
        alpha: Tax rate seen by the revenue tie-break

    Returns:
        The chosen product index, or NO_PURCHASE
    """
    tied = _maximal_affordable(consumer, prices, len(products))
    if not tied:
        return NO_PURCHASE
    if len(tied) == 1:
        return tied[0]
    alpha = Fraction(alpha)
    return max(tied, key=lambda j: _tie_key(consumer, j, prices, products, tie_rule, alpha))


def assignment(market: Market, prices: PriceVector, alpha: Any = 0) -> Assignment:
    """Every consumer's choice; consumers decide independently."""
    return tuple(choose(c, prices, market.products, market.tie_rule, alpha) for c in market.consumers)


def tie_switch_rates(market: Market, prices: PriceVector) -> List[Fraction]:
    """Tax rates in (0, 1) at which some consumer's revenue tie-break flips.

    A consumer indifferent between a taxed and an untaxed product sends the
    firm the larger of (1 - alpha) * taxed and untaxed revenue; the choice
    flips where the two are equal. The taxed-first rule never flips.
    """
    if market.tie_rule != TieRule.REVENUE:
        return []
    rates = set()
    for consumer in market.consumers:
        tied = _maximal_affordable(consumer, prices, market.m)
        taxed = [consumer.demands[j] * prices[j] for j in tied if market.products[j].taxed]
        untaxed = [consumer.demands[j] * prices[j] for j in tied if not market.products[j].taxed]
        if not taxed or not untaxed:
            continue
        top_taxed, top_untaxed = max(taxed), max(untaxed)
        if top_taxed > top_untaxed:
            rates.add(1 - top_untaxed / top_taxed)
    return sorted(r for r in rates if 0 < r < 1)


def realized_utility(market: Market, prices: PriceVector, chosen: Assignment, i: int) -> Optional[Fraction]:
    """Clipped utility consumer i gets from its choice, None when not buying."""
    j = chosen[i]
    if j is NO_PURCHASE:
        return None
    return max(raw_utility(market.consumers[i], j, prices), Fraction(0))
