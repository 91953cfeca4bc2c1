import random
from fractions import Fraction
from typing import Any, Iterable, Optional, Sequence, Tuple

from models.market_model import Consumer, LinearUtility, Market, Product, TieRule

# (intercepts, sensitivities, demands) of one consumer, one entry per product
ConsumerRow = Tuple[Sequence[Any], Sequence[Any], Sequence[Any]]


def make_market(
    rows: Iterable[ConsumerRow],
    taxed: Sequence[int] = (1,),
    tie_rule: TieRule = TieRule.REVENUE,
    m: int = 2,
    name: str = "test",
) -> Market:
    """A market with products p0..p{m-1} and consumers c0, c1, ..."""
    products = tuple(Product(id=f"p{j}", index=j, taxed=j in taxed) for j in range(m))
    consumers = []
    for i, (intercepts, sensitivities, demands) in enumerate(rows):
        utilities = tuple(
            LinearUtility(intercept=a, sensitivity=s) for a, s in zip(intercepts, sensitivities)
        )
        consumers.append(Consumer(id=f"c{i}", utilities=utilities, demands=tuple(demands)))
    return Market(products=products, consumers=tuple(consumers), tie_rule=tie_rule, name=name)


def random_market(
    rng: random.Random,
    n: int,
    m: int = 2,
    tie_rule: TieRule = TieRule.REVENUE,
    taxed: Optional[int] = None,
) -> Market:
    """Coefficients k/100 with k in 10..100, demands 1..10000; the last product is taxed unless `taxed` names one."""

    def coefficient() -> Fraction:
        return Fraction(rng.randint(10, 100), 100)

    rows = [
        (
            [coefficient() for _ in range(m)],
            [coefficient() for _ in range(m)],
            [rng.randint(1, 10000) for _ in range(m)],
        )
        for _ in range(n)
    ]
    taxed_index = m - 1 if taxed is None else taxed
    return make_market(rows, taxed=(taxed_index,), tie_rule=tie_rule, m=m, name=f"random-{n}x{m}")


def unit_market(tie_rule: TieRule = TieRule.REVENUE) -> Market:
    """One consumer with intercepts (1, 1), sensitivities (1, 1) and unit demand."""
    return make_market([((1, 1), (1, 1), (1, 1))], tie_rule=tie_rule, name="unit")


def tie_market() -> Market:
    """One consumer indifferent at (1, 2) between untaxed p0 and taxed p1.

    At (1, 2) the firm earns 2 when the taxed drink is bought and 1 for the
    untaxed one, so which purchase it prefers flips at alpha = 1/2.
    """
    return make_market([((1, 2), (1, 1), (1, 1))], name="tie")


def empty_market(m: int = 2) -> Market:
    return make_market([], m=m, name="empty")
