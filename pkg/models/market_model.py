from enum import Enum
from fractions import Fraction
from typing import Any, Iterable, List, Optional, Sequence, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from utils.rational import to_fraction

# One exact, nonnegative price per product, indexed by product index
PriceVector = Tuple[Fraction, ...]


class TieRule(str, Enum):
    """How a consumer picks among products of equal (maximal) utility."""

    REVENUE = "revenue"
    TAXED_FIRST = "taxed-first"


class _Frozen(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)


class Product(_Frozen):
    id: str = Field(min_length=1)
    index: int = Field(ge=0)
    taxed: bool = False


class LinearUtility(_Frozen):
    """Affine utility `intercept - sensitivity * price` of one consumer for one product."""

    intercept: Fraction
    sensitivity: Fraction

    @field_validator("intercept", "sensitivity", mode="before")
    @classmethod
    def _coerce(cls, value: Any) -> Fraction:
        return to_fraction(value)

    @field_validator("sensitivity")
    @classmethod
    def _positive(cls, value: Fraction) -> Fraction:
        if value <= 0:
            raise ValueError(f"Price sensitivity must be strictly positive, got {value}")
        return value

    def budget_price(self) -> Fraction:
        """Price at which the utility reaches zero."""
        return self.intercept / self.sensitivity


class Consumer(_Frozen):
    id: str = Field(min_length=1)
    utilities: Tuple[LinearUtility, ...]
    demands: Tuple[Fraction, ...]

    @field_validator("demands", mode="before")
    @classmethod
    def _coerce_demands(cls, value: Iterable[Any]) -> Tuple[Fraction, ...]:
        return tuple(to_fraction(v) for v in value)

    @model_validator(mode="after")
    def _check_shape(self) -> "Consumer":
        if len(self.utilities) != len(self.demands):
            raise ValueError(
                f"Consumer {self.id} has {len(self.utilities)} utilities but {len(self.demands)} demands"
            )
        negative = [j for j, d in enumerate(self.demands) if d < 0]
        if negative:
            raise ValueError(f"Consumer {self.id} has negative demand for products {negative}")
        return self


class Market(_Frozen):
    """A full problem instance: products, consumers and the consumer tie convention."""

    products: Tuple[Product, ...]
    consumers: Tuple[Consumer, ...] = ()
    tie_rule: TieRule = TieRule.REVENUE
    name: str = "market"

    @model_validator(mode="after")
    def _check_dimensions(self) -> "Market":
        if not self.products:
            raise ValueError("A market needs at least one product")
        indices = [p.index for p in self.products]
        if indices != list(range(len(self.products))):
            raise ValueError(f"Product indices must be 0..m-1 in order, got {indices}")
        ids = [p.id for p in self.products]
        if len(set(ids)) != len(ids):
            raise ValueError(f"Duplicate product ids: {ids}")
        consumer_ids = [c.id for c in self.consumers]
        if len(set(consumer_ids)) != len(consumer_ids):
            raise ValueError(f"Duplicate consumer ids: {consumer_ids}")
        for consumer in self.consumers:
            if len(consumer.utilities) != len(self.products):
                raise ValueError(
                    f"Consumer {consumer.id} covers {len(consumer.utilities)} products, market has {len(self.products)}"
                )
        return self

    @property
    def m(self) -> int:
        return len(self.products)

    @property
    def n(self) -> int:
        return len(self.consumers)

    @property
    def taxed_indices(self) -> Tuple[int, ...]:
        return tuple(p.index for p in self.products if p.taxed)

    def display_order(self) -> Tuple[int, ...]:
        """Product indices with taxed products first, the order reports print prices in."""
        taxed = [p.index for p in self.products if p.taxed]
        untaxed = [p.index for p in self.products if not p.taxed]
        return tuple(taxed + untaxed)

    def with_tie_rule(self, tie_rule: TieRule) -> "Market":
        return self.model_copy(update={"tie_rule": TieRule(tie_rule)})


def price_vector(values: Sequence[Any], m: Optional[int] = None) -> PriceVector:
    """Build a validated price vector.

    Args:
        values: One price per product, in product-index order
        m: Expected number of products, checked when given

    Returns:
        A tuple of exact nonnegative prices
    """
    prices = tuple(to_fraction(v) for v in values)
    if m is not None and len(prices) != m:
        raise ValueError(f"Expected {m} prices, got {len(prices)}")
    if any(p < 0 for p in prices):
        raise ValueError(f"Prices must be nonnegative, got {prices}")
    return prices


def effective_intercept(
    beta_ij: Any, beta1: Any, beta2: Any, nr_claims: Any, nutr_val: Any
) -> Fraction:
    """Fold the claims and nutrition terms into the consumer-product constant."""
    return (
        to_fraction(beta_ij)
        + to_fraction(beta1) * to_fraction(nr_claims)
        + to_fraction(beta2) * to_fraction(nutr_val)
    )


def raw_utility(consumer: Consumer, j: int, prices: PriceVector) -> Fraction:
    """Unclipped utility of product j; negative beyond the budget price."""
    utility = consumer.utilities[j]
    return utility.intercept - utility.sensitivity * prices[j]


def clipped_utility(consumer: Consumer, j: int, prices: PriceVector) -> Fraction:
    return max(raw_utility(consumer, j, prices), Fraction(0))


def scale_market(market: Market, factor: Any) -> Market:
    """Multiply every intercept and sensitivity by the same positive factor."""
    factor = to_fraction(factor)
    if factor <= 0:
        raise ValueError("Scaling factor must be positive")
    consumers: List[Consumer] = []
    for consumer in market.consumers:
        utilities = tuple(
            LinearUtility(intercept=u.intercept * factor, sensitivity=u.sensitivity * factor)
            for u in consumer.utilities
        )
        consumers.append(consumer.model_copy(update={"utilities": utilities}))
    return market.model_copy(update={"consumers": tuple(consumers)})
