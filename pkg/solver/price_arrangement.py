import logging
from enum import Enum
from fractions import Fraction
from functools import partial
from itertools import combinations
from typing import List, Optional, Sequence, Tuple

from pydantic import BaseModel, ConfigDict, model_validator

from models.market_model import Market, PriceVector
from utils.parallel import ordered_map
from utils.rational import solve_linear_system

logger = logging.getLogger(__name__)


class HyperplaneKind(str, Enum):
    BUDGET = "budget"
    INDIFFERENCE = "indifference"
    AXIS = "axis"


class Hyperplane(BaseModel):
    """The price locus `sum(coefficients[j] * p[j]) == constant`."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    kind: HyperplaneKind
    coefficients: Tuple[Fraction, ...]
    constant: Fraction
    consumer: Optional[str] = None
    products: Tuple[int, ...] = ()

    @model_validator(mode="after")
    def _nonzero(self) -> "Hyperplane":
        if all(c == 0 for c in self.coefficients):
            raise ValueError("Hyperplane coefficient vector must be nonzero")
        return self

    @property
    def label(self) -> str:
        products = ",".join(str(j) for j in self.products)
        if self.consumer is None:
            return f"{self.kind.value}[{products}]"
        return f"{self.kind.value}[{self.consumer}:{products}]"

    def evaluate(self, prices: PriceVector) -> Fraction:
        return sum((c * p for c, p in zip(self.coefficients, prices)), Fraction(0)) - self.constant

    def contains(self, prices: PriceVector) -> bool:
        return self.evaluate(prices) == 0


class PricePoint(BaseModel):
    """A candidate price vector and the indices of the hyperplanes through it."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    prices: Tuple[Fraction, ...]
    generators: Tuple[int, ...] = ()


class CandidateSet(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    hyperplanes: Tuple[Hyperplane, ...]
    points: Tuple[PricePoint, ...]

    def __len__(self) -> int:
        return len(self.points)

    def without(self, prices: PriceVector) -> "CandidateSet":
        """Copy of the set with one point removed (used to exercise the oracle)."""
        return self.model_copy(update={"points": tuple(p for p in self.points if p.prices != tuple(prices))})

    def generator_labels(self, point: PricePoint) -> List[str]:
        return [self.hyperplanes[k].label for k in point.generators]


def build_hyperplanes(market: Market) -> List[Hyperplane]:
    """Budget, pairwise indifference and axis hyperplanes of the price space.

    Order: budgets per (consumer, product), indifferences per (consumer, j < k),
    then axes p_j = 0.
    """
    m = market.m
    zero = Fraction(0)
    hyperplanes: List[Hyperplane] = []

    for consumer in market.consumers:
        for j, utility in enumerate(consumer.utilities):
            coefficients = [zero] * m
            coefficients[j] = utility.sensitivity
            hyperplanes.append(
                Hyperplane(
                    kind=HyperplaneKind.BUDGET,
                    coefficients=tuple(coefficients),
                    constant=utility.intercept,
                    consumer=consumer.id,
                    products=(j,),
                )
            )

    for consumer in market.consumers:
        for j, k in combinations(range(m), 2):
            uj, uk = consumer.utilities[j], consumer.utilities[k]
            # a_j - s_j p_j = a_k - s_k p_k
            coefficients = [zero] * m
            coefficients[j] = uj.sensitivity
            coefficients[k] = -uk.sensitivity
            hyperplanes.append(
                Hyperplane(
                    kind=HyperplaneKind.INDIFFERENCE,
                    coefficients=tuple(coefficients),
                    constant=uj.intercept - uk.intercept,
                    consumer=consumer.id,
                    products=(j, k),
                )
            )

    for j in range(m):
        coefficients = [zero] * m
        coefficients[j] = Fraction(1)
        hyperplanes.append(
            Hyperplane(kind=HyperplaneKind.AXIS, coefficients=tuple(coefficients), constant=zero, products=(j,))
        )

    logger.debug(f"Built {len(hyperplanes)} hyperplanes for {market.n} consumers and {m} products")
    return hyperplanes


def _intersect_chunk(
    hyperplanes: Sequence[Hyperplane], subsets: Sequence[Tuple[int, ...]]
) -> List[Tuple[PriceVector, Tuple[int, ...]]]:
    found = []
    for subset in subsets:
        rows = [hyperplanes[k].coefficients for k in subset]
        rhs = [hyperplanes[k].constant for k in subset]
        solution = solve_linear_system(rows, rhs)
        if solution is None:
            continue
        if any(p < 0 for p in solution):
            continue
        found.append((solution, subset))
    return found


def enumerate_candidates(market: Market, workers: int = 1) -> CandidateSet:
    """All arrangement vertices in the nonnegative orthant.

    Every size-m subset of hyperplanes with a unique intersection is solved
    exactly; points are deduplicated on their exact coordinates and sorted.

    Args:
        market: The market
        workers: joblib workers for the subset sweep

    Returns:
        The candidate set, with the generating hyperplanes of each point
    """
    hyperplanes = build_hyperplanes(market)
    subsets = list(combinations(range(len(hyperplanes)), market.m))
    solved = ordered_map(partial(_intersect_chunk, hyperplanes), subsets, workers)

    vertices = {prices for prices, _ in solved}

    # Generators are all hyperplanes through the point, not only the solved subset
    points = []
    for prices in sorted(vertices):
        through = {k for k, h in enumerate(hyperplanes) if h.contains(prices)}
        points.append(PricePoint(prices=prices, generators=tuple(sorted(through))))

    logger.info(
        f"Enumerated {len(points)} candidate price points from {len(subsets)} hyperplane subsets"
    )
    return CandidateSet(hyperplanes=tuple(hyperplanes), points=tuple(points))
