"""Brute-force verification of the enumeration pipeline.

Prices on the grid are exact rationals. The sweep scales every price,
utility and revenue to a common integer denominator so numpy compares them
without rounding; the winning grid points are then re-evaluated with the
exact pipeline.
"""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from models.market_model import Market, PriceVector, TieRule
from solver.company_response import (
    ResponseOutcome,
    StrategyProfile,
    profile_candidates,
    profile_point,
    select_response,
    validate_tax_rate,
)
from solver.price_arrangement import CandidateSet, PricePoint, enumerate_candidates
from solver.tax_optimizer import TaxSolution
from solver.welfare import WelfareMode
from utils.logger import log_with_context
from utils.rational import to_fraction

logger = logging.getLogger(__name__)

DEFAULT_MAX_POINTS = 4_000_000
DEFAULT_ALPHA_STEP = Fraction(1, 20)
PRICE_STEP_UNIT = Fraction(1, 100)
BOX_MARGIN = Fraction(6, 5)
WELFARE_TOLERANCE = 1e-9

# Largest magnitude kept in int64 arrays; beyond it the sweep falls back to Python ints
_INT64_LIMIT = 2 ** 62


class GridBoxError(ValueError):
    """The grid box leaves out a candidate at which somebody buys."""


class GridSpec(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    lower: Tuple[Fraction, ...]
    upper: Tuple[Fraction, ...]
    price_step: Fraction
    alpha_step: Fraction = DEFAULT_ALPHA_STEP

    @field_validator("lower", "upper", mode="before")
    @classmethod
    def _coerce_bounds(cls, value: Sequence[Any]) -> Tuple[Fraction, ...]:
        return tuple(to_fraction(v) for v in value)

    @field_validator("price_step", "alpha_step", mode="before")
    @classmethod
    def _coerce_step(cls, value: Any) -> Fraction:
        return to_fraction(value)

    @model_validator(mode="after")
    def _check_box(self) -> "GridSpec":
        if len(self.lower) != len(self.upper):
            raise ValueError("Grid lower and upper bounds differ in dimension")
        if any(lo < 0 for lo in self.lower):
            raise ValueError("Grid prices must be nonnegative")
        if any(hi <= lo for lo, hi in zip(self.lower, self.upper)):
            raise ValueError("Grid upper bounds must exceed lower bounds")
        if self.price_step <= 0 or self.alpha_step <= 0:
            raise ValueError("Grid steps must be positive")
        return self

    @property
    def dimension(self) -> int:
        return len(self.lower)

    def axis_counts(self) -> Tuple[int, ...]:
        return tuple(math.floor((hi - lo) / self.price_step) + 1 for lo, hi in zip(self.lower, self.upper))

    def size(self) -> int:
        return math.prod(self.axis_counts())

    def alphas(self) -> List[Fraction]:
        count = math.floor(1 / self.alpha_step)
        rates = [k * self.alpha_step for k in range(count + 1)]
        if rates[-1] != 1:
            rates.append(Fraction(1))
        return rates


class Violation(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    alpha: Fraction
    kind: str
    prices: Tuple[Fraction, ...]
    grid_value: float
    enumerated_value: float


class VerificationReport(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    passed: bool
    mode: WelfareMode
    grid: GridSpec
    alphas_checked: int
    violations: Tuple[Violation, ...] = ()


def _lcm_of_denominators(values: Sequence[Fraction]) -> int:
    result = 1
    for value in values:
        result = math.lcm(result, value.denominator)
    return result


def active_points(market: Market, candidates: CandidateSet) -> List[PricePoint]:
    """Candidates where at least one consumer buys; all candidates when there are none."""
    profiles = profile_candidates(market, candidates)
    active = [p.point for p in profiles if any(j is not None for j in p.assignment)]
    return active or list(candidates.points)


def default_grid(
    market: Market,
    candidates: Optional[CandidateSet] = None,
    max_points: int = DEFAULT_MAX_POINTS,
    alpha_step: Any = DEFAULT_ALPHA_STEP,
) -> GridSpec:
    """[0, 1.2 x the largest active candidate coordinate] on every axis.

    The price step is the smallest multiple of 0.01 keeping the grid within
    `max_points`; the upper bound is rounded up to a multiple of the step.
    """
    if candidates is None:
        candidates = enumerate_candidates(market)
    points = active_points(market, candidates)
    reach = max((max(p.prices) for p in points), default=Fraction(0)) * BOX_MARGIN
    reach = max(reach, PRICE_STEP_UNIT)

    multiple = 1
    while True:
        step = multiple * PRICE_STEP_UNIT
        upper = math.ceil(reach / step) * step
        if (upper / step + 1) ** market.m <= max_points:
            break
        multiple += 1

    logger.debug(f"Default grid: [0, {upper}] per axis, step {step}")
    return GridSpec(
        lower=(Fraction(0),) * market.m,
        upper=(upper,) * market.m,
        price_step=step,
        alpha_step=alpha_step,
    )


def check_grid_box(market: Market, grid: GridSpec, candidates: CandidateSet) -> None:
    if grid.dimension != market.m:
        raise GridBoxError(f"Grid has {grid.dimension} axes, market has {market.m} products")
    for point in active_points(market, candidates):
        outside = [
            j for j, p in enumerate(point.prices) if not grid.lower[j] <= p <= grid.upper[j]
        ]
        if outside:
            raise GridBoxError(
                f"Candidate {tuple(str(p) for p in point.prices)} lies outside the grid box on axes {outside}"
            )


@dataclass
class GridSweep:
    """Firm revenues at every grid point, in integer units of 1/revenue_scale."""

    grid: GridSpec
    price_scale: int
    revenue_scale: int
    scaled_axes: List[np.ndarray]
    untaxed: np.ndarray
    taxed: np.ndarray

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.untaxed.shape

    def prices_at(self, flat_index: int) -> PriceVector:
        position = np.unravel_index(flat_index, self.shape)
        return tuple(Fraction(int(axis[k]), self.price_scale) for axis, k in zip(self.scaled_axes, position))

    def best_index(self, alpha: Fraction) -> int:
        """Flat index of the first grid point maximizing the firm's net utility."""
        a, b = alpha.numerator, alpha.denominator
        untaxed, taxed = self.untaxed, self.taxed
        bound = 2 * b * max(int(np.max(untaxed, initial=0)), int(np.max(taxed, initial=0)), 1)
        if untaxed.dtype != object and bound >= _INT64_LIMIT:
            untaxed, taxed = untaxed.astype(object), taxed.astype(object)
        net = untaxed * b + taxed * (b - a)
        return int(np.argmax(net.ravel()))


def sweep_grid(market: Market, grid: GridSpec) -> GridSweep:
    """Vectorized consumer choices and revenue split over the whole grid.

    Choices follow the market's tie rule as resolved at zero tax, so one
    sweep serves every alpha. At a grid point where a consumer is
    indifferent this can only undervalue the firm, which keeps the grid a
    lower bound of the enumerated optimum.
    """
    if grid.dimension != market.m:
        raise GridBoxError(f"Grid has {grid.dimension} axes, market has {market.m} products")

    q = _lcm_of_denominators(list(grid.lower) + [grid.price_step])
    stride = int(grid.price_step * q)
    counts = grid.axis_counts()
    coefficients = [v for c in market.consumers for u in c.utilities for v in (u.intercept, u.sensitivity)]
    l_util = _lcm_of_denominators(coefficients)
    l_demand = _lcm_of_denominators([d for c in market.consumers for d in c.demands])

    top_price = max(int(lo * q) + (k - 1) * stride for lo, k in zip(grid.lower, counts))
    util_bound = max((abs(v * l_util) for v in coefficients), default=0) * q * (1 + top_price)
    revenue_bound = (
        max(market.n, 1) * max((d * l_demand for c in market.consumers for d in c.demands), default=0) * top_price
    )
    dtype = np.int64 if max(util_bound, revenue_bound) < _INT64_LIMIT else object

    scaled_axes = []
    for lo, k in zip(grid.lower, counts):
        values = [int(lo * q) + i * stride for i in range(k)]
        scaled_axes.append(np.array(values, dtype=dtype))
    prices = np.meshgrid(*scaled_axes, indexing="ij")
    shape = prices[0].shape
    logger.info(f"Sweeping {math.prod(shape)} grid points ({np.dtype(dtype).name})")

    untaxed = np.zeros(shape, dtype=dtype)
    taxed = np.zeros(shape, dtype=dtype)
    taxed_first = market.tie_rule == TieRule.TAXED_FIRST

    for consumer in market.consumers:
        best = np.full(shape, -1, dtype=np.int64)
        best_utility = np.zeros(shape, dtype=dtype)
        best_revenue = np.zeros(shape, dtype=dtype)
        best_taxed = np.zeros(shape, dtype=bool)

        for j, utility in enumerate(consumer.utilities):
            intercept = int(utility.intercept * l_util) * q
            sensitivity = int(utility.sensitivity * l_util)
            value = intercept - sensitivity * prices[j]
            revenue = int(consumer.demands[j] * l_demand) * prices[j]
            is_taxed = market.products[j].taxed

            if taxed_first:
                tie_wins = ((best_taxed == is_taxed) & (revenue > best_revenue)) | (
                    ~best_taxed if is_taxed else np.zeros(shape, dtype=bool)
                )
            else:
                tie_wins = revenue > best_revenue
            # Ascending j: equal keys keep the lower index
            take = (value >= 0) & ((best < 0) | (value > best_utility) | ((value == best_utility) & tie_wins))

            best = np.where(take, j, best)
            best_utility = np.where(take, value, best_utility)
            best_revenue = np.where(take, revenue, best_revenue)
            best_taxed = np.where(take, is_taxed, best_taxed)

        # best_revenue stays 0 where nothing is bought
        taxed = taxed + np.where(best_taxed, best_revenue, 0)
        untaxed = untaxed + np.where(best_taxed, 0, best_revenue)

    return GridSweep(
        grid=grid,
        price_scale=q,
        revenue_scale=l_demand * q,
        scaled_axes=scaled_axes,
        untaxed=untaxed,
        taxed=taxed,
    )


def _grid_profile(market: Market, sweep: GridSweep, alpha: Fraction) -> StrategyProfile:
    prices = sweep.prices_at(sweep.best_index(alpha))
    return profile_point(market, PricePoint(prices=prices))


def grid_best_response(
    market: Market,
    alpha: Any,
    grid: GridSpec,
    candidates: Optional[CandidateSet] = None,
) -> ResponseOutcome:
    """The firm's best grid price vector at tax rate alpha.

    Args:
        market: The market
        alpha: Tax rate in [0, 1]
        grid: The price grid; it must cover every active candidate
        candidates: Candidates for the box check, enumerated when omitted

    Returns:
        The exact outcome at the best grid point (first in lexicographic price order on ties)

    Raises:
        GridBoxError: If the grid box leaves out an active candidate
    """
    alpha = validate_tax_rate(alpha)
    if candidates is None:
        candidates = enumerate_candidates(market)
    check_grid_box(market, grid, candidates)
    return _grid_profile(market, sweep_grid(market, grid), alpha).outcome(alpha)


def verify_solution(
    market: Market,
    solution: TaxSolution,
    grid: Optional[GridSpec] = None,
    candidates: Optional[CandidateSet] = None,
) -> VerificationReport:
    """Check an enumerated solution against the grid.

    At every rate the solution evaluated plus every grid alpha sample, the
    best grid net utility must not exceed the enumerated best (exactly), and
    no grid best response may beat W* by more than the log tolerance.
    Violations are reported, never raised.
    """
    if candidates is None:
        candidates = enumerate_candidates(market)
    if grid is None:
        grid = default_grid(market, candidates)
    check_grid_box(market, grid, candidates)

    profiles = profile_candidates(market, candidates)
    sweep = sweep_grid(market, grid)
    alphas = sorted({e.alpha for e in solution.evaluated}.union(grid.alphas()))
    target = solution.welfare.total

    violations: List[Violation] = []
    for alpha in alphas:
        on_grid = _grid_profile(market, sweep, alpha)
        grid_net = on_grid.net_at(alpha)
        enumerated_net = select_response(profiles, alpha, solution.mode).net_at(alpha) if profiles else Fraction(0)
        if grid_net > enumerated_net:
            violations.append(
                Violation(
                    alpha=alpha,
                    kind="net",
                    prices=on_grid.point.prices,
                    grid_value=float(grid_net),
                    enumerated_value=float(enumerated_net),
                )
            )
        grid_welfare = on_grid.welfare_at(alpha, solution.mode)
        if grid_welfare > target + WELFARE_TOLERANCE:
            violations.append(
                Violation(
                    alpha=alpha,
                    kind="welfare",
                    prices=on_grid.point.prices,
                    grid_value=grid_welfare,
                    enumerated_value=target,
                )
            )

    for violation in violations:
        log_with_context(
            logger,
            "warning",
            f"Oracle violation ({violation.kind}): grid beats enumeration",
            alpha=str(violation.alpha),
            prices=[str(p) for p in violation.prices],
            grid=f"{violation.grid_value:.6f}",
            enumerated=f"{violation.enumerated_value:.6f}",
        )
    logger.info(f"Oracle checked {len(alphas)} tax rates on {grid.size()} grid points: {len(violations)} violations")
    return VerificationReport(
        passed=not violations,
        mode=solution.mode,
        grid=grid,
        alphas_checked=len(alphas),
        violations=tuple(violations),
    )
