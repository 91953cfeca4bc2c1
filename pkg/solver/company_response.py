import logging
from fractions import Fraction
from functools import partial
from typing import Any, List, Sequence, Tuple

from pydantic import BaseModel, ConfigDict

from models.market_model import Market, PriceVector, price_vector
from solver.consumer_choice import NO_PURCHASE, Assignment, Choice, assignment, tie_switch_rates
from solver.price_arrangement import CandidateSet, PricePoint
from solver.welfare import WelfareMode, consumer_surplus, welfare_total
from utils.parallel import ordered_map
from utils.rational import to_fraction

logger = logging.getLogger(__name__)

# Exact sugar tax rate in [0, 1]
TaxRate = Fraction


def validate_tax_rate(alpha: Any) -> TaxRate:
    alpha = to_fraction(alpha)
    if not 0 <= alpha <= 1:
        raise ValueError(f"Tax rate must lie in [0, 1], got {alpha}")
    return alpha


class ResponseOutcome(BaseModel):
    """The firm's pricing decision at a tax rate and what it earns."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    alpha: Fraction
    point: PricePoint
    assignment: Tuple[Choice, ...]
    gross_revenue: Fraction
    tax_paid: Fraction
    net_utility: Fraction


class StrategyProfile(BaseModel):
    """Tax-independent summary of one candidate: the firm's net utility is affine in alpha."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    point: PricePoint
    assignment: Tuple[Choice, ...]
    untaxed_revenue: Fraction
    taxed_revenue: Fraction
    consumer_surplus: float

    @property
    def gross_revenue(self) -> Fraction:
        return self.untaxed_revenue + self.taxed_revenue

    def net_at(self, alpha: Fraction) -> Fraction:
        return self.untaxed_revenue + (1 - alpha) * self.taxed_revenue

    def welfare_at(self, alpha: Fraction, mode: WelfareMode = WelfareMode.DEFINITION) -> float:
        return welfare_total(self.consumer_surplus, self.gross_revenue, alpha * self.taxed_revenue, mode)

    def outcome(self, alpha: Fraction) -> ResponseOutcome:
        tax = alpha * self.taxed_revenue
        return ResponseOutcome(
            alpha=alpha,
            point=self.point,
            assignment=self.assignment,
            gross_revenue=self.gross_revenue,
            tax_paid=tax,
            net_utility=self.gross_revenue - tax,
        )


def _revenue_split(market: Market, prices: PriceVector, chosen: Assignment) -> Tuple[Fraction, Fraction]:
    untaxed = Fraction(0)
    taxed = Fraction(0)
    for consumer, j in zip(market.consumers, chosen):
        if j is NO_PURCHASE:
            continue
        revenue = consumer.demands[j] * prices[j]
        if market.products[j].taxed:
            taxed += revenue
        else:
            untaxed += revenue
    return untaxed, taxed


def gross_revenue(market: Market, prices: PriceVector, chosen: Assignment) -> Fraction:
    """Revenue before tax: sum of D_ij * p_j over purchases."""
    untaxed, taxed = _revenue_split(market, prices, chosen)
    return untaxed + taxed


def taxed_revenue(market: Market, prices: PriceVector, chosen: Assignment) -> Fraction:
    return _revenue_split(market, prices, chosen)[1]


def tax_collected(market: Market, prices: PriceVector, chosen: Assignment, alpha: Any) -> Fraction:
    return validate_tax_rate(alpha) * taxed_revenue(market, prices, chosen)


def net_utility(market: Market, prices: PriceVector, chosen: Assignment, alpha: Any) -> Fraction:
    """Firm utility after tax: untaxed revenue + (1 - alpha) * taxed revenue."""
    untaxed, taxed = _revenue_split(market, prices, chosen)
    return untaxed + (1 - validate_tax_rate(alpha)) * taxed


def profile_point(market: Market, point: PricePoint, alpha: Any = 0) -> StrategyProfile:
    """Profile of the consumers' response at `point`, ties resolved for tax rate alpha."""
    return _profile(market, point, assignment(market, point.prices, alpha))


def _profile(market: Market, point: PricePoint, chosen: Assignment) -> StrategyProfile:
    untaxed, taxed = _revenue_split(market, point.prices, chosen)
    return StrategyProfile(
        point=point,
        assignment=chosen,
        untaxed_revenue=untaxed,
        taxed_revenue=taxed,
        consumer_surplus=consumer_surplus(market, point.prices, chosen),
    )


def vertex_profiles(market: Market, point: PricePoint) -> List[StrategyProfile]:
    """Every distinct consumer response at `point` as alpha sweeps [0, 1].

    Responses only differ where a consumer's revenue tie-break flips, so
    sampling each flip rate and each open interval between flips finds them
    all. A tie between equal contributions settles by index at alpha = 0 and
    against the taxed product for every alpha > 0; the open interval next to
    zero catches that flip. Most points have a single profile.
    """
    bounds = [Fraction(0)] + tie_switch_rates(market, point.prices) + [Fraction(1)]
    samples = sorted(set(bounds) | {(lo + hi) / 2 for lo, hi in zip(bounds, bounds[1:])})

    profiles: List[StrategyProfile] = []
    seen = set()
    for alpha in samples:
        chosen = assignment(market, point.prices, alpha)
        if chosen not in seen:
            seen.add(chosen)
            profiles.append(_profile(market, point, chosen))
    return profiles


def _profile_chunk(market: Market, points: Sequence[PricePoint]) -> List[StrategyProfile]:
    return [profile for point in points for profile in vertex_profiles(market, point)]


def profile_candidates(market: Market, candidates: CandidateSet, workers: int = 1) -> List[StrategyProfile]:
    """Evaluate every candidate once; profiles keep candidate order.

    A candidate where some consumer is indifferent between a taxed and an
    untaxed product yields one profile per tie resolution the firm can face.
    """
    return ordered_map(partial(_profile_chunk, market), list(candidates.points), workers)


def select_response(
    profiles: Sequence[StrategyProfile], alpha: Fraction, mode: WelfareMode = WelfareMode.DEFINITION
) -> StrategyProfile:
    """The net-maximizing profile; ties go to higher welfare, then the smaller price vector."""
    if not profiles:
        raise ValueError("Cannot select a response from an empty candidate set")

    def key(profile: StrategyProfile):
        return (
            profile.net_at(alpha),
            profile.welfare_at(alpha, mode),
            tuple(-p for p in profile.point.prices),
        )

    return max(profiles, key=key)


def best_response(
    market: Market,
    candidates: CandidateSet,
    alpha: Any,
    mode: WelfareMode = WelfareMode.DEFINITION,
    workers: int = 1,
) -> ResponseOutcome:
    """The firm's optimal pricing among the candidates at tax rate alpha.

    Args:
        market: The market
        candidates: Candidate price points, nonempty
        alpha: Tax rate in [0, 1]
        mode: Welfare accounting used to break ties between equal-net candidates
        workers: joblib workers for candidate evaluation

    Returns:
        The firm's response outcome
    """
    alpha = validate_tax_rate(alpha)
    profiles = profile_candidates(market, candidates, workers)
    chosen = select_response(profiles, alpha, mode)
    logger.debug(f"Best response at alpha={alpha}: {chosen.point.prices} net={chosen.net_at(alpha)}")
    return chosen.outcome(alpha)


def evaluate_response(market: Market, prices: Sequence[Any], alpha: Any) -> ResponseOutcome:
    """Outcome of an arbitrary (not necessarily candidate) price vector."""
    alpha = validate_tax_rate(alpha)
    point = PricePoint(prices=price_vector(prices, market.m))
    return profile_point(market, point, alpha).outcome(alpha)
