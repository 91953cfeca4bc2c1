import logging
from fractions import Fraction
from functools import partial
from typing import Dict, List, Optional, Sequence, Tuple

from pydantic import BaseModel, ConfigDict, Field

from models.market_model import Market
from solver.company_response import ResponseOutcome, StrategyProfile, profile_candidates, select_response
from solver.consumer_choice import Choice
from solver.price_arrangement import CandidateSet, PricePoint
from solver.welfare import WelfareBreakdown, WelfareMode, social_welfare
from utils.parallel import ordered_map

logger = logging.getLogger(__name__)

# (untaxed revenue, taxed revenue): the firm's net utility is untaxed + (1 - alpha) * taxed
NetLine = Tuple[Fraction, Fraction]


class _Frozen(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)


class BreakEven(_Frozen):
    """A tax rate at which two candidates earn the firm the same net utility.

    The endpoints 0 and 1 are always present; when no candidate pair crosses
    there, `first` and `second` are None.
    """

    alpha: Fraction
    first: Optional[PricePoint] = None
    second: Optional[PricePoint] = None


class StaircaseStep(_Frozen):
    """A maximal alpha range on which the firm keeps the same best response."""

    lower: Fraction
    upper: Fraction
    point: PricePoint
    assignment: Tuple[Choice, ...]
    welfare_lower: float
    welfare_upper: float


class AlphaEvaluation(_Frozen):
    alpha: Fraction
    point: PricePoint
    net_utility: Fraction
    welfare: WelfareBreakdown


class TaxSolution(_Frozen):
    alpha: Fraction
    point: PricePoint
    response: ResponseOutcome
    welfare: WelfareBreakdown
    mode: WelfareMode
    break_evens: Tuple[BreakEven, ...]
    staircase: Tuple[StaircaseStep, ...]
    evaluated: Tuple[AlphaEvaluation, ...]

    @property
    def welfare_value(self) -> float:
        return self.welfare.total


class CurveSample(_Frozen):
    alpha: Fraction
    point: PricePoint
    step: int
    welfare_definition: float
    welfare_paper_example: float


class WelfareCurve(_Frozen):
    mode: WelfareMode
    steps: Tuple[StaircaseStep, ...]
    samples: Tuple[CurveSample, ...] = Field(default_factory=tuple)


def break_even_alpha(
    untaxed_a: Fraction, taxed_a: Fraction, untaxed_b: Fraction, taxed_b: Fraction
) -> Optional[Fraction]:
    """Solve untaxed_a + (1 - a) taxed_a == untaxed_b + (1 - a) taxed_b for a.

    The result is not restricted to [0, 1].

    Returns:
        The crossing rate, or None when both lines have the same slope
    """
    if taxed_a == taxed_b:
        return None
    return ((untaxed_a + taxed_a) - (untaxed_b + taxed_b)) / (taxed_a - taxed_b)


def _crossings_chunk(
    lines: Sequence[NetLine], pairs: Sequence[Tuple[int, int]]
) -> List[Tuple[Fraction, int, int]]:
    found = []
    for a, b in pairs:
        alpha = break_even_alpha(lines[a][0], lines[a][1], lines[b][0], lines[b][1])
        if alpha is not None and 0 <= alpha <= 1:
            found.append((alpha, a, b))
    return found


def _break_evens_from_profiles(profiles: Sequence[StrategyProfile], workers: int = 1) -> List[BreakEven]:
    # Candidates with identical net lines can never cross each other
    representatives: Dict[NetLine, PricePoint] = {}
    for profile in profiles:
        representatives.setdefault((profile.untaxed_revenue, profile.taxed_revenue), profile.point)
    lines = list(representatives)
    points = list(representatives.values())

    pairs = [(a, b) for a in range(len(lines)) for b in range(a + 1, len(lines))]
    crossings = ordered_map(partial(_crossings_chunk, lines), pairs, workers)

    found: Dict[Fraction, BreakEven] = {}
    for alpha, a, b in crossings:
        if alpha not in found:
            found[alpha] = BreakEven(alpha=alpha, first=points[a], second=points[b])
    for endpoint in (Fraction(0), Fraction(1)):
        found.setdefault(endpoint, BreakEven(alpha=endpoint))

    logger.debug(f"{len(pairs)} net-line pairs produced {len(found)} break-even rates in [0, 1]")
    return sorted(found.values(), key=lambda b: b.alpha)


def break_evens(market: Market, candidates: CandidateSet, workers: int = 1) -> List[BreakEven]:
    """All tax rates in [0, 1] where the firm's preferred candidate can switch.

    Args:
        market: The market
        candidates: Candidate price points
        workers: joblib workers for candidate evaluation and the pair sweep

    Returns:
        Break-evens sorted by rate, exactly deduplicated, always including 0 and 1
    """
    return _break_evens_from_profiles(profile_candidates(market, candidates, workers), workers)


def _same_response(a: StrategyProfile, b: StrategyProfile) -> bool:
    return a.point == b.point and a.assignment == b.assignment


def _staircase(
    profiles: Sequence[StrategyProfile], alphas: Sequence[Fraction], mode: WelfareMode
) -> List[StaircaseStep]:
    # Responses at every rate and inside every open interval between rates
    samples: List[Tuple[Fraction, Fraction, StrategyProfile]] = []
    for k, alpha in enumerate(alphas):
        samples.append((alpha, alpha, select_response(profiles, alpha, mode)))
        if k + 1 < len(alphas):
            middle = (alpha + alphas[k + 1]) / 2
            samples.append((alpha, alphas[k + 1], select_response(profiles, middle, mode)))

    merged: List[Tuple[Fraction, Fraction, StrategyProfile]] = []
    for lower, upper, profile in samples:
        if merged and _same_response(merged[-1][2], profile):
            merged[-1] = (merged[-1][0], upper, profile)
        else:
            merged.append((lower, upper, profile))

    return [
        StaircaseStep(
            lower=lower,
            upper=upper,
            point=profile.point,
            assignment=profile.assignment,
            welfare_lower=profile.welfare_at(lower, mode),
            welfare_upper=profile.welfare_at(upper, mode),
        )
        for lower, upper, profile in merged
    ]


def optimize(
    market: Market,
    candidates: CandidateSet,
    mode: WelfareMode = WelfareMode.DEFINITION,
    workers: int = 1,
) -> TaxSolution:
    """Find the welfare-maximizing tax rate.

    The firm's best response is evaluated at every break-even rate (0 and 1
    included). Among rates of equal welfare the smallest wins in definition
    mode and the largest in paper-example mode.

    Args:
        market: The market
        candidates: Candidate price points, nonempty
        mode: Welfare accounting
        workers: joblib workers

    Returns:
        The optimal rate with its response, welfare and the full staircase
    """
    mode = WelfareMode(mode)
    if not len(candidates):
        raise ValueError("Cannot optimize over an empty candidate set")

    profiles = profile_candidates(market, candidates, workers)
    rates = _break_evens_from_profiles(profiles, workers)
    alphas = [b.alpha for b in rates]

    evaluated: List[AlphaEvaluation] = []
    best: Optional[Tuple[AlphaEvaluation, StrategyProfile]] = None
    for alpha in alphas:
        profile = select_response(profiles, alpha, mode)
        welfare = social_welfare(market, profile.point.prices, profile.assignment, alpha, mode)
        evaluation = AlphaEvaluation(
            alpha=alpha, point=profile.point, net_utility=profile.net_at(alpha), welfare=welfare
        )
        evaluated.append(evaluation)
        if best is None:
            best = (evaluation, profile)
            continue
        incumbent = best[0].welfare.total
        # rates ascend: strict improvement keeps the smallest, >= keeps the largest
        if welfare.total > incumbent or (mode == WelfareMode.PAPER_EXAMPLE and welfare.total == incumbent):
            best = (evaluation, profile)

    assert best is not None
    evaluation, profile = best
    staircase = _staircase(profiles, alphas, mode)
    logger.info(
        f"Optimal tax rate {evaluation.alpha} ({mode.value} welfare {evaluation.welfare.total:.2f}) "
        f"over {len(alphas)} break-evens and {len(staircase)} staircase steps"
    )
    return TaxSolution(
        alpha=evaluation.alpha,
        point=evaluation.point,
        response=profile.outcome(evaluation.alpha),
        welfare=evaluation.welfare,
        mode=mode,
        break_evens=tuple(rates),
        staircase=tuple(staircase),
        evaluated=tuple(evaluated),
    )


def welfare_curve(
    market: Market,
    candidates: CandidateSet,
    mode: WelfareMode = WelfareMode.DEFINITION,
    samples: int = 21,
    workers: int = 1,
) -> WelfareCurve:
    """Tabulate W(alpha) under both accounting modes.

    Rows are the break-even rates plus `samples` evenly spaced rates over
    [0, 1]; the firm's response (and its tie-break) follows `mode`.
    """
    if samples < 2:
        raise ValueError(f"samples must be at least 2, got {samples}")
    mode = WelfareMode(mode)

    profiles = profile_candidates(market, candidates, workers)
    alphas = [b.alpha for b in _break_evens_from_profiles(profiles, workers)]
    steps = _staircase(profiles, alphas, mode)

    grid = {Fraction(k, samples - 1) for k in range(samples)}
    rows: List[CurveSample] = []
    for alpha in sorted(grid.union(alphas)):
        profile = select_response(profiles, alpha, mode)
        step = next(
            k
            for k, s in enumerate(steps)
            if s.lower <= alpha <= s.upper and s.point == profile.point and s.assignment == profile.assignment
        )
        rows.append(
            CurveSample(
                alpha=alpha,
                point=profile.point,
                step=step,
                welfare_definition=profile.welfare_at(alpha, WelfareMode.DEFINITION),
                welfare_paper_example=profile.welfare_at(alpha, WelfareMode.PAPER_EXAMPLE),
            )
        )
    return WelfareCurve(mode=mode, steps=tuple(steps), samples=tuple(rows))
