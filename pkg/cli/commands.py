import logging
import math
from fractions import Fraction
from typing import Optional, Tuple

from cli.loader import load_instance
from cli.plot import price_space_svg, write_plot
from cli.reports import (
    candidates_payload,
    render_candidates,
    render_solve,
    render_verification,
    render_welfare_curve,
    solve_payload,
    verification_payload,
    welfare_curve_payload,
    write_report,
)
from config.config import RunConfig
from models.market_model import Market
from solver.oracle import GridSpec, VerificationReport, default_grid, verify_solution
from solver.price_arrangement import CandidateSet, enumerate_candidates
from solver.tax_optimizer import TaxSolution, optimize, welfare_curve

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INVALID_INPUT = 2
EXIT_VERIFICATION_FAILED = 3


def _prepare(instance: str, settings: RunConfig) -> Tuple[Market, CandidateSet]:
    market = load_instance(instance, settings.tie_rule)
    return market, enumerate_candidates(market, settings.workers)


def grid_for(market: Market, candidates: CandidateSet, settings: RunConfig) -> GridSpec:
    """The default oracle grid, with the price step replaced when one is configured."""
    grid = default_grid(market, candidates, alpha_step=settings.alpha_step)
    if settings.grid_step is None:
        return grid
    step = settings.grid_step
    upper = tuple(math.ceil(hi / step) * step for hi in grid.upper)
    return GridSpec(lower=grid.lower, upper=upper, price_step=step, alpha_step=settings.alpha_step)


def _solve(
    market: Market, candidates: CandidateSet, settings: RunConfig
) -> Tuple[TaxSolution, Optional[VerificationReport]]:
    solution = optimize(market, candidates, settings.welfare_mode, settings.workers)
    verification = None
    if settings.oracle:
        verification = verify_solution(market, solution, grid_for(market, candidates, settings), candidates)
    return solution, verification


def cmd_solve(instance: str, settings: RunConfig) -> int:
    """Compute the welfare-maximizing tax rate and write the solve report.

    Returns:
        Exit code: 0, or 3 when the oracle ran and found a violation
    """
    market, candidates = _prepare(instance, settings)
    solution, verification = _solve(market, candidates, settings)
    payload = solve_payload(market, candidates, solution, settings.precision, verification)
    write_report(render_solve(payload), payload, settings.out)
    if verification is not None and not verification.passed:
        return EXIT_VERIFICATION_FAILED
    return EXIT_OK


def cmd_candidates(instance: str, settings: RunConfig) -> int:
    market, candidates = _prepare(instance, settings)
    payload = candidates_payload(market, candidates, settings.precision)
    write_report(render_candidates(payload), payload, settings.out)
    return EXIT_OK


def cmd_plot(instance: str, settings: RunConfig) -> int:
    market, candidates = _prepare(instance, settings)
    svg = price_space_svg(market, candidates)
    if settings.out is None:
        print(svg, end="")
    else:
        write_plot(svg, settings.out)
    return EXIT_OK


def cmd_welfare_curve(instance: str, settings: RunConfig) -> int:
    market, candidates = _prepare(instance, settings)
    curve = welfare_curve(market, candidates, settings.welfare_mode, settings.samples, settings.workers)
    payload = welfare_curve_payload(market, curve, settings.precision)
    write_report(render_welfare_curve(payload), payload, settings.out)
    return EXIT_OK


def cmd_verify(instance: str, settings: RunConfig) -> int:
    """Solve, then check the solution against the brute-force grid oracle."""
    market, candidates = _prepare(instance, settings)
    solution, verification = _solve(market, candidates, settings.model_copy(update={"oracle": True}))
    assert verification is not None
    payload = verification_payload(verification)
    payload["alpha"] = str(solution.alpha)
    write_report(render_verification(payload), payload, settings.out)
    return EXIT_OK if verification.passed else EXIT_VERIFICATION_FAILED


COMMANDS = {
    "solve": cmd_solve,
    "candidates": cmd_candidates,
    "welfare-curve": cmd_welfare_curve,
    "plot": cmd_plot,
    "verify": cmd_verify,
}
