import logging
import math
from enum import Enum
from fractions import Fraction
from typing import Any

from pydantic import BaseModel, ConfigDict

from models.market_model import Market, PriceVector
from solver.consumer_choice import NO_PURCHASE, Assignment, realized_utility

logger = logging.getLogger(__name__)


class WelfareMode(str, Enum):
    """How collected tax enters social welfare.

    DEFINITION: W = U_c + U_f + T, where the tax cancels between firm and state.
    PAPER_EXAMPLE: W = U_c + gross revenue + T, the accounting behind the
    cola example's 156037 headline figure (tax counted twice).
    """

    DEFINITION = "definition"
    PAPER_EXAMPLE = "paper-example"


class WelfareBreakdown(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    mode: WelfareMode
    consumer_surplus: float
    gross_revenue: Fraction
    firm_utility: Fraction
    tax: Fraction
    total: float


def consumer_surplus(market: Market, prices: PriceVector, chosen: Assignment) -> float:
    """Sum of ln(1 + u) over consumers who buy a positive quantity.

    A purchase of a product the consumer demands zero units of realises no
    surplus.
    """
    total = 0.0
    for i, consumer in enumerate(market.consumers):
        j = chosen[i]
        if j is NO_PURCHASE or consumer.demands[j] == 0:
            continue
        total += math.log1p(float(realized_utility(market, prices, chosen, i)))
    return total


def welfare_total(surplus: float, gross: Fraction, tax: Fraction, mode: WelfareMode) -> float:
    rational = gross + tax if WelfareMode(mode) == WelfareMode.PAPER_EXAMPLE else gross
    return surplus + float(rational)


def social_welfare(
    market: Market,
    prices: PriceVector,
    chosen: Assignment,
    alpha: Any,
    mode: WelfareMode = WelfareMode.DEFINITION,
) -> WelfareBreakdown:
    """Social welfare of a price vector and the consumers' response.

    Args:
        market: The market
        prices: Price vector
        chosen: The assignment at these prices
        alpha: Tax rate in [0, 1]
        mode: Welfare accounting

    Returns:
        The breakdown into consumer surplus, firm utility and tax
    """
    # company_response imports this module
    from solver.company_response import gross_revenue, tax_collected, validate_tax_rate

    alpha = validate_tax_rate(alpha)
    mode = WelfareMode(mode)
    surplus = consumer_surplus(market, prices, chosen)
    gross = gross_revenue(market, prices, chosen)
    tax = tax_collected(market, prices, chosen, alpha)
    return WelfareBreakdown(
        mode=mode,
        consumer_surplus=surplus,
        gross_revenue=gross,
        firm_utility=gross - tax,
        tax=tax,
        total=welfare_total(surplus, gross, tax, mode),
    )
