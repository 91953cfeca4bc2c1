"""Human-readable tables (rich) and machine-readable JSON for every command.

Reports carry no timestamps or environment data: the same input gives the
same bytes for any worker count.
"""

import io
import json
import logging
import os
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence, Tuple

from rich.console import Console
from rich.table import Table

from models.market_model import Market, PriceVector
from solver.company_response import gross_revenue, tax_collected
from solver.consumer_choice import NO_PURCHASE, Assignment, assignment, realized_utility
from solver.oracle import VerificationReport
from solver.price_arrangement import CandidateSet, PricePoint
from solver.tax_optimizer import TaxSolution, WelfareCurve
from solver.welfare import WelfareMode, consumer_surplus, social_welfare, welfare_total
from utils.rational import format_decimal, format_exact, round_fraction

logger = logging.getLogger(__name__)

REPORT_WIDTH = 160


def _console() -> Console:
    return Console(
        file=io.StringIO(),
        record=True,
        width=REPORT_WIDTH,
        color_system=None,
        force_terminal=False,
        highlight=False,
        markup=False,
    )


def _money(value: Fraction, precision: int) -> Dict[str, str]:
    return {"exact": format_exact(value), "value": format_decimal(value, precision)}


def _float(value: float, precision: int) -> str:
    return f"{value:.{precision}f}"


def _rate(value: Fraction, precision: int) -> Dict[str, str]:
    return {"exact": format_exact(value), "value": format_decimal(value, precision + 2)}


def price_fields(market: Market, prices: PriceVector, precision: int) -> List[Dict[str, str]]:
    """Prices in display order (taxed products first)."""
    return [
        {"product": market.products[j].id, **_money(prices[j], precision)} for j in market.display_order()
    ]


def numbered_candidates(market: Market, candidates: CandidateSet) -> List[Tuple[int, PricePoint]]:
    """Candidates numbered from 1 in lexicographic display-order coordinates."""
    order = market.display_order()
    ranked = sorted(candidates.points, key=lambda p: tuple(p.prices[j] for j in order))
    return list(enumerate(ranked, start=1))


def display_recheck(
    market: Market, prices: PriceVector, chosen: Assignment, alpha: Fraction, precision: int
) -> Dict[str, Any]:
    """Revenue and welfare at the prices rounded for display, keeping the exact choices.

    Printed tables computed their figures this way; the exact values stay
    authoritative.
    """
    rounded = tuple(round_fraction(p, precision) for p in prices)
    surplus = consumer_surplus(market, rounded, chosen)
    gross = gross_revenue(market, rounded, chosen)
    tax = tax_collected(market, rounded, chosen, alpha)
    return {
        "prices": price_fields(market, rounded, precision),
        "gross_revenue": format_decimal(gross, precision),
        "tax": format_decimal(tax, precision),
        "consumer_surplus": _float(surplus, 6),
        "welfare": {
            mode.value: _float(welfare_total(surplus, gross, tax, mode), precision) for mode in WelfareMode
        },
    }


def candidate_rows(market: Market, candidates: CandidateSet, precision: int = 2) -> List[Dict[str, Any]]:
    rows = []
    for number, point in numbered_candidates(market, candidates):
        chosen = assignment(market, point.prices)
        choices = {}
        for i, consumer in enumerate(market.consumers):
            j = chosen[i]
            if j is NO_PURCHASE:
                choices[consumer.id] = None
                continue
            utility = realized_utility(market, point.prices, chosen, i)
            choices[consumer.id] = {"product": market.products[j].id, **_money(utility, precision)}
        rounded = tuple(round_fraction(p, precision) for p in point.prices)
        rows.append(
            {
                "number": number,
                "prices": price_fields(market, point.prices, precision),
                "hyperplanes": candidates.generator_labels(point),
                "choices": choices,
                "revenue": _money(gross_revenue(market, point.prices, chosen), precision),
                "display_revenue": format_decimal(gross_revenue(market, rounded, chosen), precision),
            }
        )
    return rows


def candidates_payload(market: Market, candidates: CandidateSet, precision: int = 2) -> Dict[str, Any]:
    return {
        "instance": market.name,
        "tie_rule": market.tie_rule.value,
        "products": [{"id": p.id, "taxed": p.taxed} for p in market.products],
        "candidate_count": len(candidates),
        "candidates": candidate_rows(market, candidates, precision),
    }


def solve_payload(
    market: Market,
    candidates: CandidateSet,
    solution: TaxSolution,
    precision: int = 2,
    verification: Optional[VerificationReport] = None,
) -> Dict[str, Any]:
    prices = solution.point.prices
    chosen = solution.response.assignment
    welfare = {}
    for mode in WelfareMode:
        breakdown = social_welfare(market, prices, chosen, solution.alpha, mode)
        welfare[mode.value] = {
            "selected": mode == solution.mode,
            "consumer_surplus": _float(breakdown.consumer_surplus, 6),
            "gross_revenue": _money(breakdown.gross_revenue, precision),
            "firm_utility": _money(breakdown.firm_utility, precision),
            "tax": _money(breakdown.tax, precision),
            "total": _float(breakdown.total, precision),
        }

    payload: Dict[str, Any] = {
        "instance": market.name,
        "tie_rule": market.tie_rule.value,
        "welfare_mode": solution.mode.value,
        "candidate_count": len(candidates),
        "break_evens": [_rate(b.alpha, precision) for b in solution.break_evens],
        "staircase": [
            {
                "lower": _rate(step.lower, precision),
                "upper": _rate(step.upper, precision),
                "prices": price_fields(market, step.point.prices, precision),
                "welfare_lower": _float(step.welfare_lower, precision),
                "welfare_upper": _float(step.welfare_upper, precision),
            }
            for step in solution.staircase
        ],
        "alpha": _rate(solution.alpha, precision),
        "prices": price_fields(market, prices, precision),
        "choices": {
            c.id: (None if j is NO_PURCHASE else market.products[j].id) for c, j in zip(market.consumers, chosen)
        },
        "net_utility": _money(solution.response.net_utility, precision),
        "welfare": welfare,
        "display_recheck": display_recheck(market, prices, chosen, solution.alpha, precision),
    }
    if verification is not None:
        payload["oracle"] = verification_payload(verification)
    return payload


def welfare_curve_payload(market: Market, curve: WelfareCurve, precision: int = 2) -> Dict[str, Any]:
    return {
        "instance": market.name,
        "welfare_mode": curve.mode.value,
        "steps": [
            {
                "lower": _rate(step.lower, precision),
                "upper": _rate(step.upper, precision),
                "prices": price_fields(market, step.point.prices, precision),
            }
            for step in curve.steps
        ],
        "rows": [
            {
                "alpha": _rate(row.alpha, precision),
                "step": row.step,
                "prices": price_fields(market, row.point.prices, precision),
                WelfareMode.DEFINITION.value: _float(row.welfare_definition, precision),
                WelfareMode.PAPER_EXAMPLE.value: _float(row.welfare_paper_example, precision),
            }
            for row in curve.samples
        ],
    }


def verification_payload(report: VerificationReport) -> Dict[str, Any]:
    return {
        "passed": report.passed,
        "welfare_mode": report.mode.value,
        "grid": {
            "lower": [format_exact(v) for v in report.grid.lower],
            "upper": [format_exact(v) for v in report.grid.upper],
            "price_step": format_exact(report.grid.price_step),
            "alpha_step": format_exact(report.grid.alpha_step),
            "points": report.grid.size(),
        },
        "alphas_checked": report.alphas_checked,
        "violations": [
            {
                "alpha": format_exact(v.alpha),
                "kind": v.kind,
                "prices": [format_exact(p) for p in v.prices],
                "grid_value": _float(v.grid_value, 6),
                "enumerated_value": _float(v.enumerated_value, 6),
            }
            for v in report.violations
        ],
    }


def _prices_cell(entries: Sequence[Dict[str, str]]) -> str:
    return "(" + ", ".join(e["value"] for e in entries) + ")"


def render_candidates(payload: Dict[str, Any]) -> str:
    console = _console()
    consumers = list(payload["candidates"][0]["choices"]) if payload["candidates"] else []
    table = Table(
        title=f"Candidate price points: {payload['instance']} ({payload['candidate_count']})",
        show_header=True,
        header_style="bold magenta",
    )
    table.add_column("#", justify="right")
    order = [p["product"] for p in payload["candidates"][0]["prices"]] if payload["candidates"] else []
    table.add_column("prices (" + "; ".join(order) + ")")
    for consumer in consumers:
        table.add_column(consumer)
    table.add_column("revenue", justify="right")
    table.add_column("at display prices", justify="right")

    for row in payload["candidates"]:
        cells = [str(row["number"]), _prices_cell(row["prices"])]
        for consumer in consumers:
            choice = row["choices"][consumer]
            cells.append("–" if choice is None else f"{choice['product']}: u={choice['value']}")
        cells.extend([row["revenue"]["value"], row["display_revenue"]])
        table.add_row(*cells)
    console.print(table)
    return console.export_text()


def render_solve(payload: Dict[str, Any]) -> str:
    console = _console()
    console.print(f"Instance: {payload['instance']} (ties: {payload['tie_rule']})")
    console.print(f"Candidate price points: {payload['candidate_count']}")
    console.print(
        "Break-even tax rates: " + ", ".join(b["value"] for b in payload["break_evens"])
    )

    staircase = Table(title="Welfare staircase", show_header=True, header_style="bold magenta")
    for column in ("from", "to", "prices", "W from", "W to"):
        staircase.add_column(column, justify="right")
    for step in payload["staircase"]:
        staircase.add_row(
            step["lower"]["value"],
            step["upper"]["value"],
            _prices_cell(step["prices"]),
            step["welfare_lower"],
            step["welfare_upper"],
        )
    console.print(staircase)

    console.print(f"Optimal tax rate: {payload['alpha']['value']} ({payload['alpha']['exact']})")
    console.print(
        "Optimal prices: "
        + ", ".join(f"{p['product']}={p['value']} ({p['exact']})" for p in payload["prices"])
    )
    console.print(f"Firm net utility: {payload['net_utility']['value']}")

    welfare = Table(title="Social welfare", show_header=True, header_style="bold magenta")
    for column in ("mode", "U_c", "gross revenue", "firm utility", "tax", "W", ""):
        welfare.add_column(column, justify="right")
    for mode, row in payload["welfare"].items():
        welfare.add_row(
            mode,
            row["consumer_surplus"],
            row["gross_revenue"]["value"],
            row["firm_utility"]["value"],
            row["tax"]["value"],
            row["total"],
            "selected" if row["selected"] else "",
        )
    console.print(welfare)

    recheck = payload["display_recheck"]
    console.print(
        f"At display prices {_prices_cell(recheck['prices'])}: revenue {recheck['gross_revenue']}, "
        + ", ".join(f"W[{mode}]={value}" for mode, value in recheck["welfare"].items())
    )
    if "oracle" in payload:
        console.print(_verification_summary(payload["oracle"]))
    return console.export_text()


def render_welfare_curve(payload: Dict[str, Any]) -> str:
    console = _console()
    table = Table(
        title=f"Welfare curve: {payload['instance']} (responses under {payload['welfare_mode']} ties)",
        show_header=True,
        header_style="bold magenta",
    )
    for column in ("alpha", "step", "prices", "W definition", "W paper-example"):
        table.add_column(column, justify="right")
    for row in payload["rows"]:
        table.add_row(
            row["alpha"]["value"],
            str(row["step"] + 1),
            _prices_cell(row["prices"]),
            row[WelfareMode.DEFINITION.value],
            row[WelfareMode.PAPER_EXAMPLE.value],
        )
    console.print(table)
    return console.export_text()


def _verification_summary(payload: Dict[str, Any]) -> str:
    status = "PASS" if payload["passed"] else "FAIL"
    return (
        f"Oracle: {status} ({payload['alphas_checked']} tax rates, {payload['grid']['points']} grid points, "
        f"step {payload['grid']['price_step']}, {len(payload['violations'])} violations)"
    )


def render_verification(payload: Dict[str, Any]) -> str:
    console = _console()
    console.print(_verification_summary(payload))
    if payload["violations"]:
        table = Table(title="Violations", show_header=True, header_style="bold magenta")
        for column in ("alpha", "kind", "grid prices", "grid", "enumerated"):
            table.add_column(column, justify="right")
        for v in payload["violations"]:
            table.add_row(v["alpha"], v["kind"], ", ".join(v["prices"]), v["grid_value"], v["enumerated_value"])
        console.print(table)
    return console.export_text()


def to_json(payload: Dict[str, Any]) -> str:
    return json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def write_report(text: str, payload: Dict[str, Any], out: Optional[str]) -> List[str]:
    """Write a report; without `out` the text goes to stdout.

    `out` ending in .json receives the JSON only; any other path receives
    the text and a sibling .json file the JSON.

    Returns:
        The paths written
    """
    if out is None:
        print(text, end="")
        return []

    base, extension = os.path.splitext(out)
    directory = os.path.dirname(os.path.abspath(out))
    os.makedirs(directory, exist_ok=True)
    written = []
    if extension.lower() != ".json":
        with open(out, "w", encoding="utf-8") as file:
            file.write(text)
        written.append(out)
    json_path = out if extension.lower() == ".json" else base + ".json"
    with open(json_path, "w", encoding="utf-8") as file:
        file.write(to_json(payload))
    written.append(json_path)
    logger.info(f"Wrote {', '.join(written)}")
    return written
