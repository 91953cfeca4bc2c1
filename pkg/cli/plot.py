import logging
import os
from fractions import Fraction
from typing import Any, Dict, List, Optional, Tuple

from jinja2 import Environment, FileSystemLoader, select_autoescape

from cli.reports import numbered_candidates
from models.market_model import Market
from solver.oracle import active_points
from solver.price_arrangement import CandidateSet, Hyperplane
from utils.rational import format_decimal, format_exact

logger = logging.getLogger(__name__)

TEMPLATE_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), "templates")
TEMPLATE_NAME = "price_space.svg.j2"

WIDTH = 640
HEIGHT = 640
MARGIN = 60
BOX_MARGIN = Fraction(11, 10)
TICKS = 5


class PlotError(ValueError):
    pass


def _environment() -> Environment:
    return Environment(
        loader=FileSystemLoader(TEMPLATE_DIR),
        autoescape=select_autoescape(["svg", "xml", "j2"]),
        keep_trailing_newline=True,
    )


def clip_line(
    a: Fraction, b: Fraction, c: Fraction, x_max: Fraction, y_max: Fraction
) -> Optional[Tuple[Tuple[Fraction, Fraction], Tuple[Fraction, Fraction]]]:
    """Segment of a*x + b*y == c inside [0, x_max] x [0, y_max], None when it misses the box."""
    hits = set()
    if b != 0:
        for x in (Fraction(0), x_max):
            y = (c - a * x) / b
            if 0 <= y <= y_max:
                hits.add((x, y))
    if a != 0:
        for y in (Fraction(0), y_max):
            x = (c - b * y) / a
            if 0 <= x <= x_max:
                hits.add((x, y))
    if len(hits) < 2:
        return None
    ordered = sorted(hits)
    return ordered[0], ordered[-1]


def _coordinate(value: Fraction) -> str:
    return format_decimal(value, 2)


def price_space_svg(market: Market, candidates: CandidateSet, title: Optional[str] = None) -> str:
    """Render the price space of a two-product market as standalone SVG.

    The taxed product's price runs along the horizontal axis. Candidates are
    labelled with their number in the candidates table; the box covers every
    candidate at which somebody buys, with a 10% margin.

    Args:
        market: A market with exactly two products
        candidates: Its candidate set
        title: SVG title, defaults to the market name

    Returns:
        The SVG document
    """
    if market.m != 2:
        raise PlotError("plot requires exactly two products")

    x_index, y_index = market.display_order()
    active = active_points(market, candidates)
    x_max = max([p.prices[x_index] for p in active] + [Fraction(1, 100)]) * BOX_MARGIN
    y_max = max([p.prices[y_index] for p in active] + [Fraction(1, 100)]) * BOX_MARGIN
    plot_width = WIDTH - 2 * MARGIN
    plot_height = HEIGHT - 2 * MARGIN

    def sx(x: Fraction) -> str:
        return _coordinate(MARGIN + x / x_max * plot_width)

    def sy(y: Fraction) -> str:
        return _coordinate(HEIGHT - MARGIN - y / y_max * plot_height)

    lines: List[Dict[str, Any]] = []
    for hyperplane in candidates.hyperplanes:
        segment = _segment(hyperplane, x_index, y_index, x_max, y_max)
        if segment is None:
            logger.debug(f"{hyperplane.label} misses the plot box")
            continue
        (x1, y1), (x2, y2) = segment
        lines.append(
            {
                "kind": hyperplane.kind.value,
                "label": hyperplane.label,
                "x1": sx(x1),
                "y1": sy(y1),
                "x2": sx(x2),
                "y2": sy(y2),
            }
        )

    points = []
    for number, point in numbered_candidates(market, candidates):
        x, y = point.prices[x_index], point.prices[y_index]
        if x > x_max or y > y_max:
            continue
        points.append(
            {
                "number": number,
                "x": sx(x),
                "y": sy(y),
                "label_x": _coordinate(MARGIN + x / x_max * plot_width + 4),
                "label_y": _coordinate(HEIGHT - MARGIN - y / y_max * plot_height - 4),
                "title": f"{number}: ({format_exact(x)}, {format_exact(y)})",
            }
        )

    x_ticks = [
        {"position": sx(x_max * k / TICKS), "label": format_decimal(x_max * k / TICKS, 2)} for k in range(TICKS + 1)
    ]
    y_ticks = [
        {"position": sy(y_max * k / TICKS), "label": format_decimal(y_max * k / TICKS, 2)} for k in range(TICKS + 1)
    ]

    template = _environment().get_template(TEMPLATE_NAME)
    return template.render(
        title=title or f"Price space: {market.name}",
        width=WIDTH,
        height=HEIGHT,
        plot_width=plot_width,
        plot_height=plot_height,
        axis_x=MARGIN,
        axis_y=HEIGHT - MARGIN,
        lines=lines,
        points=points,
        x_ticks=x_ticks,
        y_ticks=y_ticks,
        x_title=f"price of {market.products[x_index].id}",
        y_title=f"price of {market.products[y_index].id}",
    )


def _segment(hyperplane: Hyperplane, x_index: int, y_index: int, x_max: Fraction, y_max: Fraction):
    a = hyperplane.coefficients[x_index]
    b = hyperplane.coefficients[y_index]
    return clip_line(a, b, hyperplane.constant, x_max, y_max)


def write_plot(svg: str, out: str) -> str:
    directory = os.path.dirname(os.path.abspath(out))
    os.makedirs(directory, exist_ok=True)
    with open(out, "w", encoding="utf-8") as file:
        file.write(svg)
    logger.info(f"Wrote price space diagram to {out}")
    return out
