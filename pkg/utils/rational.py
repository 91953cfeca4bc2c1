from decimal import Decimal, ROUND_HALF_UP, localcontext
from fractions import Fraction
from typing import Any, List, Optional, Sequence, Tuple


def to_fraction(value: Any) -> Fraction:
    """Convert a number or numeric string into an exact Fraction.

    Decimal literals keep their written value ("0.94" -> 47/50); floats go
    through their shortest repr for the same reason.

    Args:
        value: int, Fraction, Decimal, float or string ("0.94", "93/17", "1e-2")

    Returns:
        The exact rational value
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("Booleans are not rational values")
    if isinstance(value, (int, Decimal)):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(repr(value))
    if isinstance(value, str):
        text = value.strip()
        if not text:
            raise ValueError("Empty rational literal")
        return Fraction(text)
    raise TypeError(f"Cannot interpret {value!r} as a rational number")


def format_exact(value: Fraction) -> str:
    """Render a Fraction losslessly: "5", "-3/4", "93/17"."""
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def round_fraction(value: Fraction, precision: int) -> Fraction:
    """Round half-up to `precision` decimals, staying exact."""
    scale = 10 ** precision
    scaled = abs(value) * scale
    whole, rest = divmod(scaled.numerator, scaled.denominator)
    if 2 * rest >= scaled.denominator:
        whole += 1
    rounded = Fraction(whole, scale)
    return -rounded if value < 0 else rounded


def format_decimal(value: Fraction, precision: int = 2) -> str:
    """Render a Fraction with a fixed number of decimals (half-up)."""
    with localcontext() as ctx:
        ctx.prec = 60
        ctx.rounding = ROUND_HALF_UP
        exact = Decimal(value.numerator) / Decimal(value.denominator)
        return str(exact.quantize(Decimal(1).scaleb(-precision)))


def solve_linear_system(
    matrix: Sequence[Sequence[Fraction]], rhs: Sequence[Fraction]
) -> Optional[Tuple[Fraction, ...]]:
    """Solve a square system exactly by Gaussian elimination.

    Args:
        matrix: k rows of k rational coefficients
        rhs: k rational right-hand sides

    Returns:
        The unique solution, or None when the system is singular
    """
    size = len(matrix)
    rows: List[List[Fraction]] = [list(row) + [rhs[i]] for i, row in enumerate(matrix)]

    for col in range(size):
        pivot = next((r for r in range(col, size) if rows[r][col] != 0), None)
        if pivot is None:
            return None
        if pivot != col:
            rows[col], rows[pivot] = rows[pivot], rows[col]
        lead = rows[col][col]
        for r in range(col + 1, size):
            factor = rows[r][col]
            if factor == 0:
                continue
            ratio = factor / lead
            for c in range(col, size + 1):
                rows[r][c] -= rows[col][c] * ratio

    solution = [Fraction(0)] * size
    for r in range(size - 1, -1, -1):
        acc = rows[r][size]
        for c in range(r + 1, size):
            acc -= rows[r][c] * solution[c]
        solution[r] = acc / rows[r][r]
    return tuple(solution)
