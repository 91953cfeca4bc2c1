from typing import Any, Dict, List, Optional

from utils.rational import to_fraction

TRUE_LITERALS = {"1", "true", "yes", "y"}
FALSE_LITERALS = {"0", "false", "no", "n", ""}


class TableValidator:
    """Cell-level validation utilities for the instance tables"""

    @staticmethod
    def validate_required_columns(columns: List[str], required: List[str]) -> List[str]:
        """Validate that required columns are present

        Args:
            columns: The table's header
            required: List of required column names

        Returns:
            List of error messages or empty list if valid
        """
        return [f"Missing required column: {name}" for name in required if name not in columns]

    @staticmethod
    def validate_rational(value: str) -> bool:
        """Validate a decimal or fraction literal

        Args:
            value: The cell text

        Returns:
            Whether the value parses as an exact rational
        """
        try:
            to_fraction(value)
            return True
        except (ValueError, TypeError, ZeroDivisionError):
            return False

    @staticmethod
    def parse_flag(value: str) -> Optional[bool]:
        """Parse a boolean cell; None when it is not a recognised literal"""
        text = value.strip().lower()
        if text in TRUE_LITERALS:
            return True
        if text in FALSE_LITERALS:
            return False
        return None


class InstanceValidator:
    """Row validators for market instance tables.

    Rows are dicts of cell strings; `line` is the row's line in the file
    (header = line 1) and prefixes every message.
    """

    @staticmethod
    def validate_product_row(row: Dict[str, Any], line: int) -> List[str]:
        errors = []
        if not str(row.get("product_id", "")).strip():
            errors.append(f"row {line}: empty product_id")
        if TableValidator.parse_flag(str(row.get("taxed", ""))) is None:
            errors.append(f"row {line}: taxed must be true/false, got {row.get('taxed')!r}")
        for column in ("nr_claims", "nutr_val"):
            value = str(row.get(column, "")).strip()
            if value and not TableValidator.validate_rational(value):
                errors.append(f"row {line}: {column} is not a number: {value!r}")
        return errors

    @staticmethod
    def validate_consumer_row(row: Dict[str, Any], line: int) -> List[str]:
        """Validate one (consumer, product) coefficient row

        Args:
            row: The row's cells
            line: Line number in the file

        Returns:
            List of error messages or empty list if valid
        """
        errors = []
        for column in ("consumer_id", "product_id"):
            if not str(row.get(column, "")).strip():
                errors.append(f"row {line}: empty {column}")

        for column in ("beta", "sensitivity", "demand"):
            value = str(row.get(column, "")).strip()
            if not TableValidator.validate_rational(value):
                errors.append(f"row {line}: {column} is not a number: {value!r}")

        if TableValidator.validate_rational(str(row.get("sensitivity", ""))):
            if to_fraction(str(row["sensitivity"])) <= 0:
                errors.append(f"row {line}: sensitivity must be positive, got {row['sensitivity']}")
        if TableValidator.validate_rational(str(row.get("demand", ""))):
            if to_fraction(str(row["demand"])) < 0:
                errors.append(f"row {line}: demand must be nonnegative, got {row['demand']}")
        return errors
