import logging
import os
from fractions import Fraction
from typing import Any, Dict, List, Optional, Tuple

import pandas as pd
import yaml

from models.market_model import Consumer, LinearUtility, Market, Product, TieRule, effective_intercept
from utils.rational import format_exact, to_fraction
from utils.validators import InstanceValidator, TableValidator

logger = logging.getLogger(__name__)

MANIFEST_NAME = "instance.yaml"
PRODUCT_COLUMNS = ["product_id", "taxed"]
CONSUMER_COLUMNS = ["consumer_id", "product_id", "beta", "sensitivity", "demand"]
GLOBAL_KEYS = ("beta1", "beta2", "nr_claims", "nutr_val")


class InstanceError(ValueError):
    """An instance that cannot be turned into a market; one message per problem."""

    def __init__(self, errors: List[str], source: str = ""):
        self.errors = list(errors)
        self.source = source
        prefix = f"{source}: " if source else ""
        super().__init__(prefix + "; ".join(self.errors))


def load_table(path: str) -> pd.DataFrame:
    """Read a delimited table with every cell kept as its literal text."""
    return pd.read_csv(path, dtype=str, keep_default_na=False, skipinitialspace=True)


def _manifest_path(path: str) -> str:
    if os.path.isdir(path):
        return os.path.join(path, MANIFEST_NAME)
    return path


def _read_manifest(path: str) -> Dict[str, Any]:
    try:
        with open(path, "r") as file:
            manifest = yaml.safe_load(file) or {}
    except FileNotFoundError:
        raise InstanceError([f"instance manifest not found: {path}"])
    except yaml.YAMLError as e:
        raise InstanceError([f"manifest is not valid YAML: {str(e)}"], path)
    if not isinstance(manifest, dict):
        raise InstanceError(["manifest must be a mapping"], path)
    return manifest


def _read_table(base_dir: str, name: str, required: List[str]) -> Tuple[pd.DataFrame, str]:
    path = os.path.join(base_dir, name)
    if not os.path.exists(path):
        raise InstanceError([f"table not found: {path}"])
    frame = load_table(path)
    frame.columns = [c.strip() for c in frame.columns]
    errors = TableValidator.validate_required_columns(list(frame.columns), required)
    if errors:
        raise InstanceError(errors, path)
    return frame, path


def _parse_products(frame: pd.DataFrame, defaults: Dict[str, Fraction]) -> Tuple[List[Product], List[Fraction], List[str]]:
    """Products in file order plus the claims/nutrition term of each."""
    products: List[Product] = []
    extras: List[Fraction] = []
    errors: List[str] = []
    seen: Dict[str, int] = {}

    for offset, row in enumerate(frame.to_dict("records")):
        line = offset + 2
        row_errors = InstanceValidator.validate_product_row(row, line)
        product_id = row["product_id"].strip()
        if product_id in seen:
            row_errors.append(f"row {line}: duplicate product {product_id!r} (first on row {seen[product_id]})")
        if row_errors:
            errors.extend(row_errors)
            continue
        seen[product_id] = line

        claims = row.get("nr_claims", "").strip() or defaults["nr_claims"]
        nutrition = row.get("nutr_val", "").strip() or defaults["nutr_val"]
        # Intercept shift shared by every consumer of this product
        extras.append(effective_intercept(0, defaults["beta1"], defaults["beta2"], claims, nutrition))
        products.append(
            Product(id=product_id, index=len(products), taxed=bool(TableValidator.parse_flag(row["taxed"])))
        )
    return products, extras, errors


def _parse_consumers(
    frame: pd.DataFrame, products: List[Product], extras: List[Fraction]
) -> Tuple[List[Consumer], List[str]]:
    index_of = {p.id: p.index for p in products}
    errors: List[str] = []
    rows: Dict[str, Dict[int, Tuple[int, Dict[str, str]]]] = {}

    for offset, row in enumerate(frame.to_dict("records")):
        line = offset + 2
        row_errors = InstanceValidator.validate_consumer_row(row, line)
        consumer_id = row["consumer_id"].strip()
        product_id = row["product_id"].strip()
        if product_id and product_id not in index_of:
            row_errors.append(f"row {line}: unknown product {product_id!r}")
        if not row_errors:
            j = index_of[product_id]
            previous = rows.get(consumer_id, {}).get(j)
            if previous is not None:
                row_errors.append(
                    f"row {line}: duplicate pair ({consumer_id}, {product_id}), first on row {previous[0]}"
                )
        if row_errors:
            errors.extend(row_errors)
            continue
        rows.setdefault(consumer_id, {})[index_of[product_id]] = (line, row)

    consumers: List[Consumer] = []
    for consumer_id, by_product in rows.items():
        missing = [p.id for p in products if p.index not in by_product]
        if missing:
            errors.append(f"consumer {consumer_id!r} has no row for products {missing}")
            continue
        utilities = []
        demands = []
        for product in products:
            _, row = by_product[product.index]
            utilities.append(
                LinearUtility(
                    intercept=to_fraction(row["beta"]) + extras[product.index],
                    sensitivity=row["sensitivity"],
                )
            )
            demands.append(row["demand"])
        consumers.append(Consumer(id=consumer_id, utilities=tuple(utilities), demands=tuple(demands)))
    return consumers, errors


def load_instance(path: str, tie_rule: Optional[TieRule] = None) -> Market:
    """Load a market from an instance manifest and its two tables.

    Args:
        path: The manifest file, or a directory holding instance.yaml
        tie_rule: Overrides the manifest's tie rule when given

    Returns:
        The market, with claims/nutrition folded into the intercepts

    Raises:
        InstanceError: With one row-numbered message per problem found
    """
    manifest_path = _manifest_path(path)
    manifest = _read_manifest(manifest_path)
    base_dir = os.path.dirname(os.path.abspath(manifest_path))

    globals_ = manifest.get("globals") or {}
    try:
        defaults = {key: to_fraction(str(globals_.get(key, 0))) for key in GLOBAL_KEYS}
    except (ValueError, TypeError, ZeroDivisionError) as e:
        raise InstanceError([f"invalid globals: {str(e)}"], manifest_path)

    product_frame, product_path = _read_table(base_dir, manifest.get("products", "products.csv"), PRODUCT_COLUMNS)
    products, extras, errors = _parse_products(product_frame, defaults)
    if errors:
        raise InstanceError(errors, product_path)
    if not products:
        raise InstanceError(["at least one product is required"], product_path)

    consumer_frame, consumer_path = _read_table(
        base_dir, manifest.get("consumers", "consumers.csv"), CONSUMER_COLUMNS
    )
    consumers, errors = _parse_consumers(consumer_frame, products, extras)
    if errors:
        raise InstanceError(errors, consumer_path)

    try:
        rule = TieRule(tie_rule or manifest.get("tie_rule", TieRule.REVENUE.value))
    except ValueError:
        raise InstanceError([f"unknown tie_rule {manifest.get('tie_rule')!r}"], manifest_path)

    market = Market(
        products=tuple(products),
        consumers=tuple(consumers),
        tie_rule=rule,
        name=str(manifest.get("name", os.path.basename(base_dir))),
    )
    logger.info(f"Loaded instance {market.name}: {market.n} consumers, {market.m} products ({rule.value} ties)")
    return market


def dump_instance(market: Market, directory: str) -> str:
    """Write a market as manifest plus tables with exact fraction literals.

    Intercepts are written already folded, so the globals are zero.

    Returns:
        Path of the written manifest
    """
    os.makedirs(directory, exist_ok=True)
    products = pd.DataFrame(
        [{"product_id": p.id, "taxed": "true" if p.taxed else "false"} for p in market.products],
        columns=PRODUCT_COLUMNS,
    )
    consumers = pd.DataFrame(
        [
            {
                "consumer_id": c.id,
                "product_id": market.products[j].id,
                "beta": format_exact(u.intercept),
                "sensitivity": format_exact(u.sensitivity),
                "demand": format_exact(c.demands[j]),
            }
            for c in market.consumers
            for j, u in enumerate(c.utilities)
        ],
        columns=CONSUMER_COLUMNS,
    )
    products.to_csv(os.path.join(directory, "products.csv"), index=False, lineterminator="\n")
    consumers.to_csv(os.path.join(directory, "consumers.csv"), index=False, lineterminator="\n")

    manifest = {
        "name": market.name,
        "products": "products.csv",
        "consumers": "consumers.csv",
        "tie_rule": market.tie_rule.value,
        "globals": {key: 0 for key in GLOBAL_KEYS},
    }
    manifest_path = os.path.join(directory, MANIFEST_NAME)
    with open(manifest_path, "w") as file:
        yaml.safe_dump(manifest, file, sort_keys=False)
    logger.debug(f"Wrote instance {market.name} to {directory}")
    return manifest_path
