import argparse
import logging
import sys
from typing import List, Optional

from pydantic import ValidationError

from cli.commands import COMMANDS, EXIT_INVALID_INPUT
from cli.loader import InstanceError
from config.config import config
from models.market_model import TieRule
from solver.welfare import WelfareMode
from utils.logger import setup_logger

logger = logging.getLogger(__name__)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sugartax",
        description="Welfare-maximizing sugar tax rate by exact enumeration of firm pricing strategies",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    helps = {
        "solve": "Optimal tax rate, prices, staircase and welfare",
        "candidates": "All candidate price points with choices and revenue",
        "welfare-curve": "Welfare under both accounting modes across tax rates",
        "plot": "SVG diagram of the price space (two products only)",
        "verify": "Check the enumerated solution against a brute-force grid",
    }
    for name, help_text in helps.items():
        command = sub.add_parser(name, help=help_text)
        command.add_argument("--instance", required=True, help="Instance manifest or directory")
        command.add_argument(
            "--welfare-mode", choices=[m.value for m in WelfareMode], default=None, help="Welfare accounting"
        )
        command.add_argument("--oracle", action="store_true", default=None, help="Also run the grid oracle")
        command.add_argument("--grid-step", default=None, help="Oracle price step, e.g. 0.01 or 1/100")
        command.add_argument("--alpha-step", default=None, help="Oracle tax-rate step, e.g. 0.05")
        command.add_argument("--out", default=None, help="Report path; stdout when omitted")
        command.add_argument("--precision", type=int, default=None, help="Decimals in reports")
        command.add_argument(
            "--tie-rule", choices=[r.value for r in TieRule], default=None, help="Override the instance tie rule"
        )
        command.add_argument("--workers", type=int, default=None, help="joblib workers")
        command.add_argument("--samples", type=int, default=None, help="Evenly spaced rates in welfare-curve")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    setup_logger(
        level=config.get_setting("log_level"),
        json_format=str(config.get_setting("log_format", "text")).lower() == "json",
        log_dir=config.get_log_dir(),
    )

    try:
        settings = config.run_config(
            welfare_mode=args.welfare_mode,
            oracle=args.oracle,
            grid_step=args.grid_step,
            alpha_step=args.alpha_step,
            out=args.out,
            precision=args.precision,
            tie_rule=args.tie_rule,
            workers=args.workers,
            samples=args.samples,
        )
        return COMMANDS[args.command](args.instance, settings)
    except InstanceError as e:
        for error in e.errors:
            logger.error(f"{e.source}: {error}" if e.source else error)
        return EXIT_INVALID_INPUT
    except (ValidationError, ValueError) as e:
        logger.error(f"Invalid input: {str(e)}")
        return EXIT_INVALID_INPUT


if __name__ == "__main__":
    sys.exit(main())
