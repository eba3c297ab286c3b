"""Main entry point for the cptgen command line tool."""

import argparse
import sys
from typing import NoReturn

import structlog
from pydantic import ValidationError as PydanticValidationError

from cptgen.cli.commands import REQUESTED_RIDGE, RunConfig, run
from cptgen.core.config import load_app_config
from cptgen.core.errors import CptError
from cptgen.core.logging import configure_logging

logger = structlog.get_logger("cptgen")

USAGE_EXIT_CODE = 1


class CliParser(argparse.ArgumentParser):
    """Argument parser whose usage errors share the input failure exit code."""

    def error(self, message: str) -> NoReturn:
        self.print_usage(sys.stderr)
        self.exit(USAGE_EXIT_CODE, f"{self.prog}: error: {message}\n")


def ridge_value(text: str) -> float | str:
    """``--ridge`` value: a non-negative float, or the bare-flag marker."""
    if text == REQUESTED_RIDGE:
        return text
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid ridge value: {text!r}") from None


def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML file overriding the default settings")
    common.add_argument("--schema", dest="schema_file", help="YAML schema for observation files")
    common.add_argument("--tolerance", type=float, help="Probability sum tolerance (default: 1e-6)")
    common.add_argument("--metrics-file", help="Write Prometheus metrics to this file on exit")
    common.add_argument(
        "--log-level",
        choices=["debug", "info", "warning", "error"],
        help="Diagnostics level on standard error (default: warning)",
    )
    common.add_argument("--json-logs", action="store_true", help="Emit diagnostics as JSON lines")
    return common


def build_parser() -> argparse.ArgumentParser:
    """Argument parser with one sub-command per workflow."""
    parser = CliParser(
        prog="cptgen",
        description="Generate, evaluate and compare conditional probability tables of converging Bayesian networks",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  cptgen generate --method regress-surge --train obs.csv --out cpt.csv
  cptgen evaluate --cpt cpt.csv --test test.csv --out report.txt --plot-data
  cptgen compare --cpt a.csv --cpt-b b.csv
  cptgen infer --cpt cpt.csv --evidence E=e3 --evidence R=0.2,0.3,0.5
  cptgen dedup --train obs.csv --out distinct.csv

Exit codes: 0 success, 1 input or validation failure, 2 numerical failure.
        """,
    )
    common = _common_options()
    sub = parser.add_subparsers(dest="command", required=True)

    generate = sub.add_parser("generate", parents=[common], help="Generate a CPT from observations")
    generate.add_argument(
        "--method",
        required=True,
        choices=["mle", "em", "regress-limit", "regress-surge", "logit"],
    )
    generate.add_argument("--train", required=True, help="Training observation CSV")
    generate.add_argument("--out", required=True, help="CPT file to write")
    generate.add_argument("--distinct", action="store_true", help="Drop exact duplicate rows first")
    generate.add_argument("--rounding", action="store_true", help="Round soft rows before MLE counting")
    generate.add_argument("--epsilon", type=float, help="EM log-likelihood threshold (default: 1e-6)")
    generate.add_argument("--max-iter", type=int, help="EM iterations or Newton steps")
    generate.add_argument(
        "--ridge",
        type=ridge_value,
        nargs="?",
        const=REQUESTED_RIDGE,
        help="Ridge on X'X; without a value the configured default 1e-8 is used",
    )
    generate.add_argument("--reg", type=float, help="Logit slope penalty (default: 1e-8)")
    generate.add_argument("--seed", type=int, help="Seed for random EM starts")
    generate.add_argument("--restarts", type=int, help="EM starts; the best log-likelihood wins")

    evaluate = sub.add_parser("evaluate", parents=[common], help="Score a CPT on test observations")
    evaluate.add_argument("--cpt", required=True)
    evaluate.add_argument("--test", required=True)
    evaluate.add_argument("--cpt-b", help="Reference CPT whose predictions are taken as correct")
    evaluate.add_argument("--out", help="Report file to write")
    evaluate.add_argument("--plot-data", action="store_true", help="Also write per-observation CSVs")

    compare = sub.add_parser("compare", parents=[common], help="Distances between two CPTs")
    compare.add_argument("--cpt", required=True)
    compare.add_argument("--cpt-b", required=True)
    compare.add_argument("--weights", help="Cause weight vector for KL and Euclidean (default: uniform)")

    infer = sub.add_parser("infer", parents=[common], help="Effect probabilities from parent evidence")
    infer.add_argument("--cpt", required=True)
    infer.add_argument(
        "--evidence",
        action="append",
        default=[],
        help="NODE=state (hard) or NODE=p1,p2,... (soft); once per parent",
    )
    infer.add_argument("--diagnose", help="EFFECT=p1,p2,...: print parent posteriors instead")
    infer.add_argument("--impute-uniform", action="store_true", help="Uniform column for zero effect marginals")

    dedup = sub.add_parser("dedup", parents=[common], help="Remove exact duplicate observation rows")
    dedup.add_argument("--train", required=True)
    dedup.add_argument("--out", required=True)

    return parser


def main(argv: list[str] | None = None) -> int:
    """Run one cptgen command and return its exit code."""
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else USAGE_EXIT_CODE
    options = {k: v for k, v in vars(args).items() if v is not None}

    try:
        config = RunConfig.model_validate(options)
        app = config.settings_with_overrides(load_app_config(config.config))
    except PydanticValidationError as e:
        print(f"cptgen: error: {e.errors()[0]['msg']}", file=sys.stderr)
        return 1
    except CptError as e:
        print(f"cptgen: error: {e}", file=sys.stderr)
        return e.exit_code

    configure_logging(app.logging.level, app.logging.json_output)

    try:
        return run(config, app)
    except CptError as e:
        logger.debug("Command failed", command=config.command, error_type=type(e).__name__, exc_info=True)
        print(f"cptgen: error: {e}", file=sys.stderr)
        return e.exit_code


if __name__ == "__main__":
    sys.exit(main())
