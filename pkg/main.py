import os
import sys
import logging
import argparse
from typing import Optional


sys.path.append(os.getcwd())

from config.config import AppConfig
from config.config import ToleranceConfig
from core.check_planner import COMMANDS
from core.check_planner import FORMS
from core.check_planner import CheckPlanner
from core.check_planner import parse_tolerance_overrides
from core.exceptions import AppError
from core.exceptions import ValidationError
from core.orchestrator import CheckOrchestrator
from data.scenario_loader import load_scenario
from utils.logging_setup import configure_runtime_logging
from utils.logging_setup import configure_stream_logging
from utils.logging_setup import tag_scenario
from utils.report_writer import save_report
from utils.report_writer import write_profiles
from utils.report_writer import write_report


logger = logging.getLogger(__name__)

EXIT_PASSED = 0
EXIT_FAILED = 1
EXIT_INPUT_ERROR = 2
EXIT_INTERRUPTED = 130


def parse_args(argv: Optional[list[str]] = None) -> argparse.Namespace:
    """Parse CLI arguments for the relcont command.

    Args:
        argv: Argument list; ``sys.argv[1:]`` when None.
    """

    parser = argparse.ArgumentParser(
        prog = "relcont",
        description = "Verify relativistic continuum identities, balance laws and junction conditions on a scenario"
    )
    parser.add_argument("command", choices = list(COMMANDS), help = "Check suite to run, or all")
    parser.add_argument("--scenario", required = True, help = "Scenario YAML file")
    parser.add_argument(
        "--refine",
        type = int,
        default = 1,
        help = "Number of grid halvings for convergence checks (0 runs the base grid only)"
    )
    parser.add_argument(
        "--tol",
        action = "append",
        default = [],
        metavar = "NAME=VALUE",
        help = "Override a tolerance class (exact, assembly, oracle, zero_floor, ratio_target, ratio_band) or one check"
    )
    parser.add_argument("--plot", default = "", metavar = "DIR", help = "Write per-check residual profiles as CSV")
    parser.add_argument(
        "--include-boundary",
        action = "store_true",
        help = "Add free-boundary face checks to the balance suite"
    )
    parser.add_argument(
        "--form",
        choices = list(FORMS),
        default = "all",
        help = "Stress-energy forms compared by the sem suite"
    )
    parser.add_argument("--output", default = "", help = "Also write the report to this file")
    args = parser.parse_args(argv)
    if args.refine < 0:
        parser.error("--refine must be >= 0")
    return args


def setup_logging(config: AppConfig) -> str:
    """Install run logging, falling back to stderr only.

    Args:
        config: Runtime configuration.
    """

    try:
        return configure_runtime_logging(
            log_dir = config.log_dir,
            max_files = config.max_log_files,
            level = config.logging_level
        )
    except OSError as exc:
        configure_stream_logging(level = config.logging_level)
        logger.warning("log directory %s unusable (%s), logging to stderr only", config.log_dir, exc)
        return ""


def run(args: argparse.Namespace, config: AppConfig) -> int:
    """Load the scenario, run the plan and emit the report.

    Args:
        args: Parsed CLI arguments.
        config: Runtime configuration.
    """

    scenario = load_scenario(args.scenario)
    tag_scenario(scenario.name)
    overrides = parse_tolerance_overrides(args.tol)
    planner = CheckPlanner(scenario = scenario, tolerance_config = ToleranceConfig())
    plan = planner.build_plan(
        command = args.command,
        form = args.form,
        include_boundary = args.include_boundary,
        overrides = overrides
    )
    if not plan.checks:
        raise ValidationError(f"command {args.command} selects no checks for scenario {scenario.name}")

    orchestrator = CheckOrchestrator(
        plan = plan,
        config = config,
        refine = args.refine,
        collect_profiles = bool(args.plot)
    )
    report = orchestrator.run()
    write_report(report = report, stream = sys.stdout)
    if args.output:
        save_report(report = report, path = args.output)
    if args.plot:
        write_profiles(report = report, output_dir = args.plot)
    return EXIT_PASSED if report.passed else EXIT_FAILED


def main(argv: Optional[list[str]] = None) -> int:
    """CLI entry.

    Args:
        argv: Argument list; ``sys.argv[1:]`` when None.
    """

    args = parse_args(argv)
    try:
        config = AppConfig.from_env()
    except AppError as exc:
        configure_stream_logging()
        logger.error("invalid configuration: %s", exc)
        return EXIT_INPUT_ERROR
    setup_logging(config = config)

    try:
        return run(args = args, config = config)
    except AppError as exc:
        logger.error("%s: %s", type(exc).__name__, exc)
        return EXIT_INPUT_ERROR


if __name__ == "__main__":
    try:
        exit_code = main()
    except KeyboardInterrupt:
        logger.warning("Interrupted by user")
        exit_code = EXIT_INTERRUPTED
    except Exception as exc:
        logger.exception("Fatal error: %s", str(exc))
        exit_code = EXIT_INPUT_ERROR
    sys.exit(exit_code)
