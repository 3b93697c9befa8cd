import sys
import math
import logging
import datetime
from typing import Optional
from concurrent.futures import as_completed
from concurrent.futures import ThreadPoolExecutor

from tqdm import tqdm

from config.config import AppConfig
from core.bootstrap import ScenarioContext
from core.bootstrap import build_context
from core.check_planner import CheckPlan
from core.check_suites import CheckOutcome
from core.check_suites import CheckSpec
from data.models import CheckRecord
from data.models import RefinementLevel
from data.models import RunReport


logger = logging.getLogger(__name__)


class CheckOrchestrator:
    """Run a check plan on the base grid and its refinements."""

    def __init__(
        self,
        plan: CheckPlan,
        config: Optional[AppConfig] = None,
        refine: int = 1,
        collect_profiles: bool = False
    ) -> None:
        self.plan = plan
        self.config = config or AppConfig()
        self.refine = max(0, int(refine))
        self.collect_profiles = collect_profiles

    def run(self) -> RunReport:
        """Evaluate every planned check and assemble the report.

        Exact and diagnostic checks run on level 0 only; convergence checks
        run on levels 0..refine. Records are ordered by check name whatever
        order the workers finish in.

        Args:
            self: CheckOrchestrator instance.
        """

        scenario = self.plan.scenario
        levels: dict[str, list[RefinementLevel]] = {spec.name: [] for spec in self.plan.checks}
        errors: dict[str, str] = {}
        profiles: dict[str, dict[int, tuple]] = {}

        logger.info("=" * 80)
        logger.info(
            "Run started: scenario = %s, command = %s, checks = %d, refine = %d, threads = %d",
            scenario.name,
            self.plan.command,
            len(self.plan.checks),
            self.refine,
            self.config.threads
        )
        logger.info("=" * 80)

        progress = tqdm(
            range(self.refine + 1),
            desc = "refinement",
            unit = "level",
            file = sys.stderr,
            disable = None
        )
        for level in progress:
            pending = [
                spec for spec in self.plan.checks
                if spec.name not in errors and (level == 0 or spec.mode == "convergence")
            ]
            if not pending:
                continue
            context = build_context(scenario = scenario, level = level, seed = self.config.seed)
            progress.set_postfix(grid = "x".join(str(count) for count in context.interior.grid.resolution))
            for name, outcome in self._run_level(context = context, checks = pending):
                if isinstance(outcome, str):
                    errors[name] = outcome
                    continue
                norms = outcome.norms(stride = context.stride)
                resolution = outcome.grid.resolution if outcome.grid is not None else context.interior.grid.resolution
                levels[name].append(
                    RefinementLevel(
                        level = level,
                        resolution = list(resolution),
                        linf = norms.linf,
                        l2 = norms.l2,
                        worst_point = list(norms.worst_point) if norms.worst_point is not None else None
                    )
                )
                logger.debug(
                    "level %d %s: linf = %.3e, l2 = %.3e",
                    level,
                    name,
                    norms.linf,
                    norms.l2
                )
                if self.collect_profiles:
                    profiles.setdefault(name, {})[level] = outcome.profile()
        progress.close()

        records = [
            self._record(spec = spec, levels = levels[spec.name], error = errors.get(spec.name, ""))
            for spec in self.plan.checks
        ]
        records.sort(key = lambda record: record.name)
        report = RunReport(
            scenario = scenario.name,
            command = self.plan.command,
            refine = self.refine,
            records = records,
            created_at = datetime.datetime.now(datetime.timezone.utc).isoformat(timespec = "seconds"),
            profiles = profiles
        )
        logger.info(
            "Run finished: scenario = %s, passed = %d, failed = %d",
            scenario.name,
            len(records) - report.failed,
            report.failed
        )
        return report

    def _run_level(self, context: ScenarioContext, checks: list[CheckSpec]) -> list[tuple]:
        """Evaluate checks concurrently on one level.

        Args:
            self: CheckOrchestrator instance.
            context: Level context shared by the workers.
            checks: Checks to evaluate.
        """

        results: list[tuple] = []
        workers = max(1, min(self.config.threads, len(checks)))
        with ThreadPoolExecutor(max_workers = workers) as executor:
            future_map = {
                executor.submit(self._evaluate, spec, context): spec
                for spec in checks
            }
            for future in as_completed(future_map):
                spec = future_map[future]
                results.append((spec.name, future.result()))
        results.sort(key = lambda item: item[0])
        return results

    def _evaluate(self, spec: CheckSpec, context: ScenarioContext):
        logger.info("check start: %s (level %d)", spec.name, context.level)
        try:
            outcome = spec.evaluate(context)
        except Exception as exc:
            logger.exception("check raised: %s (level %d)", spec.name, context.level)
            return f"{type(exc).__name__}: {exc}"
        if not isinstance(outcome, CheckOutcome):
            return f"check returned {type(outcome).__name__}, expected CheckOutcome"
        logger.info("check finish: %s (level %d)", spec.name, context.level)
        return outcome

    def _record(self, spec: CheckSpec, levels: list[RefinementLevel], error: str) -> CheckRecord:
        """Judge one check from its per-level norms.

        Args:
            self: CheckOrchestrator instance.
            spec: Check.
            levels: Norms on each level that ran, coarse first.
            error: Exception text when the check raised.
        """

        tolerance = self.plan.tolerances.get(spec.name, 0.0)
        final = levels[-1] if levels else None
        record = CheckRecord(
            name = spec.name,
            suite = spec.suite,
            anchor = spec.anchor,
            mode = spec.mode,
            tolerance = tolerance,
            linf = final.linf if final is not None else math.inf,
            l2 = final.l2 if final is not None else math.inf,
            grids = [list(item.resolution) for item in levels],
            levels = list(levels),
            message = error
        )
        if error or final is None:
            record.passed = False
            record.message = error or "no level was evaluated"
        elif spec.mode == "diagnostic":
            record.passed = True
        elif spec.mode == "exact":
            record.passed = final.linf <= tolerance
        else:
            record.ratio = self._ratio(levels)
            record.passed = self._converged(final = final, ratio = record.ratio, tolerance = tolerance)

        if not record.passed:
            if final is not None:
                record.worst_point = final.worst_point
            logger.warning(
                "check failed: %s (mode = %s, linf = %.3e, tolerance = %.1e, ratio = %s) %s",
                spec.name,
                spec.mode,
                record.linf,
                tolerance,
                "n/a" if record.ratio is None else f"{record.ratio:.3f}",
                record.message
            )
        return record

    @staticmethod
    def _ratio(levels: list[RefinementLevel]) -> Optional[float]:
        if len(levels) < 2:
            return None
        previous, final = levels[-2].linf, levels[-1].linf
        if not (math.isfinite(previous) and math.isfinite(final)):
            return None
        if final == 0.0:
            return math.inf if previous > 0.0 else None
        return previous / final

    def _converged(self, final: RefinementLevel, ratio: Optional[float], tolerance: float) -> bool:
        """Convergence verdict.

        A residual at or below ``tolerance`` passes outright. Otherwise two
        levels are needed and the ratio must fall in the accepted band.

        Args:
            self: CheckOrchestrator instance.
            final: Norms on the finest level.
            ratio: Coarse-to-fine error ratio.
            tolerance: Zero floor of the check.
        """

        if not math.isfinite(final.linf):
            return False
        if final.linf <= tolerance:
            return True
        if ratio is None:
            return False
        config = self.plan.tolerance_config
        return abs(ratio - config.ratio_target) <= config.ratio_band * config.ratio_target
