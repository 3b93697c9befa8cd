import logging

from dataclasses import dataclass
from dataclasses import field
from dataclasses import fields
from typing import Optional

from config.config import ToleranceConfig
from core.check_suites import CheckSpec
from core.check_suites import all_check_names
from core.check_suites import boundary_checks
from core.check_suites import suite_checks
from core.exceptions import ScenarioError
from core.exceptions import ValidationError
from data.scenario_schema import SUITE_NAMES
from data.scenario_schema import ScenarioFile


logger = logging.getLogger(__name__)

COMMANDS = SUITE_NAMES + ("all",)
FORMS = ("phi", "eb", "faraday", "all")
DEFAULT_SUITES = ("identities", "sem", "balance", "maxwell", "junction")


@dataclass
class CheckPlan:
    """Ordered checks of one run with their resolved tolerances.

    Args:
        scenario: Validated scenario.
        command: Command that produced the plan.
        checks: Checks ordered by name.
        tolerances: Tolerance per check name.
        tolerance_config: Table the ratio band and zero floor come from.
    """

    scenario: ScenarioFile
    command: str
    checks: list[CheckSpec] = field(default_factory = list)
    tolerances: dict[str, float] = field(default_factory = dict)
    tolerance_config: ToleranceConfig = field(default_factory = ToleranceConfig)

    @property
    def names(self) -> list[str]:
        return [spec.name for spec in self.checks]


class CheckPlanner:
    """Turn a command and its flags into a check plan for one scenario."""

    def __init__(self, scenario: ScenarioFile, tolerance_config: Optional[ToleranceConfig] = None) -> None:
        self.scenario = scenario
        self.tolerance_config = tolerance_config or ToleranceConfig()

    def build_plan(
        self,
        command: str,
        form: str = "all",
        include_boundary: bool = False,
        overrides: Optional[dict[str, float]] = None
    ) -> CheckPlan:
        """Select, filter and order the checks for one command.

        Args:
            self: CheckPlanner instance.
            command: One of ``COMMANDS``.
            form: Stress-energy form filter, one of ``FORMS``.
            include_boundary: Add boundary-face checks to the balance suite.
            overrides: CLI tolerance overrides keyed by class or check name.
        """

        if command not in COMMANDS:
            raise ValidationError(f"unknown command: {command}")
        if form not in FORMS:
            raise ValidationError(f"unknown form: {form}")

        suites = self._suites(command = command)
        checks: list[CheckSpec] = []
        for suite in suites:
            checks.extend(suite_checks(suite))
            if suite == "balance" and include_boundary:
                checks.extend(boundary_checks(self.scenario))

        selected = []
        for spec in checks:
            if not spec.applies_to(self.scenario):
                logger.debug("Skipping %s: not applicable to %s", spec.name, self.scenario.name)
                continue
            if form != "all" and spec.forms and form not in spec.forms:
                continue
            selected.append(spec)
        selected.sort(key = lambda spec: spec.name)

        tolerance_config, tolerances = self._resolve_tolerances(
            checks = selected,
            overrides = dict(overrides or {})
        )
        logger.info(
            "Planned %d checks for %s (command = %s, form = %s)",
            len(selected),
            self.scenario.name,
            command,
            form
        )
        return CheckPlan(
            scenario = self.scenario,
            command = command,
            checks = selected,
            tolerances = tolerances,
            tolerance_config = tolerance_config
        )

    def _suites(self, command: str) -> list[str]:
        has_interface = self.scenario.interface is not None and self.scenario.exterior is not None
        if command != "all":
            if command == "junction" and not has_interface:
                raise ScenarioError("interface", "junction checks need an interface and an exterior region")
            return [command]
        if self.scenario.checks:
            requested = list(dict.fromkeys(self.scenario.checks))
            if "junction" in requested and not has_interface:
                raise ScenarioError("checks", "junction checks need an interface and an exterior region")
            return requested
        return [suite for suite in DEFAULT_SUITES if suite != "junction" or has_interface]

    def _resolve_tolerances(
        self,
        checks: list[CheckSpec],
        overrides: dict[str, float]
    ) -> tuple[ToleranceConfig, dict[str, float]]:
        """Layer scenario then CLI tolerances over the default table.

        Each layer may name a tolerance field (``exact``, ``ratio_band``, ...)
        or a single check.

        Args:
            self: CheckPlanner instance.
            checks: Planned checks.
            overrides: CLI overrides.
        """

        class_names = {item.name for item in fields(ToleranceConfig)}
        known = all_check_names(self.scenario) | class_names
        layers = [("scenario", dict(self.scenario.tolerances)), ("--tol", overrides)]
        for source, layer in layers:
            unknown = sorted(set(layer) - known)
            if unknown:
                raise ValidationError(f"{source}: unknown tolerance names: {', '.join(unknown)}")
            for name, value in layer.items():
                if not value > 0.0:
                    raise ValidationError(f"{source}: tolerance {name} must be positive, got {value}")

        config = self.tolerance_config
        tolerances = {spec.name: config.for_class(spec.tolerance_class) for spec in checks}
        for _, layer in layers:
            class_layer = {name: value for name, value in layer.items() if name in class_names}
            config = config.with_overrides(class_layer)
            for spec in checks:
                if spec.tolerance_class in class_layer:
                    tolerances[spec.name] = class_layer[spec.tolerance_class]
                if spec.name in layer:
                    tolerances[spec.name] = layer[spec.name]
        return config, tolerances


def parse_tolerance_overrides(items: Optional[list[str]]) -> dict[str, float]:
    """Parse repeated ``name=value`` CLI arguments.

    Args:
        items: Raw argument strings.
    """

    overrides: dict[str, float] = {}
    for item in items or []:
        name, separator, raw = item.partition("=")
        name = name.strip()
        if not separator or not name:
            raise ValidationError(f"--tol expects name=value, got {item!r}")
        try:
            overrides[name] = float(raw)
        except ValueError as exc:
            raise ValidationError(f"--tol {name}: {raw!r} is not a number") from exc
    return overrides
