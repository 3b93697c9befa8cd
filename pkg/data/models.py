import dataclasses

from dataclasses import dataclass
from dataclasses import field
from typing import List
from typing import Optional


@dataclass
class RefinementLevel:
    """Norms of one check on one refinement level.

    Args:
        level: Refinement level, 0 for the scenario's base grid.
        resolution: Grid resolution used on this level.
        linf: Maximum pointwise residual magnitude.
        l2: Grid-weighted L2 norm of the residual.
        worst_point: Grid index of the maximum on this level's grid.
    """

    level: int
    resolution: List[int]
    linf: float
    l2: float
    worst_point: Optional[List[int]] = None


@dataclass
class CheckRecord:
    """Outcome of one named check.

    Args:
        name: Check name, ``<suite>.<check>``.
        suite: Suite the check belongs to.
        anchor: Stable anchor string from the check registry.
        mode: ``exact`` (single grid, tolerance on the norm) or
            ``convergence`` (refinement study, ratio band).
        tolerance: Tolerance applied to the final norm.
        linf: Final-level L-infinity norm.
        l2: Final-level L2 norm.
        ratio: Error ratio between the last two levels, when refined.
        passed: Pass/fail verdict.
        grids: Resolutions used, coarse first.
        levels: Per-level norms.
        worst_point: Worst grid point on the final level, set on failure.
        message: Error text when the check raised.
    """

    name: str
    suite: str
    anchor: str
    mode: str
    tolerance: float
    linf: float
    l2: float
    ratio: Optional[float] = None
    passed: bool = False
    grids: List[List[int]] = field(default_factory = list)
    levels: List[RefinementLevel] = field(default_factory = list)
    worst_point: Optional[List[int]] = None
    message: str = ""

    def to_dict(self) -> dict:
        """Plain mapping with stable key order for report lines.

        Args:
            self: CheckRecord instance.
        """

        return dataclasses.asdict(self)


@dataclass
class RunReport:
    """All check records of one run.

    Args:
        scenario: Scenario name.
        command: Command that produced the report.
        refine: Number of refinement levels requested.
        records: Check records, ordered by name.
        created_at: ISO timestamp; the only non-deterministic field.
        profiles: Residual line profiles per check and level, kept for plotting.
    """

    scenario: str
    command: str
    refine: int
    records: List[CheckRecord] = field(default_factory = list)
    created_at: str = ""
    profiles: dict = field(default_factory = dict, repr = False)

    @property
    def passed(self) -> bool:
        return all(record.passed for record in self.records)

    @property
    def failed(self) -> int:
        return sum(1 for record in self.records if not record.passed)

    def summary(self) -> dict:
        """Summary block appended after the records.

        Args:
            self: RunReport instance.
        """

        return {
            "summary": {
                "scenario": self.scenario,
                "command": self.command,
                "refine": self.refine,
                "total": len(self.records),
                "passed": len(self.records) - self.failed,
                "failed": self.failed,
                "failures": [record.name for record in self.records if not record.passed],
                "created_at": self.created_at
            }
        }
