import logging
import threading

from dataclasses import dataclass
from dataclasses import field
from functools import cached_property
from typing import Any
from typing import Callable
from typing import Mapping
from typing import Optional
from typing import Sequence

import numpy as np

from core.constitutive import ConstitutiveModel
from core.constitutive import build_model as build_constitutive_model
from core.em_decomp import ObserverFrame
from core.em_decomp import normalize_velocity
from core.exceptions import GeometryError
from core.exceptions import ScenarioError
from core.exceptions import TensorShapeError
from core.fields_calculus import ChartGrid
from core.fields_calculus import MetricField
from core.fields_calculus import TensorField
from core.fields_calculus import exterior_derivative
from core.fields_calculus import residual_norms
from core.junction import Interface
from core.junction import TwoSidedSolution
from core.junction import sample_interface
from core.sem_balance import ContinuumState
from core.sem_balance import FieldPoint
from core.tensor_core import DOWN
from core.tensor_core import UP
from core.tensor_core import FormValue
from core.tensor_core import MetricValue
from core.tensor_core import Orientation
from core.tensor_core import TensorValue
from data.scenario_loader import load_blob
from data.scenario_schema import BlobRef
from data.scenario_schema import FieldsSpec
from data.scenario_schema import GridSpec
from data.scenario_schema import MetricSpec
from data.scenario_schema import RegionSpec
from data.scenario_schema import ScenarioFile
from utils.expression_parser import Expression
from utils.expression_parser import parse_expression


logger = logging.getLogger(__name__)

CLOSEDNESS_TOLERANCE = 1e-10
BLOB_CLOSEDNESS_TOLERANCE = 1e-5


@dataclass(frozen = True, eq = False)
class RegionContext:
    """One region built on one refinement level.

    Args:
        label: ``interior`` or ``exterior``.
        metric_field: Metric on the region grid.
        state: Continuum fields, or None for a geometry-only region.
    """

    label: str
    metric_field: MetricField
    state: Optional[ContinuumState] = None

    @property
    def grid(self) -> ChartGrid:
        return self.metric_field.grid


@dataclass(frozen = True, eq = False)
class ScenarioContext:
    """Everything a check needs on one refinement level.

    Args:
        scenario: Validated scenario.
        level: Refinement level.
        model: Interior constitutive model.
        interior: Interior region.
        exterior: Optional exterior region.
        interface: Optional sampled interface.
        seed: Seed for randomized checks.
    """

    scenario: ScenarioFile
    level: int
    model: ConstitutiveModel
    interior: RegionContext
    exterior: Optional[RegionContext] = None
    interface: Optional[Interface] = None
    seed: int = 0
    _memo: dict = field(default_factory = dict, repr = False)
    _memo_locks: dict = field(default_factory = dict, repr = False)
    _memo_guard: threading.Lock = field(default_factory = threading.Lock, repr = False)

    @property
    def stride(self) -> int:
        return 2 ** self.level

    @property
    def orientation(self) -> Orientation:
        return Orientation(sign = self.scenario.orientation)

    @cached_property
    def solution(self) -> TwoSidedSolution:
        if self.exterior is None or self.interface is None:
            raise ScenarioError("interface", "junction checks need an exterior region and an interface")
        if self.interior.state is None or self.exterior.state is None:
            raise ScenarioError("fields", "junction checks need fields on both regions")
        return TwoSidedSolution(
            interior = self.interior.state,
            exterior = self.exterior.state,
            model = self.model,
            interface = self.interface,
            chi = self.scenario.chi
        )

    def require_state(self) -> ContinuumState:
        if self.interior.state is None:
            raise ScenarioError("interior.fields", "this check needs continuum fields")
        return self.interior.state

    def memo(self, key: str, factory: Callable[[], Any]) -> Any:
        """Compute a shared intermediate once per level, even across threads.

        Args:
            self: ScenarioContext instance.
            key: Cache key.
            factory: Zero-argument builder.
        """

        with self._memo_guard:
            lock = self._memo_locks.setdefault(key, threading.Lock())
        with lock:
            if key not in self._memo:
                self._memo[key] = factory()
            return self._memo[key]


def build_context(scenario: ScenarioFile, level: int = 0, seed: int = 0) -> ScenarioContext:
    """Build grids, metrics, fields, model and interface for one level.

    Args:
        scenario: Validated scenario.
        level: Refinement level.
        seed: Seed for randomized checks; the scenario seed wins when set.
    """

    constants = dict(scenario.constants)
    model = build_constitutive_model(scenario.model, constants)
    interior = build_region(scenario = scenario, label = "interior", region = scenario.interior, level = level)
    exterior = None
    if scenario.exterior is not None:
        exterior = build_region(scenario = scenario, label = "exterior", region = scenario.exterior, level = level)
    interface = build_interface(scenario = scenario)
    logger.debug(
        "Built level %d of %s (interior grid %s)",
        level,
        scenario.name,
        interior.grid.resolution
    )
    return ScenarioContext(
        scenario = scenario,
        level = level,
        model = model,
        interior = interior,
        exterior = exterior,
        interface = interface,
        seed = scenario.seed if scenario.seed is not None else seed
    )


def build_grid(spec: GridSpec, level: int = 0) -> ChartGrid:
    """Create the chart grid of one region, refined ``level`` times.

    Args:
        spec: Grid section.
        level: Refinement level.
    """

    return ChartGrid(bounds = tuple(spec.bounds), resolution = tuple(spec.resolution)).refine(level)


def build_region(scenario: ScenarioFile, label: str, region: RegionSpec, level: int = 0) -> RegionContext:
    """Create one region's metric field and continuum state.

    Args:
        scenario: Validated scenario.
        label: ``interior`` or ``exterior``.
        region: Region section.
        level: Refinement level.
    """

    grid = build_grid(spec = region.grid, level = level)
    metric_field = build_metric_field(
        spec = region.metric,
        grid = grid,
        c = scenario.c,
        constants = scenario.constants,
        field = f"{label}.metric"
    )
    state = None
    if region.fields is not None:
        state = build_continuum_state(
            scenario = scenario,
            fields = region.fields,
            metric_field = metric_field,
            label = label
        )
    return RegionContext(label = label, metric_field = metric_field, state = state)


def build_metric_field(
    spec: MetricSpec,
    grid: ChartGrid,
    c: float = 1.0,
    constants: Optional[Mapping[str, float]] = None,
    field: str = "metric"
) -> MetricField:
    """Create a metric field from a builtin or from component expressions.

    Builtin Schwarzschild and Reissner-Nordstrom use coordinates
    ``(t, r, theta, phi)`` with ``f = 1 - 2M/r + Q^2/r^2``.

    Args:
        spec: Metric section.
        grid: Region grid.
        c: Speed of light.
        constants: Scenario constants.
        field: Scenario field path, for error messages.
    """

    dim = grid.dim
    if spec.builtin == "minkowski":
        g = np.diag([-c ** 2] + [1.0] * (dim - 1))
    elif spec.builtin in ("schwarzschild", "reissner_nordstrom"):
        charge = spec.charge if spec.builtin == "reissner_nordstrom" else 0.0
        mesh = grid.mesh()
        radius = mesh[1]
        if np.any(radius <= 0):
            raise ScenarioError(f"{field}.builtin", "radial coordinate x1 must stay positive")
        lapse = 1.0 - 2.0 * spec.mass / radius + charge ** 2 / radius ** 2
        if np.any(lapse <= 0):
            raise GeometryError(f"{spec.builtin} grid reaches the horizon (f <= 0)")
        g = np.zeros(grid.shape + (dim, dim))
        g[..., 0, 0] = -c ** 2 * lapse
        g[..., 1, 1] = 1.0 / lapse
        g[..., 2, 2] = radius ** 2
        g[..., 3, 3] = (radius * np.sin(mesh[2])) ** 2
    else:
        env = _grid_env(grid = grid, constants = constants)
        names = tuple(constants or {})
        g = np.zeros(grid.shape + (dim, dim))
        for row in range(dim):
            for col in range(dim):
                expression = parse_expression(spec.components[row][col], variables = names)
                g[..., row, col] = expression.evaluate(env, shape = grid.shape)
    return MetricField.from_components(grid = grid, g = g)


def build_continuum_state(
    scenario: ScenarioFile,
    fields: FieldsSpec,
    metric_field: MetricField,
    label: str = "interior"
) -> ContinuumState:
    """Evaluate one region's fields on its grid.

    ``u`` must already be normalized; ``w`` is normalized to ``u``. A potential
    ``A`` yields ``F = dA``; a direct ``F`` must be closed.

    Args:
        scenario: Validated scenario.
        fields: Fields section.
        metric_field: Region metric.
        label: Region label for error messages.
    """

    grid = metric_field.grid
    metric = metric_field.metric
    dim = grid.dim
    constants = scenario.constants
    source_dir = scenario.source_dir
    prefix = f"{label}.fields"

    velocity = None
    if fields.u is not None:
        u = vector_value(fields.u, grid, constants, source_dir, f"{prefix}.u")
        frame = ObserverFrame(u = u, c = scenario.c)
        try:
            frame.validate(metric)
        except GeometryError as exc:
            raise ScenarioError(f"{prefix}.u", str(exc)) from exc
    else:
        velocity = vector_value(fields.w, grid, constants, source_dir, f"{prefix}.w")
        frame = normalize_velocity(velocity, metric, scenario.c)

    potential = None
    if fields.A is not None:
        potential, faraday = potential_and_faraday(fields.A, grid, constants, source_dir, f"{prefix}.A")
    else:
        faraday = faraday_value(fields.F, grid, constants, source_dir, f"{prefix}.F")

    cauchy = None
    if fields.cauchy is not None:
        components = matrix_components(fields.cauchy, grid, constants, source_dir, f"{prefix}.cauchy")
        cauchy = TensorValue(components = components, variance = (DOWN, DOWN), dim = dim)

    point = FieldPoint(
        rho = scalar_values(fields.rho, grid, constants, source_dir, f"{prefix}.rho"),
        s = scalar_values(fields.s, grid, constants, source_dir, f"{prefix}.s"),
        faraday = faraday,
        frame = frame,
        metric = metric,
        orientation = Orientation(sign = scenario.orientation),
        cauchy = cauchy,
        potential = potential,
        velocity = velocity,
        q = scenario.q
    )
    return ContinuumState(metric_field = metric_field, point = point)


def build_interface(scenario: ScenarioFile) -> Optional[Interface]:
    """Project the scenario's interface lattice onto the level set.

    Args:
        scenario: Validated scenario.
    """

    spec = scenario.interface
    if spec is None:
        return None
    level_set = parse_expression(spec.level_set, variables = tuple(scenario.constants))
    return sample_interface(
        level_set = level_set,
        bounds = spec.bounds,
        samples = spec.samples,
        iterations = spec.newton_iterations,
        constants = scenario.constants
    )


def scalar_values(value, grid: ChartGrid, constants: Mapping[str, float], source_dir: str, field: str) -> np.ndarray:
    """Evaluate a scalar field entry on the grid.

    Args:
        value: Number, expression text or blob reference.
        grid: Region grid.
        constants: Scenario constants.
        source_dir: Directory blob paths are relative to.
        field: Scenario field path.
    """

    if isinstance(value, BlobRef):
        return _blob_on_grid(value, grid, source_dir, field, slots = ())
    expression = parse_expression(value, variables = tuple(constants))
    return expression.evaluate(_grid_env(grid = grid, constants = constants), shape = grid.shape)


def vector_value(value, grid: ChartGrid, constants: Mapping[str, float], source_dir: str, field: str) -> TensorValue:
    if isinstance(value, BlobRef):
        components = _blob_on_grid(value, grid, source_dir, field, slots = (grid.dim,))
    else:
        components = np.stack(
            [
                scalar_values(item, grid, constants, source_dir, f"{field}.{index}")
                for index, item in enumerate(value)
            ],
            axis = -1
        )
    return TensorValue(components = components, variance = (UP,), dim = grid.dim)


def matrix_components(value, grid: ChartGrid, constants: Mapping[str, float], source_dir: str, field: str) -> np.ndarray:
    if isinstance(value, BlobRef):
        return _blob_on_grid(value, grid, source_dir, field, slots = (grid.dim, grid.dim))
    rows = [
        np.stack(
            [
                scalar_values(item, grid, constants, source_dir, f"{field}.{row}.{col}")
                for col, item in enumerate(entries)
            ],
            axis = -1
        )
        for row, entries in enumerate(value)
    ]
    return np.stack(rows, axis = -2)


def potential_and_faraday(
    value,
    grid: ChartGrid,
    constants: Mapping[str, float],
    source_dir: str,
    field: str
) -> tuple[FormValue, FormValue]:
    """Potential 1-form and ``F = dA``.

    Expression potentials are differentiated symbolically; blob potentials
    by finite differences.

    Args:
        value: Potential entry.
        grid: Region grid.
        constants: Scenario constants.
        source_dir: Directory blob paths are relative to.
        field: Scenario field path.
    """

    dim = grid.dim
    if isinstance(value, BlobRef):
        components = _blob_on_grid(value, grid, source_dir, field, slots = (dim,))
        potential = FormValue(components = components, dim = dim, degree = 1, check = False)
        faraday = exterior_derivative(TensorField(grid = grid, value = potential)).value
        return potential, FormValue(components = faraday.components, dim = dim, degree = 2, check = False)

    expressions = _expressions(value, constants)
    env = _grid_env(grid = grid, constants = constants)
    potential = np.stack([item.evaluate(env, shape = grid.shape) for item in expressions], axis = -1)
    faraday = np.zeros(grid.shape + (dim, dim))
    for first in range(dim):
        for second in range(first + 1, dim):
            component = (
                expressions[second].derivative(f"x{first}").evaluate(env, shape = grid.shape)
                - expressions[first].derivative(f"x{second}").evaluate(env, shape = grid.shape)
            )
            faraday[..., first, second] = component
            faraday[..., second, first] = -component
    return (
        FormValue(components = potential, dim = dim, degree = 1, check = False),
        FormValue(components = faraday, dim = dim, degree = 2)
    )


def faraday_value(value, grid: ChartGrid, constants: Mapping[str, float], source_dir: str, field: str) -> FormValue:
    """Directly specified Faraday form, verified antisymmetric and closed.

    Expression entries are checked with symbolic derivatives; blob entries
    with finite differences away from the grid edges.

    Args:
        value: Faraday entry.
        grid: Region grid.
        constants: Scenario constants.
        source_dir: Directory blob paths are relative to.
        field: Scenario field path.
    """

    dim = grid.dim
    components = matrix_components(value, grid, constants, source_dir, field)
    try:
        faraday = FormValue(components = components, dim = dim, degree = 2)
    except TensorShapeError as exc:
        raise ScenarioError(field, f"F must be antisymmetric ({exc})") from exc

    if isinstance(value, BlobRef):
        closure = exterior_derivative(TensorField(grid = grid, value = faraday)).components
        defect = residual_norms(components = closure, grid = grid, margin = 1).linf
        limit = BLOB_CLOSEDNESS_TOLERANCE
    else:
        defect = _symbolic_closure_defect(value, grid, constants)
        limit = CLOSEDNESS_TOLERANCE
    scale = max(1.0, float(np.max(np.abs(components))))
    if defect > limit * scale:
        raise ScenarioError(field, f"F is not closed: max |dF| = {defect:.3e}")
    return faraday


def _symbolic_closure_defect(value: Sequence, grid: ChartGrid, constants: Mapping[str, float]) -> float:
    dim = grid.dim
    rows = [_expressions(entries, constants) for entries in value]
    env = _grid_env(grid = grid, constants = constants)
    worst = 0.0
    for a in range(dim):
        for b in range(a + 1, dim):
            for c in range(b + 1, dim):
                total = (
                    rows[b][c].derivative(f"x{a}").evaluate(env, shape = grid.shape)
                    + rows[c][a].derivative(f"x{b}").evaluate(env, shape = grid.shape)
                    + rows[a][b].derivative(f"x{c}").evaluate(env, shape = grid.shape)
                )
                worst = max(worst, float(np.max(np.abs(total))))
    return worst


def _expressions(values: Sequence, constants: Mapping[str, float]) -> list[Expression]:
    return [parse_expression(item, variables = tuple(constants)) for item in values]


def _grid_env(grid: ChartGrid, constants: Optional[Mapping[str, float]]) -> dict:
    env = dict(constants or {})
    env.update(grid.coordinate_env())
    return env


def _blob_on_grid(ref: BlobRef, grid: ChartGrid, source_dir: str, field: str, slots: tuple) -> np.ndarray:
    values = load_blob(ref = ref, source_dir = source_dir, field = field)
    expected = grid.shape + slots
    if values.shape != expected:
        raise ScenarioError(
            field,
            f"blob shape {list(values.shape)} does not match grid shape {list(expected)} "
            "(blob fields fix the resolution, so they cannot be refined)"
        )
    return values
