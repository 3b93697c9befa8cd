"""Named verification checks grouped into suites.

Every check evaluates one residual on a ``ScenarioContext`` and carries an
anchor from ``ANCHORS``. ``mode`` is ``exact`` (level 0 only, tolerance on
the L-infinity norm), ``convergence`` (refinement study judged by the error
ratio) or ``diagnostic`` (reported, never failing).

Randomized checks draw from a generator seeded by the run seed and the check
name, so the same check sees the same inputs on every level and every run.
"""

import logging
import zlib

from dataclasses import dataclass
from functools import partial
from typing import Callable
from typing import Optional

import numpy as np

from core.bootstrap import ScenarioContext
from core.constitutive import PartialsReport
from core.constitutive import derived_fields
from core.constitutive import fd_check_faraday
from core.constitutive import fd_check_partials
from core.constitutive import pressure_and_energy
from core.em_decomp import dh_assemble
from core.em_decomp import dh_extract
from core.em_decomp import eb_decompose
from core.em_decomp import eb_reconstruct
from core.em_decomp import maxwell_sem
from core.em_decomp import maxwell_sem_eb
from core.em_decomp import projection_tensor
from core.exceptions import ValidationError
from core.fields_calculus import ChartGrid
from core.fields_calculus import ResidualNorms
from core.fields_calculus import TensorField
from core.fields_calculus import bianchi_residual
from core.fields_calculus import codifferential
from core.fields_calculus import covariant_derivative
from core.fields_calculus import covariant_divergence
from core.fields_calculus import lagrangian_divergence_residual
from core.fields_calculus import exterior_derivative
from core.fields_calculus import gradient_array
from core.fields_calculus import lie_derivative
from core.fields_calculus import lie_lemma_residual
from core.fields_calculus import residual_norms
from core.junction import einstein_residual
from core.junction import em_jumps
from core.junction import israel_darmois
from core.junction import obrien_synge
from core.junction import preliminary_jumps
from core.junction import sample_norms
from core.sem_balance import SEMTensor
from core.sem_balance import balance_residuals
from core.sem_balance import boundary_residuals
from core.sem_balance import maxwell_matter_residual
from core.sem_balance import ponderomotive_residuals
from core.sem_balance import sem_eb
from core.sem_balance import sem_faraday
from core.sem_balance import sem_material
from core.sem_balance import sem_material_fd
from core.sem_balance import sem_splits
from core.tensor_core import DOWN
from core.tensor_core import UP
from core.tensor_core import FormValue
from core.tensor_core import MetricValue
from core.tensor_core import TensorValue
from core.tensor_core import antisymmetrize
from core.tensor_core import flat
from core.tensor_core import form_inner
from core.tensor_core import hodge_star
from core.tensor_core import interior_product
from core.tensor_core import tensor_product
from core.tensor_core import top_form_coefficient
from core.tensor_core import wedge
from data.scenario_schema import ScenarioFile


logger = logging.getLogger(__name__)

POINTWISE_SAMPLES = 100
SMOOTH_TERMS = 3
MODES = ("exact", "convergence", "diagnostic")
TOLERANCE_CLASSES = ("exact", "assembly", "oracle", "zero_floor")
SEM_FORM_NAMES = ("phi", "eb", "faraday")

ANCHORS = {
    "exterior-algebra": "Hodge involution, interior/Hodge interchange, Leibniz rule, d d = 0",
    "lie-derivative-local": "Lie derivative pairing identity with the hat-lift coupling",
    "hat-lift": "Local and covariant writings of the Lie derivative agree",
    "divergence-lemma": "Covariant divergence equals the coordinate divergence of the density",
    "levi-civita": "Symmetric, metric-compatible connection",
    "curvature": "Ricci symmetry and the contracted Bianchi identity",
    "field-decomposition": "Observer split of the Faraday form and its reconstruction",
    "displacement-intensity": "Displacement and intensity read off the Lagrangian derivative",
    "maxwell-stress": "Maxwell stress-energy, its E/B expansion, trace and divergence",
    "constitutive-partials": "Analytic energy partials against central differences",
    "stress-three-forms": "Stress-energy assembled in E/B, Faraday and material variables",
    "stress-splittings": "Matter/Maxwell splittings of the stress-energy",
    "balance-projections": "Energy and momentum balance as projections of div T",
    "continuity": "Mass and entropy conservation",
    "cauchy-advection": "Lie transport of the Cauchy deformation tensor",
    "ponderomotive": "Balance written with the ponderomotive force",
    "maxwell-in-matter": "Maxwell's equations in matter, both writings",
    "boundary-conditions": "Free-boundary conditions on grid faces",
    "junction-preliminary": "Tangential continuity of metric and potential",
    "junction-gravitational": "Continuity of the extrinsic curvature",
    "junction-electromagnetic": "Electromagnetic and mechanical jump conditions",
    "junction-obrien-synge": "Tangential continuity of Ein(., n)",
    "einstein-equations": "Ein(g) = chi T",
    "gauge-shift": "Invariance under A -> A + df"
}


@dataclass(frozen = True, eq = False)
class CheckOutcome:
    """Residual values produced by one check on one level.

    Args:
        values: Residual array; grid-shaped batch first, or sample index first.
        grid: Grid the values live on, or None for sampled values.
        margin: Coarse points excluded next to every grid edge.
    """

    values: np.ndarray
    grid: Optional[ChartGrid] = None
    margin: int = 0

    def norms(self, stride: int = 1) -> ResidualNorms:
        """L-infinity and L2 norms on the points shared with the base grid.

        Args:
            self: CheckOutcome instance.
            stride: Refinement factor ``2**level``.
        """

        if self.grid is None:
            return sample_norms(self.values)
        return residual_norms(self.values, self.grid, margin = self.margin, stride = stride)

    def profile(self) -> tuple[np.ndarray, np.ndarray]:
        """Residual magnitude along one line for plotting.

        Grid values are sliced along the first resolved spatial axis through
        the middle of the grid; sampled values are indexed by sample number.

        Args:
            self: CheckOutcome instance.
        """

        values = np.abs(np.asarray(self.values, dtype = float))
        if self.grid is None:
            if values.size == 0:
                return np.zeros(0), np.zeros(0)
            magnitude = values.reshape(values.shape[0], -1).max(axis = -1)
            return np.arange(magnitude.shape[0], dtype = float), magnitude
        grid = self.grid
        magnitude = values.reshape(grid.shape + (-1,)).max(axis = -1)
        resolved = [axis for axis, count in enumerate(grid.resolution) if count > 1]
        spatial = [axis for axis in resolved if axis > 0]
        axis = spatial[0] if spatial else (resolved[0] if resolved else 0)
        index = tuple(
            slice(None) if current == axis else count // 2
            for current, count in enumerate(grid.resolution)
        )
        return grid.axes()[axis], magnitude[index]


@dataclass(frozen = True, eq = False)
class CheckSpec:
    """One named check.

    Args:
        name: ``<suite>.<check>``.
        anchor: Key of ``ANCHORS``.
        mode: ``exact``, ``convergence`` or ``diagnostic``.
        tolerance_class: Default tolerance class of the check.
        evaluate: Residual builder on one level.
        forms: Stress-energy forms the check compares; empty when form-independent.
        boundary: Face check, only planned on request.
        applies: Optional scenario predicate.
    """

    name: str
    anchor: str
    mode: str
    tolerance_class: str
    evaluate: Callable[[ScenarioContext], CheckOutcome]
    forms: tuple = ()
    boundary: bool = False
    applies: Optional[Callable[[ScenarioFile], bool]] = None

    def __post_init__(self) -> None:
        if self.anchor not in ANCHORS:
            raise ValidationError(f"check {self.name}: unknown anchor {self.anchor!r}")
        if self.mode not in MODES:
            raise ValidationError(f"check {self.name}: unknown mode {self.mode!r}")
        if self.tolerance_class not in TOLERANCE_CLASSES:
            raise ValidationError(f"check {self.name}: unknown tolerance class {self.tolerance_class!r}")

    @property
    def suite(self) -> str:
        return self.name.split(".", 1)[0]

    def applies_to(self, scenario: ScenarioFile) -> bool:
        return self.applies is None or bool(self.applies(scenario))


def check_rng(context: ScenarioContext, name: str) -> np.random.Generator:
    return np.random.default_rng([abs(int(context.seed)), zlib.crc32(name.encode("utf-8"))])


def smooth_scalar(rng: np.random.Generator, grid: ChartGrid, terms: int = SMOOTH_TERMS) -> np.ndarray:
    """Random sum of sines over the grid box, constant along symmetry axes.

    The draws do not depend on the resolution, so refined grids sample the
    same function.

    Args:
        rng: Random generator.
        grid: Chart grid.
        terms: Number of sine terms.
    """

    mesh = grid.mesh()
    total = np.full(grid.shape, rng.uniform(-0.5, 0.5))
    for _ in range(terms):
        amplitude = rng.uniform(0.3, 1.0)
        phase = rng.uniform(0.0, 2.0 * np.pi)
        waves = rng.uniform(0.25, 0.75, size = grid.dim)
        argument = np.full(grid.shape, phase)
        for axis, ((low, high), count) in enumerate(zip(grid.bounds, grid.resolution)):
            if count == 1:
                continue
            argument = argument + waves[axis] * np.pi / (high - low) * (mesh[axis] - low)
        total = total + amplitude * np.sin(argument)
    return total


def smooth_tensor(rng: np.random.Generator, grid: ChartGrid, rank: int) -> np.ndarray:
    components = np.zeros(grid.shape + (grid.dim,) * rank)
    for slots in np.ndindex(*((grid.dim,) * rank)):
        components[(Ellipsis,) + slots] = smooth_scalar(rng, grid)
    return components


def sample_metric(context: ScenarioContext, rng: np.random.Generator) -> MetricValue:
    metric = context.interior.metric_field.metric
    dim = metric.dim
    flat_g = metric.g.reshape(-1, dim, dim)
    picks = rng.integers(0, flat_g.shape[0], size = POINTWISE_SAMPLES)
    return MetricValue.from_components(flat_g[picks])


def random_form(rng: np.random.Generator, dim: int, degree: int, count: int = POINTWISE_SAMPLES) -> FormValue:
    if degree == 0:
        return FormValue(components = rng.normal(size = (count,)), dim = dim, degree = 0)
    raw = rng.normal(size = (count,) + (dim,) * degree)
    return FormValue(components = antisymmetrize(raw, degree), dim = dim, degree = degree)


def random_vector(rng: np.random.Generator, dim: int, count: int = POINTWISE_SAMPLES) -> TensorValue:
    return TensorValue(components = rng.normal(size = (count, dim)), variance = (UP,), dim = dim)


def pointwise_magnitude(values, batch_ndim: int) -> np.ndarray:
    values = np.abs(np.asarray(values, dtype = float))
    if values.ndim == batch_ndim:
        return values
    return values.reshape(values.shape[:batch_ndim] + (-1,)).max(axis = -1)


def relative(residual, reference, batch_ndim: int = 1) -> np.ndarray:
    """Pointwise ``|residual| / max(1, |reference|)``.

    Args:
        residual: Residual array.
        reference: Array setting the scale at each point.
        batch_ndim: Number of leading batch axes.
    """

    scale = np.maximum(1.0, pointwise_magnitude(reference, batch_ndim))
    return pointwise_magnitude(residual, batch_ndim) / scale


def metric_scale(metric: MetricValue, batch_ndim: int = 1) -> np.ndarray:
    return pointwise_magnitude(metric.g, batch_ndim) * pointwise_magnitude(metric.ginv, batch_ndim)


def finest_spacing(grid: ChartGrid) -> float:
    spacing = [step for step in grid.spacing if step > 0]
    return min(spacing) if spacing else 1.0


def _grid_outcome(context: ScenarioContext, values: np.ndarray, margin: int = 0) -> CheckOutcome:
    return CheckOutcome(values = values, grid = context.interior.grid, margin = margin)


def _batch_ndim(context: ScenarioContext) -> int:
    return len(context.interior.grid.shape)


# identities


def _hodge_involution(context: ScenarioContext) -> CheckOutcome:
    rng = check_rng(context, "identities.hodge_involution")
    metric = sample_metric(context, rng)
    orientation = context.orientation
    dim = metric.dim
    columns = []
    for degree in range(dim + 1):
        alpha = random_form(rng, dim, degree)
        twice = hodge_star(hodge_star(alpha, metric, orientation), metric, orientation)
        sign = -((-1) ** (degree * (dim - degree)))
        columns.append(relative(twice.components - sign * alpha.components, alpha.components))
    return CheckOutcome(values = np.stack(columns, axis = -1) / metric_scale(metric)[:, None])


def _interior_hodge(context: ScenarioContext) -> CheckOutcome:
    rng = check_rng(context, "identities.interior_hodge")
    metric = sample_metric(context, rng)
    orientation = context.orientation
    dim = metric.dim
    columns = []
    for degree in range(dim):
        alpha = random_form(rng, dim, degree)
        v = random_vector(rng, dim)
        left = interior_product(v, hodge_star(alpha, metric, orientation))
        right = hodge_star(wedge(alpha, flat(v, metric)), metric, orientation)
        columns.append(relative(left.components - right.components, left.components))
    return CheckOutcome(values = np.stack(columns, axis = -1) / metric_scale(metric)[:, None])


def _leibniz(context: ScenarioContext) -> CheckOutcome:
    rng = check_rng(context, "identities.leibniz")
    dim = context.interior.grid.dim
    columns = []
    for first in range(1, dim):
        for second in range(1, dim - first + 1):
            alpha = random_form(rng, dim, first)
            beta = random_form(rng, dim, second)
            v = random_vector(rng, dim)
            left = interior_product(v, wedge(alpha, beta)).components
            right = (
                wedge(interior_product(v, alpha), beta).components
                + (-1) ** first * wedge(alpha, interior_product(v, beta)).components
            )
            columns.append(relative(left - right, left))
    return CheckOutcome(values = np.stack(columns, axis = -1))


def _inner_hodge(context: ScenarioContext) -> CheckOutcome:
    rng = check_rng(context, "identities.inner_hodge")
    metric = sample_metric(context, rng)
    orientation = context.orientation
    dim = metric.dim
    columns = []
    for degree in range(dim + 1):
        alpha = random_form(rng, dim, degree)
        beta = random_form(rng, dim, degree)
        left = top_form_coefficient(wedge(alpha, hodge_star(beta, metric, orientation)), metric, orientation)
        right = form_inner(alpha, beta, metric)
        columns.append(relative(left - right, right))
    return CheckOutcome(values = np.stack(columns, axis = -1) / metric_scale(metric)[:, None])


def _dd_zero(context: ScenarioContext) -> CheckOutcome:
    rng = check_rng(context, "identities.dd_zero")
    grid = context.interior.grid
    dim = grid.dim
    batch = len(grid.shape)
    scalar = TensorField(grid = grid, value = FormValue(components = smooth_scalar(rng, grid), dim = dim, degree = 0))
    first = exterior_derivative(scalar)
    columns = [pointwise_magnitude(exterior_derivative(first).components, batch)]
    scale = float(np.max(np.abs(first.components)))
    if dim >= 3:
        one_form = TensorField(
            grid = grid,
            value = FormValue(components = smooth_tensor(rng, grid, 1), dim = dim, degree = 1)
        )
        derived = exterior_derivative(one_form)
        columns.append(pointwise_magnitude(exterior_derivative(derived).components, batch))
        scale = max(scale, float(np.max(np.abs(derived.components))))
    scale = max(1.0, scale) / finest_spacing(grid)
    return _grid_outcome(context, np.stack(columns, axis = -1) / scale)


def _codifferential_squared(context: ScenarioContext) -> CheckOutcome:
    rng = check_rng(context, "identities.codifferential_squared")
    metric_field = context.interior.metric_field
    grid = metric_field.grid
    dim = grid.dim
    components = antisymmetrize(smooth_tensor(rng, grid, 2), 2)
    alpha = TensorField(grid = grid, value = FormValue(components = components, dim = dim, degree = 2, check = False))
    once = codifferential(alpha, metric_field, context.orientation)
    twice = codifferential(once, metric_field, context.orientation)
    batch = len(grid.shape)
    scale = max(1.0, float(np.max(np.abs(once.components)))) / finest_spacing(grid)
    scale = scale * float(np.max(metric_scale(metric_field.metric, batch)))
    return _grid_outcome(context, twice.components / scale)


def _random_pair(context: ScenarioContext, name: str) -> tuple[TensorField, TensorField, np.random.Generator]:
    rng = check_rng(context, name)
    grid = context.interior.grid
    dim = grid.dim
    zeta = TensorField(
        grid = grid,
        value = TensorValue(components = smooth_tensor(rng, grid, 1), variance = (UP,), dim = dim)
    )
    kappa = TensorField(
        grid = grid,
        value = TensorValue(components = smooth_tensor(rng, grid, 2), variance = (UP, DOWN), dim = dim)
    )
    return zeta, kappa, rng


def _lie_local_covariant(context: ScenarioContext) -> CheckOutcome:
    zeta, kappa, _ = _random_pair(context, "identities.lie_local_covariant")
    local = lie_derivative(zeta = zeta, kappa = kappa)
    covariant = lie_derivative(zeta = zeta, kappa = kappa, metric_field = context.interior.metric_field)
    return _grid_outcome(context, local.components - covariant.components, margin = 1)


def _lie_lemma(context: ScenarioContext) -> CheckOutcome:
    zeta, kappa, rng = _random_pair(context, "identities.lie_lemma")
    grid = context.interior.grid
    pi = TensorField(
        grid = grid,
        value = TensorValue(components = smooth_tensor(rng, grid, 2), variance = (DOWN, UP), dim = grid.dim)
    )
    residual = lie_lemma_residual(zeta = zeta, kappa = kappa, pi = pi, metric_field = context.interior.metric_field)
    return _grid_outcome(context, residual.components, margin = 2)


def _divergence_lemma(context: ScenarioContext) -> CheckOutcome:
    rng = check_rng(context, "identities.divergence_lemma")
    metric_field = context.interior.metric_field
    grid = metric_field.grid
    field = TensorField(
        grid = grid,
        value = TensorValue(components = smooth_tensor(rng, grid, 1), variance = (UP,), dim = grid.dim)
    )
    covariant = covariant_divergence(field, metric_field).components
    volume = metric_field.metric.sqrt_abs_det
    density = gradient_array(components = volume[..., None] * field.components, grid = grid)
    coordinate = np.einsum("...aa->...", density) / volume
    return _grid_outcome(context, covariant - coordinate, margin = 1)


def _lagrangian_divergence(context: ScenarioContext) -> CheckOutcome:
    rng = check_rng(context, "identities.lagrangian_divergence")
    grid = context.interior.grid
    dim = grid.dim
    weight = TensorField(
        grid = grid,
        value = TensorValue(components = 1.0 + 0.25 * smooth_scalar(rng, grid), variance = (), dim = dim)
    )
    potential = TensorField(
        grid = grid,
        value = FormValue(components = smooth_tensor(rng, grid, 1), dim = dim, degree = 1)
    )
    current = TensorField(
        grid = grid,
        value = TensorValue(components = smooth_tensor(rng, grid, 1), variance = (UP,), dim = dim)
    )
    residual = lagrangian_divergence_residual(
        weight = weight,
        potential = potential,
        current = current,
        metric_field = context.interior.metric_field,
        orientation = context.orientation
    )
    return _grid_outcome(context, residual.components, margin = 3)


def _christoffel_symmetry(context: ScenarioContext) -> CheckOutcome:
    gamma = context.interior.metric_field.christoffel.components
    batch = _batch_ndim(context)
    return _grid_outcome(context, relative(gamma - np.swapaxes(gamma, -1, -2), gamma, batch))


def _metric_compatibility(context: ScenarioContext) -> CheckOutcome:
    metric_field = context.interior.metric_field
    batch = _batch_ndim(context)
    nabla = covariant_derivative(metric_field.as_field(), metric_field).components
    partials = gradient_array(components = metric_field.metric.g, grid = metric_field.grid)
    scale = np.maximum(1.0, pointwise_magnitude(partials, batch)) * metric_scale(metric_field.metric, batch)
    return _grid_outcome(context, pointwise_magnitude(nabla, batch) / scale)


def _ricci_symmetry(context: ScenarioContext) -> CheckOutcome:
    ricci = context.interior.metric_field.ricci.components
    return _grid_outcome(context, ricci - np.swapaxes(ricci, -1, -2), margin = 2)


def _identity_checks() -> list[CheckSpec]:
    return [
        CheckSpec("identities.hodge_involution", "exterior-algebra", "exact", "exact", _hodge_involution),
        CheckSpec("identities.interior_hodge", "exterior-algebra", "exact", "exact", _interior_hodge),
        CheckSpec("identities.leibniz", "exterior-algebra", "exact", "exact", _leibniz),
        CheckSpec("identities.inner_hodge", "exterior-algebra", "exact", "exact", _inner_hodge),
        CheckSpec("identities.dd_zero", "exterior-algebra", "exact", "assembly", _dd_zero),
        CheckSpec(
            "identities.codifferential_squared",
            "exterior-algebra",
            "exact",
            "assembly",
            _codifferential_squared,
            applies = lambda scenario: scenario.spacetime_dim >= 3
        ),
        CheckSpec("identities.lie_local_covariant", "hat-lift", "convergence", "zero_floor", _lie_local_covariant),
        CheckSpec("identities.lie_lemma", "lie-derivative-local", "convergence", "zero_floor", _lie_lemma),
        CheckSpec("identities.divergence_lemma", "divergence-lemma", "convergence", "zero_floor", _divergence_lemma),
        CheckSpec("identities.lagrangian_divergence", "divergence-lemma", "convergence", "zero_floor", _lagrangian_divergence),
        CheckSpec("identities.christoffel_symmetry", "levi-civita", "exact", "exact", _christoffel_symmetry),
        CheckSpec("identities.metric_compatibility", "levi-civita", "exact", "assembly", _metric_compatibility),
        CheckSpec("identities.ricci_symmetry", "curvature", "convergence", "zero_floor", _ricci_symmetry)
    ]


# stress-energy


def _sem(context: ScenarioContext, form: str) -> SEMTensor:
    builders = {
        "eb": sem_eb,
        "faraday": sem_faraday,
        "phi": sem_material,
        "phi_fd": sem_material_fd
    }
    return context.memo(
        f"sem.{form}",
        lambda: builders[form](context.model, context.require_state().point)
    )


def _sem_outcome(context: ScenarioContext, residual: np.ndarray, reference: np.ndarray) -> CheckOutcome:
    return _grid_outcome(context, relative(residual, reference, _batch_ndim(context)))


def _compare_forms(first: str, second: str, context: ScenarioContext) -> CheckOutcome:
    left = _sem(context, first).components
    right = _sem(context, second).components
    return _sem_outcome(context, left - right, left)


def _sem_symmetry(context: ScenarioContext) -> CheckOutcome:
    lowered = _sem(context, "eb").lowered(context.interior.metric_field.metric)
    return _sem_outcome(context, lowered - np.swapaxes(lowered, -1, -2), lowered)


def _split_matter_maxwell(context: ScenarioContext) -> CheckOutcome:
    splits = context.memo("sem.splits", lambda: sem_splits(context.model, context.require_state().point))
    total = _sem(context, "eb").components
    return _sem_outcome(context, splits.matter.components + splits.maxwell.components - total, total)


def _split_alternative(context: ScenarioContext) -> CheckOutcome:
    splits = context.memo("sem.splits", lambda: sem_splits(context.model, context.require_state().point))
    total = _sem(context, "eb").components
    return _sem_outcome(context, splits.alt_matter.components + splits.alt_field.components - total, total)


def _euler_maxwell_reference(context: ScenarioContext) -> CheckOutcome:
    point = context.require_state().point
    metric = point.metric
    frame = point.frame
    state = point.matter_state()
    pressure, energy = pressure_and_energy(context.model.evaluate(state, "matter"), state)
    projector, _ = projection_tensor(frame, metric)
    along = tensor_product(frame.u, frame.flat(metric)).components / frame.c ** 2
    fluid = energy[..., None, None] * along + pressure[..., None, None] * projector.components
    reference = fluid + maxwell_sem(point.faraday, metric).components
    total = _sem(context, "eb").components
    return _sem_outcome(context, total - reference, total)


def _partials_outcome(report: PartialsReport) -> CheckOutcome:
    errors = [
        item.error / max(1.0, abs(item.analytic), abs(item.numeric))
        for item in report.checks
    ]
    return CheckOutcome(values = np.asarray(errors, dtype = float))


def _energy_partials(context: ScenarioContext) -> CheckOutcome:
    point = context.require_state().point
    return _partials_outcome(fd_check_partials(context.model, point.matter_state(), part = "total"))


def _faraday_partials(context: ScenarioContext) -> CheckOutcome:
    point = context.require_state().point
    report = fd_check_faraday(
        model = context.model,
        rho = point.rho,
        s = point.s,
        faraday = point.faraday,
        frame = point.frame,
        metric = point.metric,
        orientation = point.orientation,
        cauchy = point.cauchy
    )
    return _partials_outcome(report)


def _eb_roundtrip(context: ScenarioContext) -> CheckOutcome:
    point = context.require_state().point
    split = eb_decompose(point.faraday, point.frame, point.metric, point.orientation)
    rebuilt = eb_reconstruct(split, point.frame, point.metric, point.orientation)
    return _sem_outcome(context, rebuilt.components - point.faraday.components, point.faraday.components)


def _dh_roundtrip(context: ScenarioContext) -> CheckOutcome:
    point = context.require_state().point
    state = point.matter_state()
    fields = derived_fields(context.model.evaluate(state), context.model.evaluate(state, "matter"), point.metric)
    theta = dh_assemble(fields.dh_split(), point.frame, point.metric, point.orientation)
    back = dh_extract(theta, point.frame, point.metric, point.orientation)
    batch = _batch_ndim(context)
    residual = np.maximum(
        pointwise_magnitude(back.D.components - fields.D.components, batch),
        pointwise_magnitude(back.H.components - fields.H.components, batch)
    )
    reference = np.maximum(
        pointwise_magnitude(fields.D.components, batch),
        pointwise_magnitude(fields.H.components, batch)
    )
    return _grid_outcome(context, residual / np.maximum(1.0, reference))


def _vacuum_relations(context: ScenarioContext) -> CheckOutcome:
    point = context.require_state().point
    state = point.matter_state()
    evaluation = context.model.evaluate(state, "maxwell")
    fields = derived_fields(evaluation, evaluation, point.metric)
    batch = _batch_ndim(context)
    residual = np.maximum(
        pointwise_magnitude(fields.D.components - state.E.components, batch),
        pointwise_magnitude(fields.H.components - state.B.components, batch)
    )
    reference = np.maximum(
        pointwise_magnitude(state.E.components, batch),
        pointwise_magnitude(state.B.components, batch)
    )
    return _grid_outcome(context, residual / np.maximum(1.0, reference))


def _maxwell_stress(context: ScenarioContext) -> CheckOutcome:
    point = context.require_state().point
    metric = point.metric
    expected = maxwell_sem(point.faraday, metric).components
    assembled = sem_eb(context.model, point, part = "maxwell").components
    batch = _batch_ndim(context)
    residual = relative(assembled - expected, expected, batch)
    if metric.dim >= 4:
        split = eb_decompose(point.faraday, point.frame, metric, point.orientation)
        expanded = maxwell_sem_eb(split, point.frame, metric, point.orientation).components
        residual = np.maximum(residual, relative(expanded - expected, expected, batch))
    return _grid_outcome(context, residual)


def _gauge_invariance(context: ScenarioContext) -> CheckOutcome:
    rng = check_rng(context, "sem.gauge_invariance")
    state = context.require_state()
    shifted = state.gauge_shifted(smooth_scalar(rng, state.grid))
    reference = _sem(context, "phi").components
    moved = sem_material(context.model, shifted.point).components
    return _sem_outcome(context, moved - reference, reference)


def _has_fields(scenario: ScenarioFile) -> bool:
    return scenario.interior.fields is not None


def _has_potential(scenario: ScenarioFile) -> bool:
    return scenario.interior.fields is not None and scenario.interior.fields.A is not None


def _sem_checks() -> list[CheckSpec]:
    return [
        CheckSpec(
            "sem.eb_faraday", "stress-three-forms", "exact", "assembly",
            partial(_compare_forms, "eb", "faraday"), forms = ("eb", "faraday"), applies = _has_fields
        ),
        CheckSpec(
            "sem.phi_faraday", "stress-three-forms", "exact", "assembly",
            partial(_compare_forms, "phi", "faraday"), forms = ("phi", "faraday"), applies = _has_fields
        ),
        CheckSpec(
            "sem.phi_finite_difference", "stress-three-forms", "exact", "oracle",
            partial(_compare_forms, "phi_fd", "phi"), forms = ("phi",), applies = _has_fields
        ),
        CheckSpec("sem.symmetry", "stress-three-forms", "exact", "assembly", _sem_symmetry, applies = _has_fields),
        CheckSpec(
            "sem.split_matter_maxwell", "stress-splittings", "exact", "exact",
            _split_matter_maxwell, applies = _has_fields
        ),
        CheckSpec(
            "sem.split_alternative", "stress-splittings", "exact", "exact",
            _split_alternative, applies = _has_fields
        ),
        CheckSpec(
            "sem.euler_maxwell_reference", "stress-splittings", "exact", "exact", _euler_maxwell_reference,
            applies = lambda scenario: _has_fields(scenario) and scenario.model.kind == "euler_maxwell"
        ),
        CheckSpec(
            "sem.energy_partials", "constitutive-partials", "exact", "oracle",
            _energy_partials, applies = _has_fields
        ),
        CheckSpec(
            "sem.faraday_partials", "constitutive-partials", "exact", "oracle",
            _faraday_partials, applies = _has_fields
        ),
        CheckSpec("sem.eb_roundtrip", "field-decomposition", "exact", "assembly", _eb_roundtrip, applies = _has_fields),
        CheckSpec(
            "sem.dh_roundtrip", "displacement-intensity", "exact", "assembly",
            _dh_roundtrip, applies = _has_fields
        ),
        CheckSpec(
            "sem.vacuum_relations", "displacement-intensity", "exact", "exact",
            _vacuum_relations, applies = _has_fields
        ),
        CheckSpec("sem.maxwell_stress", "maxwell-stress", "exact", "assembly", _maxwell_stress, applies = _has_fields),
        CheckSpec(
            "sem.gauge_invariance", "gauge-shift", "exact", "assembly",
            _gauge_invariance, forms = ("phi",), applies = _has_potential
        )
    ]


# balance


def _balance_term(key: str, context: ScenarioContext) -> CheckOutcome:
    named = context.memo(
        "balance",
        lambda: balance_residuals(context.model, context.require_state()).named()
    )
    return _grid_outcome(context, named[key], margin = 2)


def _ponderomotive_term(key: str, context: ScenarioContext) -> CheckOutcome:
    residuals = context.memo(
        "ponderomotive",
        lambda: ponderomotive_residuals(context.model, context.require_state())
    )
    return _grid_outcome(context, getattr(residuals, key), margin = 2)


def _balance_checks() -> list[CheckSpec]:
    anchors = {
        "energy": "balance-projections",
        "momentum": "balance-projections",
        "divergence": "balance-projections",
        "energy_projection_mismatch": "balance-projections",
        "momentum_projection_mismatch": "balance-projections",
        "continuity_mass": "continuity",
        "continuity_entropy": "continuity",
        "maxwell_matter": "maxwell-in-matter"
    }
    checks = [
        CheckSpec(
            f"balance.{key}", anchor, "convergence", "zero_floor",
            partial(_balance_term, key), applies = _has_fields
        )
        for key, anchor in anchors.items()
    ]
    checks.append(
        CheckSpec(
            "balance.cauchy_advection", "cauchy-advection", "convergence", "zero_floor",
            partial(_balance_term, "cauchy_advection"),
            applies = lambda scenario: _has_fields(scenario) and scenario.interior.fields.cauchy is not None
        )
    )
    checks.append(
        CheckSpec(
            "balance.ponderomotive", "ponderomotive", "convergence", "zero_floor",
            partial(_ponderomotive_term, "residual"), applies = _has_fields
        )
    )
    checks.append(
        CheckSpec(
            "balance.ponderomotive_mismatch", "ponderomotive", "convergence", "zero_floor",
            partial(_ponderomotive_term, "mismatch"), applies = _has_fields
        )
    )
    return checks


def _boundary_term(axis: int, side: str, key: str, context: ScenarioContext) -> CheckOutcome:
    residuals = context.memo(
        f"boundary.{axis}.{side}",
        lambda: boundary_residuals(context.model, context.require_state(), axis = axis, side = side)
    )
    values = np.asarray(getattr(residuals, key), dtype = float)
    grid = context.interior.grid
    face_points = int(np.prod([count for current, count in enumerate(grid.resolution) if current != axis]))
    return CheckOutcome(values = values.reshape((face_points, -1)))


def boundary_checks(scenario: ScenarioFile) -> list[CheckSpec]:
    """Face checks for every boundary face the scenario declares.

    Args:
        scenario: Validated scenario.
    """

    checks = []
    for face in scenario.boundary_faces:
        for key in ("normal_velocity", "traction", "normal_displacement", "magnetic"):
            checks.append(
                CheckSpec(
                    f"balance.face{face.axis}_{face.side}.{key}",
                    "boundary-conditions",
                    "exact",
                    "assembly",
                    partial(_boundary_term, face.axis, face.side, key),
                    boundary = True,
                    applies = _has_fields
                )
            )
    return checks


# maxwell


def _maxwell_term(key: str, context: ScenarioContext) -> CheckOutcome:
    residuals = context.memo(
        "maxwell",
        lambda: maxwell_matter_residual(context.model, context.require_state())
    )
    if key == "relation":
        reference = residuals.second
        return _grid_outcome(context, relative(residuals.relation, reference, _batch_ndim(context)))
    return _grid_outcome(context, getattr(residuals, key), margin = 2)


def _vacuum_divergence(context: ScenarioContext) -> CheckOutcome:
    state = context.require_state()
    stress = maxwell_sem(state.point.faraday, state.metric)
    divergence = covariant_divergence(TensorField(grid = state.grid, value = stress), state.metric_field)
    return _grid_outcome(context, divergence.components, margin = 2)


def _maxwell_trace(context: ScenarioContext) -> CheckOutcome:
    state = context.require_state()
    stress = maxwell_sem(state.point.faraday, state.metric).components
    trace = np.einsum("...aa->...", stress)
    return _grid_outcome(context, relative(trace, stress, _batch_ndim(context)))


def _maxwell_checks() -> list[CheckSpec]:
    return [
        CheckSpec(
            "maxwell.first", "maxwell-in-matter", "convergence", "zero_floor",
            partial(_maxwell_term, "first"), applies = _has_fields
        ),
        CheckSpec(
            "maxwell.second", "maxwell-in-matter", "convergence", "zero_floor",
            partial(_maxwell_term, "second"), applies = _has_fields
        ),
        CheckSpec(
            "maxwell.relation", "maxwell-in-matter", "exact", "assembly",
            partial(_maxwell_term, "relation"), applies = _has_fields
        ),
        CheckSpec(
            "maxwell.vacuum_divergence", "maxwell-stress", "convergence", "zero_floor", _vacuum_divergence,
            applies = lambda scenario: (
                _has_fields(scenario) and scenario.model.kind == "euler_maxwell" and scenario.q == 0.0
            )
        ),
        CheckSpec(
            "maxwell.trace", "maxwell-stress", "exact", "exact", _maxwell_trace,
            applies = lambda scenario: _has_fields(scenario) and scenario.dimension == 3
        )
    ]


# junction


def _junction_term(group: str, key: str, context: ScenarioContext) -> CheckOutcome:
    builders = {
        "preliminary": preliminary_jumps,
        "gravitational": israel_darmois,
        "electromagnetic": em_jumps,
        "obrien_synge": obrien_synge
    }
    values = context.memo(f"junction.{group}", lambda: builders[group](context.solution))
    return CheckOutcome(values = values[key])


def _both_potentials(scenario: ScenarioFile) -> bool:
    regions = (scenario.interior, scenario.exterior)
    return all(
        region is not None and region.fields is not None and region.fields.A is not None
        for region in regions
    )


def _junction_checks() -> list[CheckSpec]:
    entries = [
        ("metric_tangential", "preliminary", "junction-preliminary", "convergence", None),
        ("potential_tangential", "preliminary", "junction-preliminary", "convergence", _both_potentials),
        ("extrinsic_curvature", "gravitational", "junction-gravitational", "convergence", None),
        ("mean_curvature", "gravitational", "junction-gravitational", "convergence", None),
        ("normal_velocity", "electromagnetic", "junction-electromagnetic", "convergence", None),
        ("traction", "electromagnetic", "junction-electromagnetic", "convergence", None),
        ("tangential_electric", "electromagnetic", "junction-electromagnetic", "convergence", None),
        ("normal_magnetic", "electromagnetic", "junction-electromagnetic", "convergence", None),
        ("normal_displacement", "electromagnetic", "junction-electromagnetic", "convergence", None),
        ("tangential_intensity", "electromagnetic", "junction-electromagnetic", "convergence", None),
        ("diagnostic.normal_poynting", "electromagnetic", "junction-electromagnetic", "convergence", None),
        ("diagnostic.traction_opposite_pressure", "electromagnetic", "junction-electromagnetic", "diagnostic", None),
        ("einstein_normal", "obrien_synge", "junction-obrien-synge", "convergence", None)
    ]
    checks = []
    for key, group, anchor, mode, applies in entries:
        name = key.split(".", 1)[-1]
        checks.append(
            CheckSpec(
                f"junction.{name}",
                anchor,
                mode,
                "zero_floor",
                partial(_junction_term, group, key),
                applies = applies
            )
        )
    return checks


# einstein


def _field_equations(context: ScenarioContext) -> CheckOutcome:
    sem = _sem(context, "eb") if context.interior.state is not None else None
    residual = einstein_residual(context.interior.metric_field, sem, context.scenario.chi)
    return _grid_outcome(context, residual.components, margin = 2)


def _exterior_field_equations(context: ScenarioContext) -> CheckOutcome:
    exterior = context.exterior
    sem = None
    if exterior.state is not None:
        sem = context.memo("sem.exterior", lambda: sem_eb(context.model, exterior.state.point, part = "maxwell"))
    residual = einstein_residual(exterior.metric_field, sem, context.scenario.chi)
    return CheckOutcome(values = residual.components, grid = exterior.grid, margin = 2)


def _bianchi(context: ScenarioContext) -> CheckOutcome:
    return _grid_outcome(context, bianchi_residual(context.interior.metric_field).components, margin = 3)


def _einstein_checks() -> list[CheckSpec]:
    return [
        CheckSpec("einstein.field_equations", "einstein-equations", "convergence", "zero_floor", _field_equations),
        CheckSpec(
            "einstein.exterior_field_equations", "einstein-equations", "convergence", "zero_floor",
            _exterior_field_equations, applies = lambda scenario: scenario.exterior is not None
        ),
        CheckSpec("einstein.bianchi", "curvature", "convergence", "zero_floor", _bianchi)
    ]


SUITES = {
    "identities": _identity_checks(),
    "sem": _sem_checks(),
    "balance": _balance_checks(),
    "maxwell": _maxwell_checks(),
    "junction": _junction_checks(),
    "einstein": _einstein_checks()
}


def suite_checks(suite: str) -> list[CheckSpec]:
    if suite not in SUITES:
        raise ValidationError(f"unknown check suite: {suite}")
    return list(SUITES[suite])


def all_check_names(scenario: Optional[ScenarioFile] = None) -> set[str]:
    names = {spec.name for checks in SUITES.values() for spec in checks}
    if scenario is not None:
        names.update(spec.name for spec in boundary_checks(scenario))
    return names
