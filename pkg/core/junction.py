"""Interface geometry and junction residuals between two chart regions.

The interface is the zero set of a level-set expression; the interior side has
``phi < 0``. Both sides are sampled at the same surface points by quadratic
Lagrange interpolation (or one-sided extrapolation) from their own grids. The
tangent frame ``e_j = d_j - (phi_j / phi_k) d_k`` depends on the level set
only, so componentwise jumps are taken in one shared frame.
"""

import logging
import itertools

from dataclasses import dataclass
from functools import cached_property
from typing import Mapping
from typing import Optional

import numpy as np

from core.constitutive import ConstitutiveModel
from core.constitutive import derived_fields
from core.constitutive import pressure_and_energy
from core.em_decomp import normalize_velocity
from core.exceptions import GeometryError
from core.exceptions import GridError
from core.fields_calculus import ChartGrid
from core.fields_calculus import MetricField
from core.fields_calculus import ResidualNorms
from core.fields_calculus import TensorField
from core.sem_balance import ContinuumState
from core.sem_balance import FieldPoint
from core.sem_balance import SEMTensor
from core.sem_balance import boundary_values
from core.sem_balance import energy_flux
from core.tensor_core import DOWN
from core.tensor_core import UP
from core.tensor_core import FormValue
from core.tensor_core import MetricValue
from core.tensor_core import TensorValue
from core.tensor_core import hodge_star
from core.tensor_core import interior_product
from utils.expression_parser import Expression


logger = logging.getLogger(__name__)

PROJECTION_TOLERANCE = 1e-8
NULL_TOLERANCE = 1e-12


@dataclass(frozen = True, eq = False)
class Interface:
    """Level-set surface ``{phi = 0}`` and its sample points.

    Args:
        level_set: Expression in the chart coordinates.
        points: Sample coordinates, shape ``(samples, dim)``.
        constants: Scenario constants bound during evaluation.
    """

    level_set: Expression
    points: np.ndarray
    constants: Optional[Mapping[str, float]] = None

    @property
    def dim(self) -> int:
        return self.points.shape[-1]

    @property
    def count(self) -> int:
        return self.points.shape[0]

    def values(self, points: Optional[np.ndarray] = None) -> np.ndarray:
        return _evaluate_at(self.level_set, self._points(points), self.constants)

    def gradient(self, points: Optional[np.ndarray] = None) -> np.ndarray:
        """Coordinate gradient ``phi_a`` at the samples, shape ``(samples, dim)``.

        Args:
            self: Interface instance.
            points: Optional override of the sample points.
        """

        points = self._points(points)
        return np.stack(
            [
                _evaluate_at(self.level_set.derivative(f"x{axis}"), points, self.constants)
                for axis in range(self.dim)
            ],
            axis = -1
        )

    def hessian(self, points: Optional[np.ndarray] = None) -> np.ndarray:
        points = self._points(points)
        rows = []
        for first in range(self.dim):
            partial = self.level_set.derivative(f"x{first}")
            rows.append(
                np.stack(
                    [
                        _evaluate_at(partial.derivative(f"x{second}"), points, self.constants)
                        for second in range(self.dim)
                    ],
                    axis = -1
                )
            )
        return np.stack(rows, axis = -2)

    def tangent_frame(self) -> np.ndarray:
        """Vectors ``e_j = d_j - (phi_j / phi_k) d_k`` for ``j != k``, shape ``(samples, dim-1, dim)``.

        ``k`` is the axis with the largest gradient component at each sample.

        Args:
            self: Interface instance.
        """

        gradient = self.gradient()
        pivot = np.argmax(np.abs(gradient), axis = -1)
        frame = np.zeros((self.count, self.dim - 1, self.dim))
        for sample in range(self.count):
            k = pivot[sample]
            others = [axis for axis in range(self.dim) if axis != k]
            for row, axis in enumerate(others):
                frame[sample, row, axis] = 1.0
                frame[sample, row, k] = -gradient[sample, axis] / gradient[sample, k]
        return frame

    def _points(self, points: Optional[np.ndarray]) -> np.ndarray:
        return self.points if points is None else points


@dataclass(frozen = True, eq = False)
class InterfaceGeometry:
    """Normal, induced metric and extrinsic curvature at the samples.

    Args:
        normal: Unit conormal ``n_a``, shape ``(samples, dim)``.
        normal_vector: ``n^a``.
        causal_sign: ``g(n, n)``, +1 for a timelike and -1 for a spacelike interface.
        tangents: Shared tangent frame, shape ``(samples, dim-1, dim)``.
        induced: Induced metric ``h_ij``.
        extrinsic: Extrinsic curvature ``K_ij = g(e_i, nabla_{e_j} n)``.
        mean: Trace ``h^{ij} K_ij``.
    """

    normal: np.ndarray
    normal_vector: np.ndarray
    causal_sign: np.ndarray
    tangents: np.ndarray
    induced: np.ndarray
    extrinsic: np.ndarray
    mean: np.ndarray


@dataclass(frozen = True, eq = False)
class SideSample:
    """One region's fields evaluated at the interface samples.

    Args:
        point: Field values batched over the samples.
        christoffel: Connection at the samples, shape ``(samples, dim, dim, dim)``.
        einstein: Covariant Einstein tensor at the samples.
    """

    point: FieldPoint
    christoffel: np.ndarray
    einstein: np.ndarray

    @property
    def metric(self) -> MetricValue:
        return self.point.metric


@dataclass(frozen = True, eq = False)
class TwoSidedSolution:
    """Interior continuum with a constitutive model and a vacuum exterior.

    Args:
        interior: Interior fields.
        exterior: Exterior fields.
        model: Interior constitutive model.
        interface: Shared interface.
        chi: Einstein coupling constant.
    """

    interior: ContinuumState
    exterior: ContinuumState
    model: ConstitutiveModel
    interface: Interface
    chi: float = 2.0

    @cached_property
    def inside(self) -> SideSample:
        return sample_side(self.interior, self.interface.points)

    @cached_property
    def outside(self) -> SideSample:
        return sample_side(self.exterior, self.interface.points)

    @cached_property
    def inside_geometry(self) -> InterfaceGeometry:
        return interface_geometry(self.interface, self.inside)

    @cached_property
    def outside_geometry(self) -> InterfaceGeometry:
        return interface_geometry(self.interface, self.outside)


def sample_interface(
    level_set: Expression,
    bounds: list,
    samples: list,
    iterations: int = 8,
    constants: Optional[Mapping[str, float]] = None
) -> Interface:
    """Project a regular lattice onto ``{phi = 0}`` by Newton steps along the gradient.

    Args:
        level_set: Level-set expression.
        bounds: Lattice bounds per axis.
        samples: Lattice points per axis; 1 places a single midpoint.
        iterations: Maximum Newton iterations.
        constants: Scenario constants.
    """

    axes = [
        np.linspace(low, high, count) if count > 1 else np.array([0.5 * (low + high)])
        for (low, high), count in zip(bounds, samples)
    ]
    points = np.stack([mesh.ravel() for mesh in np.meshgrid(*axes, indexing = "ij")], axis = -1)
    interface = Interface(level_set = level_set, points = points, constants = constants)
    for _ in range(iterations):
        values = interface.values(points)
        if np.max(np.abs(values)) < PROJECTION_TOLERANCE:
            break
        gradient = interface.gradient(points)
        square = np.einsum("sa,sa->s", gradient, gradient)
        if np.any(square < NULL_TOLERANCE):
            bad = int(np.argmin(square))
            raise GeometryError("level-set gradient vanishes during projection", (bad,))
        points = points - (values / square)[:, None] * gradient
    residual = np.abs(_evaluate_at(level_set, points, constants))
    if np.max(residual) >= PROJECTION_TOLERANCE:
        raise GeometryError(
            f"interface projection did not converge (|phi| = {float(np.max(residual)):.3e})",
            (int(np.argmax(residual)),)
        )
    logger.debug("Projected %d interface samples", points.shape[0])
    return Interface(level_set = level_set, points = points, constants = constants)


def interpolation_stencil(grid: ChartGrid, points: np.ndarray, margin: int = 0) -> list:
    """Quadratic Lagrange stencils per axis: ``(indices, weights)`` of shape ``(samples, 3)``.

    Args:
        grid: Chart grid.
        points: Sample coordinates.
        margin: Grid points kept clear of each edge.
    """

    stencils = []
    for axis, count in enumerate(grid.resolution):
        samples = points.shape[0]
        if count == 1:
            indices = np.zeros((samples, 3), dtype = int)
            weights = np.zeros((samples, 3))
            weights[:, 0] = 1.0
            stencils.append((indices, weights))
            continue
        if count - 2 * margin < 3:
            raise GridError(f"axis {axis} too short for a quadratic stencil with margin {margin}")
        low = grid.bounds[axis][0]
        position = (points[:, axis] - low) / grid.spacing[axis]
        base = np.clip(np.round(position).astype(int) - 1, margin, count - 3 - margin)
        tau = position - base
        weights = np.stack(
            [0.5 * (tau - 1.0) * (tau - 2.0), -tau * (tau - 2.0), 0.5 * tau * (tau - 1.0)],
            axis = -1
        )
        indices = base[:, None] + np.arange(3)[None, :]
        stencils.append((indices, weights))
    return stencils


def sample_array(components: np.ndarray, grid: ChartGrid, points: np.ndarray, margin: int = 0) -> np.ndarray:
    """Interpolate a grid array to sample points, shape ``(samples, slots...)``.

    Args:
        components: Array ``(*grid.shape, slots...)``.
        grid: Chart grid.
        points: Sample coordinates.
        margin: Grid points kept clear of each edge.
    """

    components = np.asarray(components, dtype = float)
    stencils = interpolation_stencil(grid = grid, points = points, margin = margin)
    slots = components.shape[len(grid.shape):]
    result = np.zeros((points.shape[0],) + slots)
    for combo in itertools.product(range(3), repeat = grid.dim):
        index = tuple(stencils[axis][0][:, combo[axis]] for axis in range(grid.dim))
        weight = np.ones(points.shape[0])
        for axis in range(grid.dim):
            weight = weight * stencils[axis][1][:, combo[axis]]
        if not np.any(weight):
            continue
        result = result + weight.reshape((-1,) + (1,) * len(slots)) * components[index]
    return result


def sample_side(state: ContinuumState, points: np.ndarray) -> SideSample:
    """Evaluate one region's fields, connection and Einstein tensor at the samples.

    Args:
        state: Region fields on a grid.
        points: Sample coordinates.
    """

    grid = state.grid
    source = state.point

    def take(value: Optional[TensorValue], margin: int = 0) -> Optional[np.ndarray]:
        if value is None:
            return None
        return sample_array(value.components, grid, points, margin)

    metric = MetricValue.from_components(take(state.metric.as_tensor()))
    dim = grid.dim
    velocity = TensorValue(components = take(source.generator()), variance = (UP,), dim = dim)
    frame = normalize_velocity(velocity, metric, source.frame.c)
    faraday = FormValue(components = take(source.faraday), dim = dim, degree = 2, check = False)
    potential = None
    if source.potential is not None:
        potential = FormValue(components = take(source.potential), dim = dim, degree = 1, check = False)
    cauchy = None
    if source.cauchy is not None:
        cauchy = TensorValue(components = take(source.cauchy), variance = (DOWN, DOWN), dim = dim)
    point = FieldPoint(
        rho = sample_array(np.broadcast_to(source.rho, grid.shape), grid, points),
        s = sample_array(np.broadcast_to(source.s, grid.shape), grid, points),
        faraday = faraday,
        frame = frame,
        metric = metric,
        orientation = source.orientation,
        cauchy = cauchy,
        potential = potential,
        velocity = velocity,
        q = source.q
    )
    christoffel = sample_array(state.metric_field.christoffel.components, grid, points)
    einstein = sample_array(state.metric_field.einstein.components, grid, points, margin = 1)
    return SideSample(point = point, christoffel = christoffel, einstein = einstein)


def interface_geometry(interface: Interface, side: SideSample) -> InterfaceGeometry:
    """Unit normal, induced metric, extrinsic curvature and its trace on one side.

    ``n_a = phi_a / sqrt|g^{ab} phi_a phi_b|`` points towards increasing phi;
    ``nabla n`` is evaluated analytically from the level-set Hessian and the
    sampled connection.

    Args:
        interface: Interface with its samples.
        side: Fields of one region at the samples.
    """

    metric = side.metric
    gradient = interface.gradient()
    hessian = interface.hessian()
    ginv = metric.ginv
    square = np.einsum("sab,sa,sb->s", ginv, gradient, gradient)
    if np.any(np.abs(square) < NULL_TOLERANCE):
        bad = int(np.argmin(np.abs(square)))
        raise GeometryError("interface is null", (bad,))
    sign = np.sign(square)
    length = np.sqrt(np.abs(square))
    normal = gradient / length[:, None]
    normal_vector = np.einsum("sab,sb->sa", ginv, normal)

    gamma = side.christoffel
    # d_b g^{cd} = -Gamma^c_{be} g^{ed} - Gamma^d_{be} g^{ce}
    dginv = -np.einsum("scbe,sed->scdb", gamma, ginv) - np.einsum("sdbe,sce->scdb", gamma, ginv)
    d_square = (
        np.einsum("scdb,sc,sd->sb", dginv, gradient, gradient)
        + 2.0 * np.einsum("scd,scb,sd->sb", ginv, hessian, gradient)
    )
    d_length = sign[:, None] * d_square / (2.0 * length[:, None])
    partial_normal = hessian / length[:, None, None] - np.einsum(
        "sa,sb->sab",
        gradient,
        d_length
    ) / (length ** 2)[:, None, None]
    nabla_normal = partial_normal - np.einsum("scab,sc->sab", gamma, normal)

    tangents = interface.tangent_frame()
    induced = np.einsum("sia,sab,sjb->sij", tangents, metric.g, tangents)
    determinant = np.linalg.det(induced)
    if np.any(np.abs(determinant) < NULL_TOLERANCE):
        bad = int(np.argmin(np.abs(determinant)))
        raise GeometryError("induced metric is degenerate", (bad,))
    extrinsic = np.einsum("sia,sjb,sab->sij", tangents, tangents, nabla_normal)
    extrinsic = 0.5 * (extrinsic + np.swapaxes(extrinsic, -1, -2))
    mean = np.einsum("sij,sij->s", np.linalg.inv(induced), extrinsic)
    return InterfaceGeometry(
        normal = normal,
        normal_vector = normal_vector,
        causal_sign = sign,
        tangents = tangents,
        induced = induced,
        extrinsic = extrinsic,
        mean = mean
    )


def preliminary_jumps(solution: TwoSidedSolution) -> dict:
    """Tangential jumps of the metric and of the potential.

    Args:
        solution: Two-sided solution.
    """

    tangents = solution.interface.tangent_frame()
    inside = solution.inside.point
    outside = solution.outside.point
    jump_g = outside.metric.g - inside.metric.g
    result = {"metric_tangential": np.einsum("sia,sab,sjb->sij", tangents, jump_g, tangents)}
    if inside.potential is not None and outside.potential is not None:
        jump_a = outside.potential.components - inside.potential.components
        result["potential_tangential"] = np.einsum("sia,sa->si", tangents, jump_a)
    else:
        logger.info("Skipping potential jump: a side has no potential")
    return result


def israel_darmois(solution: TwoSidedSolution) -> dict:
    """Jump of the extrinsic curvature and of its trace in the shared frame.

    Args:
        solution: Two-sided solution.
    """

    inside = solution.inside_geometry
    outside = solution.outside_geometry
    if not np.allclose(inside.tangents, outside.tangents):
        raise GeometryError("tangent frames of the two sides are misaligned")
    return {
        "extrinsic_curvature": outside.extrinsic - inside.extrinsic,
        "mean_curvature": outside.mean - inside.mean
    }


def em_jumps(solution: TwoSidedSolution) -> dict:
    """Electromagnetic and mechanical junction residuals.

    The six primary entries are ``g(u, n)``, the traction jump
    ``-[t(., n)] + [p] n``, ``i_n i_u *[E]``, ``i_n [B]``, ``i_n [D]`` and
    ``i_n i_u *[H]``. The interior stress is the coupling stress of the model;
    the exterior is vacuum. Diagnostics carry ``i_n [S]`` and the traction
    jump in the other sign convention, ``[t(., n)] + [p] n``.

    The traction sign follows from ``T(., n)`` of the full stress-energy,
    whose spatial block is ``-t + p P``. On a dielectric face that balances
    exactly the primary entry vanishes while ``[t(., n)] + [p] n`` equals
    ``2 [t(., n)]``, so that form is reported only as a diagnostic.

    Args:
        solution: Two-sided solution.
    """

    geometry = solution.inside_geometry
    inside = _side_quantities(solution.model, solution.inside.point, geometry, part = "total")
    outside = _side_quantities(solution.model, solution.outside.point, geometry, part = "maxwell")
    point = solution.inside.point
    metric = point.metric
    normal = geometry.normal
    normal_vector = TensorValue(components = geometry.normal_vector, variance = (UP,), dim = metric.dim)

    def jump(name: str) -> np.ndarray:
        return outside[name] - inside[name]

    jump_e = FormValue(components = jump("E"), dim = metric.dim, degree = 1, check = False)
    jump_b = FormValue(components = jump("B"), dim = metric.dim, degree = inside["B_degree"], check = False)
    jump_h = FormValue(components = jump("H"), dim = metric.dim, degree = inside["B_degree"], check = False)
    jump_s = FormValue(components = jump("S"), dim = metric.dim, degree = 1, check = False)

    electric = interior_product(
        normal_vector,
        interior_product(point.frame.u, hodge_star(jump_e, metric, point.orientation))
    ).components
    if jump_b.degree == 0:
        magnetic_flux = np.zeros(normal.shape[0])
    else:
        magnetic_flux = interior_product(normal_vector, jump_b).components
    intensity = interior_product(
        normal_vector,
        interior_product(point.frame.u, hodge_star(jump_h, metric, point.orientation))
    ).components
    stress_jump = jump("stress_normal")
    pressure_jump = jump("pressure")
    return {
        "normal_velocity": inside["normal_velocity"],
        "traction": -stress_jump + pressure_jump[:, None] * normal,
        "tangential_electric": electric,
        "normal_magnetic": magnetic_flux,
        "normal_displacement": np.einsum("sa,sa->s", geometry.normal_vector, jump("D")),
        "tangential_intensity": intensity,
        "diagnostic.traction_opposite_pressure": stress_jump + pressure_jump[:, None] * normal,
        "diagnostic.normal_poynting": interior_product(normal_vector, jump_s).components
    }


def obrien_synge(solution: TwoSidedSolution) -> dict:
    """Tangential part of the jump of ``Ein(., n)``.

    Args:
        solution: Two-sided solution.
    """

    geometry = solution.inside_geometry
    jump = solution.outside.einstein - solution.inside.einstein
    along = np.einsum("sab,sb->sa", jump, geometry.normal_vector)
    return {"einstein_normal": np.einsum("sia,sa->si", geometry.tangents, along)}


def einstein_residual(metric_field: MetricField, sem: Optional[SEMTensor], chi: float) -> TensorField:
    """``Ein(g) - chi T`` with T lowered; a missing SEM means vacuum.

    Args:
        metric_field: Metric on a grid.
        sem: Stress-energy factor on the same grid, or None.
        chi: Coupling constant.
    """

    einstein = metric_field.einstein.components
    if sem is not None:
        einstein = einstein - chi * sem.lowered(metric_field.metric)
    value = TensorValue(components = einstein, variance = (DOWN, DOWN), dim = metric_field.grid.dim)
    return TensorField(grid = metric_field.grid, value = value)


def sample_norms(values: np.ndarray) -> ResidualNorms:
    """Norms over interface samples; L2 is the root mean square.

    Args:
        values: Array with the sample index first.
    """

    values = np.asarray(values, dtype = float)
    if values.size == 0:
        return ResidualNorms(linf = 0.0, l2 = 0.0, worst_point = None)
    magnitude = np.abs(values).reshape(values.shape[0], -1).max(axis = -1)
    if not np.all(np.isfinite(magnitude)):
        return ResidualNorms(linf = float("inf"), l2 = float("inf"), worst_point = None)
    worst = int(np.argmax(magnitude))
    return ResidualNorms(
        linf = float(magnitude[worst]),
        l2 = float(np.sqrt(np.mean(magnitude ** 2))),
        worst_point = (worst,)
    )


def _side_quantities(model: ConstitutiveModel, point: FieldPoint, geometry: InterfaceGeometry, part: str) -> dict:
    state = point.matter_state()
    evaluation = model.evaluate(state, part)
    pressure, _ = pressure_and_energy(evaluation, state)
    fields = derived_fields(evaluation, evaluation, state.metric)
    normal = FormValue(components = geometry.normal, dim = state.dim, degree = 1, check = False)
    boundary = boundary_values(evaluation = evaluation, state = state, normal = normal, pressure = pressure)
    return {
        "E": state.E.components,
        "B": state.B.components,
        "B_degree": state.B.degree,
        "D": fields.D.components,
        "H": fields.H.components,
        "S": energy_flux(evaluation, state).components,
        "pressure": pressure,
        "stress_normal": boundary["traction"] + pressure[:, None] * geometry.normal,
        "normal_velocity": boundary["normal_velocity"]
    }


def _evaluate_at(expression: Expression, points: np.ndarray, constants: Optional[Mapping[str, float]]) -> np.ndarray:
    env = dict(constants or {})
    for axis in range(points.shape[-1]):
        env[f"x{axis}"] = points[:, axis]
    return expression.evaluate(env, shape = (points.shape[0],))
