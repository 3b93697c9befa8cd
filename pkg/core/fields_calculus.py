"""Fields on uniform chart grids and the differential operators acting on them.

Partial derivatives use second-order central differences in the interior and
second-order one-sided stencils on the edges (``numpy.gradient`` with
``edge_order = 2``). A grid axis with a single point is a symmetry direction:
every partial derivative along it is identically zero.
"""

import math
import logging

from dataclasses import dataclass
from functools import cached_property
from typing import Optional
from typing import Sequence

import numpy as np

from core.exceptions import GridError
from core.exceptions import TensorShapeError
from core.tensor_core import DOWN
from core.tensor_core import INDEX_LETTERS
from core.tensor_core import POSITIVE
from core.tensor_core import UP
from core.tensor_core import FormValue
from core.tensor_core import MetricValue
from core.tensor_core import Orientation
from core.tensor_core import TensorValue
from core.tensor_core import antisymmetrize
from core.tensor_core import as_form
from core.tensor_core import covector
from core.tensor_core import hat_lift
from core.tensor_core import hodge_star
from core.tensor_core import interior_product
from core.tensor_core import raise_index
from core.tensor_core import replace_components
from core.tensor_core import tensor_product
from core.tensor_core import top_form_coefficient
from core.tensor_core import trace_tensor_product
from core.tensor_core import volume_form
from core.tensor_core import wedge


logger = logging.getLogger(__name__)

MIN_RESOLUTION = 5


@dataclass(frozen = True)
class ChartGrid:
    """Uniform tensor-product grid over a coordinate box.

    Args:
        bounds: Per-axis ``(a_i, b_i)`` pairs.
        resolution: Per-axis point counts; 1 marks a symmetry axis, otherwise >= 5.
    """

    bounds: tuple
    resolution: tuple

    def __post_init__(self) -> None:
        bounds = tuple((float(low), float(high)) for low, high in self.bounds)
        resolution = tuple(int(count) for count in self.resolution)
        object.__setattr__(self, "bounds", bounds)
        object.__setattr__(self, "resolution", resolution)
        if len(bounds) != len(resolution) or not bounds:
            raise GridError("bounds and resolution must list the same non-zero number of axes")
        for axis, ((low, high), count) in enumerate(zip(bounds, resolution)):
            if count == 1:
                continue
            if count < MIN_RESOLUTION:
                raise GridError(
                    f"axis {axis} resolution {count} is below the stencil width {MIN_RESOLUTION}"
                )
            if not high > low:
                raise GridError(f"axis {axis} bounds [{low}, {high}] are empty")

    @property
    def dim(self) -> int:
        return len(self.resolution)

    @property
    def shape(self) -> tuple:
        return self.resolution

    @property
    def spacing(self) -> tuple:
        """Per-axis spacing; symmetry axes report 0."""

        return tuple(
            (high - low) / (count - 1) if count > 1 else 0.0
            for (low, high), count in zip(self.bounds, self.resolution)
        )

    @property
    def symmetry_axes(self) -> tuple:
        return tuple(axis for axis, count in enumerate(self.resolution) if count == 1)

    def axes(self) -> list[np.ndarray]:
        return [
            np.linspace(low, high, count) if count > 1 else np.array([low])
            for (low, high), count in zip(self.bounds, self.resolution)
        ]

    def mesh(self) -> list[np.ndarray]:
        return np.meshgrid(*self.axes(), indexing = "ij")

    def coordinate_env(self) -> dict:
        """Coordinate arrays keyed ``x0``, ``x1``, ... for expression evaluation.

        Args:
            self: ChartGrid instance.
        """

        return {f"x{axis}": values for axis, values in enumerate(self.mesh())}

    def refine(self, level: int) -> "ChartGrid":
        """Halve the spacing ``level`` times on every non-symmetry axis.

        Args:
            self: ChartGrid instance.
            level: Number of halvings.
        """

        factor = 2 ** level
        return ChartGrid(
            bounds = self.bounds,
            resolution = tuple(
                (count - 1) * factor + 1 if count > 1 else 1 for count in self.resolution
            )
        )

    def interior_slices(self, margin: int) -> tuple:
        slices = []
        for axis, count in enumerate(self.resolution):
            if count == 1:
                slices.append(slice(None))
                continue
            if count - 2 * margin < 1:
                raise GridError(f"axis {axis} has no points left inside a margin of {margin}")
            slices.append(slice(margin, count - margin))
        return tuple(slices)


@dataclass(frozen = True, eq = False)
class TensorField:
    """Tensor (or form) values on every grid point.

    Args:
        grid: Chart grid.
        value: Tensor value whose batch shape equals ``grid.shape``.
    """

    grid: ChartGrid
    value: TensorValue

    def __post_init__(self) -> None:
        if self.value.batch_shape != self.grid.shape:
            raise TensorShapeError(
                f"field batch shape {self.value.batch_shape} does not match grid {self.grid.shape}"
            )
        if self.value.dim != self.grid.dim:
            raise TensorShapeError(
                f"field dimension {self.value.dim} does not match grid dimension {self.grid.dim}"
            )

    @property
    def components(self) -> np.ndarray:
        return self.value.components

    @property
    def variance(self) -> tuple:
        return self.value.variance

    @property
    def rank(self) -> int:
        return self.value.rank

    def at(self, index: tuple) -> TensorValue:
        return self.value.at(index)

    def with_components(self, components: np.ndarray) -> "TensorField":
        return TensorField(grid = self.grid, value = replace_components(self.value, components))

    def __add__(self, other: "TensorField") -> "TensorField":
        return TensorField(grid = self.grid, value = self.value + other.value)

    def __sub__(self, other: "TensorField") -> "TensorField":
        return TensorField(grid = self.grid, value = self.value - other.value)

    def __neg__(self) -> "TensorField":
        return TensorField(grid = self.grid, value = -self.value)


@dataclass(frozen = True, eq = False)
class ChristoffelField:
    """Levi-Civita symbols ``components[..., l, m, n] = Gamma^l_{mn}``.

    Args:
        grid: Chart grid.
        components: Array ``(*grid.shape, dim, dim, dim)``.
    """

    grid: ChartGrid
    components: np.ndarray

    def symmetry_defect(self) -> float:
        return float(np.max(np.abs(self.components - np.swapaxes(self.components, -1, -2))))


@dataclass(frozen = True, eq = False)
class MetricField:
    """Metric on a grid with lazily cached connection and curvature.

    Args:
        grid: Chart grid.
        metric: Metric value batched over ``grid.shape``.
    """

    grid: ChartGrid
    metric: MetricValue

    @classmethod
    def from_components(cls, grid: ChartGrid, g: np.ndarray) -> "MetricField":
        g = np.broadcast_to(np.asarray(g, dtype = float), grid.shape + (grid.dim, grid.dim))
        return cls(grid = grid, metric = MetricValue.from_components(g))

    @cached_property
    def christoffel(self) -> ChristoffelField:
        return christoffel(self)

    @cached_property
    def riemann(self) -> TensorField:
        return riemann(self)

    @cached_property
    def ricci(self) -> TensorField:
        return ricci(self)

    @cached_property
    def einstein(self) -> TensorField:
        return einstein_tensor(self)

    def as_field(self) -> TensorField:
        return TensorField(grid = self.grid, value = self.metric.as_tensor())

    def volume_form(self, orientation: Orientation = POSITIVE) -> TensorField:
        return TensorField(grid = self.grid, value = volume_form(self.metric, orientation))


@dataclass(frozen = True)
class ResidualNorms:
    """L-infinity and grid-weighted L2 norms of a residual.

    Args:
        linf: Maximum pointwise magnitude.
        l2: Square root of the spacing-weighted sum of squared magnitudes.
        worst_point: Grid index (on the evaluated grid) of the maximum.
    """

    linf: float
    l2: float
    worst_point: Optional[tuple] = None


def gradient_array(components: np.ndarray, grid: ChartGrid) -> np.ndarray:
    """All coordinate partials with the derivative index appended last.

    Args:
        components: Array ``(*grid.shape, slots...)``.
        grid: Chart grid.
    """

    partials = [
        partial_derivative_array(components = components, grid = grid, axis = axis)
        for axis in range(grid.dim)
    ]
    return np.stack(partials, axis = -1)


def partial_derivative_array(components: np.ndarray, grid: ChartGrid, axis: int) -> np.ndarray:
    """Second-order finite-difference partial along one grid axis.

    Args:
        components: Array ``(*grid.shape, slots...)``.
        grid: Chart grid.
        axis: Coordinate axis.
    """

    if axis < 0 or axis >= grid.dim:
        raise GridError(f"axis {axis} out of range for a {grid.dim}-dimensional grid")
    components = np.asarray(components, dtype = float)
    if grid.resolution[axis] == 1:
        return np.zeros_like(components)
    return np.gradient(components, grid.spacing[axis], axis = axis, edge_order = 2)


def partial_derivative(field: TensorField, axis: int) -> TensorField:
    """Component-wise partial derivative along one axis.

    Args:
        field: Input field.
        axis: Coordinate axis.
    """

    return field.with_components(
        partial_derivative_array(components = field.components, grid = field.grid, axis = axis)
    )


def christoffel(metric_field: MetricField) -> ChristoffelField:
    """Levi-Civita connection from finite-difference metric derivatives.

    Args:
        metric_field: Metric on a grid.
    """

    ginv = metric_field.metric.ginv
    dg = gradient_array(components = metric_field.metric.g, grid = metric_field.grid)
    gamma = 0.5 * (
        np.einsum("...ls,...snm->...lmn", ginv, dg)
        + np.einsum("...ls,...smn->...lmn", ginv, dg)
        - np.einsum("...ls,...mns->...lmn", ginv, dg)
    )
    return ChristoffelField(grid = metric_field.grid, components = gamma)


def covariant_derivative(field: TensorField, metric_field: MetricField) -> TensorField:
    """Levi-Civita covariant derivative; the new covariant slot is last.

    Args:
        field: Input tensor field.
        metric_field: Metric supplying the connection.
    """

    gamma = metric_field.christoffel.components
    rank = field.rank
    letters = INDEX_LETTERS[:rank]
    result = gradient_array(components = field.components, grid = field.grid)
    for slot, kind in enumerate(field.variance):
        source = letters[:slot] + "y" + letters[slot + 1:]
        if kind == UP:
            result = result + np.einsum(
                f"...{source},...{letters[slot]}zy->...{letters}z",
                field.components,
                gamma
            )
        else:
            result = result - np.einsum(
                f"...{source},...yz{letters[slot]}->...{letters}z",
                field.components,
                gamma
            )
    value = TensorValue(components = result, variance = field.variance + (DOWN,), dim = field.grid.dim)
    return TensorField(grid = field.grid, value = value)


def covariant_divergence(field: TensorField, metric_field: MetricField, slot: int = 0) -> TensorField:
    """Divergence over one contravariant slot.

    For a (1,1) tensor stored as the factor of a weight-1 density this returns
    the factor of the divergence density, since the volume form is parallel.

    Args:
        field: Tensor field with a contravariant slot at ``slot``.
        metric_field: Metric supplying the connection.
        slot: Contravariant slot to contract with the derivative.
    """

    if slot < 0 or slot >= field.rank or field.variance[slot] != UP:
        raise TensorShapeError(
            f"divergence needs a contravariant slot {slot}, got variance {field.variance}"
        )
    nabla = covariant_derivative(field = field, metric_field = metric_field)
    batch = len(field.grid.shape)
    components = np.trace(nabla.components, axis1 = batch + slot, axis2 = batch + field.rank)
    variance = field.variance[:slot] + field.variance[slot + 1:]
    value = TensorValue(components = components, variance = variance, dim = field.grid.dim)
    if variance == (DOWN,):
        value = as_form(value)
    return TensorField(grid = field.grid, value = value)


def exterior_derivative(field: TensorField) -> TensorField:
    """Exterior derivative by antisymmetrizing finite-difference partials.

    Args:
        field: Form field of degree k < dim.
    """

    form = as_form(field.value, check = False)
    k = form.degree
    if k >= form.dim:
        raise TensorShapeError(f"exterior derivative of a degree-{k} form in dimension {form.dim}")
    partials = gradient_array(components = form.components, grid = field.grid)
    batch = len(field.grid.shape)
    partials = np.moveaxis(partials, -1, batch)
    components = (k + 1) * antisymmetrize(partials, k + 1)
    value = FormValue(components = components, dim = form.dim, degree = k + 1, check = False)
    return TensorField(grid = field.grid, value = value)


def hodge_field(field: TensorField, metric_field: MetricField, orientation: Orientation = POSITIVE) -> TensorField:
    value = hodge_star(as_form(field.value, check = False), metric_field.metric, orientation)
    return TensorField(grid = field.grid, value = value)


def codifferential(
    field: TensorField,
    metric_field: MetricField,
    orientation: Orientation = POSITIVE
) -> TensorField:
    """Codifferential ``(-1)^{dim (k-1)} * d *``.

    Args:
        field: Form field of degree k >= 1.
        metric_field: Metric.
        orientation: Orientation sign.
    """

    form = as_form(field.value, check = False)
    k = form.degree
    if k == 0:
        raise TensorShapeError("codifferential of a 0-form")
    dual = hodge_field(field = field, metric_field = metric_field, orientation = orientation)
    derived = exterior_derivative(field = dual)
    result = hodge_field(field = derived, metric_field = metric_field, orientation = orientation)
    sign = (-1) ** (form.dim * (k - 1))
    return result.with_components(sign * result.components)


def lie_derivative(
    zeta: TensorField,
    kappa: TensorField,
    metric_field: Optional[MetricField] = None
) -> TensorField:
    """Lie derivative of ``kappa`` along ``zeta``.

    Without a metric the local form (transport by partials plus the hat-lift
    contracted with ``partial zeta``) is used; with a metric the same formula
    is evaluated with covariant derivatives.

    Args:
        zeta: Vector field.
        kappa: Tensor field of any variance.
        metric_field: Optional metric selecting the covariant form.
    """

    if zeta.variance != (UP,):
        raise TensorShapeError(f"Lie derivative needs a vector field, got variance {zeta.variance}")
    if metric_field is None:
        dkappa = gradient_array(components = kappa.components, grid = kappa.grid)
        dzeta = gradient_array(components = zeta.components, grid = zeta.grid)
    else:
        dkappa = covariant_derivative(field = kappa, metric_field = metric_field).components
        dzeta = covariant_derivative(field = zeta, metric_field = metric_field).components
    letters = INDEX_LETTERS[:kappa.rank]
    transport = np.einsum(f"...{letters}z,...z->...{letters}", dkappa, zeta.components)
    lifted = hat_lift(kappa.value).components
    twist = np.einsum(f"...{letters}yz,...zy->...{letters}", lifted, dzeta)
    return kappa.with_components(transport + twist)


def lie_lemma_residual(
    zeta: TensorField,
    kappa: TensorField,
    pi: TensorField,
    metric_field: MetricField
) -> TensorField:
    """Residual of the Lie-derivative pairing identity for a density ``pi``.

    Computes ``(L_zeta kappa) : pi`` minus
    ``zeta^m (nabla_m kappa : pi - nabla_n H^n_m) + nabla_n (H^n_m zeta^m)``
    where ``H`` pairs the hat-lift of ``kappa`` with ``pi``.

    Args:
        zeta: Vector field.
        kappa: Tensor field.
        pi: Tensor field with variance dual to ``kappa``.
        metric_field: Metric.
    """

    if pi.rank != kappa.rank or any(
        left == right for left, right in zip(kappa.variance, pi.variance)
    ):
        raise TensorShapeError(
            f"pi variance {pi.variance} is not dual to kappa variance {kappa.variance}"
        )
    letters = INDEX_LETTERS[:kappa.rank]
    grid = kappa.grid
    dim = grid.dim

    lie = lie_derivative(zeta = zeta, kappa = kappa, metric_field = metric_field)
    left = np.einsum(f"...{letters},...{letters}->...", lie.components, pi.components)

    lifted = hat_lift(kappa.value).components
    coupling = np.einsum(f"...{letters}yz,...{letters}->...yz", lifted, pi.components)
    coupling_field = TensorField(
        grid = grid,
        value = TensorValue(components = coupling, variance = (UP, DOWN), dim = dim)
    )
    nabla_kappa = covariant_derivative(field = kappa, metric_field = metric_field).components
    transport = np.einsum(
        f"...{letters}z,...{letters},...z->...",
        nabla_kappa,
        pi.components,
        zeta.components
    )
    coupling_divergence = covariant_divergence(field = coupling_field, metric_field = metric_field)
    pulled = np.einsum("...m,...m->...", zeta.components, coupling_divergence.components)
    flux = TensorField(
        grid = grid,
        value = TensorValue(
            components = np.einsum("...nm,...m->...n", coupling, zeta.components),
            variance = (UP,),
            dim = dim
        )
    )
    flux_divergence = covariant_divergence(field = flux, metric_field = metric_field).components
    residual = left - (transport - pulled + flux_divergence)
    return TensorField(grid = grid, value = TensorValue(components = residual, variance = (), dim = dim))


def lagrangian_divergence_residual(
    weight: TensorField,
    potential: TensorField,
    current: TensorField,
    metric_field: MetricField,
    orientation: Orientation = POSITIVE
) -> TensorField:
    """Residual of the divergence identity for ``l = -phi <F,F>/2 mu - J.A mu``.

    ``F = dA`` is formed by finite differences. The left side is the
    divergence of ``-J (x) A + X (x)tr F`` with ``X = -phi F^sharp``; the right
    side collects the potential, field-strength and current pieces written
    with exterior derivatives and the volume form.

    Args:
        weight: Scalar field phi.
        potential: 1-form field A.
        current: Vector field J.
        metric_field: Metric.
        orientation: Orientation sign.
    """

    grid = potential.grid
    dim = grid.dim
    metric = metric_field.metric
    faraday = exterior_derivative(field = potential)
    faraday_form = as_form(faraday.value, check = False)

    raised = raise_index(raise_index(faraday_form, 0, metric), 1, metric)
    multivector = raised.scaled(-weight.components)
    left_tensor = trace_tensor_product(multivector, faraday_form) - tensor_product(
        current.value,
        potential.value
    )
    left = covariant_divergence(
        field = TensorField(grid = grid, value = left_tensor),
        metric_field = metric_field
    ).components

    nabla_potential = covariant_derivative(field = potential, metric_field = metric_field).components
    nabla_faraday = covariant_derivative(field = faraday, metric_field = metric_field).components
    potential_term = -np.einsum("...m,...mn->...n", current.components, nabla_potential)
    strength_term = 0.5 * np.einsum("...ab,...abn->...n", multivector.components, nabla_faraday)

    mu = volume_form(metric, orientation)
    current_flux = interior_product(current.value, mu)
    multivector_flat = TensorField(
        grid = grid,
        value = as_form(
            TensorValue(
                components = np.einsum(
                    "...ab,...ac,...bd->...cd",
                    multivector.components,
                    metric.g,
                    metric.g
                ),
                variance = (DOWN, DOWN),
                dim = dim
            ),
            check = False
        )
    )
    source = exterior_derivative(
        field = hodge_field(field = multivector_flat, metric_field = metric_field, orientation = orientation)
    ).value - current_flux
    field_term = np.zeros_like(potential_term)
    for axis in range(dim):
        slot_form = covector(faraday_form.components[..., axis, :], dim = dim)
        field_term[..., axis] = top_form_coefficient(wedge(slot_form, source), metric, orientation)
    current_source = exterior_derivative(
        field = TensorField(grid = grid, value = -current_flux)
    ).value
    charge_term = potential.components * top_form_coefficient(
        current_source,
        metric,
        orientation
    )[..., None]

    residual = left - (potential_term + strength_term - field_term + charge_term)
    return TensorField(grid = grid, value = FormValue(components = residual, dim = dim, degree = 1, check = False))


def riemann(metric_field: MetricField) -> TensorField:
    """Riemann tensor ``R[r, s, m, n] = R^r_{smn}``.

    Args:
        metric_field: Metric on a grid.
    """

    gamma = metric_field.christoffel.components
    dgamma = gradient_array(components = gamma, grid = metric_field.grid)
    components = (
        np.einsum("...rnsm->...rsmn", dgamma)
        - np.einsum("...rmsn->...rsmn", dgamma)
        + np.einsum("...rml,...lns->...rsmn", gamma, gamma)
        - np.einsum("...rnl,...lms->...rsmn", gamma, gamma)
    )
    value = TensorValue(components = components, variance = (UP, DOWN, DOWN, DOWN), dim = metric_field.grid.dim)
    return TensorField(grid = metric_field.grid, value = value)


def ricci(metric_field: MetricField) -> TensorField:
    components = np.einsum("...rsrn->...sn", metric_field.riemann.components)
    value = TensorValue(components = components, variance = (DOWN, DOWN), dim = metric_field.grid.dim)
    return TensorField(grid = metric_field.grid, value = value)


def scalar_curvature(metric_field: MetricField) -> TensorField:
    components = np.einsum("...sn,...sn->...", metric_field.metric.ginv, metric_field.ricci.components)
    return TensorField(
        grid = metric_field.grid,
        value = TensorValue(components = components, variance = (), dim = metric_field.grid.dim)
    )


def einstein_tensor(metric_field: MetricField) -> TensorField:
    """Covariant Einstein tensor ``Ric - R g / 2``.

    Args:
        metric_field: Metric on a grid.
    """

    scalar = scalar_curvature(metric_field).components
    components = metric_field.ricci.components - 0.5 * scalar[..., None, None] * metric_field.metric.g
    value = TensorValue(components = components, variance = (DOWN, DOWN), dim = metric_field.grid.dim)
    return TensorField(grid = metric_field.grid, value = value)


def bianchi_residual(metric_field: MetricField) -> TensorField:
    """Covariant divergence of the Einstein tensor with its first index raised.

    Args:
        metric_field: Metric on a grid.
    """

    mixed = raise_index(metric_field.einstein.value, 0, metric_field.metric)
    return covariant_divergence(
        field = TensorField(grid = metric_field.grid, value = mixed),
        metric_field = metric_field
    )


def coarse_slices(grid: ChartGrid, stride: int) -> tuple:
    return tuple(
        slice(None, None, stride) if count > 1 else slice(None) for count in grid.resolution
    )


def restrict_to_coarse(components: np.ndarray, grid: ChartGrid, stride: int) -> np.ndarray:
    """Sample a fine-grid array on the points of the grid ``stride`` times coarser.

    Args:
        components: Array ``(*grid.shape, slots...)``.
        grid: Fine grid.
        stride: Refinement factor ``2**level``.
    """

    return np.asarray(components)[coarse_slices(grid = grid, stride = stride)]


def residual_norms(
    components: np.ndarray,
    grid: ChartGrid,
    margin: int = 1,
    stride: int = 1
) -> ResidualNorms:
    """L-infinity and grid-weighted L2 norms over an interior band.

    Norms are taken on the points shared with the grid ``stride`` times
    coarser, and ``margin`` counts coarse points, so every refinement level
    measures the same physical region.

    Args:
        components: Residual array ``(*grid.shape, slots...)``.
        grid: Grid the residual lives on.
        margin: Coarse points excluded next to every non-symmetry edge.
        stride: Refinement factor ``2**level``.
    """

    values = np.asarray(components, dtype = float)
    batch = len(grid.shape)
    magnitude = np.abs(values)
    if values.ndim > batch:
        magnitude = magnitude.reshape(grid.shape + (-1,)).max(axis = -1)
    coarse = magnitude[coarse_slices(grid = grid, stride = stride)]

    region = []
    weight = 1.0
    for axis, count in enumerate(grid.resolution):
        if count == 1:
            region.append(slice(None))
            continue
        coarse_count = coarse.shape[axis]
        if coarse_count - 2 * margin < 1:
            raise GridError(f"axis {axis} has no points left inside a margin of {margin}")
        region.append(slice(margin, coarse_count - margin))
        weight *= grid.spacing[axis] * stride
    band = coarse[tuple(region)]
    if not np.all(np.isfinite(band)):
        return ResidualNorms(linf = math.inf, l2 = math.inf, worst_point = None)

    flat_index = int(np.argmax(band))
    local = np.unravel_index(flat_index, band.shape)
    worst = []
    for axis, index in enumerate(local):
        if grid.resolution[axis] == 1:
            worst.append(int(index))
        else:
            worst.append(int((index + margin) * stride))
    return ResidualNorms(
        linf = float(band.max()),
        l2 = float(np.sqrt(np.sum(band ** 2) * weight)),
        worst_point = tuple(worst)
    )


def scalar_field(grid: ChartGrid, values) -> TensorField:
    values = np.broadcast_to(np.asarray(values, dtype = float), grid.shape).copy()
    return TensorField(grid = grid, value = TensorValue(components = values, variance = (), dim = grid.dim))


def vector_field(grid: ChartGrid, components: Sequence) -> TensorField:
    stacked = np.stack(
        [np.broadcast_to(np.asarray(item, dtype = float), grid.shape) for item in components],
        axis = -1
    )
    return TensorField(grid = grid, value = TensorValue(components = stacked, variance = (UP,), dim = grid.dim))


def covector_field(grid: ChartGrid, components: Sequence) -> TensorField:
    stacked = np.stack(
        [np.broadcast_to(np.asarray(item, dtype = float), grid.shape) for item in components],
        axis = -1
    )
    return TensorField(grid = grid, value = FormValue(components = stacked, dim = grid.dim, degree = 1))
