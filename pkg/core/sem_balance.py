"""Stress-energy assembly and balance residuals.

Stress-energy tensors are mixed ``T^m_n`` factors of weight-1 densities; the
volume form is implicit and parallel, so divergences are plain covariant
divergences of the factor.
"""

import math
import logging

from dataclasses import dataclass
from dataclasses import replace
from typing import Optional

import numpy as np

from core.constitutive import ConstitutiveEval
from core.constitutive import ConstitutiveModel
from core.constitutive import MatterState
from core.constitutive import derived_fields
from core.constitutive import elastic_stress
from core.constitutive import faraday_adapter
from core.constitutive import pressure_and_energy
from core.constitutive import antisymmetric_basis
from core.constitutive import central_difference
from core.constitutive import FD_STEP
from core.em_decomp import ObserverFrame
from core.em_decomp import eb_decompose
from core.em_decomp import poynting
from core.em_decomp import projection_tensor
from core.exceptions import GeometryError
from core.exceptions import GridError
from core.exceptions import TensorShapeError
from core.fields_calculus import ChartGrid
from core.fields_calculus import MetricField
from core.fields_calculus import TensorField
from core.fields_calculus import codifferential
from core.fields_calculus import covariant_derivative
from core.fields_calculus import covariant_divergence
from core.fields_calculus import exterior_derivative
from core.fields_calculus import gradient_array
from core.fields_calculus import hodge_field
from core.fields_calculus import lie_derivative
from core.tensor_core import POSITIVE
from core.tensor_core import UP
from core.tensor_core import DOWN
from core.tensor_core import FormValue
from core.tensor_core import MetricValue
from core.tensor_core import Orientation
from core.tensor_core import TensorValue
from core.tensor_core import as_form
from core.tensor_core import full_contraction
from core.tensor_core import hodge_star
from core.tensor_core import interior_product
from core.tensor_core import lower_all
from core.tensor_core import raise_all
from core.tensor_core import sharp
from core.tensor_core import tensor_product
from core.tensor_core import trace_tensor_product
from core.tensor_core import volume_form


logger = logging.getLogger(__name__)

SEM_FORMS = ("phi_form", "eb_form", "faraday_form")


@dataclass(frozen = True, eq = False)
class FieldPoint:
    """Pointwise (or batched) continuum data in Faraday variables.

    Args:
        rho: Proper mass density.
        s: Proper entropy density.
        faraday: Faraday 2-form.
        frame: Observer frame with normalized u.
        metric: Metric.
        orientation: Orientation sign.
        cauchy: Optional Cauchy tensor.
        potential: Optional potential 1-form.
        velocity: Optional unnormalized generator w of u.
        q: Charge per unit mass.
    """

    rho: np.ndarray
    s: np.ndarray
    faraday: FormValue
    frame: ObserverFrame
    metric: MetricValue
    orientation: Orientation = POSITIVE
    cauchy: Optional[TensorValue] = None
    potential: Optional[FormValue] = None
    velocity: Optional[TensorValue] = None
    q: float = 0.0

    def matter_state(self) -> MatterState:
        split = eb_decompose(self.faraday, self.frame, self.metric, self.orientation)
        return MatterState(
            rho = self.rho,
            s = self.s,
            E = split.E,
            B = split.B,
            metric = self.metric,
            frame = self.frame,
            orientation = self.orientation,
            cauchy = self.cauchy
        )

    def generator(self) -> TensorValue:
        return self.velocity if self.velocity is not None else self.frame.u

    def replace(self, **changes) -> "FieldPoint":
        return replace(self, **changes)


@dataclass(frozen = True, eq = False)
class ContinuumState:
    """Continuum fields sampled on a chart grid.

    Args:
        metric_field: Metric on the grid.
        point: Batched field values over ``grid.shape``.
    """

    metric_field: MetricField
    point: FieldPoint

    def __post_init__(self) -> None:
        if self.point.faraday.batch_shape != self.grid.shape:
            raise TensorShapeError(
                f"field batch shape {self.point.faraday.batch_shape} does not match grid {self.grid.shape}"
            )

    @property
    def grid(self) -> ChartGrid:
        return self.metric_field.grid

    @property
    def metric(self) -> MetricValue:
        return self.metric_field.metric

    def field(self, value: TensorValue) -> TensorField:
        return TensorField(grid = self.grid, value = value)

    def gauge_shifted(self, gauge: np.ndarray) -> "ContinuumState":
        """Same state with ``A -> A + df``; F is unchanged.

        Args:
            self: ContinuumState instance.
            gauge: Scalar values of f on the grid.
        """

        if self.point.potential is None:
            raise TensorShapeError("gauge shift needs a potential")
        shift = gradient_array(components = gauge, grid = self.grid)
        potential = FormValue(
            components = self.point.potential.components + shift,
            dim = self.grid.dim,
            degree = 1,
            check = False
        )
        return replace(self, point = self.point.replace(potential = potential))


@dataclass(frozen = True, eq = False)
class SEMTensor:
    """Mixed stress-energy factor ``T^m_n`` with its provenance.

    Args:
        value: (1,1) tensor value.
        form: One of ``phi_form``, ``eb_form``, ``faraday_form``.
    """

    value: TensorValue
    form: str

    @property
    def components(self) -> np.ndarray:
        return self.value.components

    def lowered(self, metric: MetricValue) -> np.ndarray:
        return np.einsum("...ml,...ln->...mn", metric.g, self.components)

    def symmetry_defect(self, metric: MetricValue) -> float:
        lowered = self.lowered(metric)
        return float(np.max(np.abs(lowered - np.swapaxes(lowered, -1, -2))))

    def difference(self, other: "SEMTensor") -> float:
        return float(np.max(np.abs(self.components - other.components)))


@dataclass(frozen = True, eq = False)
class SEMSplits:
    """Matter/Maxwell split and the alternative split with a matter-only pressure.

    Args:
        matter: Matter part assembled from the matter energy.
        maxwell: Maxwell part assembled from the Maxwell energy.
        alt_matter: Matter block of the alternative split.
        alt_field: Remainder of the alternative split.
    """

    matter: SEMTensor
    maxwell: SEMTensor
    alt_matter: SEMTensor
    alt_field: SEMTensor


@dataclass(frozen = True, eq = False)
class BalanceResiduals:
    """Energy, momentum, continuity and Maxwell residuals on a grid.

    Args:
        energy: Projected energy balance.
        momentum: Projected momentum balance (1-form).
        continuity_mass: Divergence of rho u.
        continuity_entropy: Divergence of s u.
        maxwell_matter: First Maxwell-in-matter residual (1-form).
        divergence: Unprojected divergence of the full stress-energy.
        energy_projection: ``-u . div T``.
        momentum_projection: ``P . div T``.
        cauchy_advection: Lie derivative of the Cauchy tensor along u.
    """

    energy: np.ndarray
    momentum: np.ndarray
    continuity_mass: np.ndarray
    continuity_entropy: np.ndarray
    maxwell_matter: np.ndarray
    divergence: np.ndarray
    energy_projection: np.ndarray
    momentum_projection: np.ndarray
    cauchy_advection: Optional[np.ndarray] = None

    def named(self) -> dict:
        values = {
            "energy": self.energy,
            "momentum": self.momentum,
            "continuity_mass": self.continuity_mass,
            "continuity_entropy": self.continuity_entropy,
            "maxwell_matter": self.maxwell_matter,
            "divergence": self.divergence,
            "energy_projection_mismatch": self.energy - self.energy_projection,
            "momentum_projection_mismatch": self.momentum - self.momentum_projection
        }
        if self.cauchy_advection is not None:
            values["cauchy_advection"] = self.cauchy_advection
        return values


@dataclass(frozen = True, eq = False)
class MaxwellMatterResiduals:
    """Both writings of Maxwell's equations in matter.

    Args:
        first: ``-delta(Y_flat) - rho q u_flat`` (1-form).
        second: ``d(*Y_flat) + q rho i_u mu`` (n-form).
        relation: ``second + *first``, which vanishes identically.
    """

    first: np.ndarray
    second: np.ndarray
    relation: np.ndarray


@dataclass(frozen = True, eq = False)
class PonderomotiveResiduals:
    """Balance written with the ponderomotive force.

    Args:
        force: Ponderomotive force (1-form).
        residual: ``div T_f - f``.
        mismatch: ``residual - div T``.
    """

    force: np.ndarray
    residual: np.ndarray
    mismatch: np.ndarray


@dataclass(frozen = True, eq = False)
class BoundaryResiduals:
    """Free-boundary conditions on one grid face.

    Args:
        axis: Face axis.
        side: ``low`` or ``high``.
        normal_velocity: ``g(u, n)``.
        traction: ``t_ec(., n) - p n`` (1-form).
        normal_displacement: ``i_n D``.
        magnetic: ``i_n i_u *H``.
    """

    axis: int
    side: str
    normal_velocity: np.ndarray
    traction: np.ndarray
    normal_displacement: np.ndarray
    magnetic: np.ndarray

    def named(self) -> dict:
        prefix = f"face{self.axis}_{self.side}"
        return {
            f"{prefix}.normal_velocity": self.normal_velocity,
            f"{prefix}.traction": self.traction,
            f"{prefix}.normal_displacement": self.normal_displacement,
            f"{prefix}.magnetic": self.magnetic
        }


def sem_eb(model: ConstitutiveModel, point: FieldPoint, part: str = "total") -> SEMTensor:
    """Stress-energy in terms of E, B and the energy partials.

    Args:
        model: Constitutive model.
        point: Field data.
        part: Energy part (``total``, ``matter`` or ``maxwell``).
    """

    state = point.matter_state()
    evaluation = model.evaluate(state, part)
    return SEMTensor(value = _assemble_eb(evaluation, state), form = "eb_form")


def sem_faraday(model: ConstitutiveModel, point: FieldPoint, part: str = "total") -> SEMTensor:
    """Stress-energy in terms of F with partials from the Faraday adapter.

    Args:
        model: Constitutive model.
        point: Field data.
        part: Energy part.
    """

    adapter = faraday_adapter(
        model = model,
        rho = point.rho,
        s = point.s,
        faraday = point.faraday,
        frame = point.frame,
        metric = point.metric,
        orientation = point.orientation,
        cauchy = point.cauchy,
        part = part
    )
    u = point.frame.u
    c = point.frame.c
    u_flat = point.frame.flat(point.metric)
    projector, _ = projection_tensor(point.frame, point.metric)
    along_u = np.einsum("...a,...a->...", adapter.d_u.components, u.components)
    pressure = point.rho * adapter.d_rho + point.s * adapter.d_s - adapter.energy
    components = (
        _scale(adapter.energy - along_u, tensor_product(u, u_flat).components) / c ** 2
        - tensor_product(u, adapter.d_u).components
        + trace_tensor_product(adapter.d_F, as_form(point.faraday, check = False)).components
        + _scale(pressure, projector.components)
    )
    if point.cauchy is not None and adapter.d_c is not None:
        components = components - elastic_stress(adapter.base, point.matter_state()).components
    value = TensorValue(components = components, variance = (UP, DOWN), dim = point.metric.dim)
    return SEMTensor(value = value, form = "faraday_form")


def sem_material(model: ConstitutiveModel, point: FieldPoint) -> SEMTensor:
    """Stress-energy from the transported variables (w, r, sigma, A, F).

    With ``N = sqrt(-g(w, w))`` the transported densities are
    ``r = c rho / N`` and ``sigma = c s / N``; the Lagrangian coefficient is
    ``-eps - q r A.w``. Partials are the closed-form chain-rule expressions.

    Args:
        model: Constitutive model.
        point: Field data, optionally with w and A.
    """

    metric = point.metric
    c = point.frame.c
    w = point.generator()
    norm = _generator_norm(w, metric)
    u_flat = point.frame.flat(metric)
    potential = _potential_or_zero(point)
    faraday = as_form(point.faraday, check = False)

    state = point.matter_state()
    evaluation = model.evaluate(state)
    r = c * point.rho / norm
    sigma = c * point.s / norm
    coupling = np.einsum("...a,...a->...", potential.components, w.components)
    lagrangian = -evaluation.energy - point.q * r * coupling

    k = metric.dim - 3
    pairing_e = full_contraction(evaluation.d_E, state.E)
    pairing_b = full_contraction(evaluation.d_B, state.B, normalized = True)
    electric = np.einsum("...b,...ab->...a", evaluation.d_E.components, faraday.components)
    magnetic = _multivector_slot_contraction(
        evaluation.d_B.components,
        hodge_star(faraday, metric, point.orientation).components,
        k
    )
    d_w = (
        _scale(
            (evaluation.d_rho * point.rho + evaluation.d_s * point.s - pairing_e - pairing_b) / (c * norm),
            u_flat.components
        )
        + _scale(1.0 / norm, electric + magnetic)
        - _scale(point.q * r, potential.components)
    )
    d_r = -evaluation.d_rho * norm / c - point.q * coupling
    d_sigma = -evaluation.d_s * norm / c
    d_potential = _scale(-point.q * r, w.components)

    adapter = faraday_adapter(
        model = model,
        rho = point.rho,
        s = point.s,
        faraday = faraday,
        frame = point.frame,
        metric = metric,
        orientation = point.orientation,
        cauchy = point.cauchy
    )
    d_faraday = -adapter.d_F.components
    components = _material_assembly(
        lagrangian = lagrangian,
        r = r,
        sigma = sigma,
        d_r = d_r,
        d_sigma = d_sigma,
        w = w.components,
        d_w = d_w,
        potential = potential.components,
        d_potential = d_potential,
        faraday = faraday.components,
        d_faraday = d_faraday,
        dim = metric.dim
    )
    if point.cauchy is not None and evaluation.d_c is not None:
        components = components - elastic_stress(evaluation, state).components
    value = TensorValue(components = components, variance = (UP, DOWN), dim = metric.dim)
    return SEMTensor(value = value, form = "phi_form")


def sem_material_fd(model: ConstitutiveModel, point: FieldPoint, step: float = FD_STEP) -> SEMTensor:
    """Material-form stress-energy with every Lagrangian partial taken by central differences.

    Args:
        model: Constitutive model.
        point: Field data, optionally with w and A.
        step: Central-difference step.
    """

    metric = point.metric
    dim = metric.dim
    c = point.frame.c
    w = point.generator().components
    norm = _generator_norm(point.generator(), metric)
    r = c * point.rho / norm
    sigma = c * point.s / norm
    potential = _potential_or_zero(point).components
    faraday = as_form(point.faraday, check = False).components

    def lagrangian(
        w_value: np.ndarray = w,
        r_value: np.ndarray = r,
        sigma_value: np.ndarray = sigma,
        potential_value: np.ndarray = potential,
        faraday_value: np.ndarray = faraday
    ) -> np.ndarray:
        return _material_lagrangian(
            model = model,
            point = point,
            w = w_value,
            r = r_value,
            sigma = sigma_value,
            potential = potential_value,
            faraday = faraday_value
        )

    d_w = np.zeros_like(w)
    d_potential = np.zeros_like(potential)
    for axis in range(dim):
        basis = np.zeros(dim)
        basis[axis] = 1.0
        d_w[..., axis] = central_difference(lambda delta: lagrangian(w_value = w + delta * basis), step)
        d_potential[..., axis] = central_difference(
            lambda delta: lagrangian(potential_value = potential + delta * basis),
            step
        )
    d_r = central_difference(lambda delta: lagrangian(r_value = r + delta), step)
    d_sigma = central_difference(lambda delta: lagrangian(sigma_value = sigma + delta), step)
    d_faraday = np.zeros_like(faraday)
    for first in range(dim):
        for second in range(first + 1, dim):
            basis = antisymmetric_basis(dim = dim, indices = (first, second))
            value = central_difference(lambda delta: lagrangian(faraday_value = faraday + delta * basis), step)
            d_faraday[..., first, second] = value
            d_faraday[..., second, first] = -value

    components = _material_assembly(
        lagrangian = lagrangian(),
        r = r,
        sigma = sigma,
        d_r = d_r,
        d_sigma = d_sigma,
        w = w,
        d_w = d_w,
        potential = potential,
        d_potential = d_potential,
        faraday = faraday,
        d_faraday = d_faraday,
        dim = dim
    )
    if point.cauchy is not None:
        state = point.matter_state()
        evaluation = model.evaluate(state)
        if evaluation.d_c is not None:
            components = components - elastic_stress(evaluation, state).components
    value = TensorValue(components = components, variance = (UP, DOWN), dim = dim)
    return SEMTensor(value = value, form = "phi_form")


def sem_splits(model: ConstitutiveModel, point: FieldPoint) -> SEMSplits:
    """Both published splittings of the full stress-energy.

    The alternative matter block is
    ``(e_m - d_E^m . E) u u / c^2 + (rho e_rho + s e_s - e_m) P`` and the
    alternative field block is assembled on its own as
    ``(e_M - d_E^M . E) u u / c^2 + (u (x) S + S_sharp (x) u_flat) / c
    + d_E (x) E - B_sharp (x)tr d_B_flat + (d_B : B - e_M) P``, with ``S``,
    ``d_E`` and ``d_B`` taken from the total energy. Neither block is derived
    from the other.

    Args:
        model: Constitutive model.
        point: Field data.
    """

    state = point.matter_state()
    matter_eval = model.evaluate(state, "matter")
    maxwell_eval = model.evaluate(state, "maxwell")
    total_eval = matter_eval + maxwell_eval
    matter = _assemble_eb(matter_eval, state)
    maxwell = _assemble_eb(maxwell_eval, state)

    frame = point.frame
    c = frame.c
    metric = point.metric
    u_flat = frame.flat(metric)
    flow = tensor_product(frame.u, u_flat).components
    projector, _ = projection_tensor(frame, metric)

    pairing_e = full_contraction(matter_eval.d_E, state.E)
    pressure = point.rho * matter_eval.d_rho + point.s * matter_eval.d_s - matter_eval.energy
    alt_matter = _scale(matter_eval.energy - pairing_e, flow) / c ** 2 + _scale(pressure, projector.components)
    if state.cauchy is not None and matter_eval.d_c is not None:
        alt_matter = alt_matter - elastic_stress(matter_eval, state).components

    flux = energy_flux(total_eval, state)
    field_pressure = full_contraction(total_eval.d_B, state.B, normalized = True) - maxwell_eval.energy
    alt_field = (
        _scale(maxwell_eval.energy - full_contraction(maxwell_eval.d_E, state.E), flow) / c ** 2
        + (tensor_product(frame.u, flux).components + tensor_product(sharp(flux, metric), u_flat).components) / c
        + tensor_product(total_eval.d_E, state.E).components
        - _magnetic_stress(total_eval, state)
        + _scale(field_pressure, projector.components)
    )
    dim = metric.dim
    return SEMSplits(
        matter = SEMTensor(value = matter, form = "eb_form"),
        maxwell = SEMTensor(value = maxwell, form = "eb_form"),
        alt_matter = SEMTensor(
            value = TensorValue(components = alt_matter, variance = (UP, DOWN), dim = dim),
            form = "eb_form"
        ),
        alt_field = SEMTensor(
            value = TensorValue(components = alt_field, variance = (UP, DOWN), dim = dim),
            form = "eb_form"
        )
    )


def coupling_stress(evaluation: ConstitutiveEval, state: MatterState) -> TensorValue:
    """Electromagnetic plus elastic stress ``-d_E (x) E + B_sharp (x)tr d_B_flat + t_el``.

    Args:
        evaluation: Energy evaluation.
        state: Matter state.
    """

    components = (
        -tensor_product(evaluation.d_E, state.E).components
        + _magnetic_stress(evaluation, state)
    )
    if state.cauchy is not None and evaluation.d_c is not None:
        components = components + elastic_stress(evaluation, state).components
    return TensorValue(components = components, variance = (UP, DOWN), dim = state.dim)


def energy_flux(evaluation: ConstitutiveEval, state: MatterState) -> FormValue:
    """Poynting 1-form ``S`` of a model: ``(-1)^n (1/c) i_{E_sharp} i_u *(d_B)_flat``.

    Args:
        evaluation: Energy evaluation.
        state: Matter state.
    """

    magnetic = as_form(lower_all(evaluation.d_B, state.metric), check = False)
    return poynting(state.E, magnetic, state.frame, state.metric, state.orientation)


def balance_residuals(model: ConstitutiveModel, state: ContinuumState) -> BalanceResiduals:
    """Projected energy and momentum balance, continuity and Maxwell residuals.

    ``S' = c S`` is the Poynting vector entering the balance equations and
    ``t`` the coupling stress; the energy residual is
    ``div(e_tot u + S') + g(S', a)/c^2 - t:nabla u + p div u`` and the
    momentum residual
    ``(e_tot + p) a/c^2 + P div(S' (x) u + u (x) S')/c^2 + u (t:nabla u)/c^2 - div t + P grad p``.

    Args:
        model: Constitutive model.
        state: Continuum fields on a grid.
    """

    _require_stencil(state.grid, depth = 2)
    point = state.point
    metric_field = state.metric_field
    metric = state.metric
    matter_state = point.matter_state()
    evaluation = model.evaluate(matter_state)
    pressure, total_energy = pressure_and_energy(evaluation, matter_state)
    frame = point.frame
    c = frame.c
    u = frame.u
    u_flat = frame.flat(metric).components

    flux = energy_flux(evaluation, matter_state).scaled(c)
    flux_vector = sharp(flux, metric)
    nabla_u = covariant_derivative(state.field(u), metric_field).components
    acceleration = np.einsum("...ab,...b->...a", nabla_u, u.components)
    acceleration_flat = np.einsum("...ab,...b->...a", metric.g, acceleration)
    divergence_u = np.einsum("...aa->...", nabla_u)
    stress = coupling_stress(evaluation, matter_state)
    work = np.einsum("...mn,...nm->...", stress.components, nabla_u)

    transported = TensorValue(
        components = _scale(total_energy, u.components) + flux_vector.components,
        variance = (UP,),
        dim = metric.dim
    )
    energy = (
        _divergence(state, transported)
        + np.einsum("...a,...a->...", flux.components, acceleration) / c ** 2
        - work
        + pressure * divergence_u
    )

    mixed = tensor_product(u, flux) + tensor_product(flux_vector, frame.flat(metric))
    momentum = (
        _scale(total_energy + pressure, acceleration_flat) / c ** 2
        + _project(point, _divergence(state, mixed)) / c ** 2
        + _scale(work, u_flat) / c ** 2
        - _divergence(state, stress)
        + _project(point, gradient_array(components = pressure, grid = state.grid))
    )

    divergence = _divergence(state, sem_eb(model, point).value)
    energy_projection = -np.einsum("...a,...a->...", u.components, divergence)
    momentum_projection = _project(point, divergence)

    cauchy_advection = None
    if point.cauchy is not None:
        cauchy_advection = lie_derivative(
            zeta = state.field(u),
            kappa = state.field(point.cauchy),
            metric_field = metric_field
        ).components

    return BalanceResiduals(
        energy = energy,
        momentum = momentum,
        continuity_mass = _divergence(state, u.scaled(point.rho)),
        continuity_entropy = _divergence(state, u.scaled(point.s)),
        maxwell_matter = maxwell_matter_residual(model, state).first,
        divergence = divergence,
        energy_projection = energy_projection,
        momentum_projection = momentum_projection,
        cauchy_advection = cauchy_advection
    )


def maxwell_matter_residual(model: ConstitutiveModel, state: ContinuumState) -> MaxwellMatterResiduals:
    """Maxwell's equations in matter in their codifferential and exterior writings.

    Args:
        model: Constitutive model.
        state: Continuum fields on a grid.
    """

    _require_stencil(state.grid, depth = 1)
    point = state.point
    metric = state.metric
    orientation = point.orientation
    adapter = faraday_adapter(
        model = model,
        rho = point.rho,
        s = point.s,
        faraday = point.faraday,
        frame = point.frame,
        metric = metric,
        orientation = orientation,
        cauchy = point.cauchy
    )
    y_flat = state.field(as_form(lower_all(adapter.d_F, metric), check = False))
    charge = point.q * point.rho
    source = _scale(charge, point.frame.flat(metric).components)
    first = -codifferential(y_flat, state.metric_field, orientation).components - source

    dual = hodge_field(y_flat, state.metric_field, orientation)
    current = interior_product(point.frame.u, volume_form(metric, orientation))
    second = exterior_derivative(dual).components + _scale(charge, current.components)

    first_form = FormValue(components = first, dim = metric.dim, degree = 1, check = False)
    relation = second + hodge_star(first_form, metric, orientation).components
    return MaxwellMatterResiduals(first = first, second = second, relation = relation)


def ponderomotive_residuals(model: ConstitutiveModel, state: ContinuumState) -> PonderomotiveResiduals:
    """Balance written as ``div T_f = f`` with the ponderomotive force.

    ``T_f = e_m u u/c^2 + (rho e_m,rho + s e_m,s - e_m) P - t_el`` and
    ``f = div(u (x) w_m) - Y_m : nabla F / 2 + q rho i_u F`` with
    ``w_m = -(-1)^n (i_{X_E} i_u *B + i_{E_sharp} i_u *X_B_flat) / c^2``
    built from the matter partials.

    Args:
        model: Constitutive model.
        state: Continuum fields on a grid.
    """

    _require_stencil(state.grid, depth = 1)
    point = state.point
    metric = state.metric
    orientation = point.orientation
    frame = point.frame
    c = frame.c
    n = metric.dim - 1
    matter_state = point.matter_state()
    matter = model.evaluate(matter_state, "matter")

    star_b = hodge_star(matter_state.B, metric, orientation)
    first = interior_product(matter.d_E, interior_product(frame.u, star_b))
    matter_h = as_form(lower_all(matter.d_B, metric), check = False)
    second = interior_product(
        raise_all(matter_state.E, metric),
        interior_product(frame.u, hodge_star(matter_h, metric, orientation))
    )
    omega = (first + second).scaled(-((-1) ** n) / c ** 2)

    adapter = faraday_adapter(
        model = model,
        rho = point.rho,
        s = point.s,
        faraday = point.faraday,
        frame = frame,
        metric = metric,
        orientation = orientation,
        cauchy = point.cauchy,
        part = "matter"
    )
    faraday = as_form(point.faraday, check = False)
    nabla_faraday = covariant_derivative(state.field(faraday), state.metric_field).components
    lorentz = interior_product(frame.u, faraday).components
    force = (
        _divergence(state, tensor_product(frame.u, omega))
        - 0.5 * np.einsum("...ab,...abn->...n", adapter.d_F.components, nabla_faraday)
        + _scale(point.q * point.rho, lorentz)
    )

    projector, _ = projection_tensor(frame, metric)
    pressure = point.rho * matter.d_rho + point.s * matter.d_s - matter.energy
    force_free = (
        _scale(matter.energy, tensor_product(frame.u, frame.flat(metric)).components) / c ** 2
        + _scale(pressure, projector.components)
    )
    if matter_state.cauchy is not None and matter.d_c is not None:
        force_free = force_free - elastic_stress(matter, matter_state).components
    force_free_divergence = _divergence(
        state,
        TensorValue(components = force_free, variance = (UP, DOWN), dim = metric.dim)
    )
    residual = force_free_divergence - force
    divergence = _divergence(state, sem_eb(model, point).value)
    return PonderomotiveResiduals(force = force, residual = residual, mismatch = residual - divergence)


def boundary_residuals(model: ConstitutiveModel, state: ContinuumState, axis: int, side: str) -> BoundaryResiduals:
    """Free-boundary residuals on the grid face ``x^axis = const``.

    The outward unit normal is ``n = +-dx^axis / sqrt(g^{axis axis})``.

    Args:
        model: Constitutive model.
        state: Continuum fields on a grid.
        axis: Face axis.
        side: ``low`` or ``high``.
    """

    grid = state.grid
    if axis < 0 or axis >= grid.dim or grid.resolution[axis] == 1:
        raise GridError(f"axis {axis} has no boundary face")
    if side not in ("low", "high"):
        raise GridError(f"face side must be low or high, got {side!r}")
    point = state.point
    metric = state.metric
    matter_state = point.matter_state()
    evaluation = model.evaluate(matter_state)
    pressure, _ = pressure_and_energy(evaluation, matter_state)

    normal = normal_covector(metric, axis = axis, sign = 1.0 if side == "high" else -1.0)
    values = boundary_values(
        evaluation = evaluation,
        state = matter_state,
        normal = normal,
        pressure = pressure
    )
    index = [slice(None)] * len(grid.shape)
    index[axis] = -1 if side == "high" else 0
    face = tuple(index)
    return BoundaryResiduals(
        axis = axis,
        side = side,
        normal_velocity = values["normal_velocity"][face],
        traction = values["traction"][face],
        normal_displacement = values["normal_displacement"][face],
        magnetic = values["magnetic"][face]
    )


def normal_covector(metric: MetricValue, axis: int, sign: float = 1.0) -> FormValue:
    """Unit conormal ``sign dx^axis / sqrt|g^{axis axis}|``.

    Args:
        metric: Metric.
        axis: Coordinate axis.
        sign: Orientation sign.
    """

    norm = metric.ginv[..., axis, axis]
    if np.any(np.abs(norm) < 1e-14):
        raise GeometryError(f"face x^{axis} = const is null")
    components = np.zeros(metric.batch_shape + (metric.dim,))
    components[..., axis] = sign / np.sqrt(np.abs(norm))
    return FormValue(components = components, dim = metric.dim, degree = 1, check = False)


def boundary_values(
    evaluation: ConstitutiveEval,
    state: MatterState,
    normal: FormValue,
    pressure: np.ndarray
) -> dict:
    """Pointwise ``g(u, n)``, traction, ``i_n D`` and ``i_n i_u *H``.

    Args:
        evaluation: Energy evaluation.
        state: Matter state.
        normal: Unit conormal.
        pressure: Pressure.
    """

    metric = state.metric
    normal_vector = sharp(normal, metric)
    stress = coupling_stress(evaluation, state)
    fields = derived_fields(evaluation, evaluation, metric)
    traction = np.einsum("...m,...mn->...n", normal.components, stress.components) - _scale(
        pressure,
        normal.components
    )
    star_h = hodge_star(fields.H, metric, state.orientation)
    magnetic = interior_product(normal_vector, interior_product(state.frame.u, star_h))
    return {
        "normal_velocity": np.einsum("...a,...a->...", state.frame.u.components, normal.components),
        "traction": traction,
        "normal_displacement": np.einsum("...a,...a->...", normal_vector.components, fields.D.components),
        "magnetic": magnetic.components
    }


def _assemble_eb(evaluation: ConstitutiveEval, state: MatterState) -> TensorValue:
    metric = state.metric
    frame = state.frame
    c = frame.c
    u_flat = frame.flat(metric)
    pressure, total_energy = pressure_and_energy(evaluation, state)
    flux = energy_flux(evaluation, state)
    projector, _ = projection_tensor(frame, metric)
    components = (
        _scale(total_energy, tensor_product(frame.u, u_flat).components) / c ** 2
        + (tensor_product(frame.u, flux).components + tensor_product(sharp(flux, metric), u_flat).components) / c
        + tensor_product(evaluation.d_E, state.E).components
        - _magnetic_stress(evaluation, state)
        + _scale(pressure, projector.components)
    )
    if state.cauchy is not None and evaluation.d_c is not None:
        components = components - elastic_stress(evaluation, state).components
    return TensorValue(components = components, variance = (UP, DOWN), dim = metric.dim)


def _magnetic_stress(evaluation: ConstitutiveEval, state: MatterState) -> np.ndarray:
    dim = state.dim
    if state.B.degree == 0:
        return np.zeros(state.shape + (dim, dim))
    magnetic = as_form(lower_all(evaluation.d_B, state.metric), check = False)
    return trace_tensor_product(raise_all(state.B, state.metric), magnetic).components


def _material_assembly(
    lagrangian: np.ndarray,
    r: np.ndarray,
    sigma: np.ndarray,
    d_r: np.ndarray,
    d_sigma: np.ndarray,
    w: np.ndarray,
    d_w: np.ndarray,
    potential: np.ndarray,
    d_potential: np.ndarray,
    faraday: np.ndarray,
    d_faraday: np.ndarray,
    dim: int
) -> np.ndarray:
    identity = np.broadcast_to(np.eye(dim), np.shape(lagrangian) + (dim, dim))
    return (
        _scale(lagrangian - r * d_r - sigma * d_sigma, identity)
        + np.einsum("...a,...b->...ab", w, d_w)
        - np.einsum("...a,...b->...ab", d_potential, potential)
        - np.einsum("...ag,...bg->...ab", d_faraday, faraday)
    )


def _material_lagrangian(
    model: ConstitutiveModel,
    point: FieldPoint,
    w: np.ndarray,
    r: np.ndarray,
    sigma: np.ndarray,
    potential: np.ndarray,
    faraday: np.ndarray
) -> np.ndarray:
    metric = point.metric
    c = point.frame.c
    generator = TensorValue(components = w, variance = (UP,), dim = metric.dim)
    norm = _generator_norm(generator, metric)
    frame = ObserverFrame(
        u = TensorValue(components = _scale(c / norm, w), variance = (UP,), dim = metric.dim),
        c = c
    )
    adapter = faraday_adapter(
        model = model,
        rho = r * norm / c,
        s = sigma * norm / c,
        faraday = FormValue(components = faraday, dim = metric.dim, degree = 2, check = False),
        frame = frame,
        metric = metric,
        orientation = point.orientation,
        cauchy = point.cauchy
    )
    coupling = np.einsum("...a,...a->...", potential, w)
    return -adapter.energy - point.q * r * coupling


def _generator_norm(w: TensorValue, metric: MetricValue) -> np.ndarray:
    square = np.einsum("...a,...ab,...b->...", w.components, metric.g, w.components)
    if np.any(square >= 0):
        raise GeometryError("w is not timelike")
    return np.sqrt(-square)


def _potential_or_zero(point: FieldPoint) -> FormValue:
    if point.potential is not None:
        return point.potential
    return FormValue(
        components = np.zeros(point.faraday.batch_shape + (point.metric.dim,)),
        dim = point.metric.dim,
        degree = 1,
        check = False
    )


def _multivector_slot_contraction(multivector: np.ndarray, dual: np.ndarray, k: int) -> np.ndarray:
    letters = "bcdefghi"[:k]
    return np.einsum(f"...{letters},...a{letters}->...a", multivector, dual) / math.factorial(k)


def _divergence(state: ContinuumState, value: TensorValue) -> np.ndarray:
    return covariant_divergence(state.field(value), state.metric_field).components


def _project(point: FieldPoint, covector_components: np.ndarray) -> np.ndarray:
    u = point.frame.u.components
    u_flat = point.frame.flat(point.metric).components
    along = np.einsum("...a,...a->...", u, covector_components)
    return covector_components + _scale(along, u_flat) / point.frame.c ** 2


def _scale(factor, components: np.ndarray) -> np.ndarray:
    factor = np.asarray(factor, dtype = float)
    extra = np.ndim(components) - np.ndim(factor)
    return factor.reshape(np.shape(factor) + (1,) * extra) * components


def _require_stencil(grid: ChartGrid, depth: int) -> None:
    needed = 2 * depth + 3
    for axis, count in enumerate(grid.resolution):
        if count != 1 and count < needed:
            raise GridError(f"axis {axis} has {count} points; nested derivatives need at least {needed}")
