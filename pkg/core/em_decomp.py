"""Observer-relative split of electromagnetic quantities.

Given a world-velocity ``u`` with ``g(u, u) = -c**2`` the Faraday form splits
into an electric 1-form ``E`` and a magnetic (n-2)-form ``B``; the Lagrangian
derivative ``Theta`` splits into ``D`` and ``H`` the same way. Everything here
is pointwise and works on batched values.
"""

import logging

from dataclasses import dataclass

import numpy as np

from core.exceptions import GeometryError
from core.exceptions import TensorShapeError
from core.tensor_core import DOWN
from core.tensor_core import POSITIVE
from core.tensor_core import UP
from core.tensor_core import FormValue
from core.tensor_core import MetricValue
from core.tensor_core import Orientation
from core.tensor_core import TensorValue
from core.tensor_core import as_form
from core.tensor_core import flat
from core.tensor_core import form_inner
from core.tensor_core import hodge_star
from core.tensor_core import interior_product
from core.tensor_core import lower_all
from core.tensor_core import raise_all
from core.tensor_core import sharp
from core.tensor_core import tensor_product
from core.tensor_core import trace_tensor_product
from core.tensor_core import vector
from core.tensor_core import wedge


logger = logging.getLogger(__name__)

FRAME_TOLERANCE = 1e-10
TRANSVERSE_TOLERANCE = 1e-10


@dataclass(frozen = True, eq = False)
class ObserverFrame:
    """World-velocity and the speed of light it is normalized against.

    Args:
        u: Vector with ``g(u, u) = -c**2``.
        c: Speed of light.
    """

    u: TensorValue
    c: float = 1.0

    def __post_init__(self) -> None:
        if self.u.variance != (UP,):
            raise TensorShapeError(f"world-velocity must be a vector, got variance {self.u.variance}")
        if not self.c > 0:
            raise GeometryError(f"speed of light must be positive, got {self.c}")

    def flat(self, metric: MetricValue) -> FormValue:
        return flat(self.u, metric)

    def normalization_defect(self, metric: MetricValue) -> float:
        """Largest ``|g(u, u) + c**2|`` over the batch.

        Args:
            self: ObserverFrame instance.
            metric: Metric.
        """

        norm = np.einsum("...a,...ab,...b->...", self.u.components, metric.g, self.u.components)
        return float(np.max(np.abs(norm + self.c ** 2)))

    def validate(self, metric: MetricValue) -> None:
        if self.normalization_defect(metric) > FRAME_TOLERANCE * max(1.0, self.c ** 2):
            raise GeometryError("world-velocity is not normalized to g(u, u) = -c^2")


@dataclass(frozen = True, eq = False)
class EMSplit:
    """Electric 1-form and magnetic (n-2)-form seen by one observer.

    Args:
        E: Electric field.
        B: Magnetic field.
    """

    E: FormValue
    B: FormValue


@dataclass(frozen = True, eq = False)
class DHSplit:
    """Displacement 1-form and magnetic intensity (n-2)-form.

    Args:
        D: Electric displacement.
        H: Magnetic intensity.
    """

    D: FormValue
    H: FormValue


def normalize_velocity(w: TensorValue, metric: MetricValue, c: float = 1.0) -> ObserverFrame:
    """Rescale a timelike vector to ``u = c w / sqrt(-g(w, w))``.

    Args:
        w: Timelike vector (batched).
        metric: Metric.
        c: Speed of light.
    """

    norm = np.einsum("...a,...ab,...b->...", w.components, metric.g, w.components)
    spacelike = ~(norm < 0)
    if np.any(spacelike):
        hits = np.argwhere(np.atleast_1d(spacelike))
        point = tuple(hits[0]) if np.ndim(spacelike) else None
        raise GeometryError("w is not timelike", point)
    factor = c / np.sqrt(-norm)
    u = vector(w.components * factor[..., None], dim = w.dim)
    return ObserverFrame(u = u, c = c)


def projection_tensor(frame: ObserverFrame, metric: MetricValue) -> tuple[TensorValue, TensorValue]:
    """Projector ``P = delta + u (x) u_flat / c^2`` and its lowered form.

    Args:
        frame: Observer frame.
        metric: Metric.
    """

    dim = metric.dim
    u_flat = frame.flat(metric)
    identity = np.broadcast_to(np.eye(dim), frame.u.batch_shape + (dim, dim))
    mixed = identity + tensor_product(frame.u, u_flat).components / frame.c ** 2
    lowered = metric.g + tensor_product(u_flat, u_flat).components / frame.c ** 2
    return (
        TensorValue(components = mixed, variance = (UP, DOWN), dim = dim),
        TensorValue(components = lowered, variance = (DOWN, DOWN), dim = dim)
    )


def transverse_defect(form: FormValue, frame: ObserverFrame) -> float:
    """Largest component of ``i_u form``; 0-forms count as transverse.

    Args:
        form: Form to test.
        frame: Observer frame.
    """

    form = as_form(form, check = False)
    if form.degree == 0:
        return 0.0
    contracted = interior_product(frame.u, form).components
    return float(np.max(np.abs(contracted))) if contracted.size else 0.0


def eb_decompose(
    faraday: FormValue,
    frame: ObserverFrame,
    metric: MetricValue,
    orientation: Orientation = POSITIVE
) -> EMSplit:
    """``E = -(1/c) i_u F`` and ``B = -(1/c) i_u *F``.

    Args:
        faraday: Faraday 2-form.
        frame: Observer frame.
        metric: Metric.
        orientation: Orientation sign.
    """

    faraday = as_form(faraday, check = False)
    electric = interior_product(frame.u, faraday).scaled(-1.0 / frame.c)
    magnetic = interior_product(
        frame.u,
        hodge_star(faraday, metric, orientation)
    ).scaled(-1.0 / frame.c)
    return EMSplit(E = electric, B = magnetic)


def eb_reconstruct(
    split: EMSplit,
    frame: ObserverFrame,
    metric: MetricValue,
    orientation: Orientation = POSITIVE
) -> FormValue:
    """``F = (1/c) u_flat ^ E - (1/c) *(u_flat ^ B)``.

    Args:
        split: Transverse electric and magnetic fields.
        frame: Observer frame.
        metric: Metric.
        orientation: Orientation sign.
    """

    _require_transverse(split.E, frame, "E")
    _require_transverse(split.B, frame, "B")
    u_flat = frame.flat(metric)
    electric = _wedge_flat(u_flat, split.E)
    magnetic = hodge_star(_wedge_flat(u_flat, split.B), metric, orientation)
    return (electric - magnetic).scaled(1.0 / frame.c)


def dh_extract(
    theta: FormValue,
    frame: ObserverFrame,
    metric: MetricValue,
    orientation: Orientation = POSITIVE
) -> DHSplit:
    """``D = -(1/c) i_u *Theta`` and ``H = (1/c) i_u Theta``.

    Args:
        theta: Lagrangian derivative as an (n-1)-form.
        frame: Observer frame.
        metric: Metric.
        orientation: Orientation sign.
    """

    theta = as_form(theta, check = False)
    displacement = interior_product(
        frame.u,
        hodge_star(theta, metric, orientation)
    ).scaled(-1.0 / frame.c)
    intensity = interior_product(frame.u, theta).scaled(1.0 / frame.c)
    return DHSplit(D = displacement, H = intensity)


def dh_assemble(
    split: DHSplit,
    frame: ObserverFrame,
    metric: MetricValue,
    orientation: Orientation = POSITIVE
) -> FormValue:
    """``Theta = -(1/c) *(u_flat ^ D) - (1/c) u_flat ^ H``.

    Args:
        split: Transverse displacement and intensity.
        frame: Observer frame.
        metric: Metric.
        orientation: Orientation sign.
    """

    _require_transverse(split.D, frame, "D")
    _require_transverse(split.H, frame, "H")
    u_flat = frame.flat(metric)
    displacement = hodge_star(_wedge_flat(u_flat, split.D), metric, orientation)
    intensity = _wedge_flat(u_flat, split.H)
    return (displacement + intensity).scaled(-1.0 / frame.c)


def lagrangian_f_multivector(
    split: DHSplit,
    frame: ObserverFrame,
    metric: MetricValue,
    orientation: Orientation = POSITIVE
) -> TensorValue:
    """Bivector ``-(1/c) u ^ D_sharp + (1/c) *(u ^ H_sharp)`` (density factor implicit).

    Args:
        split: Displacement and intensity.
        frame: Observer frame.
        metric: Metric.
        orientation: Orientation sign.
    """

    u_flat = frame.flat(metric)
    electric = _wedge_flat(u_flat, split.D)
    magnetic = hodge_star(_wedge_flat(u_flat, split.H), metric, orientation)
    return raise_all((magnetic - electric).scaled(1.0 / frame.c), metric)


def multivector_to_form(
    multivector: TensorValue,
    metric: MetricValue,
    orientation: Orientation = POSITIVE
) -> FormValue:
    """Map a k-vector density to the (n+1-k)-form ``*(X_flat)``.

    Args:
        multivector: Fully contravariant antisymmetric tensor.
        metric: Metric.
        orientation: Orientation sign.
    """

    lowered = _lower_multivector(multivector, metric)
    return hodge_star(lowered, metric, orientation)


def poynting(
    electric: FormValue,
    magnetic_partial: FormValue,
    frame: ObserverFrame,
    metric: MetricValue,
    orientation: Orientation = POSITIVE
) -> FormValue:
    """Poynting 1-form ``(-1)^n (1/c) i_{E_sharp} i_u *X_flat``.

    Args:
        electric: Electric 1-form E.
        magnetic_partial: The flat of the (n-2)-multivector X, e.g. B for Maxwell.
        frame: Observer frame.
        metric: Metric.
        orientation: Orientation sign.
    """

    n = metric.dim - 1
    dual = hodge_star(as_form(magnetic_partial, check = False), metric, orientation)
    inner = interior_product(frame.u, dual)
    result = interior_product(sharp(electric, metric), inner)
    return result.scaled((-1) ** n / frame.c)


def maxwell_lagrangian(faraday: FormValue, metric: MetricValue) -> np.ndarray:
    """Coefficient of the volume form in ``-(1/2) F ^ *F``.

    Args:
        faraday: Faraday 2-form.
        metric: Metric.
    """

    return -0.5 * form_inner(faraday, faraday, metric)


def maxwell_lagrangian_eb(split: EMSplit, metric: MetricValue) -> np.ndarray:
    return 0.5 * form_inner(split.E, split.E, metric) - 0.5 * form_inner(split.B, split.B, metric)


def maxwell_sem(faraday: FormValue, metric: MetricValue) -> TensorValue:
    """Maxwell stress-energy ``-(1/2)|F|^2 delta + F_sharp (x)tr F``.

    Args:
        faraday: Faraday 2-form.
        metric: Metric.
    """

    faraday = as_form(faraday, check = False)
    dim = metric.dim
    square = form_inner(faraday, faraday, metric)
    identity = np.broadcast_to(np.eye(dim), faraday.batch_shape + (dim, dim))
    traced = trace_tensor_product(raise_all(faraday, metric), faraday)
    components = -0.5 * square[..., None, None] * identity + traced.components
    return TensorValue(components = components, variance = (UP, DOWN), dim = dim)


def maxwell_sem_eb(
    split: EMSplit,
    frame: ObserverFrame,
    metric: MetricValue,
    orientation: Orientation = POSITIVE
) -> TensorValue:
    """Maxwell stress-energy expanded in E, B, the Poynting form and P.

    Args:
        split: Electric and magnetic fields.
        frame: Observer frame.
        metric: Metric.
        orientation: Orientation sign.
    """

    if metric.dim < 4:
        raise TensorShapeError("the E/B expansion needs n >= 3")
    c = frame.c
    u_flat = frame.flat(metric)
    energy = 0.5 * (form_inner(split.E, split.E, metric) + form_inner(split.B, split.B, metric))
    projector, _ = projection_tensor(frame, metric)
    along = tensor_product(frame.u, u_flat).components / c ** 2
    flux = poynting(split.E, split.B, frame, metric, orientation)
    components = (
        energy[..., None, None] * (along + projector.components)
        + (tensor_product(frame.u, flux).components + tensor_product(sharp(flux, metric), u_flat).components) / c
        - tensor_product(sharp(split.E, metric), split.E).components
        - trace_tensor_product(raise_all(split.B, metric), split.B).components
    )
    return TensorValue(components = components, variance = (UP, DOWN), dim = metric.dim)


def _wedge_flat(u_flat: FormValue, form: FormValue) -> FormValue:
    return wedge(u_flat, as_form(form, check = False))


def _lower_multivector(multivector: TensorValue, metric: MetricValue) -> FormValue:
    if any(kind != UP for kind in multivector.variance):
        raise TensorShapeError(f"expected a multivector, got variance {multivector.variance}")
    return as_form(lower_all(multivector, metric), check = False)


def _require_transverse(form: FormValue, frame: ObserverFrame, name: str) -> None:
    scale = max(1.0, float(np.max(np.abs(form.components))) if form.components.size else 1.0)
    if transverse_defect(form, frame) > TRANSVERSE_TOLERANCE * scale * max(1.0, frame.c):
        raise GeometryError(f"{name} is not transverse to the world-velocity")
