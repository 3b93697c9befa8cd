"""Pointwise Lorentzian multilinear and exterior algebra.

Component arrays carry leading batch axes followed by one axis of length
``dim`` per tensor slot, so every operation here works unchanged on a single
point or on a whole grid. Forms use the convention
``alpha = (1/k!) alpha_I dx^I`` with fully antisymmetric dense storage.
"""

import math
import logging
import itertools

from dataclasses import dataclass
from dataclasses import field
from functools import lru_cache
from typing import Optional
from typing import Sequence

import numpy as np

from core.exceptions import GeometryError
from core.exceptions import TensorShapeError


logger = logging.getLogger(__name__)

UP = "up"
DOWN = "down"
VARIANCES = (UP, DOWN)
INDEX_LETTERS = "abcdefghijklmnop"
ANTISYMMETRY_TOLERANCE = 1e-12
SYMMETRY_TOLERANCE = 1e-12


@dataclass(frozen = True, eq = False)
class TensorValue:
    """Tensor components with an explicit variance signature.

    Args:
        components: Array shaped ``(*batch, dim, ..., dim)`` with one trailing axis per slot.
        variance: Slot kinds, each ``"up"`` or ``"down"``.
        dim: Spacetime dimension n+1.
    """

    components: np.ndarray
    variance: tuple
    dim: int

    def __post_init__(self) -> None:
        components = np.asarray(self.components, dtype = float)
        object.__setattr__(self, "components", components)
        object.__setattr__(self, "variance", tuple(self.variance))
        for kind in self.variance:
            if kind not in VARIANCES:
                raise TensorShapeError(f"unknown variance {kind!r}")
        rank = len(self.variance)
        if components.ndim < rank:
            raise TensorShapeError(
                f"components have {components.ndim} axes but variance needs {rank}"
            )
        trailing = components.shape[components.ndim - rank:]
        if any(size != self.dim for size in trailing):
            raise TensorShapeError(
                f"slot axes {trailing} do not match dimension {self.dim}"
            )

    @property
    def rank(self) -> int:
        return len(self.variance)

    @property
    def batch_shape(self) -> tuple:
        return self.components.shape[:self.components.ndim - self.rank]

    def at(self, index: tuple) -> "TensorValue":
        """Extract the value at one batch index.

        Args:
            self: TensorValue instance.
            index: Batch index tuple.
        """

        return replace_components(self, self.components[tuple(index)])

    def scaled(self, factor) -> "TensorValue":
        """Multiply components by a scalar or batch array.

        Args:
            self: TensorValue instance.
            factor: Scalar or array broadcastable over the batch shape.
        """

        factor = np.asarray(factor, dtype = float)
        factor = factor.reshape(factor.shape + (1,) * self.rank)
        return replace_components(self, self.components * factor)

    def __add__(self, other: "TensorValue") -> "TensorValue":
        _require_same_variance(self, other)
        return replace_components(self, self.components + other.components)

    def __sub__(self, other: "TensorValue") -> "TensorValue":
        _require_same_variance(self, other)
        return replace_components(self, self.components - other.components)

    def __neg__(self) -> "TensorValue":
        return replace_components(self, -self.components)


@dataclass(frozen = True, eq = False)
class FormValue(TensorValue):
    """Fully antisymmetric covariant tensor.

    Args:
        components: Antisymmetric covariant array shaped ``(*batch, dim, ..., dim)``.
        variance: Filled in as all ``"down"`` from ``degree``.
        dim: Spacetime dimension n+1.
        degree: Form degree k.
        check: Verify antisymmetry on construction.
    """

    variance: tuple = field(default = (), init = False)
    degree: int = 0
    check: bool = field(default = True, repr = False)

    def __post_init__(self) -> None:
        if self.degree < 0 or self.degree > self.dim:
            raise TensorShapeError(f"form degree {self.degree} outside [0, {self.dim}]")
        object.__setattr__(self, "variance", (DOWN,) * self.degree)
        super().__post_init__()
        if self.check:
            _check_antisymmetric(self.components, self.degree)


@dataclass(frozen = True, eq = False)
class MetricValue:
    """Lorentzian metric with cached inverse and volume factor.

    Args:
        g: Symmetric covariant array ``(*batch, dim, dim)``.
        ginv: Inverse metric with the same shape.
        sqrt_abs_det: ``sqrt(|det g|)`` per batch point.
        dim: Spacetime dimension n+1.
    """

    g: np.ndarray
    ginv: np.ndarray
    sqrt_abs_det: np.ndarray
    dim: int

    @classmethod
    def from_components(cls, g, check: bool = True) -> "MetricValue":
        """Build a metric, verifying symmetry and Lorentzian signature.

        Args:
            g: Covariant metric components ``(*batch, dim, dim)``.
            check: Verify symmetry and exactly one negative eigenvalue.
        """

        g = np.asarray(g, dtype = float)
        if g.ndim < 2 or g.shape[-1] != g.shape[-2]:
            raise TensorShapeError(f"metric components must end in a square block, got {g.shape}")
        dim = g.shape[-1]
        scale = max(1.0, float(np.max(np.abs(g))) if g.size else 1.0)
        asymmetry = np.abs(g - np.swapaxes(g, -1, -2))
        if np.any(asymmetry > SYMMETRY_TOLERANCE * scale):
            raise GeometryError("metric is not symmetric", _first_bad_point(asymmetry.max(axis = (-1, -2)) > SYMMETRY_TOLERANCE * scale))
        g = 0.5 * (g + np.swapaxes(g, -1, -2))

        det = np.linalg.det(g)
        degenerate = ~np.isfinite(det) | (np.abs(det) < 1e-300)
        if np.any(degenerate):
            raise GeometryError("degenerate metric", _first_bad_point(degenerate))
        if check:
            eigenvalues = np.linalg.eigvalsh(g)
            negatives = np.sum(eigenvalues < 0, axis = -1)
            wrong = negatives != 1
            if np.any(wrong):
                raise GeometryError(
                    "metric is not Lorentzian (expected exactly one negative eigenvalue)",
                    _first_bad_point(wrong)
                )
        ginv = np.linalg.inv(g)
        ginv = 0.5 * (ginv + np.swapaxes(ginv, -1, -2))
        return cls(g = g, ginv = ginv, sqrt_abs_det = np.sqrt(np.abs(det)), dim = dim)

    @classmethod
    def minkowski(cls, dim: int) -> "MetricValue":
        return cls.from_components(np.diag([-1.0] + [1.0] * (dim - 1)))

    @property
    def batch_shape(self) -> tuple:
        return self.g.shape[:-2]

    def at(self, index: tuple) -> "MetricValue":
        index = tuple(index)
        return MetricValue(
            g = self.g[index],
            ginv = self.ginv[index],
            sqrt_abs_det = self.sqrt_abs_det[index],
            dim = self.dim
        )

    def as_tensor(self) -> TensorValue:
        return TensorValue(components = self.g, variance = (DOWN, DOWN), dim = self.dim)

    def inverse_tensor(self) -> TensorValue:
        return TensorValue(components = self.ginv, variance = (UP, UP), dim = self.dim)


@dataclass(frozen = True)
class Orientation:
    """Orientation sign relative to dx^0 ^ ... ^ dx^n.

    Args:
        sign: +1 or -1.
    """

    sign: int = 1

    def __post_init__(self) -> None:
        if self.sign not in (-1, 1):
            raise TensorShapeError(f"orientation sign must be +1 or -1, got {self.sign}")


POSITIVE = Orientation(sign = 1)


def vector(components, dim: Optional[int] = None) -> TensorValue:
    components = np.asarray(components, dtype = float)
    return TensorValue(components = components, variance = (UP,), dim = dim or components.shape[-1])


def covector(components, dim: Optional[int] = None) -> FormValue:
    components = np.asarray(components, dtype = float)
    return FormValue(components = components, dim = dim or components.shape[-1], degree = 1)


def scalar_form(values, dim: int) -> FormValue:
    return FormValue(components = np.asarray(values, dtype = float), dim = dim, degree = 0)


def as_form(tensor: TensorValue, check: bool = True) -> FormValue:
    """View an all-covariant tensor as a form.

    Args:
        tensor: Tensor with only ``"down"`` slots.
        check: Verify antisymmetry.
    """

    if isinstance(tensor, FormValue):
        return tensor
    if any(kind != DOWN for kind in tensor.variance):
        raise TensorShapeError(f"cannot view variance {tensor.variance} as a form")
    return FormValue(
        components = tensor.components,
        dim = tensor.dim,
        degree = tensor.rank,
        check = check
    )


def replace_components(tensor: TensorValue, components) -> TensorValue:
    """Copy a tensor (or form) with new components of the same variance.

    Args:
        tensor: Template value.
        components: New component array.
    """

    if isinstance(tensor, FormValue):
        return FormValue(components = components, dim = tensor.dim, degree = tensor.degree, check = False)
    return TensorValue(components = components, variance = tensor.variance, dim = tensor.dim)


def raise_index(tensor: TensorValue, slot: int, metric: MetricValue) -> TensorValue:
    """Raise one covariant slot with the inverse metric.

    Args:
        tensor: Input tensor.
        slot: Slot position to raise.
        metric: Metric supplying ``ginv``.
    """

    _require_slot(tensor, slot, DOWN)
    components = _contract_slot(tensor.components, tensor.rank, slot, metric.ginv)
    variance = list(tensor.variance)
    variance[slot] = UP
    return TensorValue(components = components, variance = tuple(variance), dim = tensor.dim)


def lower_index(tensor: TensorValue, slot: int, metric: MetricValue) -> TensorValue:
    """Lower one contravariant slot with the metric.

    Args:
        tensor: Input tensor.
        slot: Slot position to lower.
        metric: Metric supplying ``g``.
    """

    _require_slot(tensor, slot, UP)
    components = _contract_slot(tensor.components, tensor.rank, slot, metric.g)
    variance = list(tensor.variance)
    variance[slot] = DOWN
    return TensorValue(components = components, variance = tuple(variance), dim = tensor.dim)


def raise_all(tensor: TensorValue, metric: MetricValue) -> TensorValue:
    for slot, kind in enumerate(tensor.variance):
        if kind == DOWN:
            tensor = raise_index(tensor, slot, metric)
    return tensor


def lower_all(tensor: TensorValue, metric: MetricValue) -> TensorValue:
    for slot, kind in enumerate(tensor.variance):
        if kind == UP:
            tensor = lower_index(tensor, slot, metric)
    return tensor


def flat(vector_value: TensorValue, metric: MetricValue) -> FormValue:
    """Musical flat of a vector.

    Args:
        vector_value: Contravariant rank-1 tensor.
        metric: Metric.
    """

    return as_form(lower_index(vector_value, 0, metric))


def sharp(form: TensorValue, metric: MetricValue) -> TensorValue:
    return raise_all(form, metric)


def antisymmetrize(components: np.ndarray, rank: int) -> np.ndarray:
    """Average over signed permutations of the trailing ``rank`` axes.

    Args:
        components: Component array.
        rank: Number of trailing slot axes.
    """

    return _alternating_sum(components, rank) / math.factorial(rank)


def tensor_product(left: TensorValue, right: TensorValue) -> TensorValue:
    """Outer product with concatenated variance.

    Args:
        left: First factor.
        right: Second factor.
    """

    if left.dim != right.dim:
        raise TensorShapeError("tensor product of different dimensions")
    left_components = left.components.reshape(left.components.shape + (1,) * right.rank)
    right_components = right.components.reshape(
        right.batch_shape + (1,) * left.rank + (right.dim,) * right.rank
    )
    return TensorValue(
        components = left_components * right_components,
        variance = left.variance + right.variance,
        dim = left.dim
    )


def wedge(alpha: FormValue, beta: FormValue) -> FormValue:
    """Exterior product of two forms.

    Args:
        alpha: Form of degree k.
        beta: Form of degree l.
    """

    alpha = as_form(alpha)
    beta = as_form(beta)
    k, l = alpha.degree, beta.degree
    if k + l > alpha.dim:
        raise TensorShapeError(f"wedge degree {k + l} exceeds dimension {alpha.dim}")
    product = tensor_product(alpha, beta).components
    components = _alternating_sum(product, k + l) / (math.factorial(k) * math.factorial(l))
    return FormValue(components = components, dim = alpha.dim, degree = k + l, check = False)


def interior_product(vector_value: TensorValue, alpha: FormValue) -> FormValue:
    """Contract a vector into the first slot of a form.

    Args:
        vector_value: Contravariant rank-1 tensor.
        alpha: Form of degree k >= 1.
    """

    if vector_value.variance != (UP,):
        raise TensorShapeError(f"interior product needs a vector, got variance {vector_value.variance}")
    alpha = as_form(alpha)
    k = alpha.degree
    if k == 0:
        raise TensorShapeError("interior product of a 0-form")
    lifted = vector_value.components.reshape(
        vector_value.components.shape + (1,) * (k - 1)
    )
    components = np.sum(lifted * alpha.components, axis = -k)
    return FormValue(components = components, dim = alpha.dim, degree = k - 1, check = False)


@lru_cache(maxsize = None)
def levi_civita_symbol(dim: int) -> np.ndarray:
    """Permutation symbol with ``eps[0, 1, ..., n] = +1``.

    Args:
        dim: Spacetime dimension n+1.
    """

    symbol = np.zeros((dim,) * dim)
    for permutation in itertools.permutations(range(dim)):
        symbol[permutation] = _permutation_sign(permutation)
    symbol.setflags(write = False)
    return symbol


def volume_form(metric: MetricValue, orientation: Orientation = POSITIVE) -> FormValue:
    """Metric volume form ``o * sqrt|det g| * eps``.

    Args:
        metric: Lorentzian metric.
        orientation: Orientation sign.
    """

    dim = metric.dim
    factor = orientation.sign * metric.sqrt_abs_det
    factor = factor.reshape(np.shape(factor) + (1,) * dim)
    return FormValue(
        components = factor * levi_civita_symbol(dim),
        dim = dim,
        degree = dim,
        check = False
    )


def hodge_star(alpha: FormValue, metric: MetricValue, orientation: Orientation = POSITIVE) -> FormValue:
    """Hodge dual ``(*alpha)_J = (1/k!) alpha^I mu_{IJ}``.

    Args:
        alpha: Form of degree k.
        metric: Lorentzian metric.
        orientation: Orientation sign.
    """

    alpha = as_form(alpha)
    k = alpha.degree
    dim = alpha.dim
    raised = raise_all(alpha, metric).components
    mu = volume_form(metric, orientation).components
    summed = INDEX_LETTERS[:k]
    kept = INDEX_LETTERS[k:dim]
    components = np.einsum(
        f"...{summed},...{summed}{kept}->...{kept}",
        raised,
        mu
    ) / math.factorial(k)
    return FormValue(components = components, dim = dim, degree = dim - k, check = False)


def form_inner(alpha: FormValue, beta: FormValue, metric: MetricValue) -> np.ndarray:
    """Metric inner product ``(1/k!) alpha_I beta^I``.

    Args:
        alpha: Form of degree k.
        beta: Form of degree k.
        metric: Lorentzian metric.
    """

    alpha = as_form(alpha)
    beta = as_form(beta)
    if alpha.degree != beta.degree:
        raise TensorShapeError(f"inner product of degrees {alpha.degree} and {beta.degree}")
    k = alpha.degree
    letters = INDEX_LETTERS[:k]
    raised = raise_all(beta, metric).components
    return np.einsum(f"...{letters},...{letters}->...", alpha.components, raised) / math.factorial(k)


def top_form_coefficient(
    omega: FormValue,
    metric: MetricValue,
    orientation: Orientation = POSITIVE
) -> np.ndarray:
    """Coefficient f with ``omega = f * mu(g)`` for a top-degree form.

    Args:
        omega: Form of degree n+1.
        metric: Lorentzian metric.
        orientation: Orientation sign.
    """

    omega = as_form(omega)
    if omega.degree != omega.dim:
        raise TensorShapeError(f"expected a top-degree form, got degree {omega.degree}")
    corner = omega.components[(Ellipsis,) + tuple(range(omega.dim))]
    return corner / (orientation.sign * metric.sqrt_abs_det)


def trace_tensor_product(pi: TensorValue, alpha: FormValue) -> TensorValue:
    """Mixed tensor ``(1/(k-1)!) pi^{mu I} alpha_{nu I}``.

    Args:
        pi: Fully contravariant antisymmetric array of rank k >= 1.
        alpha: Form of degree k.
    """

    alpha = as_form(alpha)
    k = alpha.degree
    if any(kind != UP for kind in pi.variance) or pi.rank != k or k == 0:
        raise TensorShapeError(
            f"trace product needs a contravariant rank-{k} tensor, got variance {pi.variance}"
        )
    summed = INDEX_LETTERS[2:k + 1]
    components = np.einsum(
        f"...a{summed},...b{summed}->...ab",
        pi.components,
        alpha.components
    ) / math.factorial(k - 1)
    return TensorValue(components = components, variance = (UP, DOWN), dim = alpha.dim)


def full_contraction(left: TensorValue, right: TensorValue, normalized: bool = False) -> np.ndarray:
    """Contract every slot of two tensors with dual variances.

    With ``normalized`` the sum is divided by rank!, which is the pairing of a
    k-vector with a k-form.

    Args:
        left: First tensor.
        right: Tensor whose variance is dual to ``left`` slot by slot.
        normalized: Divide by rank factorial.
    """

    if left.rank != right.rank:
        raise TensorShapeError(f"cannot contract ranks {left.rank} and {right.rank}")
    for left_kind, right_kind in zip(left.variance, right.variance):
        if left_kind == right_kind:
            raise TensorShapeError(f"variances {left.variance} and {right.variance} are not dual")
    letters = INDEX_LETTERS[:left.rank]
    result = np.einsum(f"...{letters},...{letters}->...", left.components, right.components)
    if normalized:
        result = result / math.factorial(left.rank)
    return result


def hat_lift(kappa: TensorValue) -> TensorValue:
    """Lift ``kappa`` to the (p+1, q+1) tensor used by the local Lie derivative.

    The two new slots are appended last, contravariant then covariant, so that
    contracting them with ``d zeta[nu, mu] = partial_mu zeta^nu`` reproduces
    the non-transport part of the Lie derivative.

    Args:
        kappa: Tensor of any variance.
    """

    rank = kappa.rank
    dim = kappa.dim
    letters = INDEX_LETTERS[:rank]
    identity = np.eye(dim)
    result = np.zeros(kappa.batch_shape + (dim,) * (rank + 2))
    for slot, kind in enumerate(kappa.variance):
        original = letters[slot]
        if kind == DOWN:
            source = letters[:slot] + "z" + letters[slot + 1:]
            result = result + np.einsum(
                f"...{source},y{original}->...{letters}yz",
                kappa.components,
                identity
            )
        else:
            source = letters[:slot] + "y" + letters[slot + 1:]
            result = result - np.einsum(
                f"...{source},{original}z->...{letters}yz",
                kappa.components,
                identity
            )
    return TensorValue(
        components = result,
        variance = kappa.variance + (UP, DOWN),
        dim = dim
    )


def contract_slots(tensor: TensorValue, first: int, second: int) -> TensorValue:
    """Trace over one contravariant and one covariant slot.

    Args:
        tensor: Input tensor.
        first: Slot index.
        second: Slot index with the opposite variance.
    """

    if first == second or tensor.variance[first] == tensor.variance[second]:
        raise TensorShapeError(f"cannot trace slots {first} and {second} of {tensor.variance}")
    batch = len(tensor.batch_shape)
    components = np.trace(tensor.components, axis1 = batch + first, axis2 = batch + second)
    variance = tuple(kind for slot, kind in enumerate(tensor.variance) if slot not in (first, second))
    return TensorValue(components = components, variance = variance, dim = tensor.dim)


def _contract_slot(components: np.ndarray, rank: int, slot: int, matrix: np.ndarray) -> np.ndarray:
    batch = components.ndim - rank
    moved = np.moveaxis(components, batch + slot, -1)
    matrix = matrix.reshape(matrix.shape[:-2] + (1,) * (rank - 1) + matrix.shape[-2:])
    contracted = np.einsum("...a,...ab->...b", moved, matrix)
    out_batch = contracted.ndim - rank
    return np.moveaxis(contracted, -1, out_batch + slot)


def _alternating_sum(components: np.ndarray, rank: int) -> np.ndarray:
    if rank <= 1:
        return components.copy()
    batch = components.ndim - rank
    leading = tuple(range(batch))
    total = np.zeros_like(components)
    for permutation in itertools.permutations(range(rank)):
        axes = leading + tuple(batch + index for index in permutation)
        total = total + _permutation_sign(permutation) * np.transpose(components, axes)
    return total


def _permutation_sign(permutation: Sequence[int]) -> int:
    inversions = 0
    for i in range(len(permutation)):
        for j in range(i + 1, len(permutation)):
            if permutation[i] > permutation[j]:
                inversions += 1
    return -1 if inversions % 2 else 1


def _check_antisymmetric(components: np.ndarray, degree: int) -> None:
    if degree < 2:
        return
    scale = max(1.0, float(np.max(np.abs(components))) if components.size else 1.0)
    for slot in range(degree - 1):
        swapped = np.swapaxes(components, -degree + slot, -degree + slot + 1)
        if np.max(np.abs(components + swapped)) > ANTISYMMETRY_TOLERANCE * scale:
            raise TensorShapeError(
                f"form components are not antisymmetric in slots {slot} and {slot + 1}"
            )


def _require_slot(tensor: TensorValue, slot: int, kind: str) -> None:
    if slot < 0 or slot >= tensor.rank:
        raise TensorShapeError(f"slot {slot} out of range for rank {tensor.rank}")
    if tensor.variance[slot] != kind:
        raise TensorShapeError(
            f"slot {slot} has variance {tensor.variance[slot]!r}, expected {kind!r}"
        )


def _require_same_variance(left: TensorValue, right: TensorValue) -> None:
    if left.variance != right.variance or left.dim != right.dim:
        raise TensorShapeError(
            f"variance mismatch: {left.variance} vs {right.variance}"
        )


def _first_bad_point(mask: np.ndarray) -> Optional[tuple]:
    mask = np.asarray(mask)
    if mask.ndim == 0:
        return None
    hits = np.argwhere(mask)
    return tuple(hits[0]) if len(hits) else None
