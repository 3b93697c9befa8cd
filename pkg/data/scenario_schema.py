"""Scenario file schema.

A scenario declares one or two chart regions (metric, grid, fields), the
constitutive model, an optional interface between the regions, and which
check suites to run. Field components are DSL expressions over x0..x9 and
scenario constants, plain numbers, or references to binary blobs.
"""

import logging

from typing import Iterator
from typing import Literal
from typing import Optional
from typing import Union

from pydantic import BaseModel
from pydantic import ConfigDict
from pydantic import Field
from pydantic import PrivateAttr
from pydantic import field_validator
from pydantic import model_validator


logger = logging.getLogger(__name__)

SUITE_NAMES = ("identities", "sem", "balance", "maxwell", "junction", "einstein")
MODEL_KINDS = ("euler_maxwell", "linear", "nonlinear_invariants", "elastic", "nonlinear_ed")
INVARIANT_COEFFICIENTS = ("a1", "a2", "a3", "b11", "b22", "b33", "b12", "b13", "b23")
FLUID_VARIABLES = ("rho", "s")
INVARIANT_VARIABLES = ("I1", "I2", "I3", "rho", "s")
NONLINEAR_ED_VARIABLES = ("alpha", "beta")

ExpressionValue = Union[float, str]


class SchemaModel(BaseModel):
    """Base for scenario sections: unknown keys are rejected."""

    model_config = ConfigDict(extra = "forbid")


class BlobRef(SchemaModel):
    """Binary field data: little-endian float64, row-major, path relative to the scenario."""

    blob: str
    shape: list[int]

    @field_validator("shape")
    @classmethod
    def _positive_shape(cls, value: list[int]) -> list[int]:
        if not value or any(size < 1 for size in value):
            raise ValueError("shape entries must be positive")
        return value


ScalarValue = Union[float, str, BlobRef]
VectorValue = Union[list[ExpressionValue], BlobRef]
MatrixValue = Union[list[list[ExpressionValue]], BlobRef]


class GridSpec(SchemaModel):
    """Uniform chart grid; resolution 1 marks a symmetry axis."""

    bounds: list[tuple[float, float]]
    resolution: list[int]

    @model_validator(mode = "after")
    def _check_axes(self) -> "GridSpec":
        if len(self.bounds) != len(self.resolution):
            raise ValueError("bounds and resolution must have one entry per axis")
        for axis, ((low, high), count) in enumerate(zip(self.bounds, self.resolution)):
            if count == 1:
                continue
            if count < 5:
                raise ValueError(f"axis {axis}: resolution must be 1 or at least 5")
            if not high > low:
                raise ValueError(f"axis {axis}: upper bound must exceed lower bound")
        return self


class MetricSpec(SchemaModel):
    """Builtin metric or explicit covariant components.

    Builtin ``schwarzschild`` and ``reissner_nordstrom`` use coordinates
    (t, r, theta, phi); ``minkowski`` is Cartesian in any dimension.
    """

    builtin: Optional[Literal["minkowski", "schwarzschild", "reissner_nordstrom"]] = None
    mass: float = Field(default = 0.0, ge = 0.0)
    charge: float = 0.0
    components: Optional[list[list[ExpressionValue]]] = None

    @model_validator(mode = "after")
    def _one_source(self) -> "MetricSpec":
        if (self.builtin is None) == (self.components is None):
            raise ValueError("give exactly one of builtin or components")
        if self.components is not None:
            size = len(self.components)
            if any(len(row) != size for row in self.components):
                raise ValueError("components must be a square table")
        return self


class FieldsSpec(SchemaModel):
    """Continuum fields on one region."""

    u: Optional[VectorValue] = None
    w: Optional[VectorValue] = None
    rho: ScalarValue = 1.0
    s: ScalarValue = 0.0
    A: Optional[VectorValue] = None
    F: Optional[MatrixValue] = None
    cauchy: Optional[MatrixValue] = None

    @model_validator(mode = "after")
    def _exclusive_fields(self) -> "FieldsSpec":
        if (self.u is None) == (self.w is None):
            raise ValueError("give exactly one of u or w")
        if (self.A is None) == (self.F is None):
            raise ValueError("give exactly one of A or F")
        return self


class RegionSpec(SchemaModel):
    """One side of the spacetime: grid, metric and (optionally) fields."""

    grid: GridSpec
    metric: MetricSpec
    fields: Optional[FieldsSpec] = None


class InterfaceSpec(SchemaModel):
    """Level-set interface ``{phi = 0}``; the interior side has ``phi < 0``."""

    level_set: str
    bounds: list[tuple[float, float]]
    samples: list[int]
    newton_iterations: int = Field(default = 8, ge = 1)

    @model_validator(mode = "after")
    def _check_lattice(self) -> "InterfaceSpec":
        if len(self.bounds) != len(self.samples):
            raise ValueError("bounds and samples must have one entry per axis")
        if any(count < 1 for count in self.samples):
            raise ValueError("samples entries must be positive")
        return self


class BoundaryFaceSpec(SchemaModel):
    """Grid face on which free-boundary residuals are evaluated."""

    axis: int = Field(ge = 0)
    side: Literal["low", "high"]


class ModelSpec(SchemaModel):
    """Constitutive model selection and parameters.

    ``state_equation`` is the fluid energy density in ``rho`` and ``s``;
    ``chi_e``/``chi_b`` may be numbers or expressions in ``rho`` and ``s``.
    """

    kind: Literal["euler_maxwell", "linear", "nonlinear_invariants", "elastic", "nonlinear_ed"] = "euler_maxwell"
    state_equation: ExpressionValue = "0"
    chi_e: ExpressionValue = 0.0
    chi_b: ExpressionValue = 0.0
    coefficients: dict[str, float] = Field(default_factory = dict)
    invariant_function: Optional[str] = None
    lame_lambda: float = 0.0
    shear_modulus: float = 0.0
    nonlinear_density: str = "alpha"

    @field_validator("chi_b")
    @classmethod
    def _magnetic_range(cls, value: ExpressionValue) -> ExpressionValue:
        if isinstance(value, (int, float)) and value >= 1.0:
            raise ValueError("chi_b must be below 1 so that the inverse permeability stays positive")
        return value

    @field_validator("chi_e")
    @classmethod
    def _electric_range(cls, value: ExpressionValue) -> ExpressionValue:
        if isinstance(value, (int, float)) and value <= -1.0:
            raise ValueError("chi_e must exceed -1 so that the permittivity stays positive")
        return value

    @field_validator("coefficients")
    @classmethod
    def _known_coefficients(cls, value: dict[str, float]) -> dict[str, float]:
        unknown = sorted(set(value) - set(INVARIANT_COEFFICIENTS))
        if unknown:
            raise ValueError(f"unknown invariant coefficients: {', '.join(unknown)}")
        return value

    @model_validator(mode = "after")
    def _kind_parameters(self) -> "ModelSpec":
        if self.kind == "nonlinear_invariants" and self.coefficients and self.invariant_function:
            raise ValueError("give either coefficients or invariant_function, not both")
        if self.kind != "elastic" and (self.lame_lambda or self.shear_modulus):
            raise ValueError("elastic moduli are only used by the elastic model")
        return self


class ScenarioFile(SchemaModel):
    """Top-level scenario document."""

    name: str
    description: str = ""
    dimension: int = Field(default = 3, ge = 1, le = 9)
    c: float = Field(default = 1.0, gt = 0.0)
    chi: float = 2.0
    q: float = 0.0
    orientation: Literal[1, -1] = 1
    interior: RegionSpec
    exterior: Optional[RegionSpec] = None
    model: ModelSpec = Field(default_factory = ModelSpec)
    interface: Optional[InterfaceSpec] = None
    boundary_faces: list[BoundaryFaceSpec] = Field(default_factory = list)
    checks: list[str] = Field(default_factory = list)
    tolerances: dict[str, float] = Field(default_factory = dict)
    constants: dict[str, float] = Field(default_factory = dict)
    seed: Optional[int] = None

    _source_dir: str = PrivateAttr(default = ".")

    @field_validator("checks")
    @classmethod
    def _known_suites(cls, value: list[str]) -> list[str]:
        unknown = [name for name in value if name not in SUITE_NAMES]
        if unknown:
            raise ValueError(f"unknown check suites: {', '.join(unknown)}")
        return value

    @field_validator("constants")
    @classmethod
    def _constant_names(cls, value: dict[str, float]) -> dict[str, float]:
        reserved = set(FLUID_VARIABLES) | set(INVARIANT_VARIABLES) | set(NONLINEAR_ED_VARIABLES) | {"pi"}
        for name in value:
            if not name.isidentifier() or name in reserved or (
                len(name) == 2 and name[0] == "x" and name[1].isdigit()
            ):
                raise ValueError(f"constant name {name!r} is reserved or not an identifier")
        return value

    @model_validator(mode = "after")
    def _consistent_dimension(self) -> "ScenarioFile":
        dim = self.dimension + 1
        regions = [("interior", self.interior)]
        if self.exterior is not None:
            regions.append(("exterior", self.exterior))
        for label, region in regions:
            if len(region.grid.resolution) != dim:
                raise ValueError(f"{label}.grid must have {dim} axes")
            if region.metric.components is not None and len(region.metric.components) != dim:
                raise ValueError(f"{label}.metric.components must be {dim}x{dim}")
            if region.metric.builtin in ("schwarzschild", "reissner_nordstrom") and dim != 4:
                raise ValueError(f"{label}.metric builtin {region.metric.builtin} needs dimension 3")
            if region.fields is not None:
                _check_field_lengths(label = label, fields = region.fields, dim = dim)
        if self.interface is not None:
            if self.exterior is None:
                raise ValueError("an interface needs an exterior region")
            if len(self.interface.bounds) != dim:
                raise ValueError(f"interface lattice must have {dim} axes")
        for face in self.boundary_faces:
            if face.axis >= dim:
                raise ValueError(f"boundary face axis {face.axis} out of range")
        return self

    @property
    def spacetime_dim(self) -> int:
        return self.dimension + 1

    @property
    def source_dir(self) -> str:
        """Directory that blob paths are relative to."""

        return self._source_dir

    def with_source_dir(self, path: str) -> "ScenarioFile":
        self._source_dir = path
        return self

    def expression_sites(self) -> Iterator[tuple[str, str, tuple]]:
        """Yield ``(field path, text, extra identifiers)`` for every expression.

        Args:
            self: ScenarioFile instance.
        """

        constants = tuple(self.constants)
        regions = [("interior", self.interior)]
        if self.exterior is not None:
            regions.append(("exterior", self.exterior))
        for label, region in regions:
            if region.metric.components is not None:
                for row, entries in enumerate(region.metric.components):
                    for col, entry in enumerate(entries):
                        if isinstance(entry, str):
                            yield f"{label}.metric.components.{row}.{col}", entry, constants
            if region.fields is None:
                continue
            for name in ("u", "w", "rho", "s", "A", "F", "cauchy"):
                value = getattr(region.fields, name)
                for path, text in _value_expressions(prefix = f"{label}.fields.{name}", value = value):
                    yield path, text, constants

        model = self.model
        if isinstance(model.state_equation, str):
            yield "model.state_equation", model.state_equation, constants + FLUID_VARIABLES
        for name in ("chi_e", "chi_b"):
            value = getattr(model, name)
            if isinstance(value, str):
                yield f"model.{name}", value, constants + FLUID_VARIABLES
        if model.invariant_function is not None:
            yield "model.invariant_function", model.invariant_function, constants + INVARIANT_VARIABLES
        yield "model.nonlinear_density", model.nonlinear_density, constants + NONLINEAR_ED_VARIABLES
        if self.interface is not None:
            yield "interface.level_set", self.interface.level_set, constants


def _check_field_lengths(label: str, fields: FieldsSpec, dim: int) -> None:
    for name in ("u", "w", "A"):
        value = getattr(fields, name)
        if isinstance(value, list) and len(value) != dim:
            raise ValueError(f"{label}.fields.{name} must have {dim} components")
    for name in ("F", "cauchy"):
        value = getattr(fields, name)
        if isinstance(value, list) and (len(value) != dim or any(len(row) != dim for row in value)):
            raise ValueError(f"{label}.fields.{name} must be {dim}x{dim}")


def _value_expressions(prefix: str, value) -> Iterator[tuple[str, str]]:
    if isinstance(value, str):
        yield prefix, value
    elif isinstance(value, list):
        for index, item in enumerate(value):
            yield from _value_expressions(prefix = f"{prefix}.{index}", value = item)
