"""Energy-density layer.

Every model returns the energy density and its partial derivatives with the
pairings

    d(eps) = d_rho drho + d_s ds + d_E^a dE_a + (1/k!) d_B^I dB_I + d_c^{ab} dc_ab

where ``k = n - 2`` and the Cauchy perturbation ``dc`` is symmetric. The
Maxwell part ``-|E|^2/2 + |B|^2/2`` is shared by all models; each model only
supplies its matter part.
"""

import math
import logging
import itertools
import dataclasses

from dataclasses import dataclass
from dataclasses import field
from typing import Callable
from typing import Mapping
from typing import Optional

import numpy as np

from core.em_decomp import EMSplit
from core.em_decomp import DHSplit
from core.em_decomp import ObserverFrame
from core.em_decomp import eb_decompose
from core.em_decomp import maxwell_sem
from core.em_decomp import projection_tensor
from core.exceptions import ModelError
from core.tensor_core import INDEX_LETTERS
from core.tensor_core import POSITIVE
from core.tensor_core import UP
from core.tensor_core import DOWN
from core.tensor_core import FormValue
from core.tensor_core import MetricValue
from core.tensor_core import Orientation
from core.tensor_core import TensorValue
from core.tensor_core import as_form
from core.tensor_core import form_inner
from core.tensor_core import full_contraction
from core.tensor_core import hodge_star
from core.tensor_core import lower_all
from core.tensor_core import raise_all
from core.tensor_core import top_form_coefficient
from core.tensor_core import volume_form
from core.tensor_core import wedge
from data.scenario_schema import FLUID_VARIABLES
from data.scenario_schema import INVARIANT_VARIABLES
from data.scenario_schema import NONLINEAR_ED_VARIABLES
from data.scenario_schema import ModelSpec
from utils.expression_parser import Expression
from utils.expression_parser import parse_expression


logger = logging.getLogger(__name__)

PARTS = ("total", "matter", "maxwell")
FD_STEP = 1e-5
FD_RTOL = 1e-5
FD_ATOL = 1e-9


@dataclass(frozen = True, eq = False)
class MatterState:
    """Pointwise (or batched) thermodynamic and electromagnetic state.

    Args:
        rho: Proper mass density.
        s: Proper entropy density.
        E: Electric 1-form.
        B: Magnetic (n-2)-form.
        metric: Metric.
        frame: Observer frame of the continuum.
        orientation: Orientation sign.
        cauchy: Optional u-transverse symmetric Cauchy tensor.
    """

    rho: np.ndarray
    s: np.ndarray
    E: FormValue
    B: FormValue
    metric: MetricValue
    frame: ObserverFrame
    orientation: Orientation = POSITIVE
    cauchy: Optional[TensorValue] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "rho", np.asarray(self.rho, dtype = float))
        object.__setattr__(self, "s", np.asarray(self.s, dtype = float))
        if self.cauchy is not None and self.cauchy.variance != (DOWN, DOWN):
            raise ModelError(f"Cauchy tensor must be covariant, got variance {self.cauchy.variance}")

    @property
    def dim(self) -> int:
        return self.metric.dim

    @property
    def shape(self) -> tuple:
        return np.broadcast_shapes(np.shape(self.rho), np.shape(self.s), self.E.batch_shape)

    def replace(self, **changes) -> "MatterState":
        return dataclasses.replace(self, **changes)


@dataclass(frozen = True, eq = False)
class ConstitutiveEval:
    """Energy density with its first partials.

    Args:
        energy: Energy density.
        d_rho: Partial with respect to rho.
        d_s: Partial with respect to s.
        d_E: Contravariant vector, equal to minus the sharp of D.
        d_B: Contravariant (n-2)-vector, the sharp of H.
        d_c: Symmetric contravariant 2-tensor when a Cauchy tensor is present.
    """

    energy: np.ndarray
    d_rho: np.ndarray
    d_s: np.ndarray
    d_E: TensorValue
    d_B: TensorValue
    d_c: Optional[TensorValue] = None

    def __add__(self, other: "ConstitutiveEval") -> "ConstitutiveEval":
        return ConstitutiveEval(
            energy = self.energy + other.energy,
            d_rho = self.d_rho + other.d_rho,
            d_s = self.d_s + other.d_s,
            d_E = self.d_E + other.d_E,
            d_B = self.d_B + other.d_B,
            d_c = _add_optional(self.d_c, other.d_c)
        )


@dataclass(frozen = True, eq = False)
class DerivedFields:
    """Displacement, intensity, polarization and magnetization.

    Args:
        D: Displacement 1-form.
        H: Magnetic intensity (n-2)-form.
        P: Polarization 1-form.
        M: Magnetization (n-2)-form.
    """

    D: FormValue
    H: FormValue
    P: FormValue
    M: FormValue

    def dh_split(self) -> DHSplit:
        return DHSplit(D = self.D, H = self.H)


@dataclass(frozen = True, eq = False)
class FaradayEval:
    """Energy as a function of (rho, s, u, F, g) with its partials.

    Args:
        energy: Energy density.
        d_rho: Partial with respect to rho.
        d_s: Partial with respect to s.
        d_u: Covector of partials with respect to u.
        d_F: Antisymmetric bivector ``Y`` with ``d(eps) = Y^{ab} dF_ab / 2``.
        d_c: Cauchy partial when present.
        base: The underlying E/B evaluation.
        split: E and B seen by the frame.
    """

    energy: np.ndarray
    d_rho: np.ndarray
    d_s: np.ndarray
    d_u: FormValue
    d_F: TensorValue
    d_c: Optional[TensorValue]
    base: ConstitutiveEval
    split: EMSplit


@dataclass
class PartialCheck:
    """One analytic-versus-central-difference comparison.

    Args:
        name: Argument label, e.g. ``E[1]``.
        analytic: Analytic value at the worst point.
        numeric: Central-difference value at the worst point.
        error: Absolute difference at the worst point.
        passed: Whether every point is within tolerance.
    """

    name: str
    analytic: float
    numeric: float
    error: float
    passed: bool


@dataclass
class PartialsReport:
    """Outcome of a finite-difference oracle run.

    Args:
        checks: One entry per perturbed argument.
    """

    checks: list[PartialCheck] = field(default_factory = list)

    @property
    def passed(self) -> bool:
        return all(item.passed for item in self.checks)

    def failures(self) -> list[PartialCheck]:
        return [item for item in self.checks if not item.passed]

    def worst_error(self) -> float:
        return max((item.error for item in self.checks), default = 0.0)


class ConstitutiveModel:
    """Base model: fluid state equation plus a model-specific field part.

    Args:
        state_equation: Fluid energy density in ``rho`` and ``s``.
        constants: Scenario constants bound during evaluation.
    """

    kind = "base"
    requires_cauchy = False

    def __init__(self, state_equation: Expression, constants: Optional[Mapping[str, float]] = None) -> None:
        self.constants = dict(constants or {})
        self.state_equation = state_equation
        self._fluid_rho = state_equation.derivative("rho")
        self._fluid_s = state_equation.derivative("s")

    def evaluate(self, state: MatterState, part: str = "total") -> ConstitutiveEval:
        """Evaluate the total, matter or Maxwell energy and partials.

        Args:
            self: Model instance.
            state: Matter state.
            part: One of ``total``, ``matter``, ``maxwell``.
        """

        if part not in PARTS:
            raise ModelError(f"unknown energy part {part!r}")
        if self.requires_cauchy and state.cauchy is None:
            raise ModelError(f"{self.kind} model needs a Cauchy tensor")
        if part == "maxwell":
            return maxwell_eval(state)
        matter = self.matter(state)
        if part == "matter":
            return matter
        return matter + maxwell_eval(state)

    def matter(self, state: MatterState) -> ConstitutiveEval:
        raise NotImplementedError

    def energy(self, state: MatterState, part: str = "total") -> np.ndarray:
        return self.evaluate(state, part).energy

    def _env(self, state: MatterState, **extra) -> dict:
        env = dict(self.constants)
        env["rho"] = state.rho
        env["s"] = state.s
        env.update(extra)
        return env

    def _fluid(self, state: MatterState) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        env = self._env(state)
        shape = state.shape
        return (
            self.state_equation.evaluate(env, shape = shape),
            self._fluid_rho.evaluate(env, shape = shape),
            self._fluid_s.evaluate(env, shape = shape)
        )


class EulerMaxwellModel(ConstitutiveModel):
    """Charged perfect fluid: the matter energy ignores the fields."""

    kind = "euler_maxwell"

    def matter(self, state: MatterState) -> ConstitutiveEval:
        energy, d_rho, d_s = self._fluid(state)
        return ConstitutiveEval(
            energy = energy,
            d_rho = d_rho,
            d_s = d_s,
            d_E = _zero_multivector(state, 1),
            d_B = _zero_multivector(state, state.dim - 3),
            d_c = _zero_cauchy(state)
        )


class LinearModel(ConstitutiveModel):
    """Linear polarizable and magnetizable fluid.

    Args:
        state_equation: Fluid energy density.
        chi_e: Electric susceptibility, constant or in ``rho`` and ``s``.
        chi_b: Magnetic susceptibility, constant or in ``rho`` and ``s``.
        constants: Scenario constants.
    """

    kind = "linear"

    def __init__(
        self,
        state_equation: Expression,
        chi_e: Expression,
        chi_b: Expression,
        constants: Optional[Mapping[str, float]] = None
    ) -> None:
        super().__init__(state_equation = state_equation, constants = constants)
        self.chi_e = chi_e
        self.chi_b = chi_b
        self._chi_e_rho = chi_e.derivative("rho")
        self._chi_e_s = chi_e.derivative("s")
        self._chi_b_rho = chi_b.derivative("rho")
        self._chi_b_s = chi_b.derivative("s")

    def susceptibilities(self, state: MatterState) -> dict:
        """Susceptibilities and their density partials.

        Args:
            self: Model instance.
            state: Matter state.
        """

        env = self._env(state)
        shape = state.shape
        values = {
            "chi_e": self.chi_e.evaluate(env, shape = shape),
            "chi_e_rho": self._chi_e_rho.evaluate(env, shape = shape),
            "chi_e_s": self._chi_e_s.evaluate(env, shape = shape),
            "chi_b": self.chi_b.evaluate(env, shape = shape),
            "chi_b_rho": self._chi_b_rho.evaluate(env, shape = shape),
            "chi_b_s": self._chi_b_s.evaluate(env, shape = shape)
        }
        if np.any(values["chi_b"] >= 1.0):
            raise ModelError("chi_b reached 1; the inverse permeability must stay positive")
        if np.any(values["chi_e"] <= -1.0):
            raise ModelError("chi_e reached -1; the permittivity must stay positive")
        return values

    def matter(self, state: MatterState) -> ConstitutiveEval:
        energy, d_rho, d_s = self._fluid(state)
        chi = self.susceptibilities(state)
        e_square = form_inner(state.E, state.E, state.metric)
        b_square = form_inner(state.B, state.B, state.metric)
        return ConstitutiveEval(
            energy = energy - 0.5 * chi["chi_e"] * e_square - 0.5 * chi["chi_b"] * b_square,
            d_rho = d_rho - 0.5 * chi["chi_e_rho"] * e_square - 0.5 * chi["chi_b_rho"] * b_square,
            d_s = d_s - 0.5 * chi["chi_e_s"] * e_square - 0.5 * chi["chi_b_s"] * b_square,
            d_E = raise_all(state.E, state.metric).scaled(-chi["chi_e"]),
            d_B = raise_all(state.B, state.metric).scaled(-chi["chi_b"]),
            d_c = _zero_cauchy(state)
        )


class InvariantModel(ConstitutiveModel):
    """Fluid energy plus a function of I1 = |E|^2, I2 = |B|^2, I3 = g(E, B).

    Args:
        state_equation: Fluid energy density.
        function: Expression in I1, I2, I3, rho, s.
        constants: Scenario constants.
    """

    kind = "nonlinear_invariants"

    def __init__(
        self,
        state_equation: Expression,
        function: Expression,
        constants: Optional[Mapping[str, float]] = None
    ) -> None:
        super().__init__(state_equation = state_equation, constants = constants)
        self.function = function
        self._partials = {name: function.derivative(name) for name in INVARIANT_VARIABLES}

    def matter(self, state: MatterState) -> ConstitutiveEval:
        energy, d_rho, d_s = self._fluid(state)
        metric = state.metric
        mixed_available = state.E.degree == state.B.degree
        if not mixed_available and self.function.depends_on("I3"):
            raise ModelError("the mixed invariant I3 needs n = 3")
        invariants = {
            "I1": form_inner(state.E, state.E, metric),
            "I2": form_inner(state.B, state.B, metric),
            "I3": form_inner(state.E, state.B, metric) if mixed_available else np.zeros(state.shape)
        }
        env = self._env(state, **invariants)
        shape = state.shape
        value = self.function.evaluate(env, shape = shape)
        partial = {name: expr.evaluate(env, shape = shape) for name, expr in self._partials.items()}

        e_sharp = raise_all(state.E, metric)
        b_sharp = raise_all(state.B, metric)
        d_E = e_sharp.scaled(2.0 * partial["I1"])
        d_B = b_sharp.scaled(2.0 * partial["I2"])
        if mixed_available:
            d_E = d_E + b_sharp.scaled(partial["I3"])
            d_B = d_B + e_sharp.scaled(partial["I3"])
        return ConstitutiveEval(
            energy = energy + value,
            d_rho = d_rho + partial["rho"],
            d_s = d_s + partial["s"],
            d_E = d_E,
            d_B = d_B,
            d_c = _zero_cauchy(state)
        )


class ElasticModel(LinearModel):
    """Linear electromagnetic solid with energy ``lam tr(c)^2 / 2 + mu tr(c.c)``.

    Args:
        state_equation: Fluid energy density.
        chi_e: Electric susceptibility.
        chi_b: Magnetic susceptibility.
        lame_lambda: First elastic modulus.
        shear_modulus: Second elastic modulus.
        constants: Scenario constants.
    """

    kind = "elastic"
    requires_cauchy = True

    def __init__(
        self,
        state_equation: Expression,
        chi_e: Expression,
        chi_b: Expression,
        lame_lambda: float,
        shear_modulus: float,
        constants: Optional[Mapping[str, float]] = None
    ) -> None:
        super().__init__(state_equation = state_equation, chi_e = chi_e, chi_b = chi_b, constants = constants)
        self.lame_lambda = float(lame_lambda)
        self.shear_modulus = float(shear_modulus)

    def matter(self, state: MatterState) -> ConstitutiveEval:
        base = super().matter(state)
        ginv = state.metric.ginv
        strain = state.cauchy.components
        strain_up = raise_all(state.cauchy, state.metric).components
        trace = np.einsum("...ab,...ab->...", ginv, strain)
        square = np.einsum("...ab,...ab->...", strain_up, strain)
        elastic = 0.5 * self.lame_lambda * trace ** 2 + self.shear_modulus * square
        d_c = self.lame_lambda * trace[..., None, None] * ginv + 2.0 * self.shear_modulus * strain_up
        return dataclasses.replace(
            base,
            energy = base.energy + elastic,
            d_c = TensorValue(components = d_c, variance = (UP, UP), dim = state.dim)
        )


class NonlinearEDModel(ConstitutiveModel):
    """Fluid energy plus a nonlinear electrodynamics density in alpha and beta.

    ``alpha = (|B|^2 - |E|^2) / 2`` and ``beta = g(E, B)``, so the density
    ``alpha`` alone is Maxwell's. Only n = 3 is supported.

    Args:
        state_equation: Fluid energy density.
        density: Expression in alpha and beta.
        constants: Scenario constants.
    """

    kind = "nonlinear_ed"

    def __init__(
        self,
        state_equation: Expression,
        density: Expression,
        constants: Optional[Mapping[str, float]] = None
    ) -> None:
        super().__init__(state_equation = state_equation, constants = constants)
        self.density = density
        self._density_alpha = density.derivative("alpha")
        self._density_beta = density.derivative("beta")

    def field_terms(self, alpha: np.ndarray, beta: np.ndarray, shape: tuple) -> tuple:
        env = dict(self.constants)
        env["alpha"] = alpha
        env["beta"] = beta
        return (
            self.density.evaluate(env, shape = shape),
            self._density_alpha.evaluate(env, shape = shape),
            self._density_beta.evaluate(env, shape = shape)
        )

    def matter(self, state: MatterState) -> ConstitutiveEval:
        if state.dim != 4:
            raise ModelError("nonlinear electrodynamics needs n = 3")
        energy, d_rho, d_s = self._fluid(state)
        metric = state.metric
        alpha = 0.5 * (form_inner(state.B, state.B, metric) - form_inner(state.E, state.E, metric))
        beta = form_inner(state.E, state.B, metric)
        value, d_alpha, d_beta = self.field_terms(alpha = alpha, beta = beta, shape = state.shape)
        e_sharp = raise_all(state.E, metric)
        b_sharp = raise_all(state.B, metric)
        return ConstitutiveEval(
            energy = energy + value - alpha,
            d_rho = d_rho,
            d_s = d_s,
            d_E = e_sharp.scaled(1.0 - d_alpha) + b_sharp.scaled(d_beta),
            d_B = b_sharp.scaled(d_alpha - 1.0) + e_sharp.scaled(d_beta),
            d_c = _zero_cauchy(state)
        )


def build_model(spec: ModelSpec, constants: Optional[Mapping[str, float]] = None) -> ConstitutiveModel:
    """Instantiate the model a scenario asks for.

    Args:
        spec: Model section of the scenario.
        constants: Scenario constants visible to every expression.
    """

    constants = dict(constants or {})
    names = tuple(constants)
    state_equation = parse_expression(spec.state_equation, variables = names + FLUID_VARIABLES)
    chi_e = parse_expression(spec.chi_e, variables = names + FLUID_VARIABLES)
    chi_b = parse_expression(spec.chi_b, variables = names + FLUID_VARIABLES)
    logger.debug("Building %s model", spec.kind)

    if spec.kind == "euler_maxwell":
        return EulerMaxwellModel(state_equation = state_equation, constants = constants)
    if spec.kind == "linear":
        return LinearModel(state_equation = state_equation, chi_e = chi_e, chi_b = chi_b, constants = constants)
    if spec.kind == "nonlinear_invariants":
        text = spec.invariant_function or invariant_polynomial(spec.coefficients)
        function = parse_expression(text, variables = names + INVARIANT_VARIABLES)
        return InvariantModel(state_equation = state_equation, function = function, constants = constants)
    if spec.kind == "elastic":
        return ElasticModel(
            state_equation = state_equation,
            chi_e = chi_e,
            chi_b = chi_b,
            lame_lambda = spec.lame_lambda,
            shear_modulus = spec.shear_modulus,
            constants = constants
        )
    if spec.kind == "nonlinear_ed":
        density = parse_expression(spec.nonlinear_density, variables = names + NONLINEAR_ED_VARIABLES)
        return NonlinearEDModel(state_equation = state_equation, density = density, constants = constants)
    raise ModelError(f"unknown model kind {spec.kind!r}")


def invariant_polynomial(coefficients: Mapping[str, float]) -> str:
    """Quadratic polynomial in I1, I2, I3 from named coefficients.

    Args:
        coefficients: Values keyed a1, a2, a3, b11, b22, b33, b12, b13, b23.
    """

    monomials = {
        "a1": "I1",
        "a2": "I2",
        "a3": "I3",
        "b11": "I1*I1",
        "b22": "I2*I2",
        "b33": "I3*I3",
        "b12": "I1*I2",
        "b13": "I1*I3",
        "b23": "I2*I3"
    }
    terms = [
        f"{float(coefficients[name])!r}*{monomials[name]}"
        for name in monomials
        if coefficients.get(name, 0.0)
    ]
    return " + ".join(terms) if terms else "0"


def maxwell_eval(state: MatterState) -> ConstitutiveEval:
    """Maxwell part ``-|E|^2/2 + |B|^2/2`` and its partials.

    Args:
        state: Matter state.
    """

    metric = state.metric
    e_square = form_inner(state.E, state.E, metric)
    b_square = form_inner(state.B, state.B, metric)
    zeros = np.zeros(state.shape)
    return ConstitutiveEval(
        energy = -0.5 * e_square + 0.5 * b_square,
        d_rho = zeros,
        d_s = zeros,
        d_E = raise_all(state.E, metric).scaled(-1.0),
        d_B = raise_all(state.B, metric),
        d_c = _zero_cauchy(state)
    )


def derived_fields(total: ConstitutiveEval, matter: ConstitutiveEval, metric: MetricValue) -> DerivedFields:
    """D, H from the total partials and P, M from the matter partials.

    Args:
        total: Total evaluation.
        matter: Matter evaluation.
        metric: Metric.
    """

    return DerivedFields(
        D = as_form(lower_all(total.d_E, metric), check = False).scaled(-1.0),
        H = as_form(lower_all(total.d_B, metric), check = False),
        P = as_form(lower_all(matter.d_E, metric), check = False).scaled(-1.0),
        M = as_form(lower_all(matter.d_B, metric), check = False).scaled(-1.0)
    )


def pressure_and_energy(evaluation: ConstitutiveEval, state: MatterState) -> tuple[np.ndarray, np.ndarray]:
    """Pressure ``rho e_rho + s e_s + d_B : B - e`` and ``e_tot = e - d_E . E``.

    Args:
        evaluation: Energy evaluation.
        state: Matter state.
    """

    pressure = (
        state.rho * evaluation.d_rho
        + state.s * evaluation.d_s
        + full_contraction(evaluation.d_B, state.B, normalized = True)
        - evaluation.energy
    )
    total_energy = evaluation.energy - full_contraction(evaluation.d_E, state.E)
    return pressure, total_energy


def elastic_stress(evaluation: ConstitutiveEval, state: MatterState, projected: bool = False) -> TensorValue:
    """Elastic stress ``t^m_n = -2 d_c^{lm} c_ln``.

    Args:
        evaluation: Energy evaluation with a Cauchy partial.
        state: Matter state with a Cauchy tensor.
        projected: Sandwich the result between transverse projectors.
    """

    if state.cauchy is None or evaluation.d_c is None:
        raise ModelError("elastic stress needs a Cauchy tensor")
    components = -2.0 * np.einsum("...lm,...ln->...mn", evaluation.d_c.components, state.cauchy.components)
    if projected:
        projector, _ = projection_tensor(state.frame, state.metric)
        components = np.einsum(
            "...ma,...ab,...bn->...mn",
            projector.components,
            components,
            projector.components
        )
    return TensorValue(components = components, variance = (UP, DOWN), dim = state.dim)


def linear_tilde_coefficients(model: LinearModel, state: MatterState) -> tuple[np.ndarray, np.ndarray]:
    """Density-corrected susceptibilities entering the matter pressure.

    The matter pressure of the linear model reads
    ``p0 + chi_e_tilde |E|^2 / 2 - chi_b_tilde |B|^2 / 2``.

    Args:
        model: Linear (or elastic) model.
        state: Matter state.
    """

    chi = model.susceptibilities(state)
    tilde_e = chi["chi_e"] - state.rho * chi["chi_e_rho"] - state.s * chi["chi_e_s"]
    tilde_b = chi["chi_b"] + state.rho * chi["chi_b_rho"] + state.s * chi["chi_b_s"]
    return tilde_e, tilde_b


def faraday_adapter(
    model: ConstitutiveModel,
    rho: np.ndarray,
    s: np.ndarray,
    faraday: FormValue,
    frame: ObserverFrame,
    metric: MetricValue,
    orientation: Orientation = POSITIVE,
    cauchy: Optional[TensorValue] = None,
    part: str = "total"
) -> FaradayEval:
    """Compose a model with the E/B split and apply the chain rule.

    Args:
        model: Constitutive model.
        rho: Proper mass density.
        s: Proper entropy density.
        faraday: Faraday 2-form.
        frame: Frame whose ``u`` need not be normalized.
        metric: Metric.
        orientation: Orientation sign.
        cauchy: Optional Cauchy tensor.
        part: Energy part to evaluate.
    """

    faraday = as_form(faraday, check = False)
    split = eb_decompose(faraday, frame, metric, orientation)
    state = MatterState(
        rho = rho,
        s = s,
        E = split.E,
        B = split.B,
        metric = metric,
        frame = frame,
        orientation = orientation,
        cauchy = cauchy
    )
    base = model.evaluate(state, part)
    c = frame.c
    k = metric.dim - 3
    letters = INDEX_LETTERS[:k]
    dual = hodge_star(faraday, metric, orientation).components

    electric_u = np.einsum("...a,...ba->...b", base.d_E.components, faraday.components)
    magnetic_u = np.einsum(f"...{letters},...b{letters}->...b", base.d_B.components, dual) / math.factorial(k)
    d_u = FormValue(components = -(electric_u + magnetic_u) / c, dim = metric.dim, degree = 1, check = False)

    u = frame.u.components
    x_e = base.d_E.components
    electric_f = np.einsum("...r,...s->...rs", u, x_e)
    electric_f = electric_f - np.swapaxes(electric_f, -1, -2)
    mu = volume_form(metric, orientation).components
    magnetic_f = np.einsum(
        f"...wxy{letters},...y,...{letters}->...wx",
        mu,
        u,
        base.d_B.components
    ) / math.factorial(k)
    magnetic_f = np.einsum("...rw,...sx,...wx->...rs", metric.ginv, metric.ginv, magnetic_f)
    d_F = TensorValue(components = -(electric_f + magnetic_f) / c, variance = (UP, UP), dim = metric.dim)
    return FaradayEval(
        energy = base.energy,
        d_rho = base.d_rho,
        d_s = base.d_s,
        d_u = d_u,
        d_F = d_F,
        d_c = base.d_c,
        base = base,
        split = split
    )


def fd_check_partials(
    model: ConstitutiveModel,
    state: MatterState,
    part: str = "total",
    step: float = FD_STEP,
    rtol: float = FD_RTOL,
    atol: float = FD_ATOL
) -> PartialsReport:
    """Compare every analytic partial against central differences.

    Args:
        model: Constitutive model.
        state: Matter state (pointwise or batched).
        part: Energy part to check.
        step: Central-difference step.
        rtol: Relative tolerance.
        atol: Absolute floor.
    """

    analytic = model.evaluate(state, part)
    report = PartialsReport()

    def energy_of(changed: MatterState) -> np.ndarray:
        return model.evaluate(changed, part).energy

    for name in ("rho", "s"):
        base_value = getattr(state, name)
        numeric = central_difference(
            lambda delta: energy_of(state.replace(**{name: base_value + delta})),
            step
        )
        report.checks.append(_compare(name, getattr(analytic, f"d_{name}"), numeric, rtol, atol))

    dim = state.dim
    for axis in range(dim):
        basis = np.zeros(dim)
        basis[axis] = 1.0
        numeric = central_difference(
            lambda delta: energy_of(state.replace(E = _shift_form(state.E, basis, delta))),
            step
        )
        report.checks.append(_compare(f"E[{axis}]", analytic.d_E.components[..., axis], numeric, rtol, atol))

    degree = state.B.degree
    for indices in itertools.combinations(range(dim), degree):
        basis = antisymmetric_basis(dim = dim, indices = indices)
        numeric = central_difference(
            lambda delta: energy_of(state.replace(B = _shift_form(state.B, basis, delta))),
            step
        )
        value = analytic.d_B.components[(Ellipsis,) + tuple(indices)]
        report.checks.append(_compare(f"B{list(indices)}", value, numeric, rtol, atol))

    if state.cauchy is not None and analytic.d_c is not None:
        for first in range(dim):
            for second in range(first, dim):
                basis = np.zeros((dim, dim))
                basis[first, second] = 1.0
                basis[second, first] = 1.0
                numeric = central_difference(
                    lambda delta: energy_of(
                        state.replace(cauchy = _shift_tensor(state.cauchy, basis, delta))
                    ),
                    step
                )
                value = analytic.d_c.components[..., first, second]
                if first != second:
                    value = 2.0 * value
                report.checks.append(_compare(f"c[{first},{second}]", value, numeric, rtol, atol))

    if not report.passed:
        logger.warning(
            "Finite-difference check failed for %s model: %s",
            model.kind,
            ", ".join(item.name for item in report.failures())
        )
    return report


def fd_check_faraday(
    model: ConstitutiveModel,
    rho: np.ndarray,
    s: np.ndarray,
    faraday: FormValue,
    frame: ObserverFrame,
    metric: MetricValue,
    orientation: Orientation = POSITIVE,
    cauchy: Optional[TensorValue] = None,
    step: float = FD_STEP,
    rtol: float = FD_RTOL,
    atol: float = FD_ATOL
) -> PartialsReport:
    """Cross-check the Faraday adapter's u and F partials by central differences.

    Args:
        model: Constitutive model.
        rho: Proper mass density.
        s: Proper entropy density.
        faraday: Faraday 2-form.
        frame: Observer frame.
        metric: Metric.
        orientation: Orientation sign.
        cauchy: Optional Cauchy tensor.
        step: Central-difference step.
        rtol: Relative tolerance.
        atol: Absolute floor.
    """

    adapter = faraday_adapter(
        model = model,
        rho = rho,
        s = s,
        faraday = faraday,
        frame = frame,
        metric = metric,
        orientation = orientation,
        cauchy = cauchy
    )
    report = PartialsReport()
    dim = metric.dim

    def energy_of(new_faraday: FormValue, new_frame: ObserverFrame) -> np.ndarray:
        return faraday_adapter(
            model = model,
            rho = rho,
            s = s,
            faraday = new_faraday,
            frame = new_frame,
            metric = metric,
            orientation = orientation,
            cauchy = cauchy
        ).energy

    for axis in range(dim):
        basis = np.zeros(dim)
        basis[axis] = 1.0

        def shifted_frame(delta: float, basis = basis) -> ObserverFrame:
            moved = TensorValue(components = frame.u.components + delta * basis, variance = (UP,), dim = dim)
            return ObserverFrame(u = moved, c = frame.c)

        numeric = central_difference(lambda delta: energy_of(faraday, shifted_frame(delta)), step)
        report.checks.append(_compare(f"u[{axis}]", adapter.d_u.components[..., axis], numeric, rtol, atol))

    for first, second in itertools.combinations(range(dim), 2):
        basis = antisymmetric_basis(dim = dim, indices = (first, second))
        numeric = central_difference(
            lambda delta: energy_of(_shift_form(faraday, basis, delta), frame),
            step
        )
        value = adapter.d_F.components[..., first, second]
        report.checks.append(_compare(f"F[{first},{second}]", value, numeric, rtol, atol))
    return report


def nonlinear_ed_eval(
    faraday: FormValue,
    metric: MetricValue,
    density: Expression,
    orientation: Orientation = POSITIVE,
    constants: Optional[Mapping[str, float]] = None
) -> tuple[np.ndarray, TensorValue]:
    """Lagrangian coefficient ``-eps_nl`` and stress-energy of a nonlinear density.

    Uses ``alpha = <F, F>/2`` and ``beta`` the volume coefficient of
    ``F ^ F / 2``; the stress-energy is
    ``eps_alpha T_M + (eps_alpha alpha + eps_beta beta - eps) delta``.

    Args:
        faraday: Faraday 2-form.
        metric: Metric of a 3+1 spacetime.
        density: Expression in alpha and beta.
        orientation: Orientation sign.
        constants: Scenario constants.
    """

    if metric.dim != 4:
        raise ModelError("nonlinear electrodynamics needs n = 3")
    faraday = as_form(faraday, check = False)
    alpha, beta = nonlinear_invariants(faraday, metric, orientation)
    env = dict(constants or {})
    env["alpha"] = alpha
    env["beta"] = beta
    shape = np.shape(alpha)
    value = density.evaluate(env, shape = shape)
    d_alpha = density.derivative("alpha").evaluate(env, shape = shape)
    d_beta = density.derivative("beta").evaluate(env, shape = shape)
    maxwell = maxwell_sem(faraday, metric).components
    identity = np.broadcast_to(np.eye(metric.dim), shape + (metric.dim, metric.dim))
    components = (
        d_alpha[..., None, None] * maxwell
        + (d_alpha * alpha + d_beta * beta - value)[..., None, None] * identity
    )
    return -value, TensorValue(components = components, variance = (UP, DOWN), dim = metric.dim)


def nonlinear_invariants(
    faraday: FormValue,
    metric: MetricValue,
    orientation: Orientation = POSITIVE
) -> tuple[np.ndarray, np.ndarray]:
    """``alpha = <F, F>/2`` and ``beta`` with ``F ^ F / 2 = beta mu``.

    Args:
        faraday: Faraday 2-form.
        metric: Metric.
        orientation: Orientation sign.
    """

    faraday = as_form(faraday, check = False)
    alpha = 0.5 * form_inner(faraday, faraday, metric)
    beta = 0.5 * top_form_coefficient(wedge(faraday, faraday), metric, orientation)
    return alpha, beta


def lagrangian_sem_fd(
    lagrangian: Callable[[FormValue], np.ndarray],
    faraday: FormValue,
    metric: MetricValue,
    step: float = FD_STEP
) -> TensorValue:
    """Stress-energy ``l delta - Y (x)tr F`` with ``Y`` from central differences.

    ``lagrangian`` returns the volume-form coefficient of a gauge-invariant
    field Lagrangian.

    Args:
        lagrangian: Coefficient as a function of F.
        faraday: Faraday 2-form.
        metric: Metric.
        step: Central-difference step.
    """

    faraday = as_form(faraday, check = False)
    dim = metric.dim
    derivative = np.zeros(faraday.batch_shape + (dim, dim))
    for first, second in itertools.combinations(range(dim), 2):
        basis = antisymmetric_basis(dim = dim, indices = (first, second))
        value = central_difference(lambda delta: lagrangian(_shift_form(faraday, basis, delta)), step)
        derivative[..., first, second] = value
        derivative[..., second, first] = -value
    identity = np.broadcast_to(np.eye(dim), faraday.batch_shape + (dim, dim))
    traced = np.einsum("...ag,...bg->...ab", derivative, faraday.components)
    components = lagrangian(faraday)[..., None, None] * identity - traced
    return TensorValue(components = components, variance = (UP, DOWN), dim = dim)


def central_difference(function: Callable[[float], np.ndarray], step: float) -> np.ndarray:
    return (np.asarray(function(step)) - np.asarray(function(-step))) / (2.0 * step)


def _compare(name: str, analytic, numeric, rtol: float, atol: float) -> PartialCheck:
    analytic = np.asarray(analytic, dtype = float)
    numeric = np.asarray(numeric, dtype = float)
    analytic, numeric = np.broadcast_arrays(analytic, numeric)
    error = np.abs(analytic - numeric)
    allowed = np.maximum(rtol * np.maximum(np.abs(analytic), np.abs(numeric)), atol)
    ratio = error / allowed
    worst = np.unravel_index(int(np.argmax(ratio)), ratio.shape) if ratio.ndim else ()
    return PartialCheck(
        name = name,
        analytic = float(analytic[worst]),
        numeric = float(numeric[worst]),
        error = float(error[worst]),
        passed = bool(np.all(error <= allowed))
    )


def antisymmetric_basis(dim: int, indices: tuple) -> np.ndarray:
    basis = np.zeros((dim,) * len(indices))
    for permutation in itertools.permutations(range(len(indices))):
        inversions = sum(
            1
            for i in range(len(permutation))
            for j in range(i + 1, len(permutation))
            if permutation[i] > permutation[j]
        )
        basis[tuple(indices[p] for p in permutation)] = -1.0 if inversions % 2 else 1.0
    return basis


def _shift_form(form: FormValue, basis: np.ndarray, delta: float) -> FormValue:
    return FormValue(
        components = form.components + delta * basis,
        dim = form.dim,
        degree = form.degree,
        check = False
    )


def _shift_tensor(tensor: TensorValue, basis: np.ndarray, delta: float) -> TensorValue:
    return TensorValue(components = tensor.components + delta * basis, variance = tensor.variance, dim = tensor.dim)


def _zero_multivector(state: MatterState, rank: int) -> TensorValue:
    return TensorValue(
        components = np.zeros(state.shape + (state.dim,) * rank),
        variance = (UP,) * rank,
        dim = state.dim
    )


def _zero_cauchy(state: MatterState) -> Optional[TensorValue]:
    if state.cauchy is None:
        return None
    return _zero_multivector(state, 2)


def _add_optional(left: Optional[TensorValue], right: Optional[TensorValue]) -> Optional[TensorValue]:
    if left is None:
        return right
    if right is None:
        return left
    return left + right
