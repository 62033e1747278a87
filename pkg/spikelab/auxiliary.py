"""
Auxiliary functions Γ, Σ and Σ̄ on the boundary, and the constants that
enter the two-term energy expansion c₀Γ(Q) + εΣ(Q).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Dict, Optional

import numpy as np
from numpy.typing import NDArray

from spikelab.errors import BoundaryConstancyError
from spikelab.geometry import BoundaryPoint, DomainSpec, sample_boundary
from spikelab.groundstate import RadialProfile, check_subcritical, solve_ground_state
from spikelab.logging_config import get_logger
from spikelab.potentials import PotentialField, parse_expression, validate_assumptions
from spikelab.scaled_state import (
    Moment,
    ScaledGroundState,
    halfspace_normal_weight,
    sphere_area,
)


CONSTANCY_THRESHOLD = 1e-8


@dataclass(frozen=True, eq=False)
class ProblemData:
    dimension: int
    exponent: float
    domain: DomainSpec
    j_field: PotentialField
    v_field: PotentialField
    profile: RadialProfile
    constancy_samples: int = 400
    constancy_threshold: float = CONSTANCY_THRESHOLD
    seed: int = 0

    @cached_property
    def boundary_variation(self) -> Dict[str, float]:
        """Relative spread of J, V and Γ over a boundary sample."""
        points = np.array(
            [q.point for q in sample_boundary(self.domain, self.constancy_samples, seed=self.seed)]
        )
        j = np.atleast_1d(self.j_field.eval(points))
        v = np.atleast_1d(self.v_field.eval(points))
        gamma = v ** self.gamma_exponents[0] * j ** self.gamma_exponents[1]

        def spread(values: NDArray) -> float:
            return float((values.max() - values.min()) / np.abs(values).max())

        variation = {"J": spread(j), "V": spread(v), "GAMMA": spread(gamma)}
        get_logger("auxiliary").info(
            "boundary_variation",
            threshold=self.constancy_threshold,
            samples=self.constancy_samples,
            **variation,
        )
        return variation

    @property
    def gamma_exponents(self) -> tuple:
        p, n = self.exponent, self.dimension
        return (p + 1.0) / (p - 1.0) - 0.5 * n, 0.5 * n

    def is_boundary_constant(self, name: str) -> bool:
        return self.boundary_variation[name] < self.constancy_threshold

    def scaled_state(self, q: BoundaryPoint) -> ScaledGroundState:
        return ScaledGroundState(
            profile=self.profile,
            anchor=q.point,
            normal=q.normal,
            j_value=float(self.j_field.eval(q.point)),
            v_value=float(self.v_field.eval(q.point)),
        )


def build_problem(
    dimension: int,
    exponent: float,
    domain: DomainSpec,
    j_source: str = "1",
    v_source: str = "1",
    *,
    tol: float = 1e-10,
    assumption_samples: int = 100_000,
    constancy_samples: int = 400,
    constancy_threshold: float = CONSTANCY_THRESHOLD,
    seed: int = 0,
    profile: Optional[RadialProfile] = None,
) -> ProblemData:
    """Parse and validate J and V, then solve (or reuse) the ground state."""
    check_subcritical(dimension, exponent)
    j_field = parse_expression(j_source, dimension)
    v_field = parse_expression(v_source, dimension)
    validate_assumptions(j_field, domain, assumption_samples, name="J", seed=seed)
    validate_assumptions(v_field, domain, assumption_samples, name="V", seed=seed)
    if profile is None:
        profile = solve_ground_state(dimension, exponent, tol)
    return ProblemData(
        dimension=dimension,
        exponent=exponent,
        domain=domain,
        j_field=j_field,
        v_field=v_field,
        profile=profile,
        constancy_samples=constancy_samples,
        constancy_threshold=constancy_threshold,
        seed=seed,
    )


def gamma(data: ProblemData, q: BoundaryPoint) -> float:
    """Γ(Q) = V(Q)^((p+1)/(p-1) - N/2) · J(Q)^(N/2)."""
    e_v, e_j = data.gamma_exponents
    return float(data.v_field.eval(q.point)) ** e_v * float(data.j_field.eval(q.point)) ** e_j


def gamma_tangential_gradient(data: ProblemData, q: BoundaryPoint) -> NDArray:
    """∇Γ projected on the tangent frame of q (frame coordinates)."""
    e_v, e_j = data.gamma_exponents
    j = float(data.j_field.eval(q.point))
    v = float(data.v_field.eval(q.point))
    ambient = gamma(data, q) * (
        e_v * data.v_field.grad(q.point) / v + e_j * data.j_field.grad(q.point) / j
    )
    return q.frame @ ambient


def sigma(data: ProblemData, q: BoundaryPoint) -> float:
    state = data.scaled_state(q)
    p = data.exponent
    a_bar, b_bar = state.boundary_trace_moments()
    grad_j = float(data.j_field.grad(q.point) @ q.normal)
    grad_v = float(data.v_field.grad(q.point) @ q.normal)
    h = q.mean_curvature
    return (
        0.5 * grad_j * state.normal_moment(Moment.GRAD_SQ)
        + 0.5 * grad_v * state.normal_moment(Moment.U_SQ)
        - 0.5 * b_bar * state.j_value * h
        - (0.5 - 1.0 / (p + 1.0)) * a_bar * h
    )


@dataclass(frozen=True)
class AuxiliaryConstants:
    c0: float
    a_bar: float
    b_bar: float
    c1: float
    c2: float
    k1: float
    k2: float
    k3: float
    k4: float

    def as_dict(self) -> Dict[str, float]:
        return dict(self.__dict__)


def constants(data: ProblemData, q: BoundaryPoint) -> AuxiliaryConstants:
    """c₀, C₁, C₂ of Ū and Ā^Q, B̄^Q, k₁..k₄ with C_J = J(Q), C_V = V(Q)."""
    n, p = data.dimension, data.exponent
    profile = data.profile
    unit = ScaledGroundState(profile, q.point, q.normal, 1.0, 1.0)
    c0 = unit.limit_energy()
    a_unit, b_unit = unit.boundary_trace_moments()
    c1 = 0.5 * b_unit + (0.5 - 1.0 / (p + 1.0)) * a_unit
    c2 = -0.5 * halfspace_normal_weight(n) * profile.radial_moment(2.0, 0, 1)

    state = data.scaled_state(q)
    a_bar, b_bar = state.boundary_trace_moments()
    c_j, c_v = state.j_value, state.v_value
    return AuxiliaryConstants(
        c0=c0,
        a_bar=a_bar,
        b_bar=b_bar,
        c1=c1,
        c2=c2,
        k1=c_v ** ((p + 1.0) / (p - 1.0)) / (2.0 * c_j),
        k2=(c_v / c_j) ** 0.5,
        k3=0.5 * c_v ** (2.0 / (p - 1.0)),
        k4=-0.5 * b_bar * c_j - (0.5 - 1.0 / (p + 1.0)) * a_bar,
    )


def sigma_bar(data: ProblemData, q: BoundaryPoint) -> float:
    """Σ̄ for boundary-constant J and V, written through k₁..k₄."""
    for name in ("J", "V"):
        if not data.is_boundary_constant(name):
            raise BoundaryConstancyError(
                name, data.boundary_variation[name], data.constancy_threshold
            )
    n = data.dimension
    k = constants(data, q)
    weight = halfspace_normal_weight(n) * k.k2 ** (-(n + 1))
    grad_j = float(data.j_field.grad(q.point) @ q.normal)
    grad_v = float(data.v_field.grad(q.point) @ q.normal)
    return (
        k.k1 * grad_j * weight * data.profile.radial_moment(0.0, 2, 1)
        + k.k3 * grad_v * weight * data.profile.radial_moment(2.0, 0, 1)
        + k.k4 * q.mean_curvature
    )


def halfspace_mass(profile: RadialProfile) -> float:
    """C̄ = ∫ Ū^(p+1) over a half-space."""
    n, p = profile.dimension, profile.exponent
    return 0.5 * sphere_area(n - 1) * profile.radial_moment(p + 1.0, 0, 0)
