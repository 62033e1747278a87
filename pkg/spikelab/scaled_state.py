"""
U^Q(x) = α Ū(β|x|) with α = V(Q)^(1/(p-1)) and β = sqrt(V(Q)/J(Q)).

Every half-space and boundary-trace integral reduces to one radial moment of
Ū times a closed-form angular constant and a power of α and β.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Tuple, Union

import numpy as np
from numpy.typing import ArrayLike, NDArray

from spikelab.errors import PreconditionError
from spikelab.groundstate import RadialProfile


def sphere_area(n: int) -> float:
    """|S^n| = 2π^((n+1)/2) / Γ((n+1)/2); zero for n = -1."""
    if n < 0:
        return 0.0
    return 2.0 * math.pi ** ((n + 1) / 2.0) / math.gamma((n + 1) / 2.0)


def halfspace_normal_weight(dimension: int) -> float:
    """a_N = ∫ (ω·ν) dσ(ω) over the hemisphere ω·ν <= 0 of S^(N-1)."""
    return -(math.pi ** ((dimension - 1) / 2.0)) / math.gamma((dimension + 1) / 2.0)


class Moment(str, Enum):
    GRAD_SQ = "GRAD_SQ"
    U_SQ = "U_SQ"


@dataclass(frozen=True, eq=False)
class ScaledGroundState:
    profile: RadialProfile
    anchor: NDArray
    normal: NDArray
    j_value: float
    v_value: float

    def __post_init__(self) -> None:
        if not (self.j_value > 0.0 and self.v_value > 0.0):
            raise PreconditionError(
                f"J(Q)={self.j_value} and V(Q)={self.v_value} must be positive"
            )
        object.__setattr__(self, "anchor", np.asarray(self.anchor, dtype=float))
        object.__setattr__(self, "normal", np.asarray(self.normal, dtype=float))

    @property
    def dimension(self) -> int:
        return self.profile.dimension

    @property
    def exponent(self) -> float:
        return self.profile.exponent

    @property
    def alpha(self) -> float:
        return self.v_value ** (1.0 / (self.exponent - 1.0))

    @property
    def beta(self) -> float:
        return math.sqrt(self.v_value / self.j_value)

    def evaluate(self, x: ArrayLike) -> Union[float, NDArray]:
        r = np.linalg.norm(np.asarray(x, dtype=float), axis=-1)
        return self.alpha * self.profile.eval(self.beta * r)

    def gradient(self, x: ArrayLike) -> NDArray:
        x = np.asarray(x, dtype=float)
        r = np.linalg.norm(x, axis=-1)
        radial = self.alpha * self.beta * np.asarray(self.profile.eval_deriv(self.beta * r))
        with np.errstate(invalid="ignore", divide="ignore"):
            unit = np.where(r[..., None] > 0.0, x / r[..., None], 0.0)
        return radial[..., None] * unit

    def halfspace_power_integral(self, q: float) -> float:
        """∫ (U^Q)^q over a half-space."""
        if not q > 1.0:
            raise PreconditionError(f"q must exceed 1, got {q}")
        n = self.dimension
        full = sphere_area(n - 1) * self.profile.radial_moment(q, 0, 0)
        return self.alpha**q * self.beta ** (-n) * 0.5 * full

    def normal_moment(self, integrand: Moment) -> float:
        """∫_{x·ν<=0} (x·ν) g dx for g = |∇U^Q|² or (U^Q)²; always negative."""
        n = self.dimension
        weight = halfspace_normal_weight(n)
        if Moment(integrand) is Moment.GRAD_SQ:
            radial = self.profile.radial_moment(0.0, 2, 1)
            scale = self.alpha**2 * self.beta ** (1 - n)
        else:
            radial = self.profile.radial_moment(2.0, 0, 1)
            scale = self.alpha**2 * self.beta ** (-(n + 1))
        return scale * weight * radial

    def halfspace_first_moment(self, direction: ArrayLike, integrand: Moment) -> float:
        """∫_{x·ν<=0} (x·μ) g dx; tangential components of μ integrate to zero."""
        mu = np.asarray(direction, dtype=float)
        if abs(float(np.linalg.norm(mu)) - 1.0) > 1e-12:
            raise PreconditionError("direction must be a unit vector")
        return float(mu @ self.normal) * self.normal_moment(integrand)

    def boundary_trace_moments(self) -> Tuple[float, float]:
        """(Ā^Q, B̄^Q) over the trace hyperplane x·ν = 0."""
        n, p = self.dimension, self.exponent
        if n == 1:
            return 0.0, 0.0
        area = sphere_area(n - 2)
        a_bar = (
            0.5
            * area
            * self.alpha ** (p + 1.0)
            * self.beta ** (-(n + 1))
            * self.profile.radial_moment(p + 1.0, 0, 1)
        )
        b_bar = (
            0.25
            * (n - 1)
            * area
            * self.alpha**2
            * self.beta ** (-(n - 1))
            * self.profile.radial_moment(2.0, 0, -1)
        )
        return a_bar, b_bar

    def limit_energy(self) -> float:
        p = self.exponent
        return (0.5 - 1.0 / (p + 1.0)) * self.halfspace_power_integral(p + 1.0)
