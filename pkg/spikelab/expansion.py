"""
Direct quadrature of the rescaled energy f_ε(U_P) and comparison with the
two-term expansion c₀Γ(Q) + εΣ(Q).

The energy integrals over Ω_ε ∩ B(P, R/β) are done in polar coordinates
centred at P = Q/ε. The polar angle θ is measured from the inward normal and
its panels refine dyadically toward the tangent cone θ = π/2, where rays
enter and leave the domain. Along each ray the exact inside intervals are
found by sign probing plus bisection on φ, and composite Gauss rules are
clipped to them, so no cell is ever cut by the boundary.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from numpy.typing import NDArray
from scipy import optimize

from spikelab.auxiliary import (
    ProblemData,
    constants,
    gamma,
    gamma_tangential_gradient,
    halfspace_mass,
    sigma,
)
from spikelab.errors import PreconditionError, QuadratureError
from spikelab.geometry import BoundaryPoint, tangent_step
from spikelab.logging_config import get_logger
from spikelab.scaled_state import Moment, sphere_area


TRUNCATION_FRACTION = 1e-8
PROPOSITION_EXPONENT = 1.05
GRADIENT_TOLERANCE = 0.10


@dataclass(frozen=True)
class QuadratureSettings:
    radius: float = 30.0
    depth: int = 8
    angular_nodes: int = 12
    radial_nodes: int = 8
    sphere_nodes: int = 48
    ray_samples: int = 200
    max_crossings: int = 6
    bisections: int = 60

    def __post_init__(self) -> None:
        if self.radius <= 0.0 or self.depth < 1:
            raise PreconditionError("quadrature radius must be positive and depth >= 1")
        if min(self.angular_nodes, self.radial_nodes, self.sphere_nodes) < 2:
            raise PreconditionError("quadrature rules need at least 2 nodes")

    def coarser(self) -> "QuadratureSettings":
        return replace(
            self,
            depth=max(1, self.depth - 1),
            angular_nodes=max(2, self.angular_nodes - 4),
            radial_nodes=max(2, self.radial_nodes - 2),
            sphere_nodes=max(4, self.sphere_nodes * 3 // 4),
        )


def _gauss(breaks: NDArray, order: int) -> Tuple[NDArray, NDArray]:
    x, w = np.polynomial.legendre.leggauss(order)
    left, right = breaks[:-1, None], breaks[1:, None]
    half = 0.5 * (right - left)
    return (left + half * (1.0 + x)).ravel(), (half * w).ravel()


def polar_angle_rule(depth: int, order: int) -> Tuple[NDArray, NDArray]:
    """Gauss nodes in θ on [0, π] with dyadic panels toward π/2 from both sides."""
    quarter = [0.5 * math.pi * (1.0 - 2.0 ** (-k)) for k in range(depth + 1)]
    left = np.array(quarter + [0.5 * math.pi])
    breaks = np.concatenate([left, math.pi - left[-2::-1]])
    return _gauss(breaks, order)


def sphere_rule(m: int, n: int) -> Tuple[NDArray, NDArray]:
    """Nodes on S^m ⊂ R^(m+1) and weights summing to |S^m|."""
    if m == 0:
        return np.array([[1.0], [-1.0]]), np.ones(2)
    if m == 1:
        psi = 2.0 * math.pi * np.arange(n) / n
        return np.column_stack([np.cos(psi), np.sin(psi)]), np.full(n, 2.0 * math.pi / n)
    chi, w_chi = _gauss(np.array([0.0, math.pi]), max(4, n // 2))
    sub, w_sub = sphere_rule(m - 1, n)
    points = np.concatenate(
        [
            np.repeat(np.cos(chi), len(sub))[:, None],
            (np.sin(chi)[:, None, None] * sub[None, :, :]).reshape(-1, m),
        ],
        axis=1,
    )
    weights = np.outer(w_chi * np.sin(chi) ** (m - 1), w_sub).ravel()
    return points, weights


def _directions(q: BoundaryPoint, settings: QuadratureSettings) -> Tuple[NDArray, NDArray]:
    n = q.dimension
    if n == 1:
        return np.array([-q.normal, q.normal]), np.ones(2)
    theta, w_theta = polar_angle_rule(settings.depth, settings.angular_nodes)
    sigma_pts, w_sigma = sphere_rule(n - 2, settings.sphere_nodes)
    tangent = sigma_pts @ q.frame
    dirs = (
        np.cos(theta)[:, None, None] * (-q.normal)[None, None, :]
        + np.sin(theta)[:, None, None] * tangent[None, :, :]
    ).reshape(-1, n)
    weights = np.outer(w_theta * np.sin(theta) ** (n - 2), w_sigma).ravel()
    return dirs, weights


def _radial_breaks(beta: float, radius: float) -> NDArray:
    """Panel edges of width 1/2 up to βr = 10, width 2 beyond, in unscaled r."""
    scaled = np.concatenate(
        [np.arange(0.0, min(10.0, radius), 0.5), np.arange(10.0, radius, 2.0), [radius]]
    )
    return np.unique(scaled) / beta


class _RayIntegrator:
    """Inside intervals of Ω_ε along rays from P, and integrals over them."""

    def __init__(
        self,
        data: ProblemData,
        q: BoundaryPoint,
        eps: float,
        settings: QuadratureSettings,
    ) -> None:
        self.data = data
        self.q = q
        self.eps = eps
        self.settings = settings
        self.state = data.scaled_state(q)
        self.length = settings.radius / self.state.beta
        self.dirs, self.weights = _directions(q, settings)

    def _inside(self, radii: NDArray, dirs: NDArray) -> NDArray:
        x = self.q.point + self.eps * radii[..., None] * dirs
        return self.data.domain.phi.eval(x) < 0.0

    def crossings(self) -> NDArray:
        """Boundary crossing radii per ray, padded with the truncation radius."""
        k = self.settings.ray_samples
        marks = self.length * (np.arange(1, k + 1) / k) ** 2
        dirs = self.dirs
        start = (dirs @ self.q.normal) < 0.0
        inside = self._inside(marks[None, :] * np.ones((len(dirs), 1)), dirs[:, None, :])
        states = np.concatenate([start[:, None], inside], axis=1)
        changes = states[:, 1:] != states[:, :-1]
        counts = changes.sum(axis=1)
        if counts.max(initial=0) > self.settings.max_crossings:
            raise QuadratureError(
                f"a ray crosses the boundary {int(counts.max())} times; raise "
                f"max_crossings or reduce the truncation radius"
            )
        ray, cell = np.nonzero(changes)
        edges = np.concatenate([[0.0], marks])
        low, high = edges[cell].copy(), edges[cell + 1].copy()
        left_state = states[ray, cell]
        for _ in range(self.settings.bisections):
            mid = 0.5 * (low + high)
            same = self._inside(mid, dirs[ray]) == left_state
            low = np.where(same, mid, low)
            high = np.where(same, high, mid)
        out = np.full((len(dirs), self.settings.max_crossings), self.length)
        slot = np.cumsum(changes, axis=1)[ray, cell] - 1
        out[ray, slot] = 0.5 * (low + high)
        return out

    def components(self) -> Tuple[Dict[str, float], Dict[str, float]]:
        s = self.settings
        state = self.state
        n, p = self.q.dimension, self.data.exponent
        panel_edges = _radial_breaks(state.beta, s.radius)
        breaks = np.concatenate(
            [np.tile(panel_edges, (len(self.dirs), 1)), self.crossings()], axis=1
        )
        breaks.sort(axis=1)
        left, right = breaks[:, :-1], breaks[:, 1:]
        live = (right > left) & self._inside(0.5 * (left + right), self.dirs[:, None, :])
        x, w = np.polynomial.legendre.leggauss(s.radial_nodes)
        half = 0.5 * (right - left)
        radii = left[..., None] + half[..., None] * (1.0 + x)
        weights = (half * live)[..., None] * w * radii ** (n - 1)

        u = state.alpha * np.asarray(state.profile.eval(state.beta * radii))
        du = state.alpha * state.beta * np.asarray(state.profile.eval_deriv(state.beta * radii))
        points = self.q.point + self.eps * radii[..., None] * self.dirs[:, None, None, :]
        j = self._field(self.data.j_field, points, radii.shape)
        v = self._field(self.data.v_field, points, radii.shape)

        ray_weights = self.weights[:, None, None] * weights
        grad_sq, u_sq = du**2, u**2
        values = {
            "grad_j": float(np.sum(ray_weights * j * grad_sq)),
            "grad": float(np.sum(ray_weights * grad_sq)),
            "mass_v": float(np.sum(ray_weights * v * u_sq)),
            "mass": float(np.sum(ray_weights * u_sq)),
            "power": float(np.sum(ray_weights * u ** (p + 1.0))),
        }
        extremes = {"j_max": float(np.max(np.abs(j))), "v_max": float(np.max(np.abs(v)))}
        return values, extremes

    @staticmethod
    def _field(field_, points: NDArray, shape: tuple) -> NDArray:
        if field_.is_constant:
            return np.full(shape, float(field_.expr))
        return np.asarray(field_.eval(points))


@dataclass(frozen=True)
class EnergyComponents:
    """Volume integrals over Ω_ε of the rescaled spike U_P."""

    eps: float
    grad_j: float
    grad: float
    mass_v: float
    mass: float
    power: float
    exponent: float
    j_anchor: float
    v_anchor: float

    @property
    def energy(self) -> float:
        return 0.5 * self.grad_j + 0.5 * self.mass_v - self.power / (self.exponent + 1.0)

    @property
    def flux(self) -> float:
        """∫_{∂Ω_ε} ∂_ν U_P · U_P through ∫ |∇U|² + U ΔU with ΔU = (V(Q)U - U^p)/J(Q)."""
        return self.grad + (self.v_anchor * self.mass - self.power) / self.j_anchor

    def as_dict(self) -> dict:
        return {
            "eps": self.eps,
            "grad_j": self.grad_j,
            "grad": self.grad,
            "mass_v": self.mass_v,
            "mass": self.mass,
            "power": self.power,
            "energy": self.energy,
            "flux": self.flux,
        }


@dataclass(frozen=True)
class EnergyEstimate:
    value: float
    error: float
    truncation: float
    components: EnergyComponents


def _truncation_bound(
    data: ProblemData, q: BoundaryPoint, extremes: Dict[str, float], radius: float
) -> float:
    """Full-space integral of the energy density magnitude beyond βr = radius."""
    state = data.scaled_state(q)
    profile, n, p = data.profile, data.dimension, data.exponent
    alpha, beta = state.alpha, state.beta
    tail = (
        0.5 * extremes["j_max"] * alpha**2 * beta**2 * profile.radial_moment(0.0, 2, 0, r_min=radius)
        + 0.5 * extremes["v_max"] * alpha**2 * profile.radial_moment(2.0, 0, 0, r_min=radius)
        + alpha ** (p + 1.0) / (p + 1.0) * profile.radial_moment(p + 1.0, 0, 0, r_min=radius)
    )
    return sphere_area(n - 1) * beta ** (-n) * tail


def energy_components(
    data: ProblemData,
    q: BoundaryPoint,
    eps: float,
    settings: QuadratureSettings = QuadratureSettings(),
) -> Tuple[EnergyComponents, Dict[str, float]]:
    if not eps > 0.0:
        raise PreconditionError(f"eps must be positive, got {eps}")
    integrator = _RayIntegrator(data, q, eps, settings)
    values, extremes = integrator.components()
    components = EnergyComponents(
        eps=eps,
        exponent=data.exponent,
        j_anchor=integrator.state.j_value,
        v_anchor=integrator.state.v_value,
        **values,
    )
    return components, extremes


def energy_at(
    data: ProblemData,
    q: BoundaryPoint,
    eps: float,
    settings: QuadratureSettings = QuadratureSettings(),
    *,
    estimate_error: bool = True,
) -> EnergyEstimate:
    """E(ε, Q) = f_ε(U_P) with an error budget of truncation plus refinement difference."""
    log = get_logger("expansion")
    components, extremes = energy_components(data, q, eps, settings)
    value = components.energy
    truncation = _truncation_bound(data, q, extremes, settings.radius)
    if truncation > TRUNCATION_FRACTION * abs(value):
        raise QuadratureError(
            f"truncation bound {truncation:.3e} exceeds {TRUNCATION_FRACTION:g}·|E|; "
            f"increase the quadrature radius (currently {settings.radius})"
        )
    error = truncation
    if estimate_error:
        coarse, _ = energy_components(data, q, eps, settings.coarser())
        error += abs(value - coarse.energy)
    log.debug(
        "energy_evaluated",
        eps=eps,
        Q=q.point.tolist(),
        energy=value,
        error=error,
        truncation=truncation,
        depth=settings.depth,
        radius=settings.radius,
    )
    return EnergyEstimate(value=value, error=error, truncation=truncation, components=components)


def _check_schedule(schedule: Sequence[float], minimum: int) -> NDArray:
    eps = np.asarray(schedule, dtype=float)
    if eps.ndim != 1 or len(eps) < minimum:
        raise PreconditionError(
            f"eps_schedule needs at least {minimum} values to extrapolate, got {len(eps)}"
        )
    if np.any(eps <= 0.0) or np.any(np.diff(eps) >= 0.0):
        raise PreconditionError("eps_schedule must be positive and strictly decreasing")
    return eps


def _energies(
    data: ProblemData,
    q: BoundaryPoint,
    eps: NDArray,
    settings: QuadratureSettings,
    workers: int,
    estimate_error: bool = True,
) -> List[EnergyEstimate]:
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        return list(
            pool.map(
                lambda e: energy_at(data, q, float(e), settings, estimate_error=estimate_error),
                eps,
            )
        )


def extrapolate(eps: NDArray, values: NDArray) -> Tuple[float, Optional[float]]:
    """Limit of values(ε) as ε -> 0 assuming values = s★ + a·ε^q, q fitted on the last three.

    Returns (s★, q); q is None when the sequence is already flat.
    """
    e1, e2, e3 = eps[-3:]
    s1, s2, s3 = values[-3:]
    scale = max(1.0, abs(s3))
    if abs(s2 - s3) <= 1e-12 * scale or abs(s1 - s2) <= 1e-12 * scale:
        return float(s3), None
    ratio = (s1 - s2) / (s2 - s3)

    def gap(q: float) -> float:
        return (e1**q - e2**q) / (e2**q - e3**q) - ratio

    try:
        order = optimize.brentq(gap, 0.05, 6.0)
    except ValueError:
        order = 1.0
    limit = s3 - (s2 - s3) * e3**order / (e2**order - e3**order)
    return float(limit), float(order)


def fit_exponent(eps: NDArray, residuals: NDArray, floor: NDArray) -> Optional[float]:
    """Log-log slope of residual(ε) over the points above the noise floor."""
    mask = np.asarray(residuals) > np.asarray(floor)
    if mask.sum() < 2:
        return None
    slope, _ = np.polyfit(np.log(eps[mask]), np.log(np.asarray(residuals)[mask]), 1)
    return float(slope)


@dataclass(frozen=True, eq=False)
class ExpansionReport:
    point: BoundaryPoint
    eps: NDArray
    energies: NDArray
    errors: NDArray
    slopes: NDArray
    extrapolated_slope: float
    order: Optional[float]
    target_sigma: float
    mismatch: float
    remainder_exponent: Optional[float]
    c0: float
    gamma: float

    def rows(self) -> List[dict]:
        scale = max(1.0, abs(self.target_sigma))
        return [
            {
                "eps": float(e),
                "E": float(v),
                "slope": float(s),
                "target_sigma": self.target_sigma,
                "mismatch": abs(float(s) - self.target_sigma) / scale,
            }
            for e, v, s in zip(self.eps, self.energies, self.slopes)
        ]

    def as_dict(self) -> dict:
        return {
            "Q": self.point.point.tolist(),
            "H": self.point.mean_curvature,
            "c0": self.c0,
            "gamma": self.gamma,
            "eps": self.eps.tolist(),
            "E": self.energies.tolist(),
            "error_budget": self.errors.tolist(),
            "slopes": self.slopes.tolist(),
            "extrapolated_slope": self.extrapolated_slope,
            "fitted_order": self.order,
            "target_sigma": self.target_sigma,
            "mismatch": self.mismatch,
            "remainder_exponent": self.remainder_exponent,
            "rows": self.rows(),
        }


def verify_expansion(
    data: ProblemData,
    q: BoundaryPoint,
    eps_schedule: Sequence[float],
    settings: QuadratureSettings = QuadratureSettings(),
    *,
    workers: int = 1,
) -> ExpansionReport:
    log = get_logger("expansion")
    eps = _check_schedule(eps_schedule, 3)
    estimates = _energies(data, q, eps, settings, workers)
    energies = np.array([e.value for e in estimates])
    errors = np.array([e.error for e in estimates])
    c0 = constants(data, q).c0
    g = gamma(data, q)
    target = sigma(data, q)
    slopes = (energies - c0 * g) / eps
    limit, order = extrapolate(eps, slopes)
    remainder = np.abs(energies - c0 * g - eps * target)
    exponent = fit_exponent(eps, remainder, 1e-12 * np.abs(energies) + errors)
    mismatch = abs(limit - target) / max(1.0, abs(target))
    log.info(
        "expansion_verified",
        Q=q.point.tolist(),
        eps=eps.tolist(),
        slopes=slopes.tolist(),
        extrapolated_slope=limit,
        fitted_order=order,
        target_sigma=target,
        mismatch=mismatch,
        remainder_exponent=exponent,
    )
    return ExpansionReport(
        point=q,
        eps=eps,
        energies=energies,
        errors=errors,
        slopes=slopes,
        extrapolated_slope=limit,
        order=order,
        target_sigma=target,
        mismatch=mismatch,
        remainder_exponent=exponent,
        c0=c0,
        gamma=g,
    )


@dataclass(frozen=True)
class EstimateCheck:
    name: str
    eps: List[float]
    lhs: List[float]
    rhs: List[float]
    residuals: List[float]
    exponent: Optional[float]
    passed: bool

    def as_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass(frozen=True, eq=False)
class PropositionReport:
    point: BoundaryPoint
    checks: List[EstimateCheck]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def rows(self) -> List[dict]:
        return [
            {"estimate": c.name, "eps": e, "lhs": l, "rhs": r, "residual": res}
            for c in self.checks
            for e, l, r, res in zip(c.eps, c.lhs, c.rhs, c.residuals)
        ]

    def as_dict(self) -> dict:
        return {
            "Q": self.point.point.tolist(),
            "passed": self.passed,
            "checks": [c.as_dict() for c in self.checks],
        }


def _check(
    name: str, eps: NDArray, lhs: Sequence, rhs: Sequence, noise: NDArray
) -> EstimateCheck:
    """Residual |lhs - rhs| per ε (Euclidean norm for vector estimates) and its decay."""
    lhs_arr, rhs_arr = np.asarray(lhs, dtype=float), np.asarray(rhs, dtype=float)
    if lhs_arr.ndim > 1:
        residuals = np.linalg.norm(lhs_arr - rhs_arr, axis=1)
        size = np.linalg.norm(lhs_arr, axis=1)
    else:
        residuals = np.abs(lhs_arr - rhs_arr)
        size = np.abs(lhs_arr)
    floor = np.maximum(noise, 1e-9 * np.maximum(1.0, size))
    exponent = fit_exponent(eps, residuals, floor)
    passed = exponent is None or exponent > PROPOSITION_EXPONENT
    return EstimateCheck(
        name=name,
        eps=eps.tolist(),
        lhs=lhs_arr.tolist(),
        rhs=rhs_arr.tolist(),
        residuals=residuals.tolist(),
        exponent=exponent,
        passed=passed,
    )


def _tangential_derivative(
    data: ProblemData,
    q: BoundaryPoint,
    eps: float,
    settings: QuadratureSettings,
    step: float,
) -> Tuple[NDArray, NDArray, NDArray]:
    """Central differences in Q of E, J∫|∇U|²+V∫U², and ∫U^(p+1) along each frame vector."""
    m = q.frame.shape[0]
    out = np.zeros((3, m))
    for i, e in enumerate(q.frame):
        plus = energy_components(data, tangent_step(data.domain, q, e, step), eps, settings)[0]
        minus = energy_components(data, tangent_step(data.domain, q, e, -step), eps, settings)[0]
        for k, (a, b) in enumerate(
            (
                (plus.energy, minus.energy),
                (
                    plus.j_anchor * plus.grad + plus.v_anchor * plus.mass,
                    minus.j_anchor * minus.grad + minus.v_anchor * minus.mass,
                ),
                (plus.power, minus.power),
            )
        ):
            out[k, i] = (a - b) / (2.0 * step)
    return out[0], out[1], out[2]


def verify_proposition(
    data: ProblemData,
    q: BoundaryPoint,
    eps_schedule: Sequence[float],
    settings: QuadratureSettings = QuadratureSettings(),
    *,
    workers: int = 1,
    include_derivatives: bool = False,
    step: Optional[float] = None,
) -> PropositionReport:
    """Residual decay of each two-term estimate for the spike integrals."""
    log = get_logger("expansion")
    eps = _check_schedule(eps_schedule, 2)
    estimates = _energies(data, q, eps, settings, workers)
    comps = [e.components for e in estimates]
    noise = np.array([e.error for e in estimates])
    state = data.scaled_state(q)
    a_bar, b_bar = state.boundary_trace_moments()
    h = q.mean_curvature
    j_q, v_q = state.j_value, state.v_value
    power_limit = state.halfspace_power_integral(data.exponent + 1.0)
    grad_j = float(data.j_field.grad(q.point) @ q.normal)
    grad_v = float(data.v_field.grad(q.point) @ q.normal)
    j_moment = grad_j * state.normal_moment(Moment.GRAD_SQ)
    v_moment = grad_v * state.normal_moment(Moment.U_SQ)

    checks = [
        _check(
            "power_integral",
            eps,
            [c.power for c in comps],
            power_limit - eps * h * a_bar,
            noise,
        ),
        _check("boundary_flux", eps, [c.flux for c in comps], -eps * h * b_bar, noise),
        _check(
            "energy_identity",
            eps,
            [j_q * c.grad + v_q * c.mass for c in comps],
            power_limit - eps * h * a_bar - eps * j_q * h * b_bar,
            noise,
        ),
        _check(
            "j_freezing",
            eps,
            [c.grad_j for c in comps],
            [j_q * c.grad + e * j_moment for c, e in zip(comps, eps)],
            noise,
        ),
        _check(
            "v_freezing",
            eps,
            [c.mass_v for c in comps],
            [v_q * c.mass + e * v_moment for c, e in zip(comps, eps)],
            noise,
        ),
    ]
    if include_derivatives and q.dimension > 1:
        step = 1e-3 * data.domain.diameter if step is None else step
        c_bar = halfspace_mass(data.profile)
        grad_gamma = gamma_tangential_gradient(data, q)
        quad_lhs, power_lhs = [], []
        for e in eps:
            _, quad, power = _tangential_derivative(data, q, float(e), settings, step)
            quad_lhs.append(float(e) * quad)
            power_lhs.append(float(e) * power / (data.exponent + 1.0))
        for name, lhs, factor in (
            ("energy_derivative", quad_lhs, c_bar),
            ("power_derivative", power_lhs, c_bar / (data.exponent + 1.0)),
        ):
            targets = [float(e) * factor * grad_gamma for e in eps]
            checks.append(_check(name, eps, lhs, targets, eps * noise / step))
    report = PropositionReport(point=q, checks=checks)
    log.info(
        "proposition_verified",
        Q=q.point.tolist(),
        exponents={c.name: c.exponent for c in checks},
        passed=report.passed,
    )
    return report


@dataclass(frozen=True, eq=False)
class GradientReport:
    point: BoundaryPoint
    eps: NDArray
    finite_differences: NDArray
    targets: NDArray
    mismatches: NDArray
    remainder_exponent: Optional[float]

    @property
    def passed(self) -> bool:
        return bool(self.mismatches[-1] <= GRADIENT_TOLERANCE)

    def rows(self) -> List[dict]:
        return [
            {
                "eps": float(e),
                "fd": fd.tolist(),
                "target": t.tolist(),
                "mismatch": float(m),
            }
            for e, fd, t, m in zip(self.eps, self.finite_differences, self.targets, self.mismatches)
        ]

    def as_dict(self) -> dict:
        return {
            "Q": self.point.point.tolist(),
            "passed": self.passed,
            "remainder_exponent": self.remainder_exponent,
            "rows": self.rows(),
        }


def verify_gradient_expansion(
    data: ProblemData,
    q: BoundaryPoint,
    eps_schedule: Sequence[float],
    settings: QuadratureSettings = QuadratureSettings(),
    *,
    step: Optional[float] = None,
) -> GradientReport:
    """∂_P E = ε ∂_Q E by central differences along the frame, against ε c₀ ∂Γ(Q)."""
    log = get_logger("expansion")
    eps = _check_schedule(eps_schedule, 1)
    step = 1e-3 * data.domain.diameter if step is None else step
    c0 = constants(data, q).c0
    grad_gamma = gamma_tangential_gradient(data, q)
    floor_scale = 1e-6 * c0 * gamma(data, q)
    fds, targets, mismatches = [], [], []
    for e in eps:
        d_energy, _, _ = _tangential_derivative(data, q, float(e), settings, step)
        fd = float(e) * d_energy
        target = float(e) * c0 * grad_gamma
        scale = max(float(np.linalg.norm(target)), float(e) * floor_scale)
        fds.append(fd)
        targets.append(target)
        mismatches.append(float(np.linalg.norm(fd - target)) / scale)
    fds_arr, targets_arr = np.array(fds), np.array(targets)
    residuals = np.linalg.norm(fds_arr - targets_arr, axis=1) if len(eps) else np.zeros(0)
    exponent = fit_exponent(eps, residuals, eps * floor_scale) if len(eps) > 1 else None
    report = GradientReport(
        point=q,
        eps=eps,
        finite_differences=fds_arr,
        targets=targets_arr,
        mismatches=np.array(mismatches),
        remainder_exponent=exponent,
    )
    log.info(
        "gradient_verified",
        Q=q.point.tolist(),
        eps=eps.tolist(),
        mismatches=report.mismatches.tolist(),
        remainder_exponent=exponent,
    )
    return report
