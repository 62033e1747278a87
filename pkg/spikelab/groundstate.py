"""
Radial ground state of -ΔU + U = U^p in R^N.

The profile is found by shooting on U(0) = alpha. A trajectory either crosses
zero (alpha too large), turns back up (alpha too small) or decays like the
decaying mode of the linearized equation. Bisection between a CROSS and a
REBOUND shot isolates alpha; the stored profile is then assembled from a
forward integration up to a splice radius and a backward integration that
starts on the decaying linear mode far out, so the exponentially growing mode
never enters the tail.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from pathlib import Path
from typing import Callable, Dict, Optional, Tuple, Union

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import integrate, optimize, special
from scipy.interpolate import CubicHermiteSpline

from spikelab.errors import (
    BracketError,
    PreconditionError,
    ResidualError,
    ShootingError,
    SubcriticalityError,
)
from spikelab.logging_config import get_logger


R_START = 1e-8
DECAY_FLOOR = 1e-12
GRID_POINTS = 4000
GRID_FIRST = 1e-2
SHOT_LIMIT = 80.0
TAIL_SPAN = 40.0
SHOT_RTOL = 1e-12
MIN_SHOT_RTOL = 1e-13
SHOT_ATOL = 1e-14
# u^(p-1) below this value: the equation is linear for classification.
LINEAR_REGIME = 1e-6
# Weight of the growing mode at the matching radius still called DECAYED.
DECAYED_GROWTH = 1e-3
# Extra solves allowed when the Nehari residual misses its target.
MAX_REFINEMENTS = 3
BRACKET_RANGE = (1e-6, 1e6)
BRACKET_POINTS = 49
# Bisection keeps going below tol down to this relative bracket width.
ALPHA_RESOLUTION = 1e-13
# Relative spread between the two bracket-end shots tolerated at the splice.
SPLICE_AGREEMENT = 1e-12
SPLICE_RANGE = (1e-3, 0.1)
SPLICE_SAMPLES = 4000

_GAUSS_NODES, _GAUSS_WEIGHTS = np.polynomial.legendre.leggauss(4)


class ShotKind(str, Enum):
    CROSS = "CROSS"
    REBOUND = "REBOUND"
    DECAYED = "DECAYED"


def unit_sphere_area(dimension: int) -> float:
    """Surface measure of S^(dimension-1); equals 2 for dimension 1."""
    return 2.0 * math.pi ** (dimension / 2.0) / math.gamma(dimension / 2.0)


def critical_exponent(dimension: int) -> float:
    if dimension <= 2:
        return math.inf
    return (dimension + 2.0) / (dimension - 2.0)


def check_subcritical(dimension: int, exponent: float) -> None:
    if not isinstance(dimension, (int, np.integer)) or dimension < 1:
        raise PreconditionError(f"N must be an integer >= 1, got {dimension!r}")
    if not exponent > 1.0:
        raise SubcriticalityError(f"p must satisfy p > 1, got p={exponent}")
    upper = critical_exponent(int(dimension))
    if not exponent < upper:
        raise SubcriticalityError(
            f"p must be subcritical: 1 < p < (N+2)/(N-2) = {upper:g} for "
            f"N={dimension}, got p={exponent}"
        )


def _ode(dimension: int, exponent: float) -> Callable:
    bend = dimension - 1.0

    def rhs(r: float, y: NDArray) -> list:
        u, du = y
        nonlinear = abs(u) ** (exponent - 1.0) * u
        return [du, u - nonlinear - bend / r * du]

    return rhs


def _series_start(dimension: int, exponent: float, alpha: float) -> list:
    curvature = (alpha - alpha**exponent) / dimension
    return [
        alpha + 0.5 * curvature * R_START**2,
        curvature * R_START,
    ]


def _decaying_mode(
    dimension: int, radii: ArrayLike, anchor: float
) -> Tuple[NDArray, NDArray]:
    """Decaying linear mode r^-nu K_nu(r) and its derivative, scaled to 1 at anchor."""
    nu = dimension / 2.0 - 1.0
    r = np.asarray(radii, dtype=float)
    ratio = (anchor / r) ** nu * np.exp(-(r - anchor)) / special.kve(nu, anchor)
    return ratio * special.kve(nu, r), -ratio * special.kve(nu + 1.0, r)


def _growth_weight(dimension: int, r: float, u: float, du: float) -> float:
    """Signed weight of the growing mode r^-nu I_nu(r) in (u, du), relative to u.

    Positive weight means the trajectory eventually turns up, negative means
    it eventually crosses zero.
    """
    nu = dimension / 2.0 - 1.0
    k_nu = special.kve(nu, r)
    k_next = special.kve(nu + 1.0, r)
    return float(r * special.ive(nu, r) * (k_nu * du / u + k_next))


def _make_grid(r_max: float, n_points: int) -> NDArray:
    return np.concatenate(([0.0], np.geomspace(GRID_FIRST, r_max, n_points - 1)))


def _fit_tail(dimension: int, radii: NDArray, values: NDArray) -> float:
    """Least-squares tail amplitude (relative residuals) on the outer tenth."""
    start = int(0.9 * len(radii))
    r = radii[start:]
    shape = r ** (-(dimension - 1) / 2.0) * np.exp(-r)
    w = shape / values[start:]
    return float(np.sum(w) / np.sum(w * w))


@dataclass(frozen=True, eq=False)
class RadialProfile:
    """Tabulated radial ground state with an exponential tail model."""

    dimension: int
    exponent: float
    radii: NDArray
    values: NDArray
    derivatives: NDArray
    c_tail: float
    tolerance: float

    def __post_init__(self) -> None:
        for name in ("radii", "values", "derivatives"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if not (self.radii.shape == self.values.shape == self.derivatives.shape):
            raise PreconditionError("profile arrays must have equal length")
        if self.radii[0] != 0.0 or np.any(np.diff(self.radii) <= 0.0):
            raise PreconditionError("profile radii must start at 0 and increase")
        if np.any(self.values <= 0.0):
            raise PreconditionError("profile values must be positive")

    @property
    def alpha(self) -> float:
        return float(self.values[0])

    @property
    def r_max(self) -> float:
        return float(self.radii[-1])

    @cached_property
    def second_derivatives(self) -> NDArray:
        r, u, du = self.radii, self.values, self.derivatives
        d2u = np.empty_like(u)
        d2u[0] = (u[0] - u[0] ** self.exponent) / self.dimension
        d2u[1:] = u[1:] - u[1:] ** self.exponent - (self.dimension - 1) / r[1:] * du[1:]
        return d2u

    @cached_property
    def _value_spline(self) -> CubicHermiteSpline:
        return CubicHermiteSpline(self.radii, self.values, self.derivatives)

    @cached_property
    def _derivative_spline(self) -> CubicHermiteSpline:
        return CubicHermiteSpline(
            self.radii, self.derivatives, self.second_derivatives
        )

    @cached_property
    def _moments(self) -> Dict[tuple, float]:
        return {}

    def _tail(self, r: NDArray) -> Tuple[NDArray, NDArray]:
        half = (self.dimension - 1) / 2.0
        value = self.c_tail * r ** (-half) * np.exp(-r)
        return value, -value * (1.0 + half / r)

    def _split(self, r: ArrayLike) -> Tuple[NDArray, NDArray]:
        r = np.asarray(r, dtype=float)
        if np.any(r < 0.0):
            raise PreconditionError("radius must be nonnegative")
        return r, r > self.r_max

    def eval(self, r: ArrayLike) -> Union[float, NDArray]:
        """Ū(r): Hermite interpolation on the grid, tail formula beyond r_max."""
        r, outer = self._split(r)
        out = np.asarray(self._value_spline(np.minimum(r, self.r_max)))
        if np.any(outer):
            out = np.where(outer, self._tail(np.maximum(r, self.r_max))[0], out)
        return float(out) if out.ndim == 0 else out

    def eval_deriv(self, r: ArrayLike) -> Union[float, NDArray]:
        r, outer = self._split(r)
        out = np.asarray(self._derivative_spline(np.minimum(r, self.r_max)))
        if np.any(outer):
            out = np.where(outer, self._tail(np.maximum(r, self.r_max))[1], out)
        return float(out) if out.ndim == 0 else out

    def radial_moment(
        self,
        power_u: float,
        power_du: int = 0,
        moment_k: int = 0,
        r_min: float = 0.0,
    ) -> float:
        """∫_{r_min}^∞ Ū^a (Ū')^b r^(N-1+k) dr.

        Gauss-Legendre on every grid interval of the Hermite interpolants,
        plus the tail model integrated from r_max to infinity.
        """
        if power_u < 0.0:
            raise PreconditionError("power_u must be >= 0")
        if power_du < 0 or int(power_du) != power_du or int(power_du) % 2:
            raise PreconditionError("power_du must be an even integer >= 0")
        if int(moment_k) != moment_k or moment_k < 1 - self.dimension:
            raise PreconditionError(
                f"moment_k must be an integer >= {1 - self.dimension}"
            )
        if power_u + power_du <= 0.0:
            raise PreconditionError(
                "integrand u^0 (u')^0 r^(N-1+k) is not integrable on (0, inf)"
            )
        if r_min < 0.0:
            raise PreconditionError("r_min must be nonnegative")
        key = (float(power_u), int(power_du), int(moment_k), float(r_min))
        if key in self._moments:
            return self._moments[key]
        weight = self.dimension - 1 + int(moment_k)

        def integrand(u: NDArray, du: NDArray, r: NDArray) -> NDArray:
            return u**power_u * du ** int(power_du) * r**weight

        total = 0.0
        if r_min < self.r_max:
            edges = self.radii[self.radii > r_min]
            edges = np.concatenate(([r_min], edges))
            left, right = edges[:-1], edges[1:]
            half = 0.5 * (right - left)
            nodes = (left + half)[:, None] + half[:, None] * _GAUSS_NODES[None, :]
            u = self._value_spline(nodes)
            du = self._derivative_spline(nodes)
            total += float(
                np.sum(half[:, None] * _GAUSS_WEIGHTS[None, :] * integrand(u, du, nodes))
            )
        start = max(r_min, self.r_max)

        def tail(r: float) -> float:
            u, du = self._tail(np.asarray(r))
            return float(integrand(u, du, np.asarray(r)))

        tail_part, _ = integrate.quad(tail, start, np.inf, epsabs=0.0, epsrel=1e-10)
        self._moments[key] = total + tail_part
        return self._moments[key]


@dataclass(frozen=True, eq=False)
class ShotOutcome:
    kind: ShotKind
    alpha: float
    radius: float
    growth: float = 0.0
    profile: Optional[RadialProfile] = None
    fate: Optional[ShotKind] = None


def _integrate(
    rhs: Callable,
    span: Tuple[float, float],
    y0: list,
    events: list,
    rtol: float,
    atol: float,
) -> integrate.OdeSolution:
    sol = integrate.solve_ivp(
        rhs,
        span,
        y0,
        method="DOP853",
        rtol=rtol,
        atol=atol,
        events=events,
        dense_output=True,
    )
    if sol.status == -1:
        raise ShootingError(
            f"integration failed: {sol.message}", sol.t[-1], sol.y[:, -1]
        )
    return sol


def _event(fn: Callable, direction: float, terminal: bool = True) -> Callable:
    fn.terminal = terminal
    fn.direction = direction
    return fn


def shoot(
    dimension: int,
    exponent: float,
    alpha: float,
    r_limit: float,
    *,
    rtol: float = SHOT_RTOL,
    build_profile: bool = True,
    n_grid: int = GRID_POINTS,
) -> ShotOutcome:
    """Integrate u'' + (N-1)/r u' = u - u^p from u(0)=alpha, u'(0)=0.

    Once u enters the linear regime the growing-mode weight decides whether the
    shot counts as DECAYED. Integration still runs on until a crossing or a
    rebound, which fixes the side of the ground state alpha lies on.
    """
    if not isinstance(dimension, (int, np.integer)) or dimension < 1:
        raise PreconditionError(f"N must be an integer >= 1, got {dimension!r}")
    if not exponent > 1.0:
        raise PreconditionError(f"p must be > 1, got {exponent}")
    if not alpha > 0.0 or not r_limit > 0.0:
        raise PreconditionError("alpha and r_limit must be positive")
    if alpha ** (exponent - 1.0) <= 1.0:
        # u''(0) >= 0: the trajectory never decreases.
        return ShotOutcome(ShotKind.REBOUND, alpha, 0.0)

    u_linear = min(max(LINEAR_REGIME ** (1.0 / (exponent - 1.0)), 1e-8), 1e-3 * alpha)
    events = [
        _event(lambda r, y: y[0], -1.0),
        _event(lambda r, y: y[1], 1.0),
        _event(lambda r, y: y[0] - u_linear, -1.0, terminal=False),
    ]
    sol = _integrate(
        _ode(dimension, exponent),
        (R_START, r_limit),
        _series_start(dimension, exponent, alpha),
        events,
        rtol,
        SHOT_ATOL * max(1.0, alpha),
    )
    crossed, rebounded, matched = (len(t) > 0 for t in sol.t_events)
    r_match = float(sol.t_events[2][0]) if matched else math.inf
    if rebounded and float(sol.t_events[1][0]) < r_match:
        return ShotOutcome(ShotKind.REBOUND, alpha, float(sol.t_events[1][0]))
    if crossed and not matched:
        return ShotOutcome(ShotKind.CROSS, alpha, float(sol.t_events[0][0]))
    if not matched:
        raise ShootingError(
            "r_limit reached before the trajectory could be classified",
            sol.t[-1],
            sol.y[:, -1],
        )

    # past the linear regime the integration keeps running until the growing
    # mode shows its sign as a crossing or a rebound
    fate = None
    if crossed:
        fate = ShotKind.CROSS
    elif rebounded:
        fate = ShotKind.REBOUND
    u_match, du_match = sol.y_events[2][0]
    growth = _growth_weight(dimension, r_match, u_match, du_match)
    if abs(growth) > DECAYED_GROWTH:
        kind = fate or (ShotKind.REBOUND if growth > 0.0 else ShotKind.CROSS)
        return ShotOutcome(kind, alpha, r_match, growth, fate=fate)

    tail_end, _ = _decaying_mode(dimension, [r_limit], r_match)
    if u_match * tail_end[0] >= DECAY_FLOOR:
        raise ShootingError(
            f"r_limit={r_limit} too short to certify decay below {DECAY_FLOOR}",
            r_match,
            (u_match, du_match),
        )
    profile = None
    if build_profile:
        grid = _make_grid(r_limit, n_grid)
        inner = grid <= r_match
        values = np.empty_like(grid)
        derivs = np.empty_like(grid)
        values[0], derivs[0] = alpha, 0.0
        u_in, du_in = sol.sol(grid[1:][inner[1:]])
        values[1:][inner[1:]], derivs[1:][inner[1:]] = u_in, du_in
        mode, mode_d = _decaying_mode(dimension, grid[~inner], r_match)
        values[~inner] = u_match * mode
        derivs[~inner] = u_match * mode_d
        profile = RadialProfile(
            dimension=int(dimension),
            exponent=float(exponent),
            radii=grid,
            values=values,
            derivatives=derivs,
            c_tail=_fit_tail(dimension, grid, values),
            tolerance=abs(growth),
        )
    return ShotOutcome(ShotKind.DECAYED, alpha, r_limit, growth, profile, fate)


def _side(outcome: ShotOutcome) -> int:
    """+1 when alpha overshoots the ground state, -1 when it undershoots."""
    if outcome.kind is ShotKind.CROSS:
        return 1
    if outcome.kind is ShotKind.REBOUND:
        return -1
    if outcome.fate is not None:
        return 1 if outcome.fate is ShotKind.CROSS else -1
    return 1 if outcome.growth < 0.0 else -1


def _find_bracket(
    dimension: int, exponent: float, rtol: float
) -> Tuple[float, float]:
    candidates = np.geomspace(*BRACKET_RANGE, BRACKET_POINTS)
    previous = None
    for alpha in candidates:
        outcome = shoot(dimension, exponent, float(alpha), SHOT_LIMIT, rtol=rtol, build_profile=False)
        if _side(outcome) > 0 and previous is not None:
            return previous, float(alpha)
        previous = float(alpha) if _side(outcome) < 0 else None
    raise BracketError(
        f"no CROSS/REBOUND bracket for N={dimension}, p={exponent} in "
        f"[{BRACKET_RANGE[0]:g}, {BRACKET_RANGE[1]:g}]"
    )


def _splice_level(
    dimension: int, exponent: float, low: float, high: float, rtol: float
) -> float:
    """Value of u at the outermost radius where shots from both bracket ends agree.

    Past that radius the forward profile carries the bracket's uncertainty in
    its growing mode, so the assembled profile switches to the backward tail.
    """
    rhs = _ode(dimension, exponent)
    floor = SPLICE_RANGE[0] * low
    shots = [
        _integrate(
            rhs,
            (R_START, SHOT_LIMIT),
            _series_start(dimension, exponent, alpha),
            [_event(lambda r, y: y[0] - floor, -1.0), _event(lambda r, y: y[1], 1.0)],
            rtol,
            SHOT_ATOL * max(1.0, alpha),
        )
        for alpha in (low, high)
    ]
    radii = np.linspace(R_START, min(s.t[-1] for s in shots), SPLICE_SAMPLES)
    u_low, u_high = (s.sol(radii)[0] for s in shots)
    middle = 0.5 * (u_low + u_high)
    spread = np.abs(u_high - u_low) / np.abs(middle)
    beyond = np.flatnonzero(spread > SPLICE_AGREEMENT)
    level = middle[max(beyond[0] - 1, 0)] if beyond.size else middle[-1]
    alpha = 0.5 * (low + high)
    return float(np.clip(level, SPLICE_RANGE[0] * alpha, SPLICE_RANGE[1] * alpha))


def _assemble_profile(
    dimension: int,
    exponent: float,
    low: float,
    high: float,
    n_grid: int,
    rtol: float,
) -> RadialProfile:
    log = get_logger("groundstate")
    rhs = _ode(dimension, exponent)
    alpha = 0.5 * (low + high)
    width = high - low
    u_split = _splice_level(dimension, exponent, low, high, rtol)

    forward = _integrate(
        rhs,
        (R_START, SHOT_LIMIT),
        _series_start(dimension, exponent, alpha),
        [
            _event(lambda r, y: y[0] - u_split, -1.0),
            _event(lambda r, y: y[0], -1.0),
            _event(lambda r, y: y[1], 1.0),
        ],
        rtol,
        SHOT_ATOL * max(1.0, alpha),
    )
    if not len(forward.t_events[0]):
        raise ShootingError(
            "forward trajectory left the ground state before the splice radius",
            forward.t[-1],
            forward.y[:, -1],
        )
    r_split = float(forward.t_events[0][0])
    du_split = float(forward.y_events[0][0][1])
    r_far = r_split + TAIL_SPAN
    (ratio,), (ratio_d,) = _decaying_mode(dimension, [r_far], r_split)
    atol_back = SHOT_ATOL * u_split * ratio

    def backward(scale: float) -> integrate.OdeSolution:
        start = [scale * u_split * ratio, scale * u_split * ratio_d]
        return _integrate(rhs, (r_far, r_split), start, [], rtol, atol_back)

    def mismatch(scale: float) -> float:
        return float(backward(scale).y[0, -1]) / u_split - 1.0

    low, high = 0.25, 4.0
    while mismatch(low) * mismatch(high) > 0.0:
        if high > 1e3:
            raise ShootingError("could not match the tail amplitude", r_split)
        low, high = low / 4.0, high * 4.0
    scale = optimize.brentq(mismatch, low, high, xtol=1e-15, rtol=1e-14)
    outer = backward(scale)
    slope_gap = abs(float(outer.y[1, -1]) - du_split) / abs(du_split)

    grid = _make_grid(r_far, n_grid)
    values = np.empty_like(grid)
    derivs = np.empty_like(grid)
    values[0], derivs[0] = alpha, 0.0
    inner = (grid > 0.0) & (grid <= r_split)
    values[inner], derivs[inner] = forward.sol(grid[inner])
    tail = grid > r_split
    values[tail], derivs[tail] = outer.sol(grid[tail])

    if np.any(values <= 0.0) or np.any(np.diff(values) >= 0.0):
        raise ShootingError("assembled profile is not positive and decreasing", r_split)
    if values[-1] >= DECAY_FLOOR:
        raise ShootingError(f"u(r_max)={values[-1]:.3e} is not below {DECAY_FLOOR}", r_far)
    c_tail = _fit_tail(dimension, grid, values)
    log.info(
        "profile_assembled",
        dimension=dimension,
        exponent=exponent,
        alpha=alpha,
        r_split=r_split,
        r_max=r_far,
        slope_gap=slope_gap,
        c_tail=c_tail,
    )
    return RadialProfile(
        dimension=int(dimension),
        exponent=float(exponent),
        radii=grid,
        values=values,
        derivatives=derivs,
        c_tail=c_tail,
        tolerance=width,
    )


def _bisect(
    dimension: int, exponent: float, low: float, high: float, width: float, rtol: float
) -> Tuple[float, float]:
    while high - low > width:
        mid = 0.5 * (low + high)
        if mid in (low, high):
            break
        outcome = shoot(dimension, exponent, mid, SHOT_LIMIT, rtol=rtol, build_profile=False)
        if _side(outcome) > 0:
            high = mid
        else:
            low = mid
    return low, high


def solve_ground_state(
    dimension: int,
    exponent: float,
    tol: float = 1e-10,
    *,
    n_grid: int = GRID_POINTS,
    rtol: float = SHOT_RTOL,
) -> RadialProfile:
    """Bisect alpha between a CROSS and a REBOUND shot until the bracket is below tol.

    Bisection continues past tol to ALPHA_RESOLUTION so the forward profile
    stays clean out to the splice. The returned profile satisfies
    |Nehari| <= 10 tol max(1, ∫Ū^(p+1)); otherwise it is rebuilt on a finer
    grid with a tighter integrator, up to MAX_REFINEMENTS times, before
    ResidualError.
    """
    log = get_logger("groundstate")
    check_subcritical(dimension, exponent)
    if not tol > 0.0:
        raise PreconditionError("tol must be positive")
    low, high = _find_bracket(dimension, exponent, rtol)
    log.info("bracket_found", dimension=dimension, exponent=exponent, low=low, high=high)
    width = min(tol, ALPHA_RESOLUTION * high)
    grid, shot_rtol = n_grid, rtol
    residual = target = math.nan
    for attempt in range(MAX_REFINEMENTS + 1):
        if attempt:
            # the bracket came from a looser integrator
            low, high = low - 100.0 * width, high + 100.0 * width
            grid *= 2
            shot_rtol = max(0.25 * shot_rtol, min(shot_rtol, MIN_SHOT_RTOL))
        low, high = _bisect(dimension, exponent, low, high, width, shot_rtol)
        profile = _assemble_profile(dimension, exponent, low, high, grid, shot_rtol)
        grad, mass, power = _energies(profile)
        residual = grad + mass - power
        # integrals above 1 turn the bound relative
        target = 10.0 * tol * max(1.0, power)
        log.info(
            "ground_state_solved",
            dimension=dimension,
            exponent=exponent,
            alpha=profile.alpha,
            bracket_width=high - low,
            n_grid=grid,
            attempt=attempt,
            nehari=residual,
            pohozaev=pohozaev_residual(profile),
        )
        if abs(residual) <= target:
            return profile
        log.warning("nehari_above_target", residual=residual, target=target, attempt=attempt)
    raise ResidualError("Nehari", residual, target)


def _energies(profile: RadialProfile) -> Tuple[float, float, float]:
    area = unit_sphere_area(profile.dimension)
    grad = area * profile.radial_moment(0.0, 2, 0)
    mass = area * profile.radial_moment(2.0, 0, 0)
    power = area * profile.radial_moment(profile.exponent + 1.0, 0, 0)
    return grad, mass, power


def nehari_residual(profile: RadialProfile) -> float:
    """∫|∇Ū|² + ∫Ū² − ∫Ū^(p+1) over R^N."""
    grad, mass, power = _energies(profile)
    return grad + mass - power


def pohozaev_residual(profile: RadialProfile) -> float:
    n, p = profile.dimension, profile.exponent
    grad, mass, power = _energies(profile)
    return 0.5 * (n - 2) * grad + 0.5 * n * mass - n / (p + 1.0) * power


def profile_summary(profile: RadialProfile) -> Dict[str, float]:
    grad, mass, power = _energies(profile)
    return {
        "N": profile.dimension,
        "p": profile.exponent,
        "alpha": profile.alpha,
        "c_tail": profile.c_tail,
        "r_max": profile.r_max,
        "tol": profile.tolerance,
        "grad_sq_integral": grad,
        "mass_integral": mass,
        "power_integral": power,
        "nehari_residual": grad + mass - power,
        "pohozaev_residual": pohozaev_residual(profile),
    }


def save_profile(
    profile: RadialProfile, stem: Union[str, Path], config_hash: Optional[str] = None
) -> Tuple[Path, Path]:
    """Write <stem>.csv (r, u, du) and the <stem>.json header."""
    stem = Path(stem)
    stem.parent.mkdir(parents=True, exist_ok=True)
    csv_path = stem.with_suffix(".csv")
    json_path = stem.with_suffix(".json")
    with csv_path.open("w", newline="") as fh:
        if config_hash is not None:
            fh.write(f"# config_sha256={config_hash}\n")
        writer = csv.writer(fh)
        writer.writerow(["r", "u", "du"])
        for r, u, du in zip(profile.radii, profile.values, profile.derivatives):
            writer.writerow([repr(float(r)), repr(float(u)), repr(float(du))])
    header = {
        "N": profile.dimension,
        "p": profile.exponent,
        "alpha": profile.alpha,
        "c_tail": profile.c_tail,
        "tol": profile.tolerance,
        "columns": ["r", "u", "du"],
    }
    if config_hash is not None:
        header["config_sha256"] = config_hash
    json_path.write_text(json.dumps(header, indent=2, sort_keys=True) + "\n")
    return csv_path, json_path


def load_profile(stem: Union[str, Path]) -> RadialProfile:
    stem = Path(stem)
    header = json.loads(stem.with_suffix(".json").read_text())
    rows = []
    with stem.with_suffix(".csv").open(newline="") as fh:
        lines = (line for line in fh if not line.startswith("#"))
        for row in csv.DictReader(lines):
            rows.append((float(row["r"]), float(row["u"]), float(row["du"])))
    data = np.array(rows, dtype=float)
    return RadialProfile(
        dimension=int(header["N"]),
        exponent=float(header["p"]),
        radii=data[:, 0],
        values=data[:, 1],
        derivatives=data[:, 2],
        c_tail=float(header["c_tail"]),
        tolerance=float(header["tol"]),
    )
