"""
Locate and classify boundary critical points of Γ or Σ̄.

Every refinement works in the projection chart s -> P(Q + Σ s_i e_i) around
the current point, so tangential derivatives are ordinary derivatives in s.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from numpy.typing import NDArray
from scipy.cluster import hierarchy

from spikelab.auxiliary import (
    ProblemData,
    gamma,
    gamma_tangential_gradient,
    sigma,
    sigma_bar,
)
from spikelab.errors import (
    BoundaryConstancyError,
    DispatchError,
    NumericalError,
    PreconditionError,
)
from spikelab.geometry import BoundaryPoint, project_to_boundary, sample_boundary
from spikelab.logging_config import get_logger


STATIONARITY_TOL = 1e-9
DEGENERACY_TOL = 1e-6
HESSIAN_STEP = 1e-4
MAX_ITERATIONS = 200
NEWTON_RADIUS = 0.05
GRADIENT_RADIUS = 0.25
NEWTON_RCOND = 1e-6
ARMIJO = 1e-4
MERGE_FRACTION = 1e-5
FAMILY_FRACTION = 0.2


class Function(str, Enum):
    GAMMA = "GAMMA"
    SIGMA = "SIGMA"
    SIGMA_BAR = "SIGMA_BAR"


class Classification(str, Enum):
    MIN = "MIN"
    MAX = "MAX"
    SADDLE = "SADDLE"
    DEGENERATE = "DEGENERATE"


class Theorem(str, Enum):
    THM1A = "Thm1a"
    THM1B = "Thm1b"
    THM2 = "Thm2"
    NONE = "none"


_EVALUATORS: Dict[Function, Callable[[ProblemData, BoundaryPoint], float]] = {
    Function.GAMMA: gamma,
    Function.SIGMA: sigma,
    Function.SIGMA_BAR: sigma_bar,
}


def evaluate(data: ProblemData, func: Function, q: BoundaryPoint) -> float:
    return _EVALUATORS[Function(func)](data, q)


def check_dispatch(data: ProblemData, func: Function) -> None:
    func = Function(func)
    if func is Function.GAMMA and data.is_boundary_constant("GAMMA"):
        raise DispatchError(
            "Γ is constant on the boundary (relative variation "
            f"{data.boundary_variation['GAMMA']:.2e}): when J and V are constant "
            "there too the Thm2 regime applies and concentration is decided by "
            "the critical points of Σ̄, call with SIGMA_BAR"
        )
    if func is Function.SIGMA_BAR:
        for name in ("J", "V"):
            if not data.is_boundary_constant(name):
                raise BoundaryConstancyError(
                    name, data.boundary_variation[name], data.constancy_threshold
                )


@dataclass(frozen=True)
class LandscapeRow:
    point: BoundaryPoint
    value: float
    gamma: float
    sigma_bar: Optional[float]


def scan_landscape(
    data: ProblemData, func: Function, n: int, *, seed: int = 0
) -> List[LandscapeRow]:
    func = Function(func)
    check_dispatch(data, func)
    with_bar = data.is_boundary_constant("J") and data.is_boundary_constant("V")
    rows = []
    for q in sample_boundary(data.domain, n, seed=seed):
        rows.append(
            LandscapeRow(
                point=q,
                value=evaluate(data, func, q),
                gamma=gamma(data, q),
                sigma_bar=sigma_bar(data, q) if with_bar else None,
            )
        )
    return rows


@dataclass(frozen=True, eq=False)
class CriticalPointReport:
    location: BoundaryPoint
    function: Function
    value: float
    gradient_norm: float
    eigenvalues: NDArray
    classification: Classification
    nondegenerate: bool
    theorems: Tuple[Theorem, ...]
    converged: bool = True
    iterations: int = 0
    hessian_error: float = 0.0
    family_size: int = 1
    counted: bool = True

    def as_dict(self) -> dict:
        return {
            "Q": self.location.point.tolist(),
            "normal": self.location.normal.tolist(),
            "H": self.location.mean_curvature,
            "function": self.function.value,
            "value": self.value,
            "gradient_norm": self.gradient_norm,
            "eigenvalues": self.eigenvalues.tolist(),
            "classification": self.classification.value,
            "nondegenerate": self.nondegenerate,
            "theorems": [t.value for t in self.theorems],
            "converged": self.converged,
            "iterations": self.iterations,
            "hessian_error": self.hessian_error,
            "family_size": self.family_size,
            "counted": self.counted,
        }


class _Chart:
    """Objective and its tangential derivatives in the projection chart at q."""

    def __init__(self, data: ProblemData, func: Function, q: BoundaryPoint) -> None:
        self.data = data
        self.func = func
        self.q = q

    def point(self, s: NDArray) -> BoundaryPoint:
        if not np.any(s):
            return self.q
        return project_to_boundary(self.data.domain, self.q.point + s @ self.q.frame)

    def value(self, s: NDArray) -> float:
        return evaluate(self.data, self.func, self.point(s))

    def gradient(self) -> NDArray:
        if self.func is Function.GAMMA:
            return gamma_tangential_gradient(self.data, self.q)
        h = 1e-3 * self.data.domain.diameter
        coarse = self._central(h)
        fine = self._central(0.5 * h)
        return (4.0 * fine - coarse) / 3.0

    def _central(self, h: float) -> NDArray:
        m = self.q.frame.shape[0]
        out = np.empty(m)
        for i, e in enumerate(np.eye(m)):
            out[i] = (self.value(h * e) - self.value(-h * e)) / (2.0 * h)
        return out

    def hessian(self, h: float) -> NDArray:
        m = self.q.frame.shape[0]
        eye = np.eye(m)
        center = self.value(np.zeros(m))
        out = np.empty((m, m))
        for i in range(m):
            out[i, i] = (
                self.value(h * eye[i]) - 2.0 * center + self.value(-h * eye[i])
            ) / h**2
            for j in range(i + 1, m):
                out[i, j] = out[j, i] = (
                    self.value(h * (eye[i] + eye[j]))
                    - self.value(h * (eye[i] - eye[j]))
                    - self.value(h * (eye[j] - eye[i]))
                    + self.value(-h * (eye[i] + eye[j]))
                ) / (4.0 * h**2)
        return out


def _classify(eigenvalues: NDArray, tol: float) -> Classification:
    if eigenvalues.size == 0 or np.any(np.abs(eigenvalues) <= tol):
        return Classification.DEGENERATE
    if np.all(eigenvalues > 0.0):
        return Classification.MIN
    if np.all(eigenvalues < 0.0):
        return Classification.MAX
    return Classification.SADDLE


def _theorems(func: Function, kind: Classification) -> Tuple[Theorem, ...]:
    if kind is Classification.DEGENERATE:
        return (Theorem.NONE,)
    strict = kind in (Classification.MIN, Classification.MAX)
    if func is Function.GAMMA:
        return (Theorem.THM1A, Theorem.THM1B) if strict else (Theorem.THM1A,)
    if func is Function.SIGMA_BAR and strict:
        return (Theorem.THM2,)
    return (Theorem.NONE,)


class Search(str, Enum):
    """Phase-one direction of a refinement; AUTO tries both and keeps the nearer."""

    ASCENT = "ASCENT"
    DESCENT = "DESCENT"
    AUTO = "AUTO"


@dataclass
class _Walk:
    chart: _Chart
    grad: NDArray
    iterations: int = 0

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.grad))


def _move(data: ProblemData, func: Function, chart: _Chart, step: NDArray) -> Optional[_Chart]:
    try:
        return _Chart(data, func, chart.point(step))
    except NumericalError:
        return None


def _gradient_phase(
    walk: _Walk, sign: float, *, stationarity_tol: float, max_iterations: int
) -> None:
    """Projected gradient ascent (sign +1) or descent (sign -1) with Armijo backtracking.

    Stops once the Newton step from the current point is short and the
    Hessian has the definiteness the search is heading for.
    """
    data, func = walk.chart.data, walk.chart.func
    diameter = data.domain.diameter
    reach = NEWTON_RADIUS * diameter
    length = reach
    while walk.iterations < max_iterations and walk.norm > stationarity_tol:
        hess = walk.chart.hessian(HESSIAN_STEP)
        eigenvalues = np.linalg.eigvalsh(0.5 * (hess + hess.T))
        newton = np.linalg.lstsq(hess, walk.grad, rcond=NEWTON_RCOND)[0]
        if np.all(sign * eigenvalues < DEGENERACY_TOL) and np.linalg.norm(newton) <= reach:
            return
        walk.iterations += 1
        value = walk.chart.value(np.zeros_like(walk.grad))
        direction = sign * walk.grad / walk.norm
        length = min(2.0 * length, GRADIENT_RADIUS * diameter)
        for _ in range(40):
            trial = _move(data, func, walk.chart, length * direction)
            if trial is not None:
                gain = sign * (trial.value(np.zeros_like(walk.grad)) - value)
                if gain >= ARMIJO * length * walk.norm:
                    walk.chart, walk.grad = trial, trial.gradient()
                    break
            length *= 0.5
        else:
            return


def _newton_phase(
    walk: _Walk, sign: float, *, stationarity_tol: float, max_iterations: int
) -> None:
    """Tangential Newton on the gradient norm inside a short trust radius.

    A step must lower the gradient norm without moving the objective against
    the phase-one direction; sign 0 drops the second condition.
    """
    data, func = walk.chart.data, walk.chart.func
    reach = NEWTON_RADIUS * data.domain.diameter
    while walk.iterations < max_iterations and walk.norm > stationarity_tol:
        walk.iterations += 1
        zero = np.zeros_like(walk.grad)
        value = walk.chart.value(zero)
        slack = 1e-12 * max(1.0, abs(value))
        hess = walk.chart.hessian(HESSIAN_STEP)
        newton = -np.linalg.lstsq(hess, walk.grad, rcond=NEWTON_RCOND)[0]
        accepted = False
        for step in (newton, -hess.T @ walk.grad):
            length = float(np.linalg.norm(step))
            if length == 0.0:
                continue
            if length > reach:
                step = step * (reach / length)
            for _ in range(30):
                trial = _move(data, func, walk.chart, step)
                if trial is not None:
                    trial_grad = trial.gradient()
                    uphill = sign * (trial.value(zero) - value) >= -slack
                    if np.linalg.norm(trial_grad) < walk.norm and uphill:
                        walk.chart, walk.grad, accepted = trial, trial_grad, True
                        break
                step = 0.5 * step
            if accepted:
                break
        if not accepted:
            return


def _walk(
    data: ProblemData,
    func: Function,
    start: BoundaryPoint,
    sign: float,
    *,
    stationarity_tol: float,
    max_iterations: int,
) -> _Walk:
    chart = _Chart(data, func, start)
    walk = _Walk(chart, chart.gradient())
    limits = dict(stationarity_tol=stationarity_tol, max_iterations=max_iterations)
    if sign:
        _gradient_phase(walk, sign, **limits)
    _newton_phase(walk, sign, **limits)
    return walk


def _report(
    walk: _Walk, *, stationarity_tol: float, degeneracy_tol: float
) -> CriticalPointReport:
    chart, func = walk.chart, walk.chart.func
    norm = walk.norm
    converged = norm <= stationarity_tol
    coarse = chart.hessian(2.0 * HESSIAN_STEP)
    hess = chart.hessian(HESSIAN_STEP)
    hess = 0.5 * (hess + hess.T)
    eigenvalues = np.linalg.eigvalsh(hess) if hess.size else np.zeros(0)
    kind = _classify(eigenvalues, degeneracy_tol) if converged else Classification.DEGENERATE
    return CriticalPointReport(
        location=chart.q,
        function=func,
        value=chart.value(np.zeros(chart.q.frame.shape[0])),
        gradient_norm=norm,
        eigenvalues=eigenvalues,
        classification=kind,
        nondegenerate=kind is not Classification.DEGENERATE,
        theorems=_theorems(func, kind) if converged else (Theorem.NONE,),
        converged=converged,
        iterations=walk.iterations,
        hessian_error=float(np.max(np.abs(coarse - hess), initial=0.0)),
    )


def _preference(start: BoundaryPoint, report: CriticalPointReport) -> tuple:
    return (
        not report.converged,
        not report.nondegenerate,
        float(np.linalg.norm(report.location.point - start.point)),
    )


def refine_critical_point(
    data: ProblemData,
    func: Function,
    start: BoundaryPoint,
    *,
    search: Search = Search.AUTO,
    stationarity_tol: float = STATIONARITY_TOL,
    degeneracy_tol: float = DEGENERACY_TOL,
    max_iterations: int = MAX_ITERATIONS,
) -> CriticalPointReport:
    """Gradient ascent or descent into a basin, then tangential Newton to stationarity.

    With ``Search.AUTO`` both directions run and the converged, nondegenerate
    result closest to ``start`` wins.
    """
    func = Function(func)
    search = Search(search)
    check_dispatch(data, func)
    log = get_logger("predictor")
    signs = {Search.ASCENT: (1.0,), Search.DESCENT: (-1.0,), Search.AUTO: (1.0, -1.0)}
    candidates = [
        _report(
            _walk(
                data, func, start, sign,
                stationarity_tol=stationarity_tol, max_iterations=max_iterations,
            ),
            stationarity_tol=stationarity_tol,
            degeneracy_tol=degeneracy_tol,
        )
        for sign in signs[search]
    ]
    report = min(candidates, key=lambda r: _preference(start, r))
    log.debug(
        "critical_point_refined",
        function=func.value,
        search=search.value,
        Q=report.location.point.tolist(),
        gradient_norm=report.gradient_norm,
        classification=report.classification.value,
        converged=report.converged,
        iterations=report.iterations,
    )
    return report


def _sort_key(report: CriticalPointReport) -> tuple:
    return (not report.counted, -report.value, tuple(report.location.point))


def _merge(reports: Sequence[CriticalPointReport], radius: float) -> List[CriticalPointReport]:
    kept: List[CriticalPointReport] = []
    for report in sorted(reports, key=_sort_key):
        if all(
            np.linalg.norm(report.location.point - other.location.point) > radius
            for other in kept
        ):
            kept.append(report)
    return kept


def _families(
    reports: Sequence[CriticalPointReport], threshold: float
) -> List[CriticalPointReport]:
    """Collapse degenerate stationary points into one flagged entry per cluster."""
    if not reports:
        return []
    if len(reports) == 1:
        return [replace(reports[0], counted=False)]
    points = np.array([r.location.point for r in reports])
    labels = hierarchy.fcluster(
        hierarchy.linkage(points, method="single"), t=threshold, criterion="distance"
    )
    out = []
    for label in sorted(set(labels.tolist())):
        members = [r for r, lab in zip(reports, labels) if lab == label]
        head = min(members, key=_sort_key)
        out.append(replace(head, family_size=len(members), counted=False))
    return out


def predict_concentration(
    data: ProblemData,
    *,
    seeds: int = 100,
    workers: int = 1,
    seed: int = 0,
    stationarity_tol: float = STATIONARITY_TOL,
    degeneracy_tol: float = DEGENERACY_TOL,
) -> List[CriticalPointReport]:
    """Multistart refinement of Γ (or of Σ̄ when Γ is boundary-constant).

    Every seed is refined twice, once climbing and once descending, so both
    maxima and minima are reached from the same sample.
    """
    log = get_logger("predictor")
    func = Function.SIGMA_BAR if data.is_boundary_constant("GAMMA") else Function.GAMMA
    log.info(
        "dispatch",
        function=func.value,
        gamma_variation=data.boundary_variation["GAMMA"],
        threshold=data.constancy_threshold,
    )
    check_dispatch(data, func)
    if workers < 1:
        raise PreconditionError("workers must be >= 1")
    starts = sample_boundary(data.domain, seeds, seed=seed)
    jobs = [(start, search) for start in starts for search in (Search.ASCENT, Search.DESCENT)]

    def refine(job: Tuple[BoundaryPoint, Search]) -> CriticalPointReport:
        start, search = job
        return refine_critical_point(
            data,
            func,
            start,
            search=search,
            stationarity_tol=stationarity_tol,
            degeneracy_tol=degeneracy_tol,
        )

    with ThreadPoolExecutor(max_workers=workers) as pool:
        refined = list(pool.map(refine, jobs))

    converged = [r for r in refined if r.converged]
    diameter = data.domain.diameter
    isolated = [
        r for r in converged
        if r.classification is not Classification.DEGENERATE
    ]
    if func is Function.SIGMA_BAR:
        isolated = [
            r if Theorem.THM2 in r.theorems else replace(r, counted=False)
            for r in isolated
        ]
    degenerate = [
        r for r in converged if r.classification is Classification.DEGENERATE
    ]
    reports = _merge(isolated, MERGE_FRACTION * diameter)
    reports += _families(degenerate, FAMILY_FRACTION * diameter)
    reports.sort(key=_sort_key)
    log.info(
        "prediction_done",
        function=func.value,
        starts=len(starts),
        refinements=len(jobs),
        converged=len(converged),
        reports=len(reports),
        counted=sum(r.counted for r in reports),
    )
    return reports
