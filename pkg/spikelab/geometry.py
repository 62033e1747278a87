"""
Implicit domains Ω = {φ < 0}, boundary projection and curvature.

Curvature follows the local-graph convention: with the outward normal ν(Q),
the shape operator is the tangential block of D²φ / |∇φ|, so every principal
curvature of a sphere of radius R equals 1/R and H is their mean.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import linalg, optimize
from scipy.stats import norm, qmc

from spikelab.errors import PreconditionError, ProjectionError
from spikelab.potentials import PotentialField, parse_expression


PROJECTION_TOL = 1e-12
MAX_PROJECTION_STEPS = 50
MIN_GRADIENT = 1e-10
RAY_BISECTIONS = 80


@dataclass(frozen=True, eq=False)
class DomainSpec:
    dimension: int
    phi: PotentialField
    lower: NDArray
    upper: NDArray
    center: NDArray
    diameter: float
    kind: str = "implicit"
    description: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        for name in ("lower", "upper", "center"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if np.any(self.upper <= self.lower):
            raise PreconditionError("bbox upper corner must exceed the lower corner")
        if not self.phi.eval(self.center) < 0.0:
            raise PreconditionError(
                f"reference point {self.center.tolist()} is not inside the domain"
            )


def _literal(value: float) -> str:
    return f"({float(value)!r})"


def ball(center: Sequence[float], radius: float) -> DomainSpec:
    """Ball with φ = (|x-c|² - R²)/(2R), so |∇φ| = 1 on the sphere."""
    center = np.asarray(center, dtype=float)
    if radius <= 0.0:
        raise PreconditionError("ball radius must be positive")
    n = center.size
    terms = " + ".join(f"(x{i} - {_literal(c)})^2" for i, c in enumerate(center, start=1))
    src = f"(({terms}) - {_literal(radius)}^2)/(2*{_literal(radius)})"
    return DomainSpec(
        dimension=n,
        phi=parse_expression(src, n),
        lower=center - 1.25 * radius,
        upper=center + 1.25 * radius,
        center=center,
        diameter=2.0 * radius,
        kind="ball",
        description={"ball": {"center": center.tolist(), "radius": float(radius)}},
    )


def ellipsoid(
    semi_axes: Sequence[float], center: Optional[Sequence[float]] = None
) -> DomainSpec:
    axes = np.asarray(semi_axes, dtype=float)
    if np.any(axes <= 0.0):
        raise PreconditionError("semi-axes must be positive")
    n = axes.size
    center = np.zeros(n) if center is None else np.asarray(center, dtype=float)
    terms = " + ".join(
        f"((x{i} - {_literal(c)})/{_literal(a)})^2"
        for i, (c, a) in enumerate(zip(center, axes), start=1)
    )
    return DomainSpec(
        dimension=n,
        phi=parse_expression(f"{terms} - 1", n),
        lower=center - 1.25 * axes,
        upper=center + 1.25 * axes,
        center=center,
        diameter=2.0 * float(axes.max()),
        kind="ellipsoid",
        description={
            "ellipsoid": {"semi_axes": axes.tolist(), "center": center.tolist()}
        },
    )


def implicit(
    src: str,
    bbox: Sequence[Sequence[float]],
    center: Optional[Sequence[float]] = None,
) -> DomainSpec:
    """Star-shaped domain {φ < 0} inside bbox, seen from center."""
    lower, upper = (np.asarray(c, dtype=float) for c in bbox)
    n = lower.size
    ref = 0.5 * (lower + upper) if center is None else np.asarray(center, dtype=float)
    return DomainSpec(
        dimension=n,
        phi=parse_expression(src, n),
        lower=lower,
        upper=upper,
        center=ref,
        diameter=float(np.linalg.norm(upper - lower)),
        kind="implicit",
        description={"implicit": src, "bbox": [lower.tolist(), upper.tolist()]},
    )


@dataclass(frozen=True, eq=False)
class BoundaryPoint:
    point: NDArray
    normal: NDArray
    frame: NDArray
    curvatures: NDArray
    mean_curvature: float

    @property
    def dimension(self) -> int:
        return int(self.point.size)

    def as_dict(self) -> dict:
        return {
            "Q": self.point.tolist(),
            "normal": self.normal.tolist(),
            "curvatures": self.curvatures.tolist(),
            "H": self.mean_curvature,
        }


def _tangent_basis(normal: NDArray) -> NDArray:
    """Orthonormal columns spanning the plane orthogonal to normal."""
    return linalg.null_space(normal[None, :])


def curvature_at(domain: DomainSpec, q: ArrayLike) -> BoundaryPoint:
    q = np.asarray(q, dtype=float)
    grad = domain.phi.grad(q)
    size = float(np.linalg.norm(grad))
    if size < MIN_GRADIENT:
        raise ProjectionError(f"∇φ vanishes at {q.tolist()}; boundary is not regular there")
    normal = grad / size
    n = domain.dimension
    if n == 1:
        return BoundaryPoint(q, normal, np.zeros((0, 1)), np.zeros(0), 0.0)
    basis = _tangent_basis(normal)
    shape = basis.T @ domain.phi.hessian(q) @ basis / size
    curvatures, vectors = linalg.eigh(0.5 * (shape + shape.T))
    # fix eigenvector signs so frames are reproducible
    pivots = np.argmax(np.abs(vectors), axis=0)
    vectors = vectors * np.sign(vectors[pivots, np.arange(n - 1)])
    frame = (basis @ vectors).T
    return BoundaryPoint(
        point=q,
        normal=normal,
        frame=frame,
        curvatures=curvatures,
        mean_curvature=float(np.mean(curvatures)),
    )


def _newton(domain: DomainSpec, x: NDArray) -> NDArray:
    """Newton steps along ∇φ on a batch of points until |φ| < PROJECTION_TOL."""
    x = np.array(x, dtype=float, ndmin=2)
    for _ in range(MAX_PROJECTION_STEPS):
        values = np.atleast_1d(domain.phi.eval(x))
        grads = domain.phi.grad(x)
        sizes = np.einsum("ij,ij->i", grads, grads)
        if np.any(sizes < MIN_GRADIENT**2):
            bad = x[int(np.argmin(sizes))]
            raise ProjectionError(f"∇φ vanishes near {bad.tolist()}")
        done = np.abs(values) < PROJECTION_TOL
        x = x - (values / sizes)[:, None] * grads
        if done.all():
            return x
    worst = float(np.max(np.abs(domain.phi.eval(x))))
    raise ProjectionError(
        f"projection did not reach |φ| < {PROJECTION_TOL} in "
        f"{MAX_PROJECTION_STEPS} iterations (|φ| = {worst:.3e})"
    )


def project_to_boundary(domain: DomainSpec, x: ArrayLike) -> BoundaryPoint:
    x = np.asarray(x, dtype=float)
    if x.shape != (domain.dimension,):
        raise PreconditionError(f"point must have {domain.dimension} coordinates")
    return curvature_at(domain, _newton(domain, x)[0])


def tangent_step(
    domain: DomainSpec, q: BoundaryPoint, v: ArrayLike, t: float
) -> BoundaryPoint:
    if t == 0.0:
        return q
    return project_to_boundary(domain, q.point + t * np.asarray(v, dtype=float))


def _directions(dimension: int, n: int, seed: int) -> NDArray:
    if dimension == 1:
        return np.array([[1.0], [-1.0]])
    sampler = qmc.Halton(d=dimension, scramble=True, seed=seed)
    gauss = norm.ppf(sampler.random(n))
    return gauss / np.linalg.norm(gauss, axis=1, keepdims=True)


def _ray_hits(domain: DomainSpec, directions: NDArray) -> NDArray:
    """Bisection for φ(c + t d) = 0 along every ray from the reference point."""
    reach = float(np.linalg.norm(domain.upper - domain.lower))
    low = np.zeros(len(directions))
    high = np.full(len(directions), reach)
    far = domain.center + high[:, None] * directions
    if np.any(np.atleast_1d(domain.phi.eval(far)) <= 0.0):
        raise PreconditionError("domain is not contained in its bounding box")
    for _ in range(RAY_BISECTIONS):
        mid = 0.5 * (low + high)
        inside = np.atleast_1d(domain.phi.eval(domain.center + mid[:, None] * directions)) < 0.0
        low = np.where(inside, mid, low)
        high = np.where(inside, high, mid)
    return domain.center + (0.5 * (low + high))[:, None] * directions


def sample_boundary(domain: DomainSpec, n: int, *, seed: int = 0) -> List[BoundaryPoint]:
    """Quasi-uniform boundary sample: scrambled Halton directions cast from the center."""
    if n < 1:
        raise PreconditionError("n must be >= 1")
    hits = _ray_hits(domain, _directions(domain.dimension, n, seed))
    projected = _newton(domain, hits)
    return [curvature_at(domain, x) for x in projected]


def local_graph(
    domain: DomainSpec, q: BoundaryPoint, offsets: ArrayLike
) -> Tuple[NDArray, NDArray]:
    """Heights ψ(s) of the boundary over the tangent plane at q, Ω lying above.

    offsets are tangent coordinates in q.frame. The height is measured along
    -ν, so a convex boundary gives ψ(s) ≈ ½ Σ λ_i s_i².
    """
    offsets = np.atleast_2d(np.asarray(offsets, dtype=float))
    base = q.point + offsets @ q.frame
    heights = np.empty(len(offsets))
    for i, x in enumerate(base):
        def along(h: float) -> float:
            return float(domain.phi.eval(x - h * q.normal))

        start = along(0.0)
        if start == 0.0:
            heights[i] = 0.0
            continue
        # outside above the plane: the boundary lies below (h > 0), and vice versa
        sign = 1.0 if start > 0.0 else -1.0
        reach = 1e-6 * domain.diameter
        while np.sign(along(sign * reach)) == np.sign(start):
            reach *= 2.0
            if reach > domain.diameter:
                raise ProjectionError(f"no boundary crossing along the normal at {x.tolist()}")
        low, high = sorted((0.0, sign * reach))
        heights[i] = optimize.brentq(along, low, high, xtol=1e-15)
    return offsets, heights
