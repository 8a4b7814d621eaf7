"""Coordinate charts: metrics given as callables on axis-aligned boxes.

A chart metric evaluates the matrix of metric components at chart points.
Built-in charts (flat space, stereographic spheres, products of 2-spheres,
random polynomial perturbations of flat space) supply vectorized evaluators
so that the finite-difference engine can run on large stencil batches.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DomainError, MetricError


def _as_points(points: np.ndarray, dim: int) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    if pts.shape[-1] != dim:
        raise ValueError(f"points have last axis {pts.shape[-1]}, expected {dim}")
    return pts


@dataclass
class ChartMetric:
    """A Riemannian metric on an axis-aligned coordinate box.

    ``eval`` maps a single chart point (length-``dim`` array) to the symmetric
    matrix of metric components.  ``eval_batch``, when provided, maps an
    ``(..., dim)`` array of points to ``(..., dim, dim)`` component arrays and
    is used as a fast path by the differencing engine.
    """

    dim: int
    eval: Callable[[np.ndarray], np.ndarray]
    domain: np.ndarray  # (dim, 2) array of [low, high] per coordinate
    eval_batch: Callable[[np.ndarray], np.ndarray] | None = None
    name: str = "chart"

    def __post_init__(self):
        self.domain = np.asarray(self.domain, dtype=float)
        if self.domain.shape != (self.dim, 2):
            raise ValueError("domain must be a (dim, 2) array of bounds")

    def sample(self, points: np.ndarray) -> np.ndarray:
        """Metric components at a batch of points, shape (..., dim, dim)."""
        pts = _as_points(points, self.dim)
        if self.eval_batch is not None:
            return self.eval_batch(pts)
        flat = pts.reshape(-1, self.dim)
        out = np.empty((flat.shape[0], self.dim, self.dim))
        for k, p in enumerate(flat):
            out[k] = self.eval(p)
        return out.reshape(pts.shape[:-1] + (self.dim, self.dim))

    def require_inside(self, point: np.ndarray, radius: float = 0.0) -> None:
        p = _as_points(point, self.dim)
        lo = self.domain[:, 0] + radius
        hi = self.domain[:, 1] - radius
        if np.any(p < lo) or np.any(p > hi):
            raise DomainError(
                f"point {np.asarray(point)} with stencil radius {radius:g} "
                f"escapes the domain of chart '{self.name}'"
            )

    def check_positive_definite(self, points: np.ndarray) -> None:
        """Cholesky-test sampled metric matrices; raise MetricError on failure."""
        mats = self.sample(points).reshape(-1, self.dim, self.dim)
        sym_err = np.max(np.abs(mats - np.swapaxes(mats, -1, -2)))
        if sym_err > 1e-12 * max(1.0, np.max(np.abs(mats))):
            raise MetricError(f"metric of chart '{self.name}' is not symmetric")
        try:
            np.linalg.cholesky(0.5 * (mats + np.swapaxes(mats, -1, -2)))
        except np.linalg.LinAlgError as exc:
            raise MetricError(
                f"metric of chart '{self.name}' is not positive definite"
            ) from exc


def _box(dim: int, half_width: float) -> np.ndarray:
    return np.stack([np.full(dim, -half_width), np.full(dim, half_width)], axis=1)


def flat_chart(dim: int, half_width: float = 10.0) -> ChartMetric:
    """The Euclidean metric on a box around the origin."""
    eye = np.eye(dim)

    def eval_batch(pts):
        return np.broadcast_to(eye, pts.shape[:-1] + (dim, dim)).copy()

    return ChartMetric(dim, lambda p: eye.copy(), _box(dim, half_width),
                       eval_batch=eval_batch, name=f"flat{dim}")


def stereographic_sphere_chart(dim: int, lam: float) -> ChartMetric:
    """Round sphere of Einstein constant ``lam`` in stereographic coordinates.

    Components ``4 r^4 / (r^2 + |x|^2)^2 delta_ij`` with radius
    ``r = lam**-0.5``; smooth on all of R^n, domain box kept moderate for
    well-conditioned differencing.
    """
    if lam <= 0:
        raise ValueError("sphere chart requires lam > 0")
    r2 = 1.0 / lam
    eye = np.eye(dim)

    def eval_batch(pts):
        s = np.sum(pts * pts, axis=-1)
        conf = 4.0 * r2 * r2 / (r2 + s) ** 2
        return conf[..., None, None] * eye

    return ChartMetric(dim, lambda p: eval_batch(np.asarray(p)), _box(dim, 4.0 / np.sqrt(lam)),
                       eval_batch=eval_batch, name=f"sphere{dim}(lam={lam:g})")


def product_s2_chart(lam: float) -> ChartMetric:
    """S^2 x S^2 with both factors of Gauss curvature ``3 lam`` (Einstein, dim 4).

    Stereographic coordinates on each factor; block-diagonal components.
    """
    if lam <= 0:
        raise ValueError("product chart requires lam > 0")
    kappa = 3.0 * lam
    r2 = 1.0 / kappa

    def eval_batch(pts):
        out = np.zeros(pts.shape[:-1] + (4, 4))
        for block in (slice(0, 2), slice(2, 4)):
            s = np.sum(pts[..., block] ** 2, axis=-1)
            conf = 4.0 * r2 * r2 / (r2 + s) ** 2
            out[..., block, block] = conf[..., None, None] * np.eye(2)
        return out

    return ChartMetric(4, lambda p: eval_batch(np.asarray(p)), _box(4, 4.0 / np.sqrt(kappa)),
                       eval_batch=eval_batch, name=f"s2xs2(lam={lam:g})")


def conformal_chart(base: ChartMetric, factor: Callable[[np.ndarray], np.ndarray],
                    name: str | None = None) -> ChartMetric:
    """Pointwise conformal rescaling ``factor(x) * base(x)``.

    ``factor`` must accept ``(..., dim)`` point arrays and return positive
    scalars of shape ``(...)``.
    """

    def eval_batch(pts):
        return factor(pts)[..., None, None] * base.sample(pts)

    return ChartMetric(base.dim, lambda p: eval_batch(np.asarray(p)), base.domain.copy(),
                       eval_batch=eval_batch, name=name or f"conformal({base.name})")


def _monomial_exponents(dim: int, max_degree: int) -> np.ndarray:
    """All exponent vectors with 1 <= total degree <= max_degree."""
    from itertools import combinations_with_replacement

    exps = set()
    for deg in range(1, max_degree + 1):
        for combo in combinations_with_replacement(range(dim), deg):
            e = [0] * dim
            for i in combo:
                e[i] += 1
            exps.add(tuple(e))
    return np.array(sorted(exps), dtype=int)


@dataclass
class PolynomialChart:
    """Flat metric plus a matrix-valued polynomial perturbation.

    g_ij(x) = delta_ij + sum_alpha A[alpha]_ij x^alpha, with the coefficient
    scale chosen so the perturbation stays safely below 1 in norm on the box
    (checked by sampling, so the metric is positive definite where used).
    """

    dim: int
    exponents: np.ndarray        # (m, dim) integer exponent vectors
    coeffs: np.ndarray           # (m, dim, dim) symmetric coefficient matrices
    half_width: float = 1.5

    def __post_init__(self):
        # evaluation plan: every monomial extends a lower-degree parent by one
        # coordinate factor, so a batch column costs a single multiply
        closure: dict[tuple, int] = {}
        plan: list[tuple[int, int]] = []   # (parent position or -1, axis)

        def ensure(exp: tuple) -> int:
            if exp in closure:
                return closure[exp]
            axis = next(i for i, e in enumerate(exp) if e > 0)
            parent = list(exp)
            parent[axis] -= 1
            if sum(parent) == 0:
                pos_parent = -1
            else:
                pos_parent = ensure(tuple(parent))
            closure[exp] = len(plan)
            plan.append((pos_parent, axis))
            return closure[exp]

        self._kept = np.array([ensure(tuple(e)) for e in self.exponents])
        self._plan = plan

    def monomials(self, pts: np.ndarray) -> np.ndarray:
        """(..., m) array of monomial values via the recursive plan."""
        flat = pts.reshape(-1, self.dim)
        cols = np.empty((flat.shape[0], len(self._plan)))
        for pos, (parent, axis) in enumerate(self._plan):
            base = flat[:, axis] if parent < 0 else cols[:, parent] * flat[:, axis]
            cols[:, pos] = base
        return cols[:, self._kept].reshape(pts.shape[:-1] + (self._kept.size,))

    def eval_batch(self, pts: np.ndarray) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        mono = self.monomials(pts)
        flat = mono.reshape(-1, mono.shape[-1])
        pert = (flat @ self.coeffs.reshape(mono.shape[-1], -1)).reshape(
            pts.shape[:-1] + (self.dim, self.dim))
        return np.eye(self.dim) + pert

    def chart(self, name: str = "poly") -> ChartMetric:
        return ChartMetric(self.dim, lambda p: self.eval_batch(np.asarray(p)),
                           _box(self.dim, self.half_width),
                           eval_batch=self.eval_batch, name=name)


def random_perturbed_chart(dim: int, rng: np.random.Generator,
                           amplitude: float = 0.1, degree: int = 4,
                           half_width: float = 1.1,
                           norm_radius: float = 1.05,
                           terms_per_degree: int = 8) -> ChartMetric:
    """Random analytic metric: flat plus a degree<=``degree`` polynomial perturbation.

    All monomials up to degree 2 are kept; higher degrees are randomly
    subsampled to ``terms_per_degree`` exponent vectors each.  The
    perturbation is rescaled so its sampled sup of the Frobenius norm over
    the euclidean ball of radius ``norm_radius`` is ``amplitude``; stencil
    offsets are axis-aligned sums that stay inside that ball, and positive
    definiteness is verified on the sample (and again on every jet stencil).
    """
    if not 0 < amplitude < 1:
        raise ValueError("amplitude must lie in (0, 1)")
    exps_all = _monomial_exponents(dim, degree)
    keep = []
    for deg in range(1, degree + 1):
        rows = np.nonzero(np.sum(exps_all, axis=1) == deg)[0]
        if deg <= 2 or rows.size <= terms_per_degree:
            keep.extend(rows.tolist())
        else:
            keep.extend(sorted(rng.choice(rows, size=terms_per_degree,
                                          replace=False).tolist()))
    exps = exps_all[np.array(keep)]
    m = exps.shape[0]
    raw = rng.standard_normal((m, dim, dim))
    raw = 0.5 * (raw + np.swapaxes(raw, -1, -2))
    poly = PolynomialChart(dim, exps, raw, half_width)
    probe_rng = np.random.default_rng(12345)
    directions = probe_rng.standard_normal((512, dim))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    radii = norm_radius * probe_rng.uniform(0.0, 1.0, 512) ** (1.0 / dim)
    probe = directions * radii[:, None]
    pert = poly.eval_batch(probe) - np.eye(dim)
    sup = np.max(np.sqrt(np.sum(pert**2, axis=(-2, -1))))
    poly = PolynomialChart(dim, exps, raw * (amplitude / (1.05 * sup)), half_width)
    chart = poly.chart(name=f"perturbed{dim}(amp={amplitude:g})")
    chart.check_positive_definite(probe)
    return chart
