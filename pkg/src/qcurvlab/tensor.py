"""Chart-based Riemannian tensor calculus by high-order finite differences.

Partial derivatives of the metric are taken with central-difference stencils
at steps h, 2h, ..., 2^L h and Richardson-extrapolated, so a jet with L
levels carries truncation error O(h^(2L+2)).  Every pointwise curvature
quantity (Christoffel symbols, Riemann/Ricci/scalar, Weyl, Schouten and its
trace J, the trace-free part E, sigma_2, Q) is assembled algebraically from
the 2-jet.  The gradient and Laplacian of J are produced by differencing J
itself on a coarser outer stencil, reusing the algebraic path.

Sign conventions: the Laplacian is the trace of the covariant Hessian
(negative spectrum); divergence carries a plus sign, (delta T)_j =
nabla^i T_ij, so that delta P = nabla J on every metric.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations_with_replacement
from typing import Callable

import numpy as np

from .charts import ChartMetric

DEFAULT_STEP = 1e-2
DEFAULT_LEVELS = 2
# outer-stencil steps for nested differencing of curvature scalars; larger
# than the jet step to keep roundoff amplification below truncation
LAP_STEP_FACTOR = 5.0
DIV_STEP_FACTOR = 8.0

# one-dimensional central stencils, all with O(h^2) error and even series
_STENCIL_1D = {
    0: ((0,), (1.0,)),
    1: ((-1, 1), (-0.5, 0.5)),
    2: ((-1, 0, 1), (1.0, -2.0, 1.0)),
    3: ((-2, -1, 1, 2), (-0.5, 1.0, -1.0, 0.5)),
    4: ((-2, -1, 0, 1, 2), (1.0, -4.0, 6.0, -4.0, 1.0)),
}


def richardson(estimates) -> np.ndarray:
    """Extrapolate estimates computed at steps h, 2h, 4h, ... to zero step."""
    t = [np.asarray(e, dtype=float) for e in estimates]
    for m in range(1, len(t)):
        f = 4.0**m
        t = [(f * t[i] - t[i + 1]) / (f - 1.0) for i in range(len(t) - 1)]
    return t[0]


def _stencil_for_orders(orders: tuple[int, ...], h: float):
    """Tensor-product stencil offsets/weights for per-axis derivative orders."""
    dim = len(orders)
    offsets = np.zeros((1, dim))
    weights = np.ones(1)
    for axis, order in enumerate(orders):
        if order == 0:
            continue
        offs, wts = _STENCIL_1D[order]
        new_offsets = []
        new_weights = []
        for o, w in zip(offs, wts):
            shift = np.zeros(dim)
            shift[axis] = o * h
            new_offsets.append(offsets + shift)
            new_weights.append(weights * (w / h**order))
        offsets = np.concatenate(new_offsets, axis=0)
        weights = np.concatenate(new_weights)
    return offsets, weights


def _derivative_multi_indices(dim: int, order: int):
    """Distinct sorted index tuples (i1 <= ... <= i_order)."""
    return list(combinations_with_replacement(range(dim), order))


def _orders_from_index(idx: tuple[int, ...], dim: int) -> tuple[int, ...]:
    counts = [0] * dim
    for i in idx:
        counts[i] += 1
    return tuple(counts)


def _richardson_coefficients(levels: int) -> np.ndarray:
    """Weights c_l with sum_l c_l D(h 2^l) = extrapolated derivative."""
    coef = np.empty(levels + 1)
    for i in range(levels + 1):
        basis = [1.0 if k == i else 0.0 for k in range(levels + 1)]
        coef[i] = float(richardson(basis))
    return coef


def _batched_derivatives(fn, points: np.ndarray, dim: int, order_tuples,
                         step: float, levels: int):
    """Richardson-extrapolated partials of ``fn`` for each multi-index.

    All stencil offsets across multi-indices and Richardson levels are
    deduplicated and evaluated in a single vectorized call: ``fn`` receives
    points of shape (..., K, dim) and must return values with leading shape
    (..., K).  The extrapolation is folded into one weight matrix so each
    derivative is a single contraction.  Returns a dict multi-index -> array.
    """
    pts = np.asarray(points, dtype=float)
    rcoef = _richardson_coefficients(levels)
    offsets: list[tuple] = []
    index_of: dict[tuple, int] = {}
    entries_per_idx: list[list[tuple[int, float]]] = []
    for idx in order_tuples:
        orders = _orders_from_index(idx, dim)
        entries = []
        for lvl in range(levels + 1):
            h = step * 2.0**lvl
            offs, wts = _stencil_for_orders(orders, h)
            for o, w in zip(offs, wts):
                key = tuple(o.tolist())
                k = index_of.get(key)
                if k is None:
                    k = len(offsets)
                    index_of[key] = k
                    offsets.append(key)
                entries.append((k, rcoef[lvl] * w))
        entries_per_idx.append(entries)
    K = len(offsets)
    W = np.zeros((len(order_tuples), K))
    for row, entries in enumerate(entries_per_idx):
        for k, w in entries:
            W[row, k] += w
    off_arr = np.array(offsets)
    vals = np.asarray(fn(pts[..., None, :] + off_arr))
    lead_nd = pts.ndim - 1
    val_shape = vals.shape[lead_nd + 1:]
    flat = vals.reshape(vals.shape[:lead_nd] + (K, -1))
    est = np.tensordot(W, flat, axes=(1, lead_nd))  # (R, ..., V)
    out = {}
    for row, idx in enumerate(order_tuples):
        out[idx] = est[row].reshape(pts.shape[:-1] + val_shape)
    return out


@dataclass
class MetricJet:
    """Metric components and partial derivatives at a chart point.

    Derivative arrays have their differentiation axes first and are exactly
    symmetric under permutation of those axes by construction.  ``d3g`` and
    ``d4g`` are populated only when the jet is built with ``order >= 3``.
    """

    metric: ChartMetric
    point: np.ndarray
    step: float
    richardson_levels: int
    g: np.ndarray
    dg: np.ndarray
    d2g: np.ndarray
    d3g: np.ndarray | None = None
    d4g: np.ndarray | None = None

    @property
    def dim(self) -> int:
        return self.metric.dim


def _jet_arrays(metric: ChartMetric, points: np.ndarray, step: float, levels: int):
    """Batched 2-jets: returns (g, dg, d2g) with leading point axes."""
    dim = metric.dim
    pts = np.asarray(points, dtype=float)
    g = metric.sample(pts)
    lead = pts.shape[:-1]
    dg = np.zeros(lead + (dim, dim, dim))
    d2g = np.zeros(lead + (dim, dim, dim, dim))
    idx = _derivative_multi_indices(dim, 1) + _derivative_multi_indices(dim, 2)
    parts = _batched_derivatives(metric.sample, pts, dim, idx, step, levels)
    for key, arr in parts.items():
        if len(key) == 1:
            dg[..., key[0], :, :] = arr
        else:
            i, j = key
            d2g[..., i, j, :, :] = arr
            if i != j:
                d2g[..., j, i, :, :] = arr
    return g, dg, d2g


def build_jet(metric: ChartMetric, point, step: float = DEFAULT_STEP,
              richardson_levels: int = DEFAULT_LEVELS, order: int = 2) -> MetricJet:
    """Metric jet at ``point`` by central differences with Richardson extrapolation."""
    if step <= 0:
        raise ValueError("step must be positive")
    if richardson_levels < 1:
        raise ValueError("richardson_levels must be at least 1")
    if order not in (2, 3, 4):
        raise ValueError("jet order must be 2, 3 or 4")
    p = np.asarray(point, dtype=float)
    radius = 4.0 * step * 2.0**richardson_levels
    metric.require_inside(p, radius)
    metric.check_positive_definite(p + np.concatenate(
        [np.zeros((1, metric.dim)),
         radius * np.eye(metric.dim), -radius * np.eye(metric.dim)]))
    g, dg, d2g = _jet_arrays(metric, p, step, richardson_levels)
    jet = MetricJet(metric, p, step, richardson_levels, g, dg, d2g)
    dim = metric.dim
    if order >= 3:
        jet.d3g = np.zeros((dim,) * 3 + (dim, dim))
        thirds = _batched_derivatives(metric.sample, p, dim,
                                      _derivative_multi_indices(dim, 3),
                                      step, richardson_levels)
        for idx, arr in thirds.items():
            for perm in _permutations_of(idx):
                jet.d3g[perm] = arr
    if order >= 4:
        jet.d4g = np.zeros((dim,) * 4 + (dim, dim))
        fourths = _batched_derivatives(metric.sample, p, dim,
                                       _derivative_multi_indices(dim, 4),
                                       step, richardson_levels)
        for idx, arr in fourths.items():
            for perm in _permutations_of(idx):
                jet.d4g[perm] = arr
    return jet


def _permutations_of(idx):
    from itertools import permutations

    return set(permutations(idx))


# ---------------------------------------------------------------------------
# pointwise curvature algebra on batched 2-jets
# ---------------------------------------------------------------------------

def _algebra_batch(g: np.ndarray, dg: np.ndarray, d2g: np.ndarray,
                   full: bool = True) -> dict:
    """All curvature quantities that are algebraic in the 2-jet.

    With ``full=False`` only the pieces needed for the scalar J (Christoffel,
    Ricci, scalar curvature) are assembled, which is what the nested-stencil
    paths sample in bulk.
    """
    n = g.shape[-1]
    ginv = np.linalg.inv(g)
    # S[..., i, j, l] = d_i g_jl + d_j g_il - d_l g_ij
    S = dg + np.swapaxes(dg, -3, -2) - np.moveaxis(dg, -3, -1)
    gamma = 0.5 * np.einsum("...ml,...ijl->...mij", ginv, S)
    dginv = -np.einsum("...ma,...kab,...bl->...kml", ginv, dg, ginv)
    dS = (d2g + np.swapaxes(d2g, -3, -2) - np.moveaxis(d2g, -3, -1))
    dgamma = (0.5 * np.einsum("...kml,...ijl->...kmij", dginv, S)
              + 0.5 * np.einsum("...ml,...kijl->...kmij", ginv, dS))
    # R^m_jkl = d_k Gamma^m_lj - d_l Gamma^m_kj + Gamma^m_ks Gamma^s_lj - (k<->l)
    A = np.einsum("...kmlj->...mjkl", dgamma)
    G1 = np.einsum("...mks,...slj->...mjkl", gamma, gamma)
    riem_up = A - np.swapaxes(A, -2, -1) + G1 - np.swapaxes(G1, -2, -1)
    ric = np.einsum("...mjml->...jl", riem_up)
    scal = np.einsum("...jl,...jl->...", ginv, ric)
    j = scal / (2.0 * (n - 1))
    out = {"g": g, "dg": dg, "ginv": ginv, "dginv": dginv, "gamma": gamma,
           "dgamma": dgamma, "ric": ric, "scal": scal, "j": j}
    if not full:
        return out
    riem = np.einsum("...im,...mjkl->...ijkl", g, riem_up)
    schouten = (ric - j[..., None, None] * g) / (n - 2)
    e = schouten - (j[..., None, None] / n) * g
    p_up = np.einsum("...ia,...jb,...ab->...ij", ginv, ginv, schouten)
    p_norm2 = np.einsum("...ij,...ij->...", schouten, p_up)
    e_up = np.einsum("...ia,...jb,...ab->...ij", ginv, ginv, e)
    e_norm2 = np.einsum("...ij,...ij->...", e, e_up)
    sigma2 = 0.5 * (j * j - p_norm2)
    kn = (np.einsum("...ik,...jl->...ijkl", schouten, g)
          + np.einsum("...jl,...ik->...ijkl", schouten, g)
          - np.einsum("...il,...jk->...ijkl", schouten, g)
          - np.einsum("...jk,...il->...ijkl", schouten, g))
    weyl = riem - kn
    w_up = weyl
    for axis in range(4):
        idx = "abcd"[axis]
        w_up = np.einsum(f"...{idx}z,..." + "abcd".replace(idx, "z") + "->...abcd",
                         ginv, w_up)
    weyl_norm2 = np.einsum("...abcd,...abcd->...", weyl, w_up)
    out.update(riem=riem, schouten=schouten, e=e, p_norm2=p_norm2,
               e_norm2=e_norm2, sigma2=sigma2, weyl=weyl, weyl_norm2=weyl_norm2)
    return out


@dataclass
class CurvatureBundle:
    """Every pointwise curvature quantity at a chart point."""

    dim: int
    point: np.ndarray
    g: np.ndarray
    ginv: np.ndarray
    gamma: np.ndarray
    riem: np.ndarray
    ric: np.ndarray
    scal: float
    weyl: np.ndarray
    weyl_norm2: float
    schouten: np.ndarray
    j: float
    e: np.ndarray
    p_norm2: float
    e_norm2: float
    sigma2: float
    q: float
    lap_j: float
    grad_j: np.ndarray          # covector components of dJ
    a: float = 0.0
    b: float = 0.0
    i_ab: float = 0.0

    def i(self, a: float, b: float = 0.0) -> float:
        """The combined invariant Q + a*sigma_2 + b*|W|^2."""
        return self.q + a * self.sigma2 + b * self.weyl_norm2

    # residuals of structural identities, used by invariant tests and reports
    def schouten_trace_residual(self) -> float:
        return abs(float(np.einsum("ij,ij->", self.ginv, self.schouten)) - self.j)

    def e_trace_residual(self) -> float:
        return abs(float(np.einsum("ij,ij->", self.ginv, self.e)))

    def riemann_symmetry_residual(self) -> float:
        r = self.riem
        scale = max(1.0, float(np.max(np.abs(r))))
        anti1 = np.max(np.abs(r + np.swapaxes(r, 0, 1)))
        anti2 = np.max(np.abs(r + np.swapaxes(r, 2, 3)))
        pair = np.max(np.abs(r - np.transpose(r, (2, 3, 0, 1))))
        bianchi = np.max(np.abs(r + np.transpose(r, (0, 2, 3, 1))
                                + np.transpose(r, (0, 3, 1, 2))))
        return float(max(anti1, anti2, pair, bianchi) / scale)

    def weyl_trace_residual(self) -> float:
        scale = max(1.0, float(np.max(np.abs(self.riem))))
        res = 0.0
        for (ax1, ax2) in ((0, 2), (0, 3), (1, 2), (1, 3), (0, 1), (2, 3)):
            sub = "abcd"
            spec = f"{sub[ax1]}{sub[ax2]},abcd->" + "".join(
                c for k, c in enumerate(sub) if k not in (ax1, ax2))
            res = max(res, float(np.max(np.abs(np.einsum(spec, self.ginv, self.weyl)))))
        return res / scale


def curvature(jet: MetricJet, a: float = 0.0, b: float = 0.0,
              lap_step_factor: float = LAP_STEP_FACTOR,
              lap_levels: int | None = None) -> CurvatureBundle:
    """Full curvature bundle at the jet's base point.

    The Laplacian and gradient of J are differenced from J evaluated on an
    outer stencil (step ``lap_step_factor`` times the jet step, extrapolation
    ``lap_levels``), with the covariant correction taken from the center jet.
    """
    n = jet.dim
    if n < 3:
        raise ValueError("curvature conventions require dimension >= 3")
    alg = _algebra_batch(jet.g, jet.dg, jet.d2g, full=True)
    grad_j, lap_j = _scalar_hessian_data(
        scalar_j_field(jet.metric, jet.step, jet.richardson_levels),
        jet.point, alg["ginv"], alg["gamma"],
        step=jet.step * lap_step_factor,
        levels=lap_levels if lap_levels is not None else jet.richardson_levels,
        metric=jet.metric)
    q = -lap_j - 2.0 * alg["p_norm2"] + 0.5 * n * alg["j"] ** 2
    return CurvatureBundle(
        dim=n, point=jet.point, g=jet.g, ginv=alg["ginv"], gamma=alg["gamma"],
        riem=alg["riem"], ric=alg["ric"], scal=float(alg["scal"]),
        weyl=alg["weyl"], weyl_norm2=float(alg["weyl_norm2"]),
        schouten=alg["schouten"], j=float(alg["j"]), e=alg["e"],
        p_norm2=float(alg["p_norm2"]), e_norm2=float(alg["e_norm2"]),
        sigma2=float(alg["sigma2"]), q=float(q), lap_j=float(lap_j),
        grad_j=grad_j, a=a, b=b,
        i_ab=float(q + a * alg["sigma2"] + b * alg["weyl_norm2"]))


# ---------------------------------------------------------------------------
# nested-stencil samplers for curvature scalars and tensors
# ---------------------------------------------------------------------------

class CurvatureSampler:
    """Batch evaluation of jet-algebraic curvature quantities along a chart."""

    def __init__(self, metric: ChartMetric, step: float = DEFAULT_STEP,
                 levels: int = DEFAULT_LEVELS, chunk: int = 1500):
        self.metric = metric
        self.step = step
        self.levels = levels
        self.chunk = chunk

    def _algebra(self, points: np.ndarray, full: bool) -> dict:
        pts = np.asarray(points, dtype=float)
        flat = pts.reshape(-1, self.metric.dim)
        # nested stencils revisit the same dyadic offsets many times; group
        # coordinates that agree to 1e-12 and compute each jet once
        keys = np.round(flat * 1e12).astype(np.int64)
        _, first, inv = np.unique(keys, axis=0, return_index=True,
                                  return_inverse=True)
        upts = flat[first]
        outs: list[dict] = []
        for start in range(0, upts.shape[0], self.chunk):
            block = upts[start:start + self.chunk]
            g, dg, d2g = _jet_arrays(self.metric, block, self.step, self.levels)
            outs.append(_algebra_batch(g, dg, d2g, full=full))
        merged = {k: np.concatenate([o[k] for o in outs], axis=0) for k in outs[0]}
        lead = pts.shape[:-1]
        return {k: v[inv].reshape(lead + v.shape[1:]) for k, v in merged.items()}

    def j(self, points: np.ndarray) -> np.ndarray:
        return self._algebra(points, full=False)["j"]

    def algebra(self, points: np.ndarray) -> dict:
        return self._algebra(points, full=True)

    def schouten_field(self) -> Callable[[np.ndarray], np.ndarray]:
        return lambda pts: self._algebra(pts, full=True)["schouten"]

    def jp_field(self, trace_part: float = 0.0) -> Callable[[np.ndarray], np.ndarray]:
        """The tensor J*P - trace_part * J^2 g as a batch field."""

        def fn(pts):
            alg = self._algebra(pts, full=True)
            jj = alg["j"][..., None, None]
            return jj * alg["schouten"] - trace_part * jj**2 * alg["g"]

        return fn

    def hessian_j_field(self, hess_step: float | None = None,
                        hess_levels: int | None = None) -> Callable:
        """The tensor nabla^2 J - (Lap J) g as a batch field.

        Each evaluation differences J on its own outer stencil, so the field
        is an honest function of position and its divergence is a genuine
        fifth-order finite-difference quantity.
        """
        hstep = hess_step if hess_step is not None else self.step * LAP_STEP_FACTOR
        hlev = hess_levels if hess_levels is not None else self.levels
        jfield = scalar_j_field(self.metric, self.step, self.levels)

        def fn(pts):
            pts = np.asarray(pts, dtype=float)
            alg = self._algebra(pts, full=False)
            hess, lap, _, _ = _scalar_derivative_batch(
                jfield, pts, alg["ginv"], alg["gamma"], hstep, hlev)
            return hess - lap[..., None, None] * alg["g"]

        return fn


def scalar_j_field(metric: ChartMetric, step: float = DEFAULT_STEP,
                   levels: int = DEFAULT_LEVELS) -> Callable[[np.ndarray], np.ndarray]:
    """The Schouten trace J as a batch scalar field on the chart."""
    sampler = CurvatureSampler(metric, step, levels)
    return sampler.j


def _scalar_derivative_batch(scalar, points: np.ndarray, ginv, gamma,
                             step: float, levels: int):
    """Covariant Hessian/Laplacian/gradient of a batch scalar field.

    Returns (hess, lap, grad, grad_norm2) with shapes (..., n, n), (...),
    (..., n), (...).
    """
    pts = np.asarray(points, dtype=float)
    dim = pts.shape[-1]
    idx = (_derivative_multi_indices(dim, 1) + _derivative_multi_indices(dim, 2))
    parts = _batched_derivatives(scalar, pts, dim, idx, step, levels)
    lead = pts.shape[:-1]
    du = np.zeros(lead + (dim,))
    d2u = np.zeros(lead + (dim, dim))
    for key, arr in parts.items():
        if len(key) == 1:
            du[..., key[0]] = arr
        else:
            i, j = key
            d2u[..., i, j] = arr
            if i != j:
                d2u[..., j, i] = arr
    hess = d2u - np.einsum("...kij,...k->...ij", gamma, du)
    lap = np.einsum("...ij,...ij->...", ginv, hess)
    grad_norm2 = np.einsum("...ij,...i,...j->...", ginv, du, du)
    return hess, lap, du, grad_norm2


def _scalar_hessian_data(scalar, point, ginv, gamma, step, levels, metric):
    radius = 2.0 * step * 2.0**levels
    metric.require_inside(point, radius)
    hess, lap, du, _ = _scalar_derivative_batch(scalar, point, ginv, gamma,
                                                step, levels)
    return du, float(lap)


@dataclass
class HessianData:
    """Covariant second-order data of a scalar function at a point."""

    hess: np.ndarray
    lap: float
    grad: np.ndarray
    grad_norm2: float


def hessian_laplacian(scalar, metric: ChartMetric, point,
                      step: float = DEFAULT_STEP,
                      levels: int = DEFAULT_LEVELS,
                      jet_step: float | None = None) -> HessianData:
    """Covariant Hessian, Laplacian, gradient and |grad|^2 of a scalar."""
    p = np.asarray(point, dtype=float)
    jstep = jet_step if jet_step is not None else min(step, DEFAULT_STEP)
    radius = 2.0 * step * 2.0**levels + 4.0 * jstep * 2.0**levels
    metric.require_inside(p, radius)
    jet = build_jet(metric, p, jstep, levels)
    alg = _algebra_batch(jet.g, jet.dg, jet.d2g, full=False)
    fn = _ensure_batch_scalar(scalar, metric.dim)
    hess, lap, du, gn2 = _scalar_derivative_batch(fn, p, alg["ginv"],
                                                  alg["gamma"], step, levels)
    return HessianData(hess=hess, lap=float(lap), grad=du, grad_norm2=float(gn2))


def divergence_sym2(fld, metric: ChartMetric, point,
                    step: float = DEFAULT_STEP * DIV_STEP_FACTOR,
                    levels: int = DEFAULT_LEVELS,
                    jet_step: float = DEFAULT_STEP) -> np.ndarray:
    """Divergence (delta T)_j = nabla^i T_ij of a symmetric 2-tensor field.

    ``fld`` maps chart points to (n, n) component matrices (batch-aware
    callables are used directly; plain single-point callables are wrapped).
    """
    p = np.asarray(point, dtype=float)
    dim = metric.dim
    radius = step * 2.0**levels + 4.0 * jet_step * 2.0**levels
    metric.require_inside(p, radius)
    fn = _ensure_batch_tensor(fld, dim)
    jet = build_jet(metric, p, jet_step, levels)
    alg = _algebra_batch(jet.g, jet.dg, jet.d2g, full=False)
    ginv, gamma = alg["ginv"], alg["gamma"]
    idx1 = _derivative_multi_indices(dim, 1)
    parts = _batched_derivatives(fn, p, dim, idx1, step, levels)
    dT = np.zeros((dim, dim, dim))
    for (i,), arr in parts.items():
        dT[i] = arr
    T0 = fn(p)
    # nabla_i T_kj = d_i T_kj - Gamma^l_ik T_lj - Gamma^l_ij T_kl
    covar = (dT - np.einsum("lik,lj->ikj", gamma, T0)
             - np.einsum("lij,kl->ikj", gamma, T0))
    return np.einsum("ik,ikj->j", ginv, covar)


def _ensure_batch_scalar(fn, dim: int):
    probe = np.zeros((2, dim))
    try:
        out = np.asarray(fn(probe))
        if out.shape == (2,):
            return fn
    except Exception:
        pass

    def wrapped(pts):
        pts = np.asarray(pts, dtype=float)
        flat = pts.reshape(-1, dim)
        vals = np.array([float(fn(p)) for p in flat])
        return vals.reshape(pts.shape[:-1])

    return wrapped


def _ensure_batch_tensor(fn, dim: int):
    probe = np.zeros((2, dim))
    try:
        out = np.asarray(fn(probe))
        if out.shape == (2, dim, dim):
            return fn
    except Exception:
        pass

    def wrapped(pts):
        pts = np.asarray(pts, dtype=float)
        flat = pts.reshape(-1, dim)
        vals = np.stack([np.asarray(fn(p), dtype=float) for p in flat])
        return vals.reshape(pts.shape[:-1] + (dim, dim))

    return wrapped


def bundle_batch(metric: ChartMetric, points: np.ndarray,
                 step: float = DEFAULT_STEP, levels: int = DEFAULT_LEVELS,
                 with_lap: bool = True,
                 lap_step_factor: float = LAP_STEP_FACTOR) -> dict:
    """Curvature quantities (optionally including Lap J, grad J) at many points."""
    sampler = CurvatureSampler(metric, step, levels)
    pts = np.asarray(points, dtype=float)
    alg = sampler.algebra(pts)
    n = metric.dim
    out = dict(alg)
    if with_lap:
        jfield = scalar_j_field(metric, step, levels)
        hess, lap, du, _ = _scalar_derivative_batch(
            jfield, pts, alg["ginv"], alg["gamma"],
            step * lap_step_factor, levels)
        out["lap_j"] = lap
        out["grad_j"] = du
        out["q"] = -lap - 2.0 * alg["p_norm2"] + 0.5 * n * alg["j"] ** 2
    return out
