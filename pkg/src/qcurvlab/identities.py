"""Divergence identities, Einstein-scale integration by parts, and the exact
coefficient algebra behind the cancellation lemmas.

The three constancy-free divergence identities are checked pointwise on
arbitrary chart metrics by comparing a finite-difference divergence of the
assembled tensor field against curvature algebra at the center.  The
Einstein-scale identities live on the round sphere, where quadrature is
exact for the polynomial integrands that appear.  The combination
coefficients of the cancellation lemmas are verified in exact rational
arithmetic over a fixed integrand basis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import tensor
from .charts import ChartMetric
from .constants import c_poly
from .models import EinsteinModel, SPHERE, model_chart, chart_point_for_angle
from .spectral import ZonalField, ZonalGrid

__all__ = [
    "EinsteinScale", "einstein_scale_affine", "conformally_einstein_residual",
    "ZonalTensor", "check_pre_ibp", "pre_ibp_scale", "check_obata",
    "obata_diagnostics", "DivergenceResiduals", "check_divergence_identities",
    "bianchi_residual", "ricci_identity_residual", "random_polynomial_scalar",
    "INTEGRAND_BASIS", "eq_tf_jp", "eq_jp_q", "eq_nabla_j",
    "cancel_scalar_delta_display", "cancel_nabla_j2_display",
    "verify_combination_coefficients", "combination_details",
]


# ---------------------------------------------------------------------------
# Einstein scales on the round sphere
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EinsteinScale:
    """u = c + |b| cos(theta) on the unit sphere; u^-2 g is Einstein.

    The rescaled metric has Schouten tensor (lambda_hat / 2) u^-2 g with
    lambda_hat = c^2 - |b|^2 > 0, and u satisfies the first-harmonic Hessian
    identity Hess(u) + (u - c) g = 0.
    """

    n: int
    c: float
    b_norm: float

    def __post_init__(self):
        if not 0.0 <= self.b_norm < self.c:
            raise ValueError("need 0 <= |b| < c so the scale stays positive")

    @property
    def lambda_hat(self) -> float:
        return self.c**2 - self.b_norm**2

    def field(self, nodes: int = 64) -> ZonalField:
        grid = ZonalGrid.get(self.n, nodes)
        return ZonalField(grid, self.c + self.b_norm * grid.x)


def einstein_scale_affine(n: int, c: float, b_norm: float) -> EinsteinScale:
    """Einstein scale with u = c + b cos(theta); requires b < c."""
    return EinsteinScale(n, float(c), float(b_norm))


def conformally_einstein_residual(scale: EinsteinScale, nodes: int = 64) -> float:
    """Pointwise residual of Hess(u) = -u P + (|grad u|^2 + lambda_hat) g / (2u).

    On the unit sphere the Hessian of a zonal function splits into a
    d(theta)^2 part u'' and a tangential part cot(theta) u'; the displayed
    equation reduces componentwise to u'' + u - c = 0 and
    cot(theta) u' + u - c = 0 once lambda_hat = c^2 - |b|^2.
    """
    u = scale.field(nodes)
    grid = u.grid
    x = grid.x
    du_dx = u.dx_values()
    d2u_dx2 = u.like(du_dx).dx_values()
    d2u = -x * du_dx + (1.0 - x * x) * d2u_dx2        # u''(theta)
    cot_term = -x * du_dx                              # cot(theta) u'(theta)
    c = scale.c
    res_rad = d2u + u.values - c
    res_tan = cot_term + u.values - c
    # cross-check the lambda_hat normalization of the displayed right side
    rhs_scale = 0.5 / u.values * ((1.0 - x * x) * du_dx**2 + scale.lambda_hat) \
        - 0.5 * u.values
    res_lam = rhs_scale - (c - u.values)
    return float(max(np.max(np.abs(res_rad)), np.max(np.abs(res_tan)),
                     np.max(np.abs(res_lam))))


# ---------------------------------------------------------------------------
# Eq.-level integration by parts against an Einstein scale
# ---------------------------------------------------------------------------

@dataclass
class ZonalTensor:
    """Symmetric zonal 2-tensor  T = f_g * g + f_theta * dtheta (x) dtheta."""

    f_g: ZonalField
    f_theta: ZonalField

    @property
    def grid(self) -> ZonalGrid:
        return self.f_g.grid


def check_pre_ibp(T: ZonalTensor, scale: EinsteinScale,
                  model: EinsteinModel | None = None) -> float:
    """Integral of <delta T, grad u> - u <T, P> + (|grad u|^2 + lam) tr T / (2u).

    Vanishes for every symmetric T when u is an Einstein scale on the closed
    round sphere; no trace- or divergence-free condition on T is needed.
    Evaluated on the unit sphere (model argument kept for signature parity).
    """
    if model is not None and (model.kind != SPHERE or abs(model.lam - 1.0) > 0):
        raise ValueError("the integration-by-parts check runs on the unit sphere")
    grid = T.grid
    n = grid.dim
    u = scale.field(grid.n_nodes)
    x, sin_t = grid.x, grid.sin_theta
    f1, f2 = T.f_g.values, T.f_theta.values
    du = u.derivative_values()
    df1 = T.f_g.derivative_values()
    df2 = T.f_theta.derivative_values()
    # delta T = (f1' + f2' + (n-1) cot(theta) f2) dtheta on the unit sphere
    cot_f2 = (x / sin_t) * f2
    pair_delta = du * (df1 + df2 + (n - 1) * cot_f2)
    tr_T = n * f1 + f2
    # background P = g/2, so <T, P> = tr(T)/2
    integrand = (pair_delta - 0.5 * u.values * tr_T
                 + 0.5 / u.values * (du**2 + scale.lambda_hat) * tr_T)
    return grid.integrate_unit(integrand)


def pre_ibp_scale(T: ZonalTensor, scale: EinsteinScale) -> float:
    """Magnitude of the individually cancelling terms, for relative bounds."""
    grid = T.grid
    n = grid.dim
    u = scale.field(grid.n_nodes)
    x, sin_t = grid.x, grid.sin_theta
    f1, f2 = T.f_g.values, T.f_theta.values
    du = u.derivative_values()
    df1 = T.f_g.derivative_values()
    df2 = T.f_theta.derivative_values()
    tr_T = n * f1 + f2
    t1 = np.abs(du * (df1 + df2 + (n - 1) * (x / sin_t) * f2))
    t2 = np.abs(0.5 * u.values * tr_T)
    t3 = np.abs(0.5 / u.values * (du**2 + scale.lambda_hat) * tr_T)
    return max(grid.integrate_unit(t1 + t2 + t3), 1e-30)


def check_obata(scale: EinsteinScale, model: EinsteinModel,
                step: float = tensor.DEFAULT_STEP,
                levels: int = tensor.DEFAULT_LEVELS,
                nodes: int = 16) -> float:
    """|lhs| + |rhs| of the trace-free-part pairing identity on a model.

    lhs = integral of u |E|^2, rhs = -integral of <E, Hess u>; on Einstein
    backgrounds E vanishes so both sides are numerically zero.  E is sampled
    honestly by the chart engine.
    """
    if model.kind == SPHERE:
        grid = ZonalGrid.get(model.dim, nodes)
        chart = model_chart(model)
        pts, signs = [], []
        for th in grid.theta:
            p, s = chart_point_for_angle(model, float(th))
            pts.append(p)
            signs.append(s)
        sampler = tensor.CurvatureSampler(chart, step, levels)
        alg = sampler.algebra(np.stack(pts))
        e_norm2 = alg["e_norm2"]
        tr_e = np.einsum("kij,kij->k", alg["ginv"], alg["e"])
        u = scale.field(nodes)
        uvals = u.values if model.dim == scale.n else None
        if uvals is None:
            raise ValueError("scale dimension must match the model")
        vol_scale = model.lam ** (-model.dim / 2.0)
        lhs = vol_scale * grid.integrate_unit(uvals * e_norm2)
        # Hess u = (c - u) g for the affine scale, so <E, Hess u> = (c-u) tr E
        rhs = -vol_scale * grid.integrate_unit((scale.c - uvals) * tr_e)
        return abs(lhs) + abs(rhs)
    # flat models: all curvature quantities vanish identically
    chart = model_chart(model)
    jet = tensor.build_jet(chart, np.zeros(model.dim), step, levels)
    alg = tensor._algebra_batch(jet.g, jet.dg, jet.d2g, full=True)
    return float(abs(alg["e_norm2"]) * model.volume)


def obata_diagnostics(metric: ChartMetric, scalar, points,
                      step: float = tensor.DEFAULT_STEP,
                      levels: int = tensor.DEFAULT_LEVELS) -> list[tuple[float, float]]:
    """Pointwise integrand pairs (u |E|^2, -<E, Hess u>) on an arbitrary chart.

    Out-of-hypothesis control: no equality is asserted; the caller records
    both sides for diagnostics.
    """
    out = []
    sampler = tensor.CurvatureSampler(metric, step, levels)
    for p in np.atleast_2d(np.asarray(points, dtype=float)):
        alg = sampler.algebra(p)
        h = tensor.hessian_laplacian(scalar, metric, p, step=step, levels=levels)
        uval = float(np.asarray(scalar(p.reshape(1, -1))).ravel()[0])
        e_up = np.einsum("ia,jb,ab->ij", alg["ginv"], alg["ginv"], alg["e"])
        lhs = uval * float(alg["e_norm2"])
        rhs = -float(np.einsum("ij,ij->", e_up, h.hess))
        out.append((lhs, rhs))
    return out


# ---------------------------------------------------------------------------
# pointwise divergence identities on arbitrary metrics
# ---------------------------------------------------------------------------

@dataclass
class DivergenceResiduals:
    """Sup-norm residuals of the three constancy-free divergence identities."""

    jp_tracefree: float     # delta(JP - J^2 g / n)   = E(dJ) + (n-1)/n J dJ
    jp_full: float          # delta(JP)               = E(dJ) + (n+1)/n J dJ
    hessian_j: float        # delta(Hess J - LapJ g)  = (n-2) E(dJ) + 2(n-1)/n J dJ

    def max(self) -> float:
        return max(self.jp_tracefree, self.jp_full, self.hessian_j)


def check_divergence_identities(jet: tensor.MetricJet,
                                div_step: float | None = None,
                                div_levels: int | None = None,
                                hess_step: float | None = None,
                                hess_levels: int | None = None) -> DivergenceResiduals:
    """Residuals of the three divergence identities at the jet's base point.

    The left sides difference the assembled tensor fields on the chart; the
    right sides use curvature algebra at the center, so agreement is a
    genuine consistency check of the differencing.
    """
    metric, p = jet.metric, jet.point
    n = metric.dim
    step, levels = jet.step, jet.richardson_levels
    dstep = div_step if div_step is not None else step * tensor.DIV_STEP_FACTOR
    dlev = div_levels if div_levels is not None else levels
    hstep = hess_step if hess_step is not None else step * tensor.LAP_STEP_FACTOR
    hlev = hess_levels if hess_levels is not None else dlev
    # the comparison side needs an accurately extrapolated gradient of J
    bundle = tensor.curvature(jet, lap_step_factor=tensor.LAP_STEP_FACTOR,
                              lap_levels=max(2, levels))
    e_dj = np.einsum("ij,ik,k->j", bundle.e, bundle.ginv, bundle.grad_j)
    j_dj = bundle.j * bundle.grad_j
    sampler = tensor.CurvatureSampler(metric, step, levels)

    d1 = tensor.divergence_sym2(sampler.jp_field(trace_part=1.0 / n), metric, p,
                                step=dstep, levels=dlev, jet_step=step)
    r1 = np.max(np.abs(d1 - e_dj - (n - 1) / n * j_dj))

    d2 = tensor.divergence_sym2(sampler.jp_field(), metric, p,
                                step=dstep, levels=dlev, jet_step=step)
    r2 = np.max(np.abs(d2 - e_dj - (n + 1) / n * j_dj))

    d3 = tensor.divergence_sym2(
        sampler.hessian_j_field(hess_step=hstep, hess_levels=hlev),
        metric, p, step=dstep, levels=dlev, jet_step=step)
    r3 = np.max(np.abs(d3 - (n - 2) * e_dj - 2.0 * (n - 1) / n * j_dj))
    return DivergenceResiduals(float(r1), float(r2), float(r3))


def bianchi_residual(jet: tensor.MetricJet,
                     div_step: float | None = None,
                     div_levels: int | None = None) -> float:
    """|delta P - dJ| at the jet's base point (contracted second Bianchi)."""
    metric, p = jet.metric, jet.point
    step, levels = jet.step, jet.richardson_levels
    dstep = div_step if div_step is not None else step * tensor.DIV_STEP_FACTOR
    dlev = div_levels if div_levels is not None else levels
    bundle = tensor.curvature(jet, lap_levels=max(2, levels))
    sampler = tensor.CurvatureSampler(metric, step, levels)
    dP = tensor.divergence_sym2(sampler.schouten_field(), metric, p,
                                step=dstep, levels=dlev, jet_step=step)
    return float(np.max(np.abs(dP - bundle.grad_j)))


def random_polynomial_scalar(dim: int, rng: np.random.Generator,
                             degree: int = 4, amplitude: float = 1.0):
    """A random polynomial scalar field as an exact batch callable."""
    from itertools import combinations_with_replacement

    exps = []
    for deg in range(1, degree + 1):
        for combo in combinations_with_replacement(range(dim), deg):
            e = [0] * dim
            for i in combo:
                e[i] += 1
            exps.append(e)
    exps = np.array(exps)
    coeffs = amplitude * rng.standard_normal(exps.shape[0]) / exps.shape[0]

    def fn(pts):
        pts = np.asarray(pts, dtype=float)
        mono = np.prod(pts[..., None, :] ** exps, axis=-1)
        return mono @ coeffs

    return fn


def ricci_identity_residual(metric: ChartMetric, point, scalar,
                            step: float = tensor.DEFAULT_STEP,
                            levels: int = tensor.DEFAULT_LEVELS,
                            div_step: float | None = None,
                            hess_step: float | None = None) -> float:
    """|delta(Hess u) - grad(Lap u) - Ric(grad u)| for a scalar u.

    The Hessian is differenced as a field of position and its divergence
    compared against the gradient of the Laplacian plus the Ricci term.
    """
    p = np.asarray(point, dtype=float)
    n = metric.dim
    dstep = div_step if div_step is not None else step * tensor.DIV_STEP_FACTOR
    hstep = hess_step if hess_step is not None else step * tensor.LAP_STEP_FACTOR
    sampler = tensor.CurvatureSampler(metric, step, levels)

    def hess_field(pts):
        pts = np.asarray(pts, dtype=float)
        alg = sampler._algebra(pts, full=False)
        hess, _, _, _ = tensor._scalar_derivative_batch(
            scalar, pts, alg["ginv"], alg["gamma"], hstep, levels)
        return hess

    lhs = tensor.divergence_sym2(hess_field, metric, p,
                                 step=dstep, levels=levels, jet_step=step)

    def lap_field(pts):
        pts = np.asarray(pts, dtype=float)
        alg = sampler._algebra(pts, full=False)
        _, lap, _, _ = tensor._scalar_derivative_batch(
            scalar, pts, alg["ginv"], alg["gamma"], hstep, levels)
        return lap

    grad_lap = tensor._batched_derivatives(
        lap_field, p, n, tensor._derivative_multi_indices(n, 1), dstep, levels)
    dlap = np.array([grad_lap[(i,)] for i in range(n)])
    bundle_alg = sampler.algebra(p)
    h = tensor.hessian_laplacian(scalar, metric, p, step=hstep,
                                 levels=levels, jet_step=step)
    ric_grad = np.einsum("ij,ik,k->j", bundle_alg["ric"], bundle_alg["ginv"],
                         h.grad)
    return float(np.max(np.abs(lhs - dlap - ric_grad)))


# ---------------------------------------------------------------------------
# exact coefficient algebra of the cancellation lemmas
# ---------------------------------------------------------------------------

# basis of integrand terms, with u the Einstein scale and lam its constant:
INTEGRAND_BASIS = (
    "uJ|E|^2",                  # u J |E|^2
    "E(dJ,du)",                 # E(grad J, grad u)
    "<JdJ,du>",                 # J <grad J, grad u>
    "(1/u)(|du|^2+lam)LapJ",
    "(1/u)(|du|^2+lam)|E|^2",
    "uJLapJ",
    "u|dJ|^2",
)


def _vec(**terms) -> dict:
    out = {k: Fraction(0) for k in INTEGRAND_BASIS}
    for k, v in terms.items():
        key = {
            "uJE2": "uJ|E|^2", "EdJdu": "E(dJ,du)", "JdJdu": "<JdJ,du>",
            "lapJ": "(1/u)(|du|^2+lam)LapJ", "E2": "(1/u)(|du|^2+lam)|E|^2",
            "uJlapJ": "uJLapJ", "udJ2": "u|dJ|^2",
        }[k]
        out[key] = Fraction(v)
    return out


def _add(x: dict, y: dict, cy: Fraction = Fraction(1)) -> dict:
    return {k: x[k] + cy * y[k] for k in INTEGRAND_BASIS}


def eq_tf_jp(n) -> dict:
    """Integrand of the trace-free pairing identity (vanishing integral)."""
    n = Fraction(n)
    return _vec(uJE2=-1, EdJdu=1, JdJdu=Fraction(n - 1, n))


def eq_jp_q(n, a) -> dict:
    """Integrand of the combined pairing identity (vanishing integral)."""
    n, a = Fraction(n), Fraction(a)
    m = n * n - 4 + (n - 1) * a
    return _vec(EdJdu=m, JdJdu=m * Fraction(n + 1, n), uJlapJ=-2,
                uJE2=-n * (n + a), lapJ=n, E2=n * (a + 4) / 2)


def eq_nabla_j(n) -> dict:
    """Integrand of the Hessian pairing identity (vanishing integral)."""
    n = Fraction(n)
    return _vec(EdJdu=n - 1, JdJdu=Fraction(n - 1, n), lapJ=-Fraction(n - 1, 2))


def _ibp_substitution(vec: dict) -> dict:
    """Replace u J LapJ by -u |dJ|^2 - <J dJ, du> (integration by parts)."""
    c = vec["uJLapJ"]
    out = dict(vec)
    out["uJLapJ"] = Fraction(0)
    out["u|dJ|^2"] = vec["u|dJ|^2"] - c
    out["<JdJ,du>"] = vec["<JdJ,du>"] - c
    return out


def cancel_scalar_delta_display(n, a) -> dict:
    """Displayed integrand after cancelling the Laplacian terms."""
    n, a = Fraction(n), Fraction(a)
    return _vec(udJ2=2, uJE2=-n * (n + a),
                EdJdu=n * n + 2 * n - 4 + (n - 1) * a,
                JdJdu=Fraction(n**3 + n**2 - 4 + (n * n - 1) * a, n),
                E2=n * (a + 4) / 2)


def cancel_nabla_j2_display(n, a) -> dict:
    """Displayed integrand after also cancelling the <J dJ, du> term."""
    n, a = Fraction(n), Fraction(a)
    return _vec(udJ2=2,
                EdJdu=-Fraction(2 * (3 * n - 4 + (n - 1) * a), n - 1),
                uJE2=Fraction(2 * n * n - 4 + (n - 1) * a, n - 1),
                E2=n * (a + 4) / 2)


def combination_details(n, a) -> dict:
    """The two lemma combinations and the discriminant identity, exactly."""
    n_f, a_f = Fraction(n), Fraction(a)
    combo1 = _ibp_substitution(
        _add(eq_jp_q(n_f, a_f), eq_nabla_j(n_f), Fraction(2 * n_f, n_f - 1)))
    target1 = cancel_scalar_delta_display(n_f, a_f)
    coeff2 = Fraction(n_f**3 + n_f**2 - 4 + (n_f * n_f - 1) * a_f, n_f - 1)
    combo2 = _add(combo1, eq_tf_jp(n_f), -coeff2)
    target2 = cancel_nabla_j2_display(n_f, a_f)
    lhs3 = c_poly(n_f, a_f)
    rhs3 = (n_f * (a_f + 4) * (n_f - 1) ** 2
            - (3 * n_f - 4 + (n_f - 1) * a_f) ** 2)
    return {
        "combo_scalar_delta": combo1,
        "display_scalar_delta": target1,
        "combo_nabla_j2": combo2,
        "display_nabla_j2": target2,
        "discriminant_lhs": lhs3,
        "discriminant_rhs": rhs3,
    }


def verify_combination_coefficients(n, a) -> bool:
    """Exact check of both lemma combinations and the discriminant identity."""
    d = combination_details(n, a)
    return (d["combo_scalar_delta"] == d["display_scalar_delta"]
            and d["combo_nabla_j2"] == d["display_nabla_j2"]
            and d["discriminant_lhs"] == d["discriminant_rhs"])
