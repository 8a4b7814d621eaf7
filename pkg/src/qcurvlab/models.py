"""Closed Einstein model geometries with closed-form invariants.

Round spheres, flat tori and S^2 x S^2 carry their Einstein constant,
constant Weyl norm, and volume in closed form; chart builders bridge each
model to the finite-difference tensor engine.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

from .charts import ChartMetric, flat_chart, product_s2_chart, stereographic_sphere_chart

SPHERE = "sphere"
TORUS = "torus"
S2XS2 = "s2xs2"
_KINDS = (SPHERE, TORUS, S2XS2)


@dataclass(frozen=True)
class EinsteinModel:
    """A closed Einstein manifold: Ric = (n-1) * lam * g, constant |W|^2."""

    dim: int
    lam: float
    weyl_norm2: float
    volume: float
    kind: str
    periods: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown model kind {self.kind!r}")
        if self.dim < 3:
            raise ValueError("models require dimension >= 3")
        if self.lam < 0 or self.weyl_norm2 < 0 or self.volume <= 0:
            raise ValueError("model constants out of range")

    @property
    def radius(self) -> float:
        if self.kind != SPHERE:
            raise ValueError("radius is defined for sphere models only")
        return self.lam ** -0.5

    def describe(self) -> str:
        if self.kind == SPHERE:
            return f"sphere:n={self.dim},lambda={self.lam:g}"
        if self.kind == TORUS:
            per = "x".join(f"{p:g}" for p in self.periods)
            return f"torus:n={self.dim},periods={per}"
        return f"s2xs2:lambda={self.lam:g}"


def sphere_volume(n: int, lam: float) -> float:
    """Volume of the round n-sphere with Einstein constant lam."""
    return 2.0 * math.pi ** ((n + 1) / 2) / math.gamma((n + 1) / 2) * lam ** (-n / 2)


def round_sphere(n: int, lam: float) -> EinsteinModel:
    """Round sphere of radius lam**-0.5 (Ric = (n-1) lam g)."""
    if n < 3:
        raise ValueError("round_sphere requires n >= 3")
    if lam <= 0:
        raise ValueError("round_sphere requires lam > 0; use flat_torus for lam = 0")
    return EinsteinModel(n, float(lam), 0.0, sphere_volume(n, lam), SPHERE)


def flat_torus(n: int, periods) -> EinsteinModel:
    """Flat torus with the given side lengths."""
    per = tuple(float(p) for p in periods)
    if len(per) != n:
        raise ValueError("need one period per dimension")
    if any(p <= 0 for p in per):
        raise ValueError("periods must be positive")
    return EinsteinModel(n, 0.0, 0.0, float(np.prod(per)), TORUS, periods=per)


def product_s2_s2(lam: float) -> EinsteinModel:
    """S^2 x S^2 with factors of Gauss curvature 3*lam (Einstein, dim 4).

    The constant Weyl norm 48*lam^2 matches the exact contraction of the
    block Riemann tensor of the product (and the chart oracle, see tests).
    """
    if lam <= 0:
        raise ValueError("product_s2_s2 requires lam > 0")
    area = 4.0 * math.pi / (3.0 * lam)
    return EinsteinModel(4, float(lam), 48.0 * lam * lam, area * area, S2XS2)


def einstein_pointwise(model: EinsteinModel) -> dict:
    """Constant pointwise invariants of the model: J, |P|^2, sigma_2, Q, |W|^2."""
    n, lam = model.dim, model.lam
    return {
        "j": n * lam / 2.0,
        "p_norm2": n * lam * lam / 4.0,
        "sigma2": n * (n - 1) * lam * lam / 8.0,
        "q": n * (n * n - 4) * lam * lam / 8.0,
        "weyl_norm2": model.weyl_norm2,
    }


def yamabe_constant_iab(model: EinsteinModel, a: float, b: float = 0.0) -> float:
    """Extremal volume-normalized total (Q + a sigma_2 + b |W|^2)-curvature.

    Valid in dimension >= 5, and in dimension 3 with b = 0 (where the
    extremum is a supremum); dimension 4 uses the log-determinant
    functionals instead.
    """
    n = model.dim
    if n == 4:
        raise ValueError("dimension 4 has no volume-normalized total "
                         "curvature of this type; use the dim-4 functionals")
    if n == 3 and b != 0.0:
        raise ValueError("the Weyl tensor vanishes in dimension 3; b must be 0")
    lam = model.lam
    density = (n * (n * n - 4) / 8.0 * lam * lam
               + n * (n - 1) / 8.0 * a * lam * lam
               + b * model.weyl_norm2)
    return density * model.volume ** (4.0 / n)


def total_q_infimum_constants(model: EinsteinModel) -> dict:
    """Both published constants for the unit-volume total-Q extremum.

    The value chained through the energy identity (and certified by the
    sharp-inequality and optimizer checks) is ``normative``; the alternative
    Gamma-ratio closed form differs from it by exactly (n-4)/2.  Reports
    carry both so the mismatch stays visible rather than silently resolved.
    """
    n, lam = model.dim, model.lam
    if n <= 4:
        raise ValueError("the total-Q infimum constants apply in dimension >= 5")
    normative = yamabe_constant_iab(model, 0.0, 0.0)
    gamma_ratio = math.gamma((n + 4) / 2) / math.gamma((n - 4) / 2)
    variant = gamma_ratio * lam * lam * model.volume ** (4.0 / n)
    return {
        "normative": normative,
        "gamma_ratio_variant": variant,
        "ratio": variant / normative,
        "expected_ratio": (n - 4) / 2.0,
        "consistent": abs(variant / normative - (n - 4) / 2.0) < 1e-12,
    }


def stereographic_chart(model: EinsteinModel) -> ChartMetric:
    """Stereographic chart of a sphere model, for the tensor engine."""
    if model.kind != SPHERE:
        raise ValueError("stereographic_chart requires a sphere model")
    return stereographic_sphere_chart(model.dim, model.lam)


def model_chart(model: EinsteinModel) -> ChartMetric:
    """A coordinate chart through which the tensor engine sees the model."""
    if model.kind == SPHERE:
        return stereographic_sphere_chart(model.dim, model.lam)
    if model.kind == S2XS2:
        return product_s2_chart(model.lam)
    return flat_chart(model.dim, half_width=min(model.periods) / 2.0)


def chart_point_for_angle(model: EinsteinModel, theta: float) -> tuple[np.ndarray, int]:
    """Chart point on the first axis matching polar angle ``theta``.

    Returns (point, pole) where pole = +1 means the chart projected from the
    antipode of the north pole (covers theta < pi/2 near the origin) and
    pole = -1 the opposite chart; both keep |x| <= r so jets stay
    well-conditioned.
    """
    if model.kind != SPHERE:
        raise ValueError("angles parametrize sphere models only")
    r = model.radius
    th = float(theta)
    if th <= math.pi / 2:
        s, pole = r * math.tan(th / 2.0), +1
    else:
        s, pole = r * math.tan((math.pi - th) / 2.0), -1
    point = np.zeros(model.dim)
    point[0] = s
    return point, pole


def parse_model_spec(spec: str) -> EinsteinModel:
    """Parse CLI model specifications like ``sphere:n=5,lambda=1``.

    Supported: ``sphere:n=<int>,lambda=<float>``,
    ``torus:n=<int>,periods=<p1>x<p2>x...``, ``s2xs2:lambda=<float>``.
    """
    m = re.fullmatch(r"(\w+)(?::(.*))?", spec.strip())
    if not m:
        raise ValueError(f"cannot parse model spec {spec!r}")
    kind, rest = m.group(1), m.group(2) or ""
    kv: dict[str, str] = {}
    for part in filter(None, rest.split(",")):
        if "=" not in part:
            raise ValueError(f"bad model parameter {part!r}")
        k, v = part.split("=", 1)
        kv[k.strip()] = v.strip()
    if kind == SPHERE:
        return round_sphere(int(kv.get("n", 4)), float(kv.get("lambda", 1.0)))
    if kind == TORUS:
        n = int(kv.get("n", 4))
        if "periods" in kv:
            periods = [float(p) for p in kv["periods"].split("x")]
        else:
            periods = [2.0 * math.pi] * n
        return flat_torus(n, periods)
    if kind == S2XS2:
        return product_s2_s2(float(kv.get("lambda", 1.0 / 3.0)))
    raise ValueError(f"unknown model kind {kind!r}")
