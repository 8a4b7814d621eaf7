"""Spectral calculus for rotationally symmetric fields on round spheres
and for single-frequency-direction fields on flat tori.

Zonal functions f(theta) on S^n are sampled at Gauss--Jacobi nodes in
x = cos(theta), so integrals against sin^(n-1)(theta) d(theta) are exact
for polynomials in cos(theta) of degree <= 2N-1.  The Gegenbauer
polynomials C_k^((n-1)/2)(cos theta) are the zonal spherical harmonics:
they are orthogonal under exactly this pairing, and the Laplacian acts
diagonally with eigenvalue -k(k+n-1), so differentiation and the
factorized fourth-order operators are spectrally exact.

All formulas here are for the unit sphere; model-aware scalings (by the
Einstein constant) live in the functional layer.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.special import roots_jacobi

from .errors import ResolutionError

DEFAULT_NODES = 256
RESOLUTION_TOL = 1e-10
# transform-noise floor: trailing coefficients below this fraction of the
# largest one are discretization noise and are dropped before spectral
# synthesis, since the Laplacian eigenvalues (~N^2) times the endpoint growth
# of the basis would otherwise amplify them far above rounding
COEFF_NOISE_CUT = 1e-13


def sphere_area(n: int) -> float:
    """Surface volume of the unit n-sphere."""
    return 2.0 * math.pi ** ((n + 1) / 2) / math.gamma((n + 1) / 2)


def _gegenbauer_matrix(alpha: float, x: np.ndarray, kmax: int) -> np.ndarray:
    """Columns C_k^alpha(x), k = 0..kmax, by the three-term recurrence."""
    out = np.empty((x.size, kmax + 1))
    out[:, 0] = 1.0
    if kmax >= 1:
        out[:, 1] = 2.0 * alpha * x
    for k in range(1, kmax):
        out[:, k + 1] = (2.0 * (k + alpha) * x * out[:, k]
                         - (k + 2.0 * alpha - 1.0) * out[:, k - 1]) / (k + 1.0)
    return out


def _gegenbauer_norms(alpha: float, n: int, kmax: int) -> np.ndarray:
    """Squared norms of C_k^alpha under the (1-x^2)^(alpha-1/2) pairing."""
    k = np.arange(kmax + 1, dtype=float)
    logs = (math.log(math.pi) + (1.0 - 2.0 * alpha) * math.log(2.0)
            - 2.0 * math.lgamma(alpha))
    return np.exp(logs + np.vectorize(math.lgamma)(k + 2.0 * alpha)
                  - np.vectorize(math.lgamma)(k + 1.0)) / (k + alpha)


class ZonalGrid:
    """Shared quadrature nodes and spectral matrices for one (dim, N) pair."""

    _cache: dict[tuple[int, int], "ZonalGrid"] = {}

    def __init__(self, dim: int, nodes: int):
        if dim < 3:
            raise ValueError("zonal calculus requires dimension >= 3")
        self.dim = dim
        self.n_nodes = nodes
        beta = (dim - 2) / 2.0
        x, w = roots_jacobi(nodes, beta, beta)
        self.x = x
        self.w = w
        self.theta = np.arccos(x)
        self.sin_theta = np.sqrt(1.0 - x * x)
        alpha = (dim - 1) / 2.0
        self.alpha = alpha
        self.synth = _gegenbauer_matrix(alpha, x, nodes - 1)       # values = synth @ coeffs
        norms = _gegenbauer_norms(alpha, dim, nodes - 1)
        self.analyze = (self.synth * w[:, None]).T / norms[:, None]
        # d/dx of the basis: (C_k^a)' = 2a C_{k-1}^{a+1}
        ddx = np.zeros_like(self.synth)
        ddx[:, 1:] = 2.0 * alpha * _gegenbauer_matrix(alpha + 1.0, x, nodes - 2)
        self.ddx = ddx
        k = np.arange(nodes, dtype=float)
        self.laplacian_eig = -k * (k + dim - 1)

    @classmethod
    def get(cls, dim: int, nodes: int = DEFAULT_NODES) -> "ZonalGrid":
        key = (dim, nodes)
        if key not in cls._cache:
            cls._cache[key] = ZonalGrid(dim, nodes)
        return cls._cache[key]

    def coeffs_of(self, values: np.ndarray) -> np.ndarray:
        return self.analyze @ values

    def values_of(self, coeffs: np.ndarray) -> np.ndarray:
        return self.synth @ coeffs

    def evaluate(self, coeffs: np.ndarray, theta) -> np.ndarray:
        xs = np.cos(np.atleast_1d(np.asarray(theta, dtype=float)))
        mat = _gegenbauer_matrix(self.alpha, xs, self.n_nodes - 1)
        out = mat @ coeffs
        return out if np.ndim(theta) else float(out[0])

    def integrate_unit(self, values: np.ndarray) -> float:
        """Integral over the whole unit sphere of a zonal integrand."""
        return float(sphere_area(self.dim - 1) * (self.w @ values))

    def tail_fraction(self, values: np.ndarray, tail: int | None = None) -> float:
        c = self.coeffs_of(values)
        m = tail if tail is not None else max(2, self.n_nodes // 16)
        total = float(np.sum(c * c))
        if total == 0.0:
            return 0.0
        return math.sqrt(float(np.sum(c[-m:] ** 2)) / total)


@dataclass
class ZonalField:
    """A rotationally symmetric function on the unit n-sphere.

    ``values`` live at the Gauss--Jacobi nodes of ``grid``; the Gegenbauer
    coefficient vector is computed on demand.  basis_degree is the largest
    polynomial degree in cos(theta) the grid resolves.
    """

    grid: ZonalGrid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid.n_nodes,):
            raise ValueError("values must match the grid nodes")

    # -- constructors -------------------------------------------------
    @classmethod
    def from_function(cls, dim: int, fn, nodes: int = DEFAULT_NODES) -> "ZonalField":
        grid = ZonalGrid.get(dim, nodes)
        return cls(grid, np.asarray(fn(grid.theta), dtype=float))

    @classmethod
    def from_values(cls, dim: int, values, nodes: int | None = None) -> "ZonalField":
        values = np.asarray(values, dtype=float)
        grid = ZonalGrid.get(dim, nodes if nodes is not None else values.size)
        return cls(grid, values)

    @classmethod
    def from_coeffs(cls, dim: int, coeffs, nodes: int = DEFAULT_NODES) -> "ZonalField":
        grid = ZonalGrid.get(dim, nodes)
        c = np.zeros(nodes)
        coeffs = np.asarray(coeffs, dtype=float)
        c[:coeffs.size] = coeffs
        return cls(grid, grid.values_of(c))

    @classmethod
    def constant(cls, dim: int, value: float, nodes: int = DEFAULT_NODES) -> "ZonalField":
        grid = ZonalGrid.get(dim, nodes)
        return cls(grid, np.full(nodes, float(value)))

    # -- basic data ----------------------------------------------------
    @property
    def dim(self) -> int:
        return self.grid.dim

    @property
    def nodes(self) -> np.ndarray:
        return self.grid.theta

    @property
    def weights(self) -> np.ndarray:
        return self.grid.w

    @property
    def basis_degree(self) -> int:
        return self.grid.n_nodes - 1

    def coeffs(self) -> np.ndarray:
        return self.grid.coeffs_of(self.values)

    def _clean_coeffs(self) -> np.ndarray:
        """Coefficients with the trailing sub-noise band zeroed.

        The effective bandlimit is the last coefficient above the noise cut;
        everything below it is kept (dips inside the band are genuine).
        """
        c = self.coeffs()
        mags = np.abs(c)
        top = np.max(mags)
        if top == 0.0:
            return c
        above = np.nonzero(mags >= COEFF_NOISE_CUT * top)[0]
        k_band = above[-1] + 1
        out = c.copy()
        out[k_band:] = 0.0
        return out

    def like(self, values: np.ndarray) -> "ZonalField":
        return ZonalField(self.grid, np.asarray(values, dtype=float))

    def resample(self, nodes: int) -> "ZonalField":
        target = ZonalGrid.get(self.dim, nodes)
        c = self._clean_coeffs()
        cc = np.zeros(nodes)
        cc[:min(nodes, c.size)] = c[:min(nodes, c.size)]
        return ZonalField(target, target.values_of(cc))

    def evaluate(self, theta):
        return self.grid.evaluate(self._clean_coeffs(), theta)

    def evaluate_x(self, x: np.ndarray) -> np.ndarray:
        """Evaluate at arbitrary x = cos(theta), any array shape.

        Uses the effective bandlimit, so chart-sized batches stay cheap.
        """
        xs = np.asarray(x, dtype=float)
        c = self._clean_coeffs()
        nz = np.nonzero(c)[0]
        kmax = int(nz[-1]) if nz.size else 0
        mat = _gegenbauer_matrix(self.grid.alpha, xs.ravel(), kmax)
        return (mat @ c[:kmax + 1]).reshape(xs.shape)

    # -- calculus on the unit sphere ------------------------------------
    def check_resolved(self, tol: float = RESOLUTION_TOL) -> None:
        frac = self.grid.tail_fraction(self.values)
        if frac > tol:
            raise ResolutionError(
                f"field underresolved: coefficient tail {frac:.2e} exceeds {tol:g}")

    def dx_values(self) -> np.ndarray:
        """d/dx of the interpolant at the nodes (x = cos theta)."""
        return self.grid.ddx @ self._clean_coeffs()

    def derivative_values(self) -> np.ndarray:
        """f'(theta) at the nodes."""
        return -self.grid.sin_theta * self.dx_values()

    def laplacian_values(self) -> np.ndarray:
        """Unit-sphere Laplacian (trace of the Hessian, negative spectrum)."""
        return self.grid.values_of(self.grid.laplacian_eig * self._clean_coeffs())

    def grad_norm2_values(self) -> np.ndarray:
        d = self.derivative_values()
        return d * d

    def integrate_unit(self, integrand: np.ndarray | None = None) -> float:
        vals = self.values if integrand is None else np.asarray(integrand)
        return self.grid.integrate_unit(vals)


@dataclass
class ZonalCalculusResult:
    df: ZonalField
    lap: ZonalField
    grad_norm2: ZonalField


def zonal_calculus(f: ZonalField, lam: float = 1.0) -> ZonalCalculusResult:
    """Derivative, Laplacian and |grad|^2 of a zonal field.

    On the sphere of Einstein constant ``lam`` (radius lam**-0.5) the
    Laplacian and squared gradient scale linearly in lam; the theta
    derivative is unscaled.
    """
    f.check_resolved()
    return ZonalCalculusResult(
        df=f.like(f.derivative_values()),
        lap=f.like(lam * f.laplacian_values()),
        grad_norm2=f.like(lam * f.grad_norm2_values()),
    )


def divergence_theta_form(f: ZonalField, hvals: np.ndarray, lam: float = 1.0) -> np.ndarray:
    """Divergence of the zonal 1-form h(theta) d(theta).

    Every 1-form arising here is smooth, so h = sin(theta) H(cos theta) with
    H polynomial-like; then delta(h dtheta) = lam (n x H - (1-x^2) H'(x)),
    which keeps the computation inside the polynomial basis.
    """
    grid = f.grid
    H = f.like(np.asarray(hvals) / grid.sin_theta)
    Hdx = H.dx_values()
    n = grid.dim
    return lam * (n * grid.x * H.values - (1.0 - grid.x**2) * Hdx)


def moebius_factor(n: int, t: float, exponent: float,
                   nodes: int = DEFAULT_NODES) -> ZonalField:
    """Conformal factor (1 + t cos theta)^exponent of a sphere automorphism.

    The extremal exponent for the sharp fourth-order inequalities is
    -(n-4)/4 (so +1/4 in dimension three).
    """
    if not 0.0 <= t < 1.0:
        raise ValueError("moebius parameter t must lie in [0, 1)")
    grid = ZonalGrid.get(n, nodes)
    return ZonalField(grid, (1.0 + t * grid.x) ** exponent)


def moebius_log_factor(n: int, t: float, nodes: int = DEFAULT_NODES) -> ZonalField:
    """w with e^{2w} g the pullback of the round metric by a sphere automorphism.

    e^{2w} = (1 - t^2) / (1 + t cos theta)^2; the pullback is isometric to
    the round metric, so all conformally natural functionals vanish at w.
    """
    if not 0.0 <= t < 1.0:
        raise ValueError("moebius parameter t must lie in [0, 1)")
    grid = ZonalGrid.get(n, nodes)
    return ZonalField(grid, 0.5 * math.log(1.0 - t * t)
                      - np.log(1.0 + t * grid.x))


# ---------------------------------------------------------------------------
# flat-torus counterpart: fields of one coordinate, Fourier calculus
# ---------------------------------------------------------------------------

@dataclass
class TorusField:
    """A function on a flat torus depending on the first coordinate only."""

    periods: tuple[float, ...]
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.size % 2:
            raise ValueError("use an even number of sample points")

    @classmethod
    def from_function(cls, periods, fn, nodes: int = DEFAULT_NODES) -> "TorusField":
        periods = tuple(float(p) for p in periods)
        xs = np.arange(nodes) * (periods[0] / nodes)
        return cls(periods, np.asarray(fn(xs), dtype=float))

    @classmethod
    def from_coeffs(cls, periods, cos_coeffs, sin_coeffs=None,
                    nodes: int = DEFAULT_NODES) -> "TorusField":
        periods = tuple(float(p) for p in periods)
        xs = np.arange(nodes) * (periods[0] / nodes)
        vals = np.zeros(nodes)
        two_pi = 2.0 * math.pi / periods[0]
        for k, c in enumerate(np.asarray(cos_coeffs, dtype=float)):
            vals += c * np.cos(two_pi * k * xs)
        if sin_coeffs is not None:
            for k, s in enumerate(np.asarray(sin_coeffs, dtype=float), start=1):
                vals += s * np.sin(two_pi * k * xs)
        return cls(periods, vals)

    @property
    def dim(self) -> int:
        return len(self.periods)

    @property
    def n_nodes(self) -> int:
        return self.values.size

    def like(self, values: np.ndarray) -> "TorusField":
        return TorusField(self.periods, np.asarray(values, dtype=float))

    def _freqs(self) -> np.ndarray:
        return 2.0 * math.pi * np.fft.rfftfreq(self.n_nodes,
                                               self.periods[0] / self.n_nodes)

    def check_resolved(self, tol: float = RESOLUTION_TOL) -> None:
        c = np.fft.rfft(self.values) / self.n_nodes
        total = float(np.sum(np.abs(c) ** 2))
        if total == 0.0:
            return
        m = max(2, c.size // 8)
        frac = math.sqrt(float(np.sum(np.abs(c[-m:]) ** 2)) / total)
        if frac > tol:
            raise ResolutionError(
                f"field underresolved: coefficient tail {frac:.2e} exceeds {tol:g}")

    def derivative_values(self) -> np.ndarray:
        c = np.fft.rfft(self.values)
        return np.fft.irfft(1j * self._freqs() * c, self.n_nodes)

    def laplacian_values(self) -> np.ndarray:
        c = np.fft.rfft(self.values)
        return np.fft.irfft(-self._freqs() ** 2 * c, self.n_nodes)

    def grad_norm2_values(self) -> np.ndarray:
        d = self.derivative_values()
        return d * d

    def integrate(self, integrand: np.ndarray | None = None) -> float:
        vals = self.values if integrand is None else np.asarray(integrand)
        vol = float(np.prod(self.periods))
        return vol * float(np.mean(vals))


# ---------------------------------------------------------------------------
# CSV exchange of zonal fields
# ---------------------------------------------------------------------------

def zonal_to_csv(field: ZonalField, path) -> None:
    """Write (theta, value) rows at the field's quadrature nodes."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["theta", "value"])
        for th, v in zip(field.nodes, field.values):
            writer.writerow([repr(float(th)), repr(float(v))])


def zonal_from_csv(dim: int, path, nodes: int = DEFAULT_NODES) -> ZonalField:
    """Read (theta, value) rows; fit coefficients if thetas are off-grid."""
    thetas, vals = [], []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header and header[0].strip().lower() != "theta":
            thetas.append(float(header[0]))
            vals.append(float(header[1]))
        for row in reader:
            if not row:
                continue
            thetas.append(float(row[0]))
            vals.append(float(row[1]))
    thetas = np.asarray(thetas)
    vals = np.asarray(vals)
    grid = ZonalGrid.get(dim, nodes)
    if thetas.size == nodes and np.allclose(np.sort(thetas), np.sort(grid.theta),
                                            atol=1e-9):
        order = np.argsort(thetas)
        back = np.argsort(np.argsort(grid.theta))
        return ZonalField(grid, vals[order][back])
    kmax = min(nodes - 1, thetas.size - 1)
    design = _gegenbauer_matrix(grid.alpha, np.cos(thetas), kmax)
    coeffs, *_ = np.linalg.lstsq(design, vals, rcond=None)
    return ZonalField.from_coeffs(dim, coeffs, nodes)
