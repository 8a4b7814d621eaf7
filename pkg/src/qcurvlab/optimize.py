"""Conformal-factor optimization: numerical witnesses for the extremal
characterizations (Einstein factors extremize the normalized totals and the
dimension-4 functionals).

Plain gradient descent with central finite-difference gradients over a fixed
number of zonal basis coefficients, Armijo backtracking, and positivity by
projection for conformal factors.  Deterministic for a fixed seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .functionals import dj_functional, energy_rhs, f_gamma
from .models import EinsteinModel, SPHERE, TORUS, yamabe_constant_iab
from .spectral import TorusField, ZonalField, ZonalGrid

__all__ = ["OptimizerOptions", "OptimizeResult", "minimize_functional"]

OBJECTIVES = ("total_iab", "f_gamma", "dj")


@dataclass
class OptimizerOptions:
    max_iter: int = 400
    seed: int = 0
    init_amplitude: float = 0.2
    grad_eps: float = 1e-6
    tol: float = 1e-11
    nodes: int = 96
    step0: float = 1.0
    positivity_floor: float = 0.05
    patience: int = 40


@dataclass
class OptimizeResult:
    objective: str
    sense: str                  # "min" or "max"
    coefficients: np.ndarray
    value: float                # objective in its natural orientation
    trace: list = field(default_factory=list)
    iterations: int = 0
    converged: bool = True
    metadata: dict = field(default_factory=dict)


def _basis_fields(model: EinsteinModel, degree: int, nodes: int):
    """Node values of normalized basis elements (no constant term)."""
    if model.kind == SPHERE:
        grid = ZonalGrid.get(model.dim, nodes)
        cols = []
        for k in range(1, degree + 1):
            e = np.zeros(nodes)
            e[k] = 1.0
            vals = grid.values_of(e)
            cols.append(vals / np.max(np.abs(vals)))
        return grid, np.stack(cols, axis=1)
    if model.kind == TORUS:
        xs = np.arange(nodes) * (model.periods[0] / nodes)
        two_pi = 2.0 * np.pi / model.periods[0]
        cols = []
        for k in range(1, degree + 1):
            cols.append(np.cos(two_pi * k * xs))
            cols.append(np.sin(two_pi * k * xs))
        return None, np.stack(cols, axis=1)
    raise ValueError("optimization runs on sphere or torus models")


def _field_from(model, grid, values):
    if model.kind == SPHERE:
        return ZonalField(grid, values)
    return TorusField(model.periods, values)


def _make_objective(objective: str, model: EinsteinModel, params: dict,
                    grid, basis: np.ndarray, floor: float):
    n = model.dim
    a = float(params.get("a", 0.0))
    b = float(params.get("b", 0.0))

    if objective == "total_iab":
        if n == 4:
            raise ValueError("use f_gamma on four-dimensional models")
        sense = "max" if n == 3 else "min"
        target = yamabe_constant_iab(model, a, b)

        def project(coeffs):
            pert = basis @ coeffs
            low = np.min(1.0 + pert)
            if low < floor:
                coeffs = coeffs * ((1.0 - floor) / (1.0 - low))
                pert = basis @ coeffs
            return coeffs, 1.0 + pert

        def value(coeffs):
            coeffs, uvals = project(coeffs)
            u = _field_from(model, grid, uvals)
            rhs = energy_rhs(u, model, a, b)
            vol = (model.lam ** (-n / 2.0)
                   * grid.integrate_unit(uvals ** (4.0 * n / (n - 4))))
            return 2.0 / (n - 4) * rhs / vol ** ((n - 4) / n)

        return sense, target, project, value

    if objective == "f_gamma":
        if n != 4:
            raise ValueError("the functional combinations are four-dimensional")
        gamma = params.get("gamma", (0.0, 1.0, 0.0))

        def project(coeffs):
            return coeffs, basis @ coeffs

        def value(coeffs):
            _, wvals = project(coeffs)
            w = _field_from(model, grid, wvals)
            return f_gamma(w, model, *gamma).value

        return "min", 0.0, project, value

    if objective == "dj":
        def project(coeffs):
            return coeffs, basis @ coeffs

        def value(coeffs):
            _, wvals = project(coeffs)
            w = _field_from(model, grid, wvals)
            rep = dj_functional(w, model)
            return rep.value

        j = n * model.lam / 2.0
        return "min", j * j * model.volume ** (4.0 / n), project, value

    raise ValueError(f"unknown objective {objective!r}; pick from {OBJECTIVES}")


def minimize_functional(objective: str, model: EinsteinModel,
                        params: dict | None = None, degree: int = 8,
                        opts: OptimizerOptions | None = None) -> OptimizeResult:
    """Descend (or ascend, for the dimension-3 total) to the extremal value.

    Returns the best coefficients, the objective value in its natural
    orientation, and the iterate trace.  Non-convergence within the budget is
    reported through ``converged``, not raised.
    """
    params = dict(params or {})
    opts = opts or OptimizerOptions()
    grid, basis = _basis_fields(model, degree, opts.nodes)
    sense, target, project, value = _make_objective(
        objective, model, params, grid, basis, opts.positivity_floor)
    sign = -1.0 if sense == "max" else 1.0

    rng = np.random.default_rng(opts.seed)
    coeffs = opts.init_amplitude * rng.standard_normal(basis.shape[1])
    coeffs, _ = project(coeffs)

    def f(c):
        with np.errstate(over="ignore", invalid="ignore"):
            val = sign * value(c)
        return val if np.isfinite(val) else np.inf

    current = f(coeffs)
    trace = [sign * current]
    step = opts.step0
    stall = 0
    tiny = 0
    converged = False
    it = 0
    for it in range(1, opts.max_iter + 1):
        grad = np.empty_like(coeffs)
        for k in range(coeffs.size):
            e = np.zeros_like(coeffs)
            e[k] = opts.grad_eps
            grad[k] = (f(coeffs + e) - f(coeffs - e)) / (2.0 * opts.grad_eps)
        gnorm = float(np.linalg.norm(grad))
        if gnorm == 0.0:
            converged = True
            break
        improved = False
        trial_step = step
        previous = current
        for _ in range(30):
            cand = coeffs - trial_step * grad
            val = f(cand)
            if val < current - 1e-4 * trial_step * gnorm * gnorm:
                coeffs, _ = project(cand)
                current = f(coeffs)
                step = min(trial_step * 1.5, 1e3)
                improved = True
                break
            trial_step *= 0.5
        trace.append(sign * current)
        if not improved:
            stall += 1
            step = max(trial_step, 1e-12)
        else:
            stall = 0
        tiny = tiny + 1 if abs(previous - current) <= opts.tol * max(1.0, abs(current)) else 0
        if stall >= 3 or tiny >= 5:
            converged = True
            break
        if (len(trace) > opts.patience
                and abs(trace[-1] - trace[-opts.patience])
                <= opts.tol * max(1.0, abs(trace[-1]))):
            converged = True
            break
    coeffs, _ = project(coeffs)
    final = sign * current
    return OptimizeResult(
        objective=objective, sense=sense, coefficients=coeffs,
        value=final, trace=trace, iterations=it, converged=converged,
        metadata={"model": model.describe(), "target": target,
                  "params": params, "degree": degree, "seed": opts.seed})
