"""qcurvlab: a verification lab for fourth-order conformally variational
curvature invariants on Einstein model geometries.

Layers:
  charts/tensor  -- finite-difference Riemannian tensor calculus on charts
  models         -- closed-form Einstein model geometries and constants
  spectral       -- zonal spectral calculus on spheres, Fourier on tori
  functionals    -- energy identities, sharp-constant checks, dim-4 functionals
  identities     -- divergence identities and exact coefficient algebra
  constants      -- exact interval and functional-triple arithmetic
  optimize       -- conformal-factor descent witnesses
  suites/cli     -- orchestration and report emission
"""

from .charts import (ChartMetric, flat_chart, product_s2_chart,
                     random_perturbed_chart, stereographic_sphere_chart)
from .constants import (GammaTriple, a_interval, c_poly, gamma_map,
                        restricted_interval)
from .errors import DomainError, MetricError, ResolutionError
from .functionals import (conformal_laplacian_apply, conformal_scalar,
                          dj_functional, energy_decomposition, energy_rhs,
                          f_gamma, functionals_dim4, iii_identity_residual,
                          paneitz_apply, paneitz_lower_bound,
                          q_transform_residual, sigma2_operator, sobolev_check,
                          total_iab_chart_quadrature)
from .identities import (EinsteinScale, ZonalTensor, check_divergence_identities,
                         check_obata, check_pre_ibp, einstein_scale_affine,
                         verify_combination_coefficients)
from .models import (EinsteinModel, einstein_pointwise, flat_torus,
                     parse_model_spec, product_s2_s2, round_sphere,
                     stereographic_chart, yamabe_constant_iab)
from .optimize import OptimizerOptions, minimize_functional
from .reports import FunctionalReport, VerificationReport
from .spectral import (TorusField, ZonalField, moebius_factor,
                       moebius_log_factor, zonal_calculus)
from .tensor import (CurvatureBundle, MetricJet, build_jet, curvature,
                     divergence_sym2, hessian_laplacian)

__version__ = "0.1.0"
