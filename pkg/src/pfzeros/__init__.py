"""Invariant densities of polynomial maps from the real zeros of H_n(y) = ∂ⁿe^{y f(a)}/∂aⁿ at a = 0."""
from .bell import (BiPoly, PhiExpansion, RealPoly, bell_at_origin, bell_hn, bell_sequence, bell_step,
                   hermite_closed_form, phi_basis_expand, resolving_deviation)
from .descent import (PRF, CriticalPoint, KappaCode, KappaSample, ResonanceInfo, critical_points, domination,
                      hessian_classify, kappa_solve, partly_linear_code, quadratic_diagonalize,
                      resonance_check, zero_density_1d)
from .maps import (convergence_classify, differential_iteration, henon_branches, linearize, lorenz_asymptotic_map,
                   lorenz_geometry, lorenz_ovals,
                   make_henon, make_hermite, make_hermite_r, make_julia, make_logistic, ode_fixed_points)
from .oracle import cycle_integral_check, detect_cycle, hermite_zeros, mc_invariant, symbolic_hn, ulam_invariant
from .polymap import MapSpec, PolyMap, map1d
from .spectra import (DensityCurve, EmpiricalDensity, ZeroSet, common_zeros, density_distance,
                      empirical_density, invariant_from_q, normalize_zeros, real_zeros)

__version__ = "0.1.0"
