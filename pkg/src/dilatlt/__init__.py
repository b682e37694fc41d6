"""Complex-scaling eigenvalues and Lieb-Thirring-type moment bounds for
non-selfadjoint Schrodinger operators on the line."""

__version__ = "0.1.0"

from .constants import (LtConstantChoice, MomentOrder, classical_constant, cone_prefactor,
                        flls_constant, gamma_fn, lt_constant)
from .discretize import Grid1D, ScaledOperatorMatrix, build_scaled_hamiltonian, build_tilde_hamiltonian
from .eigensolver import EigenPair, certify, eig_dense
from .potentials import (PotentialSpec, assumption_check, evaluate_dilated, gaussian, rational_decay,
                         sech_squared, strip_halfwidth, zero)
from .quadrature import QuadratureResult, integrate_real_line, rhs_integral
from .spectral_analysis import (ClassifiedSpectrum, MultiplicityRecord, Tolerances, classify,
                                discrete_spectrum, eigenvalues, essential_ray, region_mapping_check,
                                riesz_multiplicities, riesz_multiplicity)
from .ltverify import (LTReport, analyze, moment_sum, verify_corollary_total, verify_count,
                       verify_flls_cone, verify_main, verify_real_lt)
