"""matres: resolvent estimates and resonances for matrix Schrodinger operators.

Desk-scale numerical toolkit for semiclassical operators -h^2 Laplacian I_N
+ V(r) with hermitian matrix potentials: Carleman weight certificates,
conjugated and complex-distorted discretizations, weighted resolvent norm
sweeps, resonance computation and resonance-free-region checks.
"""

__version__ = "0.1.0"

from .model import (MatrixPotential, make_potential, potential_from_record,
                    eval_symbol, lambda_fields, check_long_range,
                    sample_energy_surface, escape_certificate)
from .operators import (RadialGrid, DistortionProfile, DiscretizedOperator,
                        discretize_plain, distorted_operator, essential_rays,
                        ray_tube_classifier)
from .carleman import (m_weight, WeightFunction, build_weight, zero_weight,
                       effective_potential, certificate_matrix,
                       carleman_certificate, optimize_weight,
                       conjugated_operator, carleman_inequality_test,
                       functional_L_check)
from .numerics import (BandedLU, banded_factor, extreme_singular,
                       ResolventQuery, weighted_resolvent_norm, Window,
                       Resonance, eigs_in_window, theta_stability, FitReport,
                       fit_scaling)

__all__ = [name for name in dir() if not name.startswith("_")]
