"""Biquaternion electrodynamics on the proper tube.

Retarded fields of moving point singularities, directed hypersurface
quadrature over the constant-retarded-radius tube and its closing light
cones, Hadamard finite-part regularization, and term-by-term verification
of the mass and interaction pieces of the classical action integral.
"""

from .biquat import (Biquaternion, conj, four_vector, minkowski, mul,
                     realpart, scal, six_vector, vect)
from .kinematics import (DegeneratePoint, NoRetardedPoint, RetardedFrame,
                         Worldline, cone_point, lorentz_boost, retarded_solve,
                         tube_point)
from .lwfield import (ConstantPotential, DistantCharge, ExternalField,
                      PlaneWave, PolynomialSlow, SingularityField,
                      check_regularity)
from .regint import (InvalidInterval, RadialIntegrand, SingularMismatch,
                     hadamard_finite_part, volume_self_energy)
from .hypersurface import (ConePatch, DegenerateTangents, FlatSlabPatch,
                           GaussCheckResult, NonConvergent, QuadratureSpec,
                           SurfaceElement, SurfacePatch, TubePatch,
                           boundary_patches, element_at, gauss_check,
                           surface_integral)
from .action import (ActionReport, ConditionViolated, assemble_report,
                     assign_mass, cone_self_cancellation, external_field_term,
                     interaction_cones, interaction_total, interaction_tube,
                     mass_term, slow_variation_ratios)

__version__ = "0.1.0"
