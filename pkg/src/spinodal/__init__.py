"""Numerical toolkit for nodal sets of solutions to Dirac equations.

The package works on Euclidean balls (normal-coordinate charts) and provides
Clifford representations, sampled spinor fields, D-harmonic polynomials, the
Euclidean Green kernel, the Almgren-type frequency function, integral
identities, and nodal-set stratification tools.
"""

__version__ = "0.1.0"

from spinodal.clifford import CliffordRep, build_clifford_rep, clifford_mul
from spinodal.geometry import ModelMetric
from spinodal.fields import GridSpec, SpinorField, synth_field, apply_dirac, sphere_trace
from spinodal.harmonic import HomogeneousSpinorPoly, harmonic_basis, fit_leading_term
from spinodal.green import GreenKernel
from spinodal.frequency import FrequencyProfile, frequency_profile, vanishing_order

__all__ = [
    "__version__",
    "CliffordRep",
    "build_clifford_rep",
    "clifford_mul",
    "ModelMetric",
    "GridSpec",
    "SpinorField",
    "synth_field",
    "apply_dirac",
    "sphere_trace",
    "HomogeneousSpinorPoly",
    "harmonic_basis",
    "fit_leading_term",
    "GreenKernel",
    "FrequencyProfile",
    "frequency_profile",
    "vanishing_order",
]
