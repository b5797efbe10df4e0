"""Critical-threshold toolkit for the 1D pressureless Euler system with
repulsive Poisson forcing and nonlocal velocity alignment on the torus.

Subpackages: params (scalars, kernels, admissibility), auxlin (closed-form
auxiliary flows), regions (phase-plane region construction and membership),
rearrange (kernel rearrangement bounds), dynamics (characteristic-ODE
integration and fuzzing), solver (periodic spectral solver), cli.
"""

from .params import (
    AdmissibilityReport,
    AdmissibilityViolated,
    AlignmentBand,
    AuxEigen,
    InfluenceModel,
    PhysParams,
    RegimeMismatch,
    admissibility_medium,
    admissibility_weak,
    admissibility_weakly_singular,
    extended_exponential,
)

__version__ = "0.1.0"
