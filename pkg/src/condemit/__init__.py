"""Conditional collective spontaneous emission of three two-level atoms.

Two atoms a fraction of a wavelength apart interact through the dipole-dipole
coupling; a third, remote atom is entangled with them only through the
detection of two photons. This package computes the third-order photon
correlation of the last photon in closed form and by propagating the
conditioned density matrix, and extracts direction-dependent decay rates.
"""

__version__ = "0.1.0"

from ._accel import backend_name
from .analysis import (
    DecayFit,
    RateScan,
    fit_decay_rate,
    normalize_by_initial,
    scan_rates,
)
from .correlations import (
    CorrelationTrace,
    DetectionCoefficients,
    conditional_state,
    detection_coefficients,
    g1,
    g1_map,
    g3_analytical,
    g3_analytical_map,
    g3_numerical,
    g3_numerical_map,
)
from .coupling import PairCoupling, dipole_coupling, pair_couplings, zero_couplings
from .dynamics import (
    DensityOperator,
    HilbertSpace,
    Liouvillian,
    build_liouvillian,
    evolve,
    expectation,
)
from .geometry import AtomEnsemble, DetectorRay, geometric_phase, make_detector
