"""First- and third-order field correlations after two simultaneous clicks.

Two independent routes to G3 are provided: the closed-form six-term
expression (valid when only atoms 0 and 1 interact) and numerical
propagation of the conditioned density matrix.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .coupling import PairCoupling, find_pair
from .dynamics import (
    DensityOperator,
    HilbertSpace,
    build_liouvillian,
    coherence_matrices,
    evolve_many,
)
from .geometry import AtomEnsemble, DetectorRay, dipole_factors, geometric_phases, make_detector

# |c_Ge| below this leaves the relative phases undefined
PHASE_TOL = 1e-14


@dataclass(frozen=True)
class DetectionCoefficients:
    """Amplitudes of ``|G,e>``, ``|S,g>`` and ``|A,g>`` after the first two clicks.

    ``detector_weight`` is the product of the squared dipole factors of the two
    conditioning detectors; it is not part of the ``c_*`` amplitudes.
    """

    c_Ge: complex
    c_Sg: complex
    c_Ag: complex
    detector_weight: float = 1.0

    @property
    def phases_defined(self) -> bool:
        return abs(self.c_Ge) > PHASE_TOL

    @property
    def phi_Sg(self) -> float | None:
        return float(np.angle(self.c_Sg / self.c_Ge)) if self.phases_defined else None

    @property
    def phi_Ag(self) -> float | None:
        return float(np.angle(self.c_Ag / self.c_Ge)) if self.phases_defined else None

    def _relative_args(self) -> tuple[float, float]:
        # with c_Ge = 0 only arg_ag - arg_sg enters, so any common reference works
        ref = np.angle(self.c_Ge) if self.phases_defined else 0.0
        return float(np.angle(self.c_Sg) - ref), float(np.angle(self.c_Ag) - ref)


@dataclass(frozen=True)
class CorrelationTrace:
    direction: float
    times: np.ndarray
    values: np.ndarray
    normalization: str = "raw"      # "raw" or "initial"
    normalizable: bool = True

    def __post_init__(self):
        t = np.array(self.times, dtype=np.float64)
        v = np.array(self.values, dtype=np.float64)
        if t.shape != v.shape or t.ndim != 1:
            raise ValueError("times and values must be 1-D arrays of equal length")
        if len(t) > 1 and np.any(np.diff(t) <= 0):
            raise ValueError("times must be strictly ascending")
        if self.normalization not in ("raw", "initial"):
            raise ValueError(f"unknown normalization {self.normalization!r}")
        t.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)


def _require_three(ensemble: AtomEnsemble):
    if ensemble.n_atoms != 3:
        raise ValueError(f"third-order correlations need exactly 3 atoms, got {ensemble.n_atoms}")


def detection_coefficients(ensemble: AtomEnsemble, phi1: float, phi2: float) -> DetectionCoefficients:
    _require_three(ensemble)
    ens = ensemble.with_first_at_origin()
    d1 = make_detector(ens, phi1).phases
    d2 = make_detector(ens, phi2).phases
    e = np.exp
    c_ge = e(1j * d1[1]) + e(1j * d2[1])
    pair = e(1j * (d1[2] + d2[1])) + e(1j * (d1[1] + d2[2]))
    remote = e(1j * d1[2]) + e(1j * d2[2])
    c_sg = (pair + remote) / np.sqrt(2.0)
    c_ag = (pair - remote) / np.sqrt(2.0)
    weight = float((dipole_factors(ens, [phi1, phi2]) ** 2).prod())
    return DetectionCoefficients(complex(c_ge), complex(c_sg), complex(c_ag), weight)


def _relative_detector_phases(ensemble, angles):
    ph = geometric_phases(ensemble, angles)
    return ph[:, 1] - ph[:, 0], ph[:, 2] - ph[:, 0]


def _closed_form(coeffs: DetectionCoefficients, coupling: PairCoupling, gamma: float,
                 d23, d33, sin2a, times) -> np.ndarray:
    arg_sg, arg_ag = coeffs._relative_args()
    return kernels.closed_form_g3(abs(coeffs.c_Ge), abs(coeffs.c_Sg), abs(coeffs.c_Ag),
                                  arg_sg, arg_ag, coeffs.detector_weight,
                                  d23, d33, sin2a, times,
                                  gamma, coupling.delta_gamma, coupling.delta_omega)


def g3_analytical(coeffs: DetectionCoefficients, coupling: PairCoupling,
                  detector3: DetectorRay, t3, gamma: float = 1.0):
    """Closed-form G3 in one direction; ``t3`` may be a scalar or an array.

    Only the (0, 1) pair may interact. Phases are taken relative to atom 0,
    which is equivalent to placing it at the origin.
    """
    t = np.asarray(t3, dtype=np.float64)
    if np.any(t < 0):
        raise ValueError("t3 must be non-negative")
    ph = detector3.phases
    out = _closed_form(coeffs, coupling, gamma,
                       [ph[1] - ph[0]], [ph[2] - ph[0]], [detector3.dipole_factor ** 2],
                       np.atleast_1d(t))[0]
    return float(out[0]) if t.ndim == 0 else out


def g3_analytical_map(ensemble: AtomEnsemble, coupling: PairCoupling, phi1: float, phi2: float,
                      angles, times) -> np.ndarray:
    """Closed-form G3 on an ``(angles, times)`` grid."""
    coeffs = detection_coefficients(ensemble, phi1, phi2)
    d23, d33 = _relative_detector_phases(ensemble, angles)
    sin2a = dipole_factors(ensemble, angles) ** 2
    if np.any(np.asarray(times) < 0):
        raise ValueError("t3 must be non-negative")
    return _closed_form(coeffs, coupling, ensemble.gamma, d23, d33, sin2a, times)


def field_operator(space: HilbertSpace, detector: DetectorRay) -> np.ndarray:
    """Positive-frequency far-field operator with unit prefactor."""
    return detector.dipole_factor * sum(
        np.exp(1j * detector.phases[mu]) * sm for mu, sm in enumerate(space.lowerings))


def conditional_state(rho0: DensityOperator, detectors) -> DensityOperator:
    """Unnormalized state after clicks at each detector in turn (all at t = 0)."""
    n = int(round(np.log2(rho0.dimension)))
    space = HilbertSpace(n)
    rho = rho0.matrix
    for det in detectors:
        if len(det.phases) != n:
            raise ValueError("detector phases do not match the number of atoms")
        e = field_operator(space, det)
        rho = e @ rho @ e.conj().T
    return DensityOperator(rho)


def _initial_state(ensemble: AtomEnsemble) -> DensityOperator:
    return DensityOperator.from_ket(HilbertSpace(ensemble.n_atoms).fully_excited())


def conditioned_coherences(ensemble: AtomEnsemble, couplings, phi1: float, phi2: float,
                           times) -> np.ndarray:
    """``<S_+^mu S_-^nu>(t)`` of the twice-conditioned state, shape ``(nt, 3, 3)``."""
    _require_three(ensemble)
    rho_c = conditional_state(_initial_state(ensemble),
                              [make_detector(ensemble, phi1), make_detector(ensemble, phi2)])
    L = build_liouvillian(ensemble, couplings)
    return coherence_matrices(L.space, evolve_many(L, rho_c, times))


def free_coherences(ensemble: AtomEnsemble, couplings, times) -> np.ndarray:
    """``<S_+^mu S_-^nu>(t)`` starting from the fully excited state."""
    L = build_liouvillian(ensemble, couplings)
    return coherence_matrices(L.space, evolve_many(L, _initial_state(ensemble), times))


def intensity_map(ensemble: AtomEnsemble, coherences: np.ndarray, angles) -> np.ndarray:
    """``<E^- E^+>`` for each angle and each coherence snapshot, shape ``(na, nt)``."""
    return kernels.field_quadratic_form(coherences, geometric_phases(ensemble, angles),
                                        dipole_factors(ensemble, angles))


def g3_numerical(ensemble: AtomEnsemble, couplings, phi1: float, phi2: float,
                 detector3: DetectorRay | float, t3):
    """G3 by propagating the conditioned state under the full master equation."""
    t = np.asarray(t3, dtype=np.float64)
    if np.any(t < 0):
        raise ValueError("t3 must be non-negative")
    angle = detector3.angle if isinstance(detector3, DetectorRay) else float(detector3)
    coh = conditioned_coherences(ensemble, couplings, phi1, phi2, np.atleast_1d(t))
    out = intensity_map(ensemble, coh, [angle])[0]
    return float(out[0]) if t.ndim == 0 else out


def g3_numerical_map(ensemble: AtomEnsemble, couplings, phi1: float, phi2: float,
                     angles, times) -> np.ndarray:
    coh = conditioned_coherences(ensemble, couplings, phi1, phi2, times)
    return intensity_map(ensemble, coh, angles)


def g1(ensemble: AtomEnsemble, couplings, detector: DetectorRay | float, t):
    """Mean intensity in one direction from the fully excited state."""
    tt = np.asarray(t, dtype=np.float64)
    if np.any(tt < 0):
        raise ValueError("t must be non-negative")
    angle = detector.angle if isinstance(detector, DetectorRay) else float(detector)
    out = intensity_map(ensemble, free_coherences(ensemble, couplings, np.atleast_1d(tt)), [angle])[0]
    return float(out[0]) if tt.ndim == 0 else out


def g1_map(ensemble: AtomEnsemble, couplings, angles, times) -> np.ndarray:
    return intensity_map(ensemble, free_coherences(ensemble, couplings, times), angles)


def reference_coupling(couplings) -> PairCoupling:
    """The (0, 1) pair, which sets the symmetric and antisymmetric rates."""
    return find_pair(couplings, 0, 1)
