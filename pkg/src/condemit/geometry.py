"""Atom configurations in the xy-plane and far-field detection directions.

Lengths are in units of the transition wavelength, so ``k0 = 2*pi``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

K0 = 2.0 * np.pi


@dataclass(frozen=True)
class AtomEnsemble:
    """Up to three identical two-level atoms with a common in-plane dipole.

    Parameters
    ----------
    positions : array_like, shape (n, 2)
        Atom positions in wavelengths.
    dipole_axis : array_like, shape (2,)
        Unit vector along the transition dipole.
    gamma : float
        Half the single-atom decay rate (``Gamma = 2 * gamma``).
    """

    positions: np.ndarray
    dipole_axis: np.ndarray = field(default_factory=lambda: np.array([1.0, 0.0]))
    gamma: float = 1.0
    k0: float = K0

    def __post_init__(self):
        pos = np.array(self.positions, dtype=np.float64).reshape(-1, 2)
        axis = np.array(self.dipole_axis, dtype=np.float64).reshape(2)
        if not 1 <= len(pos) <= 3:
            raise ValueError(f"need 1 to 3 atoms, got {len(pos)}")
        if not np.all(np.isfinite(pos)):
            raise ValueError("atom positions must be finite")
        if abs(np.hypot(*axis) - 1.0) > 1e-12:
            raise ValueError(f"dipole_axis must be a unit vector, |d| = {np.hypot(*axis)!r}")
        if not self.gamma > 0:
            raise ValueError(f"gamma must be positive, got {self.gamma!r}")
        pos.setflags(write=False)
        axis.setflags(write=False)
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "dipole_axis", axis)
        object.__setattr__(self, "gamma", float(self.gamma))

    @property
    def n_atoms(self) -> int:
        return len(self.positions)

    @property
    def omega0(self) -> float:
        """Transition frequency ``k0 c`` with ``c = 1``; unused in the rotating frame."""
        return self.k0

    @classmethod
    def paper_geometry(cls, gamma: float = 1.0) -> "AtomEnsemble":
        """Atoms at 0, lambda/3 and 4 lambda on the x-axis, dipoles along x."""
        return cls(positions=[(0.0, 0.0), (1.0 / 3.0, 0.0), (4.0, 0.0)], gamma=gamma)

    @classmethod
    def from_dipole_angle(cls, positions, angle: float, gamma: float = 1.0) -> "AtomEnsemble":
        return cls(positions=positions, dipole_axis=(np.cos(angle), np.sin(angle)), gamma=gamma)

    def translated(self, shift) -> "AtomEnsemble":
        return AtomEnsemble(self.positions + np.asarray(shift, dtype=np.float64),
                            self.dipole_axis, self.gamma, self.k0)

    def with_first_at_origin(self) -> "AtomEnsemble":
        return self.translated(-self.positions[0])

    def separation(self, mu: int, nu: int) -> np.ndarray:
        return self.positions[nu] - self.positions[mu]


@dataclass(frozen=True)
class DetectorRay:
    """A far-field detector along ``(cos angle, sin angle)``.

    ``phases[mu]`` is the optical-path phase of atom ``mu`` relative to the
    origin; ``dipole_factor`` is the signed ``sin`` of the angle between the
    dipole and the detection direction.
    """

    angle: float
    phases: np.ndarray
    dipole_factor: float


def geometric_phase(ensemble: AtomEnsemble, atom_index: int, angle: float) -> float:
    """Propagation phase ``-k0 R_mu . r_hat`` of one atom, not reduced mod 2 pi."""
    if not -ensemble.n_atoms <= atom_index < ensemble.n_atoms:
        raise IndexError(f"atom index {atom_index} out of range for {ensemble.n_atoms} atoms")
    if not np.isfinite(angle):
        raise ValueError("angle must be finite")
    x, y = ensemble.positions[atom_index]
    return float(-ensemble.k0 * (x * np.cos(angle) + y * np.sin(angle)))


def geometric_phases(ensemble: AtomEnsemble, angles) -> np.ndarray:
    """Vectorized phases, shape ``(len(angles), n_atoms)``."""
    a = np.atleast_1d(np.asarray(angles, dtype=np.float64))
    rhat = np.stack([np.cos(a), np.sin(a)], axis=-1)
    return -ensemble.k0 * rhat @ ensemble.positions.T


def dipole_factors(ensemble: AtomEnsemble, angles) -> np.ndarray:
    # 2D cross product d x r_hat = sin(angle between them)
    a = np.atleast_1d(np.asarray(angles, dtype=np.float64))
    dx, dy = ensemble.dipole_axis
    return dx * np.sin(a) - dy * np.cos(a)


def make_detector(ensemble: AtomEnsemble, angle: float) -> DetectorRay:
    if not np.isfinite(angle):
        raise ValueError("angle must be finite")
    phases = np.array([geometric_phase(ensemble, mu, angle) for mu in range(ensemble.n_atoms)])
    phases.setflags(write=False)
    return DetectorRay(float(angle), phases, float(dipole_factors(ensemble, angle)[0]))
