"""Coherent and dissipative dipole-dipole couplings between atom pairs."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import AtomEnsemble


@dataclass(frozen=True)
class PairCoupling:
    """Level shift ``delta_omega`` and cross damping ``delta_gamma`` of one pair.

    Both are in the same units as the ``gamma`` they were computed with.
    """

    delta_omega: float
    delta_gamma: float
    pair: tuple[int, int] = (0, 1)
    psi: float = float("nan")
    k0_r: float = float("nan")

    @property
    def is_zero(self) -> bool:
        return self.delta_omega == 0.0 and self.delta_gamma == 0.0

    def zeroed(self) -> "PairCoupling":
        return PairCoupling(0.0, 0.0, self.pair, self.psi, self.k0_r)


def dipole_coupling(k0_r: float, psi: float, gamma: float = 1.0,
                    pair: tuple[int, int] = (0, 1)) -> PairCoupling:
    """Evaluate

        dOmega - i dGamma = 3/2 gamma e^{-ix} [ sin^2(psi)/x - (1 - 3cos^2 psi)(i/x^2 + 1/x^3) ]

    at ``x = k0_r`` and split it into real and negated imaginary parts.
    """
    if not k0_r > 0:
        raise ValueError(f"k0_r must be positive (singular at zero separation), got {k0_r!r}")
    x = float(k0_r)
    c2 = np.cos(psi) ** 2
    z = 1.5 * gamma * np.exp(-1j * x) * ((1.0 - c2) / x - (1.0 - 3.0 * c2) * (1j / x**2 + 1.0 / x**3))
    return PairCoupling(float(z.real), float(-z.imag), tuple(pair), float(psi), x)


def pair_angle(ensemble: AtomEnsemble, mu: int, nu: int) -> float:
    """Angle between the dipole axis and the separation vector of ``(mu, nu)``."""
    r = ensemble.separation(mu, nu)
    c = np.dot(ensemble.dipole_axis, r) / np.hypot(*r)
    return float(np.arccos(np.clip(c, -1.0, 1.0)))


def pair_couplings(ensemble: AtomEnsemble, paper_mode: bool = True) -> list[PairCoupling]:
    """Couplings for every unordered pair ``mu < nu``.

    With ``paper_mode`` any pair that involves the third atom is zeroed, so
    only atoms 0 and 1 interact.
    """
    out = []
    n = ensemble.n_atoms
    for mu in range(n):
        for nu in range(mu + 1, n):
            r = np.hypot(*ensemble.separation(mu, nu))
            c = dipole_coupling(ensemble.k0 * r, pair_angle(ensemble, mu, nu), ensemble.gamma, (mu, nu))
            if paper_mode and 2 in (mu, nu):
                c = c.zeroed()
            out.append(c)
    return out


def zero_couplings(ensemble: AtomEnsemble) -> list[PairCoupling]:
    n = ensemble.n_atoms
    return [PairCoupling(0.0, 0.0, (mu, nu)) for mu in range(n) for nu in range(mu + 1, n)]


def find_pair(couplings, mu: int = 0, nu: int = 1) -> PairCoupling:
    key = (min(mu, nu), max(mu, nu))
    for c in couplings:
        if (min(c.pair), max(c.pair)) == key:
            return c
    return PairCoupling(0.0, 0.0, key)
