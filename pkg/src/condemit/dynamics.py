"""Hilbert space, Lindblad generator and propagation for 1 to 3 atoms.

Conventions
-----------
* Per-atom basis is ``(|e>, |g>)``; atom 0 is the slowest tensor index.
* Dynamics are in the frame rotating at the transition frequency.
* Density matrices are vectorized by column stacking,
  ``vec(A rho B) = (B^T kron A) vec(rho)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, reduce

import numpy as np
from scipy.linalg import expm

from .coupling import PairCoupling
from .geometry import AtomEnsemble

_LOWER = np.array([[0.0, 0.0], [1.0, 0.0]], dtype=np.complex128)  # |g><e|
_EXCITED = np.array([1.0, 0.0], dtype=np.complex128)
_GROUND = np.array([0.0, 1.0], dtype=np.complex128)


class HilbertSpace:
    """Tensor-product space of ``n_atoms`` two-level atoms."""

    def __init__(self, n_atoms: int):
        if not 1 <= n_atoms <= 3:
            raise ValueError(f"n_atoms must be 1, 2 or 3, got {n_atoms}")
        self.n_atoms = n_atoms
        self.dimension = 2 ** n_atoms

    def __repr__(self):
        return f"HilbertSpace(n_atoms={self.n_atoms})"

    def _embed(self, op: np.ndarray, mu: int) -> np.ndarray:
        if not 0 <= mu < self.n_atoms:
            raise IndexError(f"atom index {mu} out of range for {self.n_atoms} atoms")
        eye = np.eye(2, dtype=np.complex128)
        return reduce(np.kron, [op if k == mu else eye for k in range(self.n_atoms)])

    def lowering(self, mu: int) -> np.ndarray:
        return self._embed(_LOWER, mu)

    def raising(self, mu: int) -> np.ndarray:
        return self._embed(_LOWER.T.copy(), mu)

    def sz(self, mu: int) -> np.ndarray:
        sp, sm = self.raising(mu), self.lowering(mu)
        return 0.5 * (sp @ sm - sm @ sp)

    @cached_property
    def lowerings(self) -> tuple[np.ndarray, ...]:
        return tuple(self.lowering(mu) for mu in range(self.n_atoms))

    def product_state(self, excited) -> np.ndarray:
        """Ket with atom ``mu`` excited where ``excited[mu]`` is truthy."""
        if len(excited) != self.n_atoms:
            raise ValueError("one flag per atom required")
        return reduce(np.kron, [_EXCITED if e else _GROUND for e in excited])

    def fully_excited(self) -> np.ndarray:
        return self.product_state([1] * self.n_atoms)

    def ground(self) -> np.ndarray:
        return self.product_state([0] * self.n_atoms)

    def dicke(self, label: str, rest=()) -> np.ndarray:
        """Dicke state of atoms 0 and 1 (``E``, ``G``, ``S`` or ``A``) times bare states.

        ``rest`` holds excitation flags for atoms 2 and up.
        """
        if self.n_atoms < 2:
            raise ValueError("Dicke states need at least two atoms")
        e, g = _EXCITED, _GROUND
        pair = {
            "E": np.kron(e, e),
            "G": np.kron(g, g),
            "S": (np.kron(e, g) + np.kron(g, e)) / np.sqrt(2.0),
            "A": (np.kron(e, g) - np.kron(g, e)) / np.sqrt(2.0),
        }[label]
        if len(rest) != self.n_atoms - 2:
            raise ValueError("one flag per remaining atom required")
        return reduce(np.kron, [pair] + [e if r else g for r in rest])


@dataclass(frozen=True)
class DensityOperator:
    """Possibly unnormalized density matrix; ``trace_at_birth`` records Tr at creation."""

    matrix: np.ndarray
    trace_at_birth: float = float("nan")

    def __post_init__(self):
        m = np.array(self.matrix, dtype=np.complex128)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"density matrix must be square, got shape {m.shape}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        if np.isnan(self.trace_at_birth):
            object.__setattr__(self, "trace_at_birth", float(np.trace(m).real))

    @classmethod
    def from_ket(cls, ket) -> "DensityOperator":
        k = np.asarray(ket, dtype=np.complex128)
        return cls(np.outer(k, k.conj()))

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def hermiticity_error(self) -> float:
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T)))

    def min_eigenvalue(self) -> float:
        h = 0.5 * (self.matrix + self.matrix.conj().T)
        return float(np.linalg.eigvalsh(h)[0])


def vectorize(rho: np.ndarray) -> np.ndarray:
    return np.asarray(rho).reshape(-1, order="F")


def unvectorize(vec: np.ndarray, dim: int) -> np.ndarray:
    return np.asarray(vec).reshape(dim, dim, order="F")


def _left(a):
    return np.kron(np.eye(a.shape[0]), a)


def _right(b):
    return np.kron(b.T, np.eye(b.shape[0]))


def _sandwich(a, b):
    return np.kron(b.T, a)


@dataclass(frozen=True)
class Liouvillian:
    superoperator: np.ndarray
    space: HilbertSpace
    couplings: tuple[PairCoupling, ...]
    gamma: float

    @property
    def dimension(self) -> int:
        return self.space.dimension

    def apply(self, rho: np.ndarray) -> np.ndarray:
        return unvectorize(self.superoperator @ vectorize(rho), self.dimension)

    def propagator(self, t: float) -> np.ndarray:
        if t < 0:
            raise ValueError(f"t must be non-negative, got {t!r}")
        return expm(self.superoperator * t)


def build_liouvillian(ensemble: AtomEnsemble, couplings=(), omega0: float = 0.0) -> Liouvillian:
    """Dense superoperator of the collective-decay master equation.

    ``couplings`` lists one :class:`PairCoupling` per unordered pair; each is
    applied to both ordered pairs ``(mu, nu)`` and ``(nu, mu)``. A non-zero
    ``omega0`` restores the free ``-i omega0 sum [S_z, rho]`` term, which is
    dropped in the rotating frame.
    """
    space = HilbertSpace(ensemble.n_atoms)
    n, gamma = ensemble.n_atoms, ensemble.gamma
    sm = space.lowerings
    sp = [s.conj().T for s in sm]
    dim = space.dimension
    L = np.zeros((dim * dim, dim * dim), dtype=np.complex128)

    for mu in range(n):
        nn = sp[mu] @ sm[mu]
        L -= gamma * (_left(nn) - 2.0 * _sandwich(sm[mu], sp[mu]) + _right(nn))
        if omega0:
            sz = space.sz(mu)
            L -= 1j * omega0 * (_left(sz) - _right(sz))

    for c in couplings:
        mu, nu = c.pair
        if not (0 <= mu < n and 0 <= nu < n) or mu == nu:
            raise IndexError(f"coupling pair {c.pair} invalid for {n} atoms")
        for a, b in ((mu, nu), (nu, mu)):
            hop = sp[a] @ sm[b]
            if c.delta_omega:
                L += 1j * c.delta_omega * (_left(hop) - _right(hop))
            if c.delta_gamma:
                L -= c.delta_gamma * (_left(hop) - 2.0 * _sandwich(sm[b], sp[a]) + _right(hop))

    L.setflags(write=False)
    return Liouvillian(L, space, tuple(couplings), gamma)


def evolve(L: Liouvillian, rho: DensityOperator, t: float) -> DensityOperator:
    """``exp(L t)`` applied to ``rho`` (scaling-and-squaring matrix exponential)."""
    if not t >= 0:
        raise ValueError(f"t must be non-negative, got {t!r}")
    if rho.dimension != L.dimension:
        raise ValueError(f"state dimension {rho.dimension} does not match generator {L.dimension}")
    if t == 0:
        return DensityOperator(rho.matrix, rho.trace_at_birth)
    out = unvectorize(L.propagator(t) @ vectorize(rho.matrix), L.dimension)
    return DensityOperator(out, rho.trace_at_birth)


def evolve_many(L: Liouvillian, rho: DensityOperator, times) -> np.ndarray:
    """Stack of evolved matrices, shape ``(len(times), dim, dim)``.

    Each time gets its own exponential, so values do not depend on the grid.
    """
    times = np.asarray(times, dtype=np.float64)
    if np.any(times < 0):
        raise ValueError("times must be non-negative")
    v0 = vectorize(rho.matrix)
    out = np.empty((len(times), L.dimension, L.dimension), dtype=np.complex128)
    for k, t in enumerate(times):
        out[k] = unvectorize(v0 if t == 0 else L.propagator(t) @ v0, L.dimension)
    return out


def expectation(rho: DensityOperator, observable: np.ndarray) -> complex:
    obs = np.asarray(observable)
    if obs.shape != rho.matrix.shape:
        raise ValueError(f"observable shape {obs.shape} does not match state {rho.matrix.shape}")
    # Tr[O rho] without forming the product
    return complex(np.sum(obs * rho.matrix.T))


def coherence_matrices(space: HilbertSpace, rhos: np.ndarray) -> np.ndarray:
    """``C[k, mu, nu] = Tr[S_+^mu S_-^nu rho_k]`` for a stack of states."""
    sm = space.lowerings
    n = space.n_atoms
    out = np.empty((len(rhos), n, n), dtype=np.complex128)
    for mu in range(n):
        for nu in range(n):
            op = sm[mu].conj().T @ sm[nu]
            out[:, mu, nu] = np.einsum("ij,kji->k", op, rhos)
    return out
