"""Truncated Fock space: ladder operators, density matrices and standard states."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np
from scipy.special import gammainc, gammaln

from .eigen import hermitian_eigenvalues
from .errors import ContractViolation, DimensionError, OutOfRangeError

TAIL_WARN = 1e-6


@dataclass(frozen=True)
class Truncation:
    """Fock cutoff: levels 0..dim-1."""

    dim: int

    def __post_init__(self):
        if not isinstance(self.dim, (int, np.integer)) or isinstance(self.dim, bool):
            raise ContractViolation(f"dim must be an integer, got {self.dim!r}")
        if self.dim < 2:
            raise ContractViolation(f"dim must be >= 2, got {self.dim}")


def annihilation_matrix(trunc: Truncation) -> np.ndarray:
    """Matrix of a with a|n> = sqrt(n)|n-1>."""
    return np.diag(np.sqrt(np.arange(1, trunc.dim, dtype=float)), k=1).astype(complex)


def creation_matrix(trunc: Truncation) -> np.ndarray:
    # |N-1> -> |N> is dropped
    return annihilation_matrix(trunc).conj().T


def number_operator(trunc: Truncation) -> np.ndarray:
    return np.diag(np.arange(trunc.dim, dtype=float)).astype(complex)


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, unit-trace N x N state.

    Hermiticity and trace are checked on construction to within ``tol``.
    Positivity needs an eigensolve and is checked by :meth:`validate`.
    """

    trunc: Truncation
    elements: np.ndarray
    tail_mass: float = 0.0
    tol: float = field(default=1e-12, repr=False)

    def __post_init__(self):
        rho = np.array(self.elements, dtype=complex)
        n = self.trunc.dim
        if rho.shape != (n, n):
            raise DimensionError(f"expected {n}x{n} matrix, got {rho.shape}")
        herm = np.max(np.abs(rho - rho.conj().T))
        if herm > self.tol:
            raise ContractViolation(f"density matrix not Hermitian (defect {herm:.3e})")
        tr = np.trace(rho)
        if abs(tr - 1.0) > self.tol:
            raise ContractViolation(f"density matrix trace {tr} differs from 1")
        rho.setflags(write=False)
        object.__setattr__(self, "elements", rho)

    @property
    def dim(self) -> int:
        return self.trunc.dim

    @property
    def truncation_warning(self) -> bool:
        return self.tail_mass > TAIL_WARN

    def min_eigenvalue(self) -> float:
        return float(hermitian_eigenvalues(self.elements)[0])

    def validate(self, psd_tol=1e-10):
        """Raise ContractViolation unless every eigenvalue is >= -psd_tol."""
        lo = self.min_eigenvalue()
        if lo < -psd_tol:
            raise ContractViolation(f"density matrix not positive (min eigenvalue {lo:.3e})")
        return self

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.elements, dtype=dtype)


# State specifications


@dataclass(frozen=True)
class Fock:
    n: int


@dataclass(frozen=True)
class Coherent:
    alpha: complex


@dataclass(frozen=True)
class Thermal:
    nbar: float


@dataclass(frozen=True)
class Cat:
    """Superposition |alpha> + exp(i*phase)|-alpha>."""

    alpha: complex
    phase: float = 0.0


StateSpec = Union[Fock, Coherent, Thermal, Cat]
PURE_STATES = (Fock, Coherent, Cat)


def coherent_amplitudes(alpha: complex, dim: int) -> np.ndarray:
    """Truncated coherent-state amplitudes exp(-|a|^2/2) a^n / sqrt(n!), not renormalized."""
    alpha = complex(alpha)
    out = np.zeros(dim, dtype=complex)
    if alpha == 0:
        out[0] = 1.0
        return out
    n = np.arange(dim)
    r = abs(alpha)
    logmag = -0.5 * r * r + n * math.log(r) - 0.5 * gammaln(n + 1)
    return np.exp(logmag) * np.exp(1j * n * np.angle(alpha))


def state_vector(spec: StateSpec, trunc: Truncation):
    """Normalized truncated ket for a pure spec, plus the truncated tail mass."""
    n = trunc.dim
    if isinstance(spec, Fock):
        if not 0 <= spec.n < n:
            raise OutOfRangeError(f"Fock level {spec.n} outside 0..{n - 1}")
        psi = np.zeros(n, dtype=complex)
        psi[spec.n] = 1.0
        return psi, 0.0
    if isinstance(spec, Coherent):
        psi = coherent_amplitudes(spec.alpha, n)
        # P(X >= N) for X ~ Poisson(|alpha|^2)
        r2 = abs(complex(spec.alpha)) ** 2
        tail = float(gammainc(n, r2)) if r2 > 0 else 0.0
        return psi / np.linalg.norm(psi), tail
    if isinstance(spec, Cat):
        alpha = complex(spec.alpha)
        psi = coherent_amplitudes(alpha, n) + np.exp(1j * spec.phase) * coherent_amplitudes(-alpha, n)
        full = 2.0 + 2.0 * math.cos(spec.phase) * math.exp(-2.0 * abs(alpha) ** 2)
        kept = float(np.vdot(psi, psi).real)
        if full < 1e-300 or kept < 1e-300:
            raise ContractViolation(f"cat state {spec} has zero norm")
        tail = max(0.0, 1.0 - kept / full)
        return psi / math.sqrt(kept), tail
    raise TypeError(f"no state vector for {spec!r}")


def make_state(spec: StateSpec, trunc: Truncation) -> DensityMatrix:
    """Density matrix of ``spec`` renormalized inside the truncation."""
    if isinstance(spec, Thermal):
        if spec.nbar < 0:
            raise ContractViolation(f"thermal occupation must be >= 0, got {spec.nbar}")
        ratio = spec.nbar / (1.0 + spec.nbar)
        p = ratio ** np.arange(trunc.dim)
        tail = ratio ** trunc.dim
        rho = np.diag(p / p.sum()).astype(complex)
    else:
        psi, tail = state_vector(spec, trunc)
        rho = np.outer(psi, psi.conj())
        rho = 0.5 * (rho + rho.conj().T)
        rho /= np.trace(rho).real
    return DensityMatrix(trunc, rho, tail_mass=tail).validate()


def mixture(states, weights) -> DensityMatrix:
    """Convex combination of density matrices sharing a truncation."""
    states = list(states)
    w = np.asarray(weights, dtype=float)
    if len(states) != len(w) or np.any(w < 0) or w.sum() <= 0:
        raise ContractViolation("mixture weights must be non-negative, one per state")
    trunc = states[0].trunc
    if any(s.trunc != trunc for s in states):
        raise DimensionError("mixture of states with different truncations")
    w = w / w.sum()
    rho = sum(wi * s.elements for wi, s in zip(w, states))
    return DensityMatrix(trunc, rho, tail_mass=float(sum(wi * s.tail_mass for wi, s in zip(w, states))))


def max_abs(a) -> float:
    return float(np.max(np.abs(np.asarray(a)))) if np.size(a) else 0.0


def hermiticity_defect(rho) -> float:
    r = np.asarray(rho)
    return max_abs(r - r.conj().T)
