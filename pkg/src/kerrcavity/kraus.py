"""Closed-form operator-sum evolution of a damped cavity with a Kerr medium.

For the master equation

    drho/dt = -i chi [(a^+ a)^2, rho] + gamma (2 a rho a^+ - a^+ a rho - rho a^+ a)

the density matrix at time t is

    rho_mn(t) = sum_l sqrt((m+l)!(n+l)!/(m! n!)) Lambda_mn^l / l!
                * exp(-i chi t (m^2 - n^2) - gamma t (m + n)) * rho0_{m+l, n+l}

with Lambda_mn = gamma (1 - exp(-2 t z)) / z and z = gamma + i chi (m - n).
Inside a truncation the l-sum is finite, so the result is exact for states
supported on levels 0..N-1.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .errors import ContractViolation, DimensionError, OutOfRangeError
from .fock import DensityMatrix, Truncation, annihilation_matrix, max_abs

SERIES_SWITCH = 1e-6
SERIES_RTOL = 1e-16


@dataclass(frozen=True)
class ChannelParams:
    chi: float
    gamma: float
    t: float

    def __post_init__(self):
        for name in ("chi", "gamma", "t"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise ContractViolation(f"{name} must be finite, got {v}")
        if self.gamma < 0:
            raise ContractViolation(f"gamma must be >= 0, got {self.gamma}")
        if self.t < 0:
            raise ContractViolation(f"t must be >= 0, got {self.t}")

    def at(self, t: float) -> "ChannelParams":
        return ChannelParams(self.chi, self.gamma, t)


def _expm1(w: complex) -> complex:
    """exp(w) - 1 without cancellation for small |w|."""
    x, y = w.real, w.imag
    ex = math.exp(x)
    re = math.expm1(x) * math.cos(y) - 2.0 * math.sin(0.5 * y) ** 2
    return complex(re, ex * math.sin(y))


def lambda_direct(z: complex, gamma: float, t: float) -> complex:
    return gamma * -_expm1(-2.0 * t * z) / z


def lambda_series(z: complex, gamma: float, t: float) -> complex:
    """gamma * 2t * sum_k (-2tz)^k / (k+1)!, i.e. the z -> 0 continuation."""
    w = -2.0 * t * z
    total = 0j
    term = 1.0 + 0j
    k = 0
    while True:
        total += term
        k += 1
        term = term * w / (k + 1)
        if abs(term) <= SERIES_RTOL * abs(total) or k > 60:
            break
    return gamma * 2.0 * t * total


def lambda_coefficient(m: int, n: int, params: ChannelParams) -> complex:
    """Dissipation coefficient Lambda_mn, continuous through z = 0."""
    if m < 0 or n < 0:
        raise OutOfRangeError(f"levels must be non-negative, got ({m}, {n})")
    gamma, t = params.gamma, params.t
    if gamma == 0.0 or t == 0.0:
        return 0j
    z = complex(gamma, params.chi * (m - n))
    if abs(z) * t < SERIES_SWITCH:
        return lambda_series(z, gamma, t)
    return lambda_direct(z, gamma, t)


@dataclass(frozen=True, eq=False)
class LambdaTable:
    trunc: Truncation
    values: np.ndarray
    params: ChannelParams


def lambda_table(trunc: Truncation, params: ChannelParams) -> LambdaTable:
    n = trunc.dim
    by_diff = {d: lambda_coefficient(max(d, 0), max(-d, 0), params) for d in range(-n + 1, n)}
    idx = np.arange(n)
    diff = idx[:, None] - idx[None, :]
    values = np.vectorize(by_diff.__getitem__, otypes=[complex])(diff)
    values.setflags(write=False)
    return LambdaTable(trunc, values, params)


def _log_factorial(k):
    return gammaln(np.asarray(k, dtype=float) + 1.0)


def weight_coefficient(m: int, n: int, l: int, params: ChannelParams) -> complex:
    """Scalar multiplying rho0_{m+l, n+l} in rho_mn(t)."""
    if min(m, n, l) < 0:
        raise OutOfRangeError(f"indices must be non-negative, got ({m}, {n}, {l})")
    lam = lambda_coefficient(m, n, params)
    logfac = 0.5 * (_log_factorial(m + l) + _log_factorial(n + l) - _log_factorial(m) - _log_factorial(n))
    logfac -= _log_factorial(l)
    phase = cmath.exp(complex(-params.gamma * params.t * (m + n), -params.chi * params.t * (m * m - n * n)))
    return math.exp(float(logfac)) * lam**l * phase


def _phase_matrix(dim, chi, gamma, t):
    k = np.arange(dim, dtype=float)
    m, n = k[:, None], k[None, :]
    return np.exp(-1j * chi * t * (m * m - n * n) - gamma * t * (m + n))


def evolve_kraus(rho0: DensityMatrix, params: ChannelParams, table: LambdaTable | None = None) -> DensityMatrix:
    """Evolve ``rho0`` for time ``params.t`` with the closed-form operator sum."""
    dim = rho0.dim
    if table is None:
        table = lambda_table(rho0.trunc, params)
    elif table.trunc != rho0.trunc:
        raise DimensionError(f"lambda table built for N={table.trunc.dim}, state has N={dim}")
    elif table.params != params:
        raise ContractViolation("lambda table was built for different channel parameters")

    r0 = rho0.elements
    k = np.arange(dim)
    m, n = k[:, None], k[None, :]
    top = np.maximum(m, n)
    lf = _log_factorial(np.arange(2 * dim))
    base = lf[m] + lf[n]
    out = np.zeros((dim, dim), dtype=complex)
    lam_pow = np.ones((dim, dim), dtype=complex)
    for l in range(dim):
        shifted = np.zeros((dim, dim), dtype=complex)
        shifted[: dim - l, : dim - l] = r0[l:, l:]
        logfac = 0.5 * (lf[m + l] + lf[n + l] - base) - lf[l]
        term = np.exp(logfac) * lam_pow * shifted
        out += np.where(top + l <= dim - 1, term, 0.0)
        lam_pow = lam_pow * table.values
    out *= _phase_matrix(dim, params.chi, params.gamma, params.t)
    return DensityMatrix(rho0.trunc, out)


@dataclass(frozen=True, eq=False)
class GeneralizedKrausTerm:
    """One (M, script-M^+) pair of the operator sum.

    ``left`` is supported on row m and ``right_adjoint`` on column n. The two
    are not Hermitian conjugates in general; ``defect`` measures by how much.
    """

    m: int
    n: int
    l: int
    left: np.ndarray
    right_adjoint: np.ndarray

    @property
    def defect(self) -> float:
        return max_abs(self.left - self.right_adjoint.conj().T)

    def apply(self, rho) -> np.ndarray:
        return self.left @ np.asarray(rho) @ self.right_adjoint


def _ladder_power(trunc: Truncation, l: int) -> np.ndarray:
    return np.linalg.matrix_power(annihilation_matrix(trunc), l)


def _kraus_scalar(m, n, l, params):
    # principal branch of sqrt(Lambda_mn^l / l!); the only place a branch is chosen
    lam = lambda_coefficient(m, n, params)
    root = cmath.sqrt(lam**l * math.exp(-float(_log_factorial(l))))
    return root * cmath.exp(complex(-params.gamma * params.t * m, -params.chi * params.t * m * m))


def build_kraus_term(m: int, n: int, l: int, params: ChannelParams, trunc: Truncation, _al=None) -> GeneralizedKrausTerm:
    dim = trunc.dim
    if not (0 <= m < dim and 0 <= n < dim):
        raise OutOfRangeError(f"levels ({m}, {n}) outside 0..{dim - 1}")
    if not 0 <= l <= dim - 1 - max(m, n):
        raise OutOfRangeError(f"l={l} outside 0..{dim - 1 - max(m, n)} for (m, n) = ({m}, {n})")
    al = _ladder_power(trunc, l) if _al is None else _al
    left = np.zeros((dim, dim), dtype=complex)
    left[m, :] = _kraus_scalar(m, n, l, params) * al[m, :]
    right = np.zeros((dim, dim), dtype=complex)
    right[n, :] = _kraus_scalar(n, m, l, params) * al[n, :]
    return GeneralizedKrausTerm(m, n, l, left, right.conj().T)


def kraus_terms(trunc: Truncation, params: ChannelParams):
    """Every (m, n, l) term that can act inside the truncation."""
    dim = trunc.dim
    powers = [_ladder_power(trunc, l) for l in range(dim)]
    for m in range(dim):
        for n in range(dim):
            for l in range(dim - max(m, n)):
                yield build_kraus_term(m, n, l, params, trunc, _al=powers[l])


def kraus_reconstruct(rho0: DensityMatrix, params: ChannelParams) -> np.ndarray:
    """Sum of M rho0 script-M^+ over all terms (a raw matrix, not re-validated)."""
    out = np.zeros((rho0.dim, rho0.dim), dtype=complex)
    for term in kraus_terms(rho0.trunc, params):
        out += term.apply(rho0.elements)
    return out


def completeness_matrix(trunc: Truncation, params: ChannelParams) -> np.ndarray:
    """sum_{m,n,l} script-M^+ M, using that only m == n terms survive.

    For m == n the scalar pair is (1 - exp(-2 gamma t))^l / l! * exp(-2 gamma t n)
    regardless of chi or the square-root branch.
    """
    dim = trunc.dim
    gt = params.gamma * params.t
    loss = -math.expm1(-2.0 * gt)
    log_loss = math.log(loss) if loss > 0.0 else None
    s = np.zeros((dim, dim), dtype=complex)
    al = np.eye(dim, dtype=complex)
    a = annihilation_matrix(trunc)
    for l in range(dim):
        if l > 0 and log_loss is None:
            break
        for n in range(dim - l):
            log_c = -2.0 * gt * n - float(_log_factorial(l))
            if l > 0:
                log_c += l * log_loss
            row = al[n, :]
            s += math.exp(log_c) * np.outer(row.conj(), row)
        al = al @ a
    return s


def completeness_residual(trunc: Truncation, params: ChannelParams) -> float:
    s = completeness_matrix(trunc, params)
    diag = np.max(np.abs(np.diag(s) - 1.0))
    off = max_abs(s - np.diag(np.diag(s)))
    return float(max(diag, off))


def evolve_amplitude_damping(rho0: DensityMatrix, gamma: float, t: float) -> DensityMatrix:
    """Pure photon loss: sum_l (1-e^{-2gt})^l/l! e^{-gt n} a^l rho a^+l e^{-gt n}."""
    if gamma < 0 or t < 0:
        raise ContractViolation(f"need gamma >= 0 and t >= 0, got gamma={gamma}, t={t}")
    dim = rho0.dim
    a = annihilation_matrix(rho0.trunc)
    damp = np.diag(np.exp(-gamma * t * np.arange(dim))).astype(complex)
    loss = -math.expm1(-2.0 * gamma * t)
    out = np.zeros((dim, dim), dtype=complex)
    moved = rho0.elements.copy()
    coef = 1.0
    for l in range(dim):
        if l > 0:
            moved = a @ moved @ a.conj().T
            coef *= loss / l
            if coef == 0.0:
                break
        out += coef * (damp @ moved @ damp)
    return DensityMatrix(rho0.trunc, out)


def evolve_kerr_unitary(rho0: DensityMatrix, chi: float, t: float) -> DensityMatrix:
    """Lossless Kerr evolution: rho_mn -> exp(-i chi t (m^2 - n^2)) rho_mn."""
    out = rho0.elements * _phase_matrix(rho0.dim, chi, 0.0, t)
    return DensityMatrix(rho0.trunc, out)
