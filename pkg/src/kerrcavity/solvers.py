"""Reference solvers for the Kerr-cavity master equation.

Two routes that do not use the closed-form operator sum:

* fixed-step RK4 on the N x N matrix ODE;
* the N^2 x N^2 Liouvillian, exponentiated by scaling and squaring.

Vectorization is row-major: rho_mn sits at flat index m*N + n. Under that
convention left multiplication A rho maps to kron(A, I) and right
multiplication rho B maps to kron(I, B.T), so a rho a^+ maps to kron(a, conj(a)).
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .errors import MemoryGuardError, SolverError, StabilityError
from .fock import DensityMatrix, Truncation, annihilation_matrix, max_abs, number_operator
from .kraus import ChannelParams, evolve_kraus

log = logging.getLogger(__name__)

STABILITY_LIMIT = 0.1
RENORM_THRESHOLD = 1e-12
LIOUVILLE_MAX_DIM = 32
SOLVERS = ("kraus", "rk4", "liouville")


def lindblad_rhs(rho, params: ChannelParams) -> np.ndarray:
    """-i chi [n^2, rho] + gamma (2 a rho a^+ - n rho - rho n)."""
    r = np.asarray(rho, dtype=complex)
    trunc = Truncation(r.shape[0])
    a = annihilation_matrix(trunc)
    n = number_operator(trunc)
    n2 = n @ n
    kerr = -1j * params.chi * (n2 @ r - r @ n2)
    loss = params.gamma * (2.0 * a @ r @ a.conj().T - n @ r - r @ n)
    return kerr + loss


def _fast_rhs(dim, chi, gamma):
    """Same generator as lindblad_rhs, using that n is diagonal and a is a shift."""
    k = np.arange(dim, dtype=float)
    diag = -1j * chi * (k[:, None] ** 2 - k[None, :] ** 2) - gamma * (k[:, None] + k[None, :])
    feed = 2.0 * gamma * np.sqrt(np.outer(k[1:], k[1:]))

    def f(r):
        out = diag * r
        out[:-1, :-1] += feed * r[1:, 1:]
        return out

    return f


@dataclass(frozen=True)
class IntegratorConfig:
    steps: int

    def __post_init__(self):
        if int(self.steps) != self.steps or self.steps < 1:
            raise ValueError(f"steps must be a positive integer, got {self.steps}")

    @classmethod
    def per_unit_time(cls, steps_per_unit: int, t: float) -> "IntegratorConfig":
        return cls(max(1, math.ceil(steps_per_unit * t - 1e-9)))


def stability_rate(dim: int, params: ChannelParams) -> float:
    return 2.0 * params.gamma * dim + abs(params.chi) * dim * dim


@dataclass
class RK4Result:
    rho: DensityMatrix
    trace_drift: float
    hermiticity_drift: float
    renormalized: bool


def rk4_integrate(rho0: DensityMatrix, params: ChannelParams, cfg: IntegratorConfig) -> RK4Result:
    """Classical RK4 with drift diagnostics."""
    dim = rho0.dim
    h = params.t / cfg.steps
    rate = stability_rate(dim, params)
    if h * rate >= STABILITY_LIMIT:
        need = math.floor(params.t * rate / STABILITY_LIMIT) + 1
        raise StabilityError(
            f"RK4 step h={h:.3g} too large (h*(2*gamma*N + |chi|*N^2) = {h * rate:.3g} >= {STABILITY_LIMIT}); "
            f"use at least {need} steps",
            required_steps=need,
        )
    f = _fast_rhs(dim, params.chi, params.gamma)
    r = rho0.elements.copy()
    if h > 0:
        for _ in range(cfg.steps):
            k1 = f(r)
            k2 = f(r + 0.5 * h * k1)
            k3 = f(r + 0.5 * h * k2)
            k4 = f(r + h * k3)
            r = r + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    herm = max_abs(r - r.conj().T)
    r = 0.5 * (r + r.conj().T)
    tr = np.trace(r).real
    drift = abs(tr - 1.0)
    renorm = drift > RENORM_THRESHOLD
    if renorm:
        log.debug("rk4 trace drift %.3e, renormalizing", drift)
        r = r / tr
    return RK4Result(DensityMatrix(rho0.trunc, r), drift, herm, renorm)


def rk4_evolve(rho0: DensityMatrix, params: ChannelParams, cfg: IntegratorConfig) -> DensityMatrix:
    return rk4_integrate(rho0, params, cfg).rho


@dataclass(frozen=True, eq=False)
class Liouvillian:
    trunc: Truncation
    matrix: np.ndarray
    params: ChannelParams

    def apply(self, rho) -> np.ndarray:
        return unvec(self.matrix @ vec(rho), self.trunc.dim)


def vec(rho) -> np.ndarray:
    return np.asarray(rho, dtype=complex).reshape(-1)


def unvec(v, dim: int) -> np.ndarray:
    return np.asarray(v, dtype=complex).reshape(dim, dim)


def left_super(a: np.ndarray) -> np.ndarray:
    return np.kron(a, np.eye(a.shape[0]))


def right_super(b: np.ndarray) -> np.ndarray:
    return np.kron(np.eye(b.shape[0]), b.T)


def build_liouvillian(trunc: Truncation, params: ChannelParams) -> Liouvillian:
    a = annihilation_matrix(trunc)
    n = number_operator(trunc)
    n2 = n @ n
    kerr = -1j * params.chi * (left_super(n2) - right_super(n2))
    loss = params.gamma * (2.0 * left_super(a) @ right_super(a.conj().T) - left_super(n) - right_super(n))
    return Liouvillian(trunc, kerr + loss, params)


def _norm1(m):
    return float(np.max(np.sum(np.abs(m), axis=0))) if m.size else 0.0


def matrix_exponential(m) -> np.ndarray:
    """exp(m) by scaling and squaring around a Taylor series."""
    a = np.array(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    norm = _norm1(a)
    s = 0
    if norm > 0.5:
        s = math.ceil(math.log2(norm / 0.5))
        a = a / 2.0**s
    eye = np.eye(a.shape[0], dtype=complex)
    total = eye.copy()
    term = eye
    for k in range(1, 200):
        term = term @ a / k
        total += term
        if _norm1(term) < 1e-18 * _norm1(total):
            break
    for _ in range(s):
        total = total @ total
    return total


def evolve_liouvillian(rho0: DensityMatrix, params: ChannelParams, max_dim: int = LIOUVILLE_MAX_DIM) -> DensityMatrix:
    dim = rho0.dim
    if dim > max_dim:
        raise MemoryGuardError(
            f"Liouvillian propagator needs {dim}^4 complex entries (N={dim} > {max_dim}); use the rk4 solver instead"
        )
    lv = build_liouvillian(rho0.trunc, params)
    out = matrix_exponential(lv.matrix * params.t) @ vec(rho0.elements)
    return DensityMatrix(rho0.trunc, unvec(out, dim), tol=1e-10)


def run_solver(name: str, rho0: DensityMatrix, params: ChannelParams, cfg: IntegratorConfig | None = None, max_dim: int = LIOUVILLE_MAX_DIM):
    """Dispatch by solver name; returns (state, trace drift of the raw output)."""
    try:
        if name == "kraus":
            out = evolve_kraus(rho0, params)
        elif name == "liouville":
            out = evolve_liouvillian(rho0, params, max_dim=max_dim)
        elif name == "rk4":
            res = rk4_integrate(rho0, params, cfg or IntegratorConfig(1))
            return res.rho, res.trace_drift
        else:
            raise ValueError(f"unknown solver {name!r}")
    except SolverError:
        raise
    except Exception as exc:
        raise SolverError(name, exc) from exc
    return out, abs(np.trace(out.elements) - 1.0)


@dataclass
class CompareReport:
    t: float
    states: dict = field(repr=False)
    deviations: dict
    trace_drift: dict
    wall_time: dict

    @property
    def max_deviation(self) -> float:
        return max(self.deviations.values(), default=0.0)


def solver_compare(rho0: DensityMatrix, params: ChannelParams, cfg: IntegratorConfig, solvers=SOLVERS, max_dim: int = LIOUVILLE_MAX_DIM) -> CompareReport:
    """Run each solver once and report pairwise max elementwise deviations."""
    states, drift, wall = {}, {}, {}
    for name in solvers:
        start = time.perf_counter()
        states[name], drift[name] = run_solver(name, rho0, params, cfg, max_dim=max_dim)
        wall[name] = time.perf_counter() - start
    dev = {(a, b): max_abs(states[a].elements - states[b].elements) for a, b in combinations(solvers, 2)}
    return CompareReport(params.t, states, dev, drift, wall)
