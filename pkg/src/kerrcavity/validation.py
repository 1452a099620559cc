"""Invariant suite run by ``kerrcavity validate``."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fock import Coherent, Fock, Thermal, Truncation, hermiticity_defect, make_state, max_abs, mixture
from .kraus import (
    ChannelParams,
    completeness_residual,
    evolve_amplitude_damping,
    evolve_kerr_unitary,
    evolve_kraus,
)
from .observables import fidelity_pure, trace_distance

GAMMA_GRID = (0.0, 0.2, 1.0)
CHI_GRID = (0.0, 0.3, 1.0)
T_GRID = (0.1, 1.0, 10.0)


@dataclass
class Check:
    name: str
    measured: float
    tol: float
    passed: bool
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        text = f"{status} {self.name}: measured={self.measured:.3e} tol={self.tol:.1e}"
        return f"{text} ({self.detail})" if self.detail else text


def _upper(name, measured, tol, detail=""):
    return Check(name, float(measured), tol, bool(measured <= tol), detail)


def random_states(trunc: Truncation, count: int, seed: int = 0):
    """Seeded mixtures of Fock, coherent and thermal states."""
    rng = np.random.default_rng(seed)
    amp = math.sqrt(max(trunc.dim / 4.0 - 1.0, 0.25))
    out = []
    for _ in range(count):
        parts = [
            make_state(Fock(int(rng.integers(trunc.dim))), trunc),
            make_state(Coherent(complex(*rng.normal(scale=amp / 1.5, size=2))), trunc),
            make_state(Thermal(float(rng.uniform(0.0, amp))), trunc),
        ]
        out.append(mixture(parts, rng.dirichlet(np.ones(3))))
    return out


def run_checks(dim, chi, gamma, times, initial_state, n_random=8, seed=0):
    trunc = Truncation(dim)
    rho0 = make_state(initial_state, trunc)
    states = [rho0] + random_states(trunc, n_random, seed)
    times = [t for t in times] or [1.0]
    checks = []

    grid = [ChannelParams(c, g, t) for g in GAMMA_GRID for c in CHI_GRID for t in T_GRID]
    grid += [ChannelParams(chi, gamma, t) for t in times]
    checks.append(_upper("completeness_residual", max(completeness_residual(trunc, p) for p in grid), 1e-12,
                         f"{len(grid)} parameter sets"))

    tr_err = herm_err = 0.0
    min_eig = math.inf
    for rho in states:
        for t in times:
            out = evolve_kraus(rho, ChannelParams(chi, gamma, t))
            tr_err = max(tr_err, abs(np.trace(out.elements) - 1.0))
            herm_err = max(herm_err, hermiticity_defect(out.elements))
            min_eig = min(min_eig, out.min_eigenvalue())
    checks.append(_upper("trace_preservation", tr_err, 1e-12))
    checks.append(_upper("hermiticity", herm_err, 1e-12))
    checks.append(Check("positivity", max(0.0, -min_eig), 1e-10, min_eig >= -1e-10, f"min eigenvalue {min_eig:.3e}"))

    g_damp = gamma if gamma > 0 else 0.5
    dev = max(max_abs(evolve_kraus(rho, ChannelParams(0.0, g_damp, t)).elements
                      - evolve_amplitude_damping(rho, g_damp, t).elements)
              for rho in states for t in times)
    checks.append(_upper("amplitude_damping_reduction", dev, 1e-12, f"chi=0, gamma={g_damp:g}"))

    c_kerr = chi if chi != 0 else 1.0
    dev = max(max_abs(evolve_kraus(rho, ChannelParams(c_kerr, 0.0, t)).elements
                      - evolve_kerr_unitary(rho, c_kerr, t).elements)
              for rho in states for t in times)
    checks.append(_upper("kerr_unitary_reduction", dev, 1e-12, f"gamma=0, chi={c_kerr:g}"))

    dist = 0.0
    for k in range(dim):
        fock = make_state(Fock(k), trunc)
        for t in times:
            dist = max(dist, trace_distance(evolve_kraus(fock, ChannelParams(c_kerr, 0.0, t)), fock))
    checks.append(_upper("fock_invariance", dist, 1e-12, "trace distance at gamma=0"))

    worst = min(fidelity_pure(evolve_kraus(rho, ChannelParams(chi, 0.5, 20.0)), Fock(0)) for rho in states)
    checks.append(_upper("vacuum_limit", 1.0 - worst, 1e-6, f"min fidelity with vacuum {worst:.12f} at gamma*t=10"))

    period = 2.0 * math.pi / abs(c_kerr)
    dev = max(max(max_abs(evolve_kraus(rho, ChannelParams(c_kerr, 0.0, period)).elements - rho.elements),
                  max_abs(evolve_kerr_unitary(rho, c_kerr, period).elements - rho.elements))
              for rho in states)
    checks.append(_upper("kerr_revival", dev, 1e-10, f"chi*t=2pi, chi={c_kerr:g}"))
    return checks
