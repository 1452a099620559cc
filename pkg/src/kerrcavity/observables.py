"""Scalar and phase-space diagnostics of density matrices."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .eigen import hermitian_eigenvalues
from .errors import DimensionError, UnsupportedStateError
from .fock import PURE_STATES, DensityMatrix, coherent_amplitudes, state_vector


def _elements(rho):
    return rho.elements if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)


def purity(rho: DensityMatrix) -> float:
    """Tr rho^2 (real part; the input is never modified)."""
    r = _elements(rho)
    # Tr(rho rho) = sum_ij rho_ij rho_ji
    return float(np.sum(r * r.T).real)


def fidelity_pure(rho: DensityMatrix, psi_spec) -> float:
    """<psi|rho|psi> for a pure reference state."""
    if not isinstance(psi_spec, PURE_STATES):
        raise UnsupportedStateError(f"fidelity needs a pure reference state, got {psi_spec!r}")
    psi, _ = state_vector(psi_spec, rho.trunc)
    return float(np.vdot(psi, rho.elements @ psi).real)


def trace_distance(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    if rho.trunc != sigma.trunc:
        raise DimensionError(f"trace distance between N={rho.dim} and N={sigma.dim} states")
    diff = rho.elements - sigma.elements
    return 0.5 * float(np.sum(np.abs(hermitian_eigenvalues(diff))))


def mean_photon_number(rho: DensityMatrix) -> float:
    r = _elements(rho)
    return float(np.dot(np.arange(r.shape[0]), np.diag(r).real))


def photon_distribution(rho: DensityMatrix) -> np.ndarray:
    return np.diag(_elements(rho)).real.copy()


@dataclass
class ObservableRecord:
    t: float
    trace_re: float
    trace_im: float
    purity: float
    mean_n: float
    fidelity_vs_ref: float
    min_eig: float
    photon_dist: list = field(default_factory=list)


def observe(rho: DensityMatrix, t: float, reference=None) -> ObservableRecord:
    """Collect the standard diagnostics; fidelity is NaN when ``reference`` is not pure."""
    tr = np.trace(rho.elements)
    if reference is not None and isinstance(reference, PURE_STATES):
        fid = fidelity_pure(rho, reference)
    else:
        fid = float("nan")
    return ObservableRecord(
        t=float(t),
        trace_re=float(tr.real),
        trace_im=float(tr.imag),
        purity=purity(rho),
        mean_n=mean_photon_number(rho),
        fidelity_vs_ref=fid,
        min_eig=float(hermitian_eigenvalues(rho.elements)[0]),
        photon_dist=photon_distribution(rho).tolist(),
    )


@dataclass
class QGrid:
    re_min: float
    re_max: float
    im_min: float
    im_max: float
    resolution: int
    values: np.ndarray | None = field(default=None, repr=False)

    def axes(self):
        return (
            np.linspace(self.re_min, self.re_max, self.resolution),
            np.linspace(self.im_min, self.im_max, self.resolution),
        )

    @property
    def cell_area(self) -> float:
        r = self.resolution - 1
        return (self.re_max - self.re_min) / r * (self.im_max - self.im_min) / r


def husimi_q(rho: DensityMatrix, grid: QGrid) -> QGrid:
    """Q(alpha) = <alpha|rho|alpha>/pi on the grid.

    ``values[i, j]`` is taken at Re(alpha) = re_axis[j], Im(alpha) = im_axis[i].
    Coherent vectors are truncated but not renormalized.
    """
    if grid.resolution < 2:
        raise ValueError(f"resolution must be >= 2, got {grid.resolution}")
    xs, ys = grid.axes()
    alphas = (xs[None, :] + 1j * ys[:, None]).ravel()
    vecs = np.array([coherent_amplitudes(a, rho.dim) for a in alphas])
    q = np.einsum("gi,ij,gj->g", vecs.conj(), rho.elements, vecs).real / np.pi
    return QGrid(grid.re_min, grid.re_max, grid.im_min, grid.im_max, grid.resolution, q.reshape(len(ys), len(xs)))
