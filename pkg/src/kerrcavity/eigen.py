"""Cyclic Jacobi eigensolver for complex Hermitian matrices.

Each rotation first removes the phase of the pivot element, then applies the
classical real Jacobi rotation to the resulting real symmetric 2x2 block.
"""

import math

import numpy as np

from .errors import ContractViolation

HERMITIAN_TOL = 1e-10
OFFDIAG_TOL = 1e-14
MAX_SWEEPS = 100


def _offdiag_norm(a):
    off = a - np.diag(np.diag(a))
    return float(np.sqrt(np.sum(off.real**2 + off.imag**2)))


def jacobi_eigh(m, vectors=True, tol=OFFDIAG_TOL):
    """Eigen-decomposition of a Hermitian matrix by cyclic Jacobi sweeps.

    Returns ``(values, vecs)`` with values ascending and eigenvectors as the
    columns of ``vecs`` (``None`` when ``vectors`` is false). Sweeps stop once
    the off-diagonal Frobenius mass falls below ``tol`` (relative to the
    matrix norm when that exceeds one).
    """
    a = np.array(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ContractViolation(f"expected a square matrix, got shape {a.shape}")
    defect = np.max(np.abs(a - a.conj().T)) if a.size else 0.0
    if defect > HERMITIAN_TOL:
        raise ContractViolation(f"matrix is not Hermitian (defect {defect:.3e})")
    n = a.shape[0]
    a = 0.5 * (a + a.conj().T)
    v = np.eye(n, dtype=complex) if vectors else None
    scale = max(1.0, np.linalg.norm(a))
    threshold = tol * scale

    for _ in range(MAX_SWEEPS):
        if _offdiag_norm(a) < threshold:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                mag = abs(apq)
                if mag < 1e-300:
                    continue
                phase = apq / mag
                app, aqq = a[p, p].real, a[q, q].real
                theta = (aqq - app) / (2.0 * mag)
                if abs(theta) > 1e150:
                    t = 0.5 / abs(theta)
                else:
                    t = 1.0 / (abs(theta) + math.sqrt(theta * theta + 1.0))
                if theta < 0.0:
                    t = -t
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                # G = diag(1, conj(phase)) @ [[c, s], [-s, c]]
                g = np.array([[c, s], [-s * phase.conjugate(), c * phase.conjugate()]])
                idx = [p, q]
                a[:, idx] = a[:, idx] @ g
                a[idx, :] = g.conj().T @ a[idx, :]
                a[p, q] = a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
                if vectors:
                    v[:, idx] = v[:, idx] @ g
    else:
        raise RuntimeError("Jacobi iteration did not converge")

    w = np.diag(a).real.copy()
    order = np.argsort(w, kind="stable")
    w = w[order]
    if vectors:
        return w, v[:, order]
    return w, None


def hermitian_eigenvalues(m):
    """Ascending real eigenvalues of a Hermitian matrix."""
    return jacobi_eigh(m, vectors=False)[0]
