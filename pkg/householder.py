# householder.py
"""
Dense Hermitian eigensolver.

    d, e, q = tridiagonalize(a)
        Householder similarity transformation of the Hermitian matrix [a]
        to a real symmetric tridiagonal matrix (diagonal d, subdiagonal e),
        with q the accumulated unitary so that  a = q T q^*.

    w, z = tridiagonal_ql(d, e, z)
        Implicit-shift QL iteration on the tridiagonal matrix, applying the
        plane rotations to the columns of z.
"""
import logging
import math
from typing import Optional, Tuple

import numpy as np

from errors import ConvergenceFailure

log = logging.getLogger(__name__)

MAX_SWEEPS = 50
RELATIVE_TOL = 1e-13


def tridiagonalize(a: np.ndarray, want_q: bool = True) -> Tuple[np.ndarray, np.ndarray, Optional[np.ndarray]]:
    """
    Reduce a Hermitian matrix to real symmetric tridiagonal form.

    Returns the real diagonal, the real nonnegative subdiagonal (padded with a
    trailing zero to length n) and, when requested, the unitary q.
    """
    a = np.array(a, dtype=np.complex128, copy=True)
    n = a.shape[0]
    q = np.eye(n, dtype=np.complex128) if want_q else None

    for k in range(n - 2):
        x = a[k + 1:, k]
        x_norm = np.linalg.norm(x)
        if x_norm == 0.0:
            continue
        lead = x[0]
        phase = lead / abs(lead) if lead != 0 else 1.0
        v = x.copy()
        v[0] += phase * x_norm
        v /= np.linalg.norm(v)

        # H = I - 2 v v^*, applied from both sides on the trailing rows/columns
        a[k + 1:, :] -= 2.0 * np.outer(v, v.conj() @ a[k + 1:, :])
        a[:, k + 1:] -= 2.0 * np.outer(a[:, k + 1:] @ v, v.conj())
        if q is not None:
            q[:, k + 1:] -= 2.0 * np.outer(q[:, k + 1:] @ v, v.conj())

    d = a.diagonal().real.copy()
    sub = a.diagonal(-1).copy()
    e = np.zeros(n)

    # diagonal unitary scaling that makes the subdiagonal real and nonnegative
    phases = np.ones(n, dtype=np.complex128)
    for k in range(n - 1):
        mag = abs(sub[k])
        e[k] = mag
        phases[k + 1] = phases[k] * (sub[k] / mag if mag > 0 else 1.0)
    if q is not None:
        q = q * phases[np.newaxis, :]
    return d, e, q


def tridiagonal_ql(
    d: np.ndarray,
    e: np.ndarray,
    z: Optional[np.ndarray] = None,
    tol: float = 0.0,
) -> Tuple[np.ndarray, Optional[np.ndarray]]:
    """
    Implicit-shift QL on the symmetric tridiagonal matrix (d, e).

    e[i] couples d[i] and d[i+1]; e[n-1] is ignored. An off-diagonal entry is
    treated as zero once it falls below machine precision relative to its
    neighbours or below the absolute `tol`.
    """
    d = np.array(d, dtype=np.float64, copy=True)
    e = np.array(e, dtype=np.float64, copy=True)
    n = d.shape[0]
    if n:
        e[n - 1] = 0.0
    eps = np.finfo(np.float64).eps

    for l in range(n):
        sweeps = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= eps * dd or abs(e[m]) <= tol:
                    break
                m += 1
            if m == l:
                break
            sweeps += 1
            if sweeps > MAX_SWEEPS:
                raise ConvergenceFailure(f"QL iteration did not converge for eigenvalue {l} after {MAX_SWEEPS} sweeps")

            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + math.copysign(r, g))
            s = c = 1.0
            p = 0.0
            deflated = False
            i = m - 1
            while i >= l:
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    deflated = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                if z is not None:
                    zi1 = z[:, i + 1].copy()
                    z[:, i + 1] = s * z[:, i] + c * zi1
                    z[:, i] = c * z[:, i] - s * zi1
                i -= 1
            if deflated:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0

    return d, z


def eigh(a: np.ndarray, want_vectors: bool = False) -> Tuple[np.ndarray, Optional[np.ndarray]]:
    """
    Eigenvalues (ascending) and optionally eigenvectors of a Hermitian matrix.
    """
    a = np.asarray(a, dtype=np.complex128)
    n = a.shape[0]
    if n == 0:
        return np.zeros(0), (np.zeros((0, 0), dtype=np.complex128) if want_vectors else None)

    fro = float(np.linalg.norm(a))
    d, e, q = tridiagonalize(a, want_q=want_vectors)
    w, z = tridiagonal_ql(d, e, q, tol=RELATIVE_TOL * fro)

    order = np.argsort(w, kind="stable")
    w = w[order]
    if z is not None:
        z = z[:, order]
    log.debug("householder eigh n=%d lambda_min=%.6g lambda_max=%.6g", n, w[0], w[-1])
    return w, z
