"""Batched small-matrix functions: exp, log, pairing-orthogonal projection.

All routines accept stacked arrays (..., n, n) and avoid per-matrix Python
loops except in the scipy fallback path.  Tuned for 6x6 blocks on grids of a
few thousand nodes.
"""

import numpy as np
import scipy.linalg


def _norm1(a):
    """Batched induced 1-norm."""
    return np.abs(a).sum(axis=-2).max(axis=-1)


def expm(a):
    """exp(a) by scaling-and-squaring with a fixed-length Taylor core."""
    a = np.asarray(a)
    n = a.shape[-1]
    norms = np.atleast_1d(_norm1(a))
    maxn = float(norms.max()) if norms.size else 0.0
    # scale so the Taylor core sees norms <= 0.25
    squarings = max(0, int(np.ceil(np.log2(max(maxn, 1e-300) / 0.25)))) if maxn > 0.25 else 0
    b = a / (2.0 ** squarings)
    eye = np.broadcast_to(np.eye(n, dtype=b.dtype), b.shape)
    out = eye.copy()
    term = eye.copy()
    for k in range(1, 17):
        term = term @ b / k
        out = out + term
    for _ in range(squarings):
        out = out @ out
    return out


def logm(a, tol=1e-12):
    """Principal log for matrices near the identity.

    Uses the Gregory series in X = (A-I)(A+I)^-1, which converges for spectra
    in the open right half-plane; falls back to scipy.linalg.logm per matrix
    when the result does not reproduce `a` under expm.  Raises LinAlgError if
    even the fallback fails to invert (A+I).
    """
    a = np.asarray(a, dtype=complex)
    n = a.shape[-1]
    eye = np.eye(n, dtype=complex)
    x = np.linalg.solve((a + eye).swapaxes(-1, -2), (a - eye).swapaxes(-1, -2)).swapaxes(-1, -2)
    x2 = x @ x
    out = np.zeros_like(a)
    power = x.copy()
    for k in range(1, 26, 2):
        out = out + power / k
        power = power @ x2
    out = 2.0 * out
    # verify; repair stragglers with scipy
    resid = _norm1(expm(out) - a)
    scale = 1.0 + _norm1(a)
    bad = np.atleast_1d(resid / scale) > max(tol, 1e-10)
    if bad.any():
        flat_a = a.reshape(-1, n, n)
        flat_o = out.reshape(-1, n, n)
        for idx in np.nonzero(bad.ravel())[0]:
            flat_o[idx] = scipy.linalg.logm(flat_a[idx])
        out = flat_o.reshape(a.shape)
    return out


def reproject_orthogonal(f, gram, iterations=2):
    """Pull f back onto the gram-orthogonal group: F^T G F = G.

    One Newton step F <- F (I - G^-1 E / 2), E = F^T G F - G, is quadratically
    convergent; two steps keep frames in the group to ~1e-14 for drifts below
    1e-4.
    """
    f = np.asarray(f, dtype=complex)
    n = f.shape[-1]
    ginv = np.linalg.inv(gram)
    eye = np.eye(n)
    for _ in range(iterations):
        e = f.swapaxes(-1, -2) @ gram @ f - gram
        f = f @ (eye - 0.5 * (ginv @ e))
    return f


def orthogonality_defect(f, gram):
    """Batched norm of F^T G F - G."""
    e = np.asarray(f).swapaxes(-1, -2) @ gram @ np.asarray(f) - gram
    return np.sqrt(np.abs(e * e.conj()).sum(axis=(-2, -1)))
