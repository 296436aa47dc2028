"""Pure numpy implementations of the lattice kernels.

These mirror the compiled routines in ``_ckernels.pyx`` one to one and are
used whenever the extension is unavailable (or ``CVTELE_PURE_PYTHON=1``).
"""

import numpy as np

# Number of lattice points handled per vectorised block.
_CHUNK = 2048


def laguerre_table(x, dim):
    """Scaled associated-Laguerre values for every (offset, row) pair.

    Returns ``F`` of shape ``(K, dim, dim)`` with
    ``F[:, k, n] = sqrt(k! n! / (n+k)!) * L_n^{(k)}(x)`` for ``n + k < dim``
    (zero elsewhere), built with the ascending three-term recurrence.
    """
    x = np.asarray(x, dtype=float)
    F = np.zeros((x.shape[0], dim, dim))
    for k in range(dim):
        nmax = dim - k
        F[:, k, 0] = 1.0
        if nmax > 1:
            F[:, k, 1] = (1.0 + k - x) / np.sqrt(k + 1.0)
        for n in range(1, nmax - 1):
            F[:, k, n + 1] = (
                (2.0 * n + 1.0 + k - x) * F[:, k, n]
                - np.sqrt(n * (n + k)) * F[:, k, n - 1]
            ) / np.sqrt((n + 1.0) * (n + k + 1.0))
    return F


def displacement_batch(alphas, dim):
    """Stack of truncated displacement matrices ``<m|D(alpha)|n>``."""
    alphas = np.ascontiguousarray(alphas, dtype=complex).ravel()
    K = alphas.shape[0]
    x = np.abs(alphas) ** 2
    env = np.exp(-0.5 * x)
    F = laguerre_table(x, dim)
    out = np.empty((K, dim, dim), dtype=complex)
    g = np.ones(K, dtype=complex)
    for k in range(dim):
        if k > 0:
            g = g * alphas / np.sqrt(k)
        lower = env[:, None] * g[:, None] * F[:, k, : dim - k]
        idx = np.arange(dim - k)
        out[:, idx + k, idx] = lower
        if k > 0:
            out[:, idx, idx + k] = (-1) ** k * np.conj(g)[:, None] * env[:, None] * F[:, k, : dim - k]
    return out


def cf_trace_batch(rho, alphas):
    """``tr(rho D(alpha))`` for every alpha."""
    rho = np.asarray(rho, dtype=complex)
    dim = rho.shape[0]
    alphas = np.ascontiguousarray(alphas, dtype=complex).ravel()
    rt = np.ascontiguousarray(rho.T).ravel()
    out = np.empty(alphas.shape[0], dtype=complex)
    for start in range(0, alphas.shape[0], _CHUNK):
        D = displacement_batch(alphas[start : start + _CHUNK], dim)
        out[start : start + _CHUNK] = D.reshape(D.shape[0], -1) @ rt
    return out


def weyl_sum(alphas, weights, dim):
    """``sum_k weights[k] * D(alphas[k])`` without storing the whole stack."""
    alphas = np.ascontiguousarray(alphas, dtype=complex).ravel()
    weights = np.ascontiguousarray(weights, dtype=complex).ravel()
    partial = []
    for start in range(0, alphas.shape[0], _CHUNK):
        D = displacement_batch(alphas[start : start + _CHUNK], dim)
        partial.append(np.tensordot(weights[start : start + _CHUNK], D, axes=(0, 0)))
    if not partial:
        return np.zeros((dim, dim), dtype=complex)
    return np.sum(np.stack(partial), axis=0)
