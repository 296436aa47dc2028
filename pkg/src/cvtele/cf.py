"""Characteristic functions: evaluation, lattice sampling, moments and inverse-Weyl reconstruction."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import kernels
from .errors import CVTeleError, ReconstructionError
from .fock import (
    FockDensityMatrix,
    ModeOperator,
    annihilation,
    creation,
    exact_product,
    momentum,
    position,
)
from .gaussian import CovMatrix2, gaussian_cf
from .handle import State

GRID_TOL = 1e-10
_CHUNK = 1024


def displacement_matrix(alpha, dim):
    """Truncated ``D(alpha) = exp(alpha a^dag - alpha^* a)``."""
    D = kernels.displacement_batch(np.array([alpha], dtype=complex), dim)[0]
    return ModeOperator(D, label=f"displacement({complex(alpha)})")


def cf_eval(rho, lam):
    """One-mode CF ``tr(rho D(lam))``; ``lam`` may be an array."""
    lam = np.asarray(lam, dtype=complex)
    vals = kernels.cf_trace_batch(rho.mat, lam.ravel())
    return vals.reshape(lam.shape) if lam.ndim else complex(vals[0])


def _pure_components(rho):
    """(weights, coefficient matrices) of a two-mode density matrix."""
    w, v = np.linalg.eigh(0.5 * (rho.mat + rho.mat.conj().T))
    keep = w > 1e-14 * max(w[-1], 1e-300)
    dim = rho.dim
    return w[keep], [v[:, i].reshape(dim, dim) for i in np.nonzero(keep)[0]]


def cf_eval2(rho, l1, l2, *, components=None):
    """Two-mode CF ``tr(rho D(l1) (x) D(l2))``; ``l1`` and ``l2`` broadcast.

    The density matrix is split into pure components so each point costs
    O(dim^3) per component instead of O(dim^4).
    """
    l1, l2 = np.broadcast_arrays(np.asarray(l1, dtype=complex), np.asarray(l2, dtype=complex))
    shape = l1.shape
    a1, a2 = l1.ravel(), l2.ravel()
    weights, coeffs = components if components is not None else _pure_components(rho)
    dim = coeffs[0].shape[0]
    out = np.zeros(a1.shape[0], dtype=complex)
    conj_pair = np.array_equal(a1, np.conj(a2))
    for start in range(0, a1.shape[0], _CHUNK):
        sl = slice(start, start + _CHUNK)
        D2 = kernels.displacement_batch(a2[sl], dim)
        # D(conj(a)) is the elementwise conjugate of D(a)
        D1 = D2.conj() if conj_pair else kernels.displacement_batch(a1[sl], dim)
        D2t = np.swapaxes(D2, 1, 2)
        acc = np.zeros(D2.shape[0], dtype=complex)
        for w, C in zip(weights, coeffs):
            Y = (D1 @ C) @ D2t
            acc += w * np.einsum("mb,kmb->k", C.conj(), Y)
        out[sl] = acc
    return out.reshape(shape) if shape else complex(out[0])


def state_cf(state, lam, path="auto"):
    """One-mode CF of a state handle; ``path`` is 'auto', 'fock' or 'gaussian'."""
    state = State.wrap(state)
    if path == "gaussian" or (path == "auto" and state.gaussian is not None):
        return gaussian_cf(state.gaussian, [lam])
    return cf_eval(state.fock, lam)


def state_cf2(state, l1, l2, path="auto"):
    """Two-mode CF of a state handle, analytic when a Gaussian form is present."""
    state = State.wrap(state)
    if path == "gaussian" or (path == "auto" and state.gaussian is not None):
        return gaussian_cf(state.gaussian, [l1, l2])
    if state.ket is not None:
        C = np.asarray(state.ket).reshape(state.fock.dim, state.fock.dim)
        return cf_eval2(state.fock, l1, l2, components=(np.ones(1), [C]))
    return cf_eval2(state.fock, l1, l2)


def lattice(L, h):
    """Square lattice ``lam = j h + i k h``; axis 0 runs over j (real part)."""
    if not (L > 0 and 0 < h <= L):
        raise CVTeleError(f"invalid lattice L={L}, h={h}", module="cf", check="lattice")
    M = int(round(L / h))
    x = np.arange(-M, M + 1) * h
    return x[:, None] + 1j * x[None, :]


@dataclass(frozen=True, eq=False)
class CFGrid:
    """CF samples on the lattice ``(j h, k h)``, ``j, k`` in ``[-M, M]``."""

    L: float
    h: float
    values: np.ndarray
    meta: str = ""

    @property
    def M(self):
        return (self.values.shape[0] - 1) // 2

    def points(self):
        return lattice(self.L, self.h)

    def origin(self):
        return complex(self.values[self.M, self.M])

    def hermitian_defect(self):
        """``max |chi(-lam) - chi(lam)^*|`` over the lattice."""
        return float(np.max(np.abs(self.values[::-1, ::-1] - self.values.conj())))

    def check(self, tol=GRID_TOL):
        d0 = abs(self.origin() - 1.0)
        if d0 > tol:
            raise CVTeleError("CF at the origin differs from 1", module="cf",
                              check="cf_origin", defect=d0, tolerance=tol)
        dh = self.hermitian_defect()
        if dh > tol:
            raise CVTeleError("CF violates chi(-lam) = chi(lam)^*", module="cf",
                              check="hermitian_symmetry", defect=dh, tolerance=tol)
        return self

    def to_text(self):
        M = self.M
        lines = [f"{self.L!r} {self.h!r} {M}"]
        for j in range(-M, M + 1):
            for k in range(-M, M + 1):
                v = self.values[j + M, k + M]
                lines.append(f"{j} {k} {float(v.real)!r} {float(v.imag)!r}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text, meta=""):
        rows = text.split("\n")
        L, h, M = rows[0].split()
        M = int(M)
        values = np.zeros((2 * M + 1, 2 * M + 1), dtype=complex)
        for line in rows[1:]:
            if not line.strip():
                continue
            j, k, re, im = line.split()
            values[int(j) + M, int(k) + M] = float(re) + 1j * float(im)
        return cls(float(L), float(h), values, meta)

    def save(self, path):
        Path(path).write_text(self.to_text())

    @classmethod
    def load(cls, path, meta=""):
        return cls.from_text(Path(path).read_text(), meta)


def sample_grid(evaluator, L, h, meta="", check=True):
    """Evaluate a vectorised CF ``evaluator(lam_array)`` on the lattice."""
    pts = lattice(L, h)
    values = np.asarray(evaluator(pts), dtype=complex).reshape(pts.shape)
    grid = CFGrid(float(L), float(h), values, meta)
    return grid.check() if check else grid


@dataclass
class Reconstruction:
    rho: FockDensityMatrix
    defects: dict = field(default_factory=dict)


def reconstruct_with_defects(grid, dim):
    """Inverse Weyl transform ``(1/pi) sum chi(lam) D(-lam) h^2`` plus repair diagnostics."""
    pts = grid.points().ravel()
    weights = grid.values.ravel() * (grid.h**2 / np.pi)
    raw = kernels.weyl_sum(-pts, weights, dim)
    herm = float(np.max(np.abs(raw - raw.conj().T)))
    mat = 0.5 * (raw + raw.conj().T)
    tr = float(np.trace(mat).real)
    if tr <= 0:
        raise ReconstructionError("reconstructed trace is not positive", module="cf",
                                  check="reconstruct_trace", defect=tr)
    mat = mat / tr
    rho = FockDensityMatrix(mat, modes=1)
    defects = {
        "hermiticity": herm,
        "trace": abs(tr - 1.0),
        "min_eigenvalue": rho.min_eigenvalue(),
    }
    return Reconstruction(rho, defects)


def reconstruct(grid, dim):
    return reconstruct_with_defects(grid, dim).rho


@dataclass(frozen=True)
class Moments:
    a: complex
    a2: complex
    n: float
    cm: CovMatrix2


def moments_from_state(rho):
    """First and second moments of a one-mode state, CM with symmetrised ``sqp``."""
    d = rho.dim
    R = rho.mat

    def ev(*factories):
        return complex(np.sum(R.T * exact_product(*factories, dim=d).mat))

    mq, mp = ev(position).real, ev(momentum).real
    sqq = ev(position, position).real - mq * mq
    spp = ev(momentum, momentum).real - mp * mp
    sqp = 0.5 * (ev(position, momentum) + ev(momentum, position)).real - mq * mp
    return Moments(
        a=ev(annihilation),
        a2=ev(annihilation, annihilation),
        n=ev(creation, annihilation).real,
        cm=CovMatrix2(sqq, sqp, spp),
    )
