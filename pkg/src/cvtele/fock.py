"""Truncated Fock-space states and operators for one and two modes.

Two-mode matrices use the mode-1-major index ``n1 * dim + n2`` everywhere.
Quadratures follow ``q = (a + a^dag)/sqrt(2)``, ``p = (a - a^dag)/(i sqrt(2))``
so the vacuum has ``<q^2> = 1/2``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import CVTeleError, DimensionError, TruncationError

DEFAULT_TRUNC = 20
POPULATION_TOL = 1e-6
HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-10
PSD_TOL = 1e-10


def _frozen(arr):
    arr = np.array(arr, dtype=complex, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class FockVector:
    """Pure single-mode amplitudes ``amps[n] = <n|psi>``."""

    amps: np.ndarray

    def __post_init__(self):
        amps = _frozen(np.ravel(self.amps))
        if amps.shape[0] < 2:
            raise DimensionError("FockVector needs dim >= 2", module="fock", check="dim")
        object.__setattr__(self, "amps", amps)

    @classmethod
    def normalized(cls, amps):
        amps = np.asarray(amps, dtype=complex)
        norm = np.linalg.norm(amps)
        if norm == 0:
            raise CVTeleError("zero vector cannot be normalized", module="fock", check="norm")
        return cls(amps / norm)

    @property
    def dim(self):
        return self.amps.shape[0]

    @property
    def norm2(self):
        return float(np.vdot(self.amps, self.amps).real)

    def density(self):
        return FockDensityMatrix(np.outer(self.amps, self.amps.conj()), modes=1)


@dataclass(frozen=True, eq=False)
class FockDensityMatrix:
    """Density operator of one or two truncated modes (immutable)."""

    mat: np.ndarray
    modes: int = 1
    dim: int = field(init=False)

    def __post_init__(self):
        if self.modes not in (1, 2):
            raise DimensionError(f"modes must be 1 or 2, got {self.modes}", module="fock", check="modes")
        mat = _frozen(self.mat)
        side = mat.shape[0]
        dim = int(round(side ** (1.0 / self.modes)))
        if mat.ndim != 2 or mat.shape[1] != side or dim**self.modes != side or dim < 2:
            raise DimensionError(
                f"matrix shape {mat.shape} incompatible with {self.modes} mode(s)",
                module="fock",
                check="shape",
            )
        object.__setattr__(self, "mat", mat)
        object.__setattr__(self, "dim", dim)

    @classmethod
    def from_ket(cls, ket, modes=1):
        ket = np.ravel(np.asarray(ket, dtype=complex))
        return cls(np.outer(ket, ket.conj()), modes=modes)

    @classmethod
    def vacuum(cls, dim=DEFAULT_TRUNC, modes=1):
        ket = np.zeros(dim**modes, dtype=complex)
        ket[0] = 1.0
        return cls.from_ket(ket, modes)

    @property
    def trace(self):
        return complex(np.trace(self.mat))

    def hermiticity_defect(self):
        return float(np.max(np.abs(self.mat - self.mat.conj().T)))

    def min_eigenvalue(self):
        return float(np.linalg.eigvalsh(0.5 * (self.mat + self.mat.conj().T))[0])

    def purity(self):
        return float(np.real(np.trace(self.mat @ self.mat)))

    def normalized(self):
        tr = self.trace.real
        if tr <= 0:
            raise CVTeleError("non-positive trace", module="fock", check="trace", defect=tr)
        return FockDensityMatrix(self.mat / tr, modes=self.modes)

    def populations(self):
        return np.real(np.diag(self.mat)).copy()

    def validate(self, normalized=True):
        """Raise if Hermiticity, trace or positivity tolerances are violated."""
        herm = self.hermiticity_defect()
        if herm > HERMITIAN_TOL:
            raise CVTeleError("matrix is not Hermitian", module="fock", check="hermitian",
                              defect=herm, tolerance=HERMITIAN_TOL)
        tr = self.trace.real
        if normalized and abs(tr - 1.0) > TRACE_TOL:
            raise CVTeleError("trace differs from 1", module="fock", check="trace",
                              defect=abs(tr - 1.0), tolerance=TRACE_TOL)
        if not 0 < tr <= 1 + TRACE_TOL:
            raise CVTeleError("trace outside (0, 1]", module="fock", check="trace", defect=tr)
        lmin = self.min_eigenvalue()
        if lmin < -PSD_TOL:
            raise CVTeleError("matrix is not positive semidefinite", module="fock", check="psd",
                              defect=lmin, tolerance=PSD_TOL)
        return self


def guard_population(population, label="state", tol=POPULATION_TOL):
    """Fail loudly when less than ``1 - tol`` of a state lies below the cutoff."""
    if population < 1.0 - tol:
        raise TruncationError(
            f"{label}: only {population:.10f} of the population lies below the cutoff",
            module="fock",
            check="truncation_population",
            defect=1.0 - population,
            tolerance=tol,
        )


@dataclass(frozen=True, eq=False)
class ModeOperator:
    """Single-mode operator matrix with a descriptive label."""

    mat: np.ndarray
    label: str = "custom"

    def __post_init__(self):
        object.__setattr__(self, "mat", _frozen(self.mat))

    @property
    def dim(self):
        return self.mat.shape[0]

    @property
    def dag(self):
        return ModeOperator(self.mat.conj().T, label=f"{self.label}^dag")

    def __matmul__(self, other):
        return ModeOperator(self.mat @ other.mat, label=f"{self.label}*{other.label}")


def annihilation(dim):
    return ModeOperator(np.diag(np.sqrt(np.arange(1, dim)), 1), label="annihilate")


def creation(dim):
    return ModeOperator(np.diag(np.sqrt(np.arange(1, dim)), -1), label="create")


def position(dim):
    a = annihilation(dim).mat
    return ModeOperator((a + a.conj().T) / np.sqrt(2.0), label="q")


def momentum(dim):
    a = annihilation(dim).mat
    return ModeOperator((a - a.conj().T) / (1j * np.sqrt(2.0)), label="p")


def number(dim):
    return ModeOperator(np.diag(np.arange(dim, dtype=float)), label="n")


def embed(op, mode, modes):
    """Lift a single-mode matrix onto mode ``mode`` (1-based) of a ``modes``-mode space."""
    mat = op.mat if isinstance(op, ModeOperator) else np.asarray(op)
    if modes == 1:
        if mode != 1:
            raise DimensionError(f"mode {mode} out of range for 1 mode", module="fock", check="mode")
        return mat
    eye = np.eye(mat.shape[0])
    if mode == 1:
        return np.kron(mat, eye)
    if mode == 2:
        return np.kron(eye, mat)
    raise DimensionError(f"mode {mode} out of range for 2 modes", module="fock", check="mode")


def tensor(a, b):
    """Two-mode product state ``a (x) b``."""
    if a.modes != 1 or b.modes != 1:
        raise DimensionError("tensor expects one-mode factors", module="fock", check="modes")
    if a.dim != b.dim:
        raise DimensionError(f"dimension mismatch {a.dim} != {b.dim}", module="fock", check="dim")
    return FockDensityMatrix(np.kron(a.mat, b.mat), modes=2)


def partial_trace(rho, keep):
    """Reduced state of mode ``keep`` (1 or 2)."""
    if rho.modes != 2:
        raise DimensionError("partial_trace needs a two-mode state", module="fock", check="modes")
    r = rho.mat.reshape(rho.dim, rho.dim, rho.dim, rho.dim)
    if keep == 1:
        return FockDensityMatrix(np.einsum("ijkj->ik", r), modes=1)
    if keep == 2:
        return FockDensityMatrix(np.einsum("ijil->jl", r), modes=1)
    raise DimensionError(f"keep must be 1 or 2, got {keep!r}", module="fock", check="keep")


def operator_product(ops: Sequence, modes, dim):
    """Ordered product of (operator, mode) pairs as a full matrix."""
    out = np.eye(dim**modes, dtype=complex)
    for item in ops:
        op, mode = item if isinstance(item, tuple) else (item, 1)
        if op.dim != dim:
            raise DimensionError("operator dimension does not match state", module="fock", check="dim")
        out = out @ embed(op, mode, modes)
    return out


def expect(rho, ops):
    """``tr(rho * prod(ops))`` for an ordered list of ops or ``(op, mode)`` pairs."""
    if isinstance(ops, (ModeOperator, tuple)):
        ops = [ops]
    prod = operator_product(ops, rho.modes, rho.dim)
    return complex(np.sum(rho.mat.T * prod))


def exact_product(*factories, dim):
    """Product of standard single-mode operators with exact matrix elements.

    Multiplying already-truncated ladder matrices corrupts the top Fock level
    (``a a^dag`` loses its last entry); building the product on a padded space
    and cropping avoids that.
    """
    big = dim + len(factories)
    out = np.eye(big, dtype=complex)
    labels = []
    for make in factories:
        op = make(big)
        labels.append(op.label)
        out = out @ op.mat
    return ModeOperator(out[:dim, :dim], label="*".join(labels))
