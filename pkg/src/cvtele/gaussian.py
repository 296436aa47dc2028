"""Gaussian states as (mean, covariance matrix) pairs.

Phase-space ordering is ``(q1, p1, q2, p2)`` and the vacuum covariance matrix
is ``I/2``. A displacement amplitude ``lam`` couples to the quadratures through
``D(lam) = exp(i sqrt(2) (Im(lam) q - Re(lam) p))``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from . import kernels
from .errors import CVTeleError, DimensionError
from .fock import FockDensityMatrix, guard_population, tensor

SYMMETRY_TOL = 1e-12
PHYSICAL_TOL = 1e-10


def symplectic_form(modes):
    return np.kron(np.eye(modes), np.array([[0.0, 1.0], [-1.0, 0.0]]))


@dataclass(frozen=True, eq=False)
class GaussianState:
    mean: np.ndarray
    cm: np.ndarray

    def __post_init__(self):
        mean = np.array(self.mean, dtype=float).ravel()
        cm = np.array(self.cm, dtype=float)
        if cm.shape != (mean.size, mean.size) or mean.size not in (2, 4):
            raise DimensionError(f"bad Gaussian shapes {mean.shape}, {cm.shape}",
                                 module="gaussian", check="shape")
        asym = float(np.max(np.abs(cm - cm.T)))
        if asym > SYMMETRY_TOL:
            raise CVTeleError("covariance matrix is not symmetric", module="gaussian",
                              check="symmetric", defect=asym, tolerance=SYMMETRY_TOL)
        mean.setflags(write=False)
        cm.setflags(write=False)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cm", cm)

    @property
    def modes(self):
        return self.mean.size // 2

    def physicality_defect(self):
        """Smallest eigenvalue of ``cm + (i/2) Omega`` (must be >= 0)."""
        return float(np.linalg.eigvalsh(self.cm + 0.5j * symplectic_form(self.modes))[0])

    def is_physical(self, tol=PHYSICAL_TOL):
        return self.physicality_defect() >= -tol


@dataclass(frozen=True)
class CovMatrix2:
    """Single-mode covariance matrix ``[[sqq, sqp], [sqp, spp]]``."""

    sqq: float
    sqp: float
    spp: float

    @classmethod
    def from_array(cls, m):
        m = np.asarray(m, dtype=float)
        return cls(float(m[0, 0]), float(0.5 * (m[0, 1] + m[1, 0])), float(m[1, 1]))

    def as_array(self):
        return np.array([[self.sqq, self.sqp], [self.sqp, self.spp]])

    @property
    def det(self):
        return self.sqq * self.spp - self.sqp**2

    def min_eig_minus_half(self):
        return float(np.linalg.eigvalsh(self.as_array() - 0.5 * np.eye(2))[0])

    def mean_photon_number(self):
        """``<a^dag a>`` of an undisplaced state with this CM."""
        return 0.5 * (self.sqq + self.spp) - 0.5


def vacuum(modes=1):
    return GaussianState(np.zeros(2 * modes), 0.5 * np.eye(2 * modes))


def coherent(alpha):
    return GaussianState([np.sqrt(2) * alpha.real, np.sqrt(2) * alpha.imag], 0.5 * np.eye(2))


def thermal(nbar):
    return GaussianState(np.zeros(2), (nbar + 0.5) * np.eye(2))


def svs(r):
    """Two-mode squeezed vacuum with Schmidt coefficients ``tanh(r)^n / cosh(r)``."""
    c, s = 0.5 * np.cosh(2 * r), 0.5 * np.sinh(2 * r)
    z = np.diag([1.0, -1.0])
    cm = np.block([[c * np.eye(2), s * z], [s * z, c * np.eye(2)]])
    return GaussianState(np.zeros(4), cm)


def product(a, b):
    if a.modes != 1 or b.modes != 1:
        raise DimensionError("product expects one-mode factors", module="gaussian", check="modes")
    cm = np.zeros((4, 4))
    cm[:2, :2] = a.cm
    cm[2:, 2:] = b.cm
    return GaussianState(np.concatenate([a.mean, b.mean]), cm)


def phase_vector(lams):
    """Real phase-space vector(s) for per-mode amplitudes; last axis is 2*modes."""
    parts = []
    for lam in lams:
        lam = np.asarray(lam, dtype=complex)
        parts.extend([np.sqrt(2) * lam.imag, -np.sqrt(2) * lam.real])
    return np.stack(np.broadcast_arrays(*parts), axis=-1)


def gaussian_cf(s, lams):
    """Characteristic function ``tr(rho D(lam_1) ... D(lam_n))``; broadcasts over arrays."""
    if len(lams) != s.modes:
        raise DimensionError(f"expected {s.modes} amplitude(s)", module="gaussian", check="modes")
    xi = phase_vector(lams)
    quad = np.einsum("...i,ij,...j->...", xi, s.cm, xi)
    lin = xi @ s.mean
    return np.exp(1j * lin - 0.5 * quad)


def _thermal_fock(nbar, dim, pad):
    n = np.arange(dim + pad)
    if nbar == 0:
        return (n == 0).astype(float)
    return np.exp(n * np.log(nbar / (nbar + 1.0)) - np.log1p(nbar))


def _one_mode_fock(s, dim, pad=40):
    cm = s.cm
    if abs(cm[0, 0] - cm[1, 1]) > 1e-12 or abs(cm[0, 1]) > 1e-12:
        raise CVTeleError("only isotropic one-mode Gaussian states have a Fock recipe here",
                          module="gaussian", check="recipe")
    nbar = cm[0, 0] - 0.5
    if nbar < -1e-12:
        raise CVTeleError("unphysical one-mode CM", module="gaussian", check="physical", defect=nbar)
    nbar = max(nbar, 0.0)
    alpha = (s.mean[0] + 1j * s.mean[1]) / np.sqrt(2)
    pops = _thermal_fock(nbar, dim, pad)
    if alpha == 0:
        return np.diag(pops[:dim]).astype(complex)
    # columns beyond the cutoff still feed rows below it
    D = kernels.displacement_batch(np.array([alpha]), dim + pad)[0][:dim, :]
    return (D * pops) @ D.conj().T


def _svs_param(s):
    """Squeezing parameter if ``s`` is an undisplaced SVS, else None."""
    if np.any(np.abs(s.mean) > 1e-12):
        return None
    r = 0.5 * np.arccosh(max(2 * s.cm[0, 0], 1.0))
    if np.allclose(s.cm, svs(r).cm, atol=1e-12, rtol=0):
        return r
    return None


def gaussian_to_fock(s, dim):
    """Fock density matrix for the catalog Gaussian families (closed-form series).

    Supported: isotropic (displaced thermal / coherent / vacuum) single modes,
    two-mode squeezed vacua and products of isotropic single modes.
    """
    if s.modes == 1:
        mat = _one_mode_fock(s, dim)
        pop = float(np.trace(mat).real)
        guard_population(pop, "gaussian_to_fock")
        return FockDensityMatrix(mat / pop, modes=1)
    r = _svs_param(s)
    if r is not None:
        t = np.tanh(r)
        n = np.arange(dim)
        coeff = np.exp(n * np.log(t) - np.log(np.cosh(r))) if t > 0 else (n == 0).astype(float)
        pop = float(np.sum(coeff**2))
        guard_population(pop, "gaussian_to_fock(svs)")
        ket = np.zeros((dim, dim))
        ket[n, n] = coeff
        return FockDensityMatrix.from_ket(ket.ravel() / np.sqrt(pop), modes=2)
    if np.all(np.abs(s.cm[:2, 2:]) < 1e-14):
        a = GaussianState(s.mean[:2], s.cm[:2, :2])
        b = GaussianState(s.mean[2:], s.cm[2:, 2:])
        return tensor(gaussian_to_fock(a, dim), gaussian_to_fock(b, dim))
    raise CVTeleError("no closed-form Fock recipe for this two-mode Gaussian state",
                      module="gaussian", check="recipe")


def coherent_amplitudes(alpha, dim):
    """``exp(-|alpha|^2/2) alpha^n / sqrt(n!)`` by direct series."""
    n = np.arange(dim)
    if alpha == 0:
        return (n == 0).astype(complex)
    logmag = n * np.log(abs(alpha)) - 0.5 * gammaln(n + 1)
    return np.exp(-0.5 * abs(alpha) ** 2 + logmag + 1j * n * np.angle(alpha))
