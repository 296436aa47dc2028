"""Brute-force Braunstein-Kimble protocol on a truncated Fock space.

Alice projects the (input, A) pair onto joint eigenvectors of
``q_in - q_1`` and ``p_in + p_1``,

    |Phi(q, p)> = (2 pi)^(-1/2) int d eta exp(i p eta) |q + eta>_in |eta>_A,

Bob's conditional state is displaced by ``alpha(q, p)`` and the outcomes are
summed over a square lattice. Nothing here uses the CF product law, so it is
an independent check of it.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import OracleError
from .fock import FockDensityMatrix
from .handle import State

TAIL_TOL = 1e-8
# the measure constant is read on at least this window so a narrow outcome
# lattice shows up as a probability deficit instead of being normalised away
CONSTANT_WINDOW = 8.0
PROB_DEFICIT_TOL = 0.05
GAINS = ("sqrt2", "literal")


@dataclass(frozen=True)
class MeasurementOutcome:
    q: float
    p: float
    weight: float
    prob_density: float


def hermite_functions(x, dim):
    """Oscillator eigenfunctions ``psi_n(x)`` (rows n) with ``<x^2>_0 = 1/2``."""
    x = np.asarray(x, dtype=float)
    psi = np.zeros((dim,) + x.shape)
    psi[0] = np.pi**-0.25 * np.exp(-0.5 * x**2)
    if dim > 1:
        psi[1] = np.sqrt(2.0) * x * psi[0]
    for n in range(1, dim - 1):
        psi[n + 1] = np.sqrt(2.0 / (n + 1)) * x * psi[n] - np.sqrt(n / (n + 1.0)) * psi[n - 1]
    return psi


@dataclass(frozen=True, eq=False)
class PositionBasisTable:
    """Hermite functions tabulated on a uniform lattice."""

    x: np.ndarray
    psi: np.ndarray

    @classmethod
    def build(cls, dim, half_width, step):
        M = int(round(half_width / step))
        x = np.arange(-M, M + 1) * step
        return cls(x, hermite_functions(x, dim))

    @property
    def step(self):
        return float(self.x[1] - self.x[0])

    def gram(self):
        return self.psi @ self.psi.T * self.step

    def tail(self):
        """Largest density |psi_n|^2 at the lattice ends."""
        return float(np.max(self.psi[:, [0, -1]] ** 2))


def _eta_table(dim, L_eta, d_eta):
    table = PositionBasisTable.build(dim, L_eta, d_eta)
    if table.tail() > TAIL_TOL:
        raise OracleError(
            f"eta lattice |eta| <= {L_eta} does not cover the wavefunctions",
            module="oracle", check="eta_coverage", defect=table.tail(), tolerance=TAIL_TOL,
        )
    return table


def phi_coefficients(q, p, dim, L_eta=8.0, d_eta=0.05):
    """``Phi[n, m] = <n|_in <m|_A |Phi(q, p)>``; ``p`` may be an array (leading axis)."""
    eta = _eta_table(dim, L_eta, d_eta)
    out = _phi_row(q, np.atleast_1d(np.asarray(p, dtype=float)), eta)
    return out[0] if np.ndim(p) == 0 else out


def _phi_row(q, ps, eta):
    dim = eta.psi.shape[0]
    shifted = hermite_functions(q + eta.x, dim)
    phase = np.exp(1j * np.outer(ps, eta.x)) * (eta.step / np.sqrt(2 * np.pi))
    # Phi[p, n, m] = sum_eta phase[p, eta] psi_n(q + eta) psi_m(eta)
    return np.einsum("ke,ne,me->knm", phase, shifted, eta.psi, optimize=True)


def completeness_matrix(dim, L_m=6.0, d_m=0.1, L_eta=8.0, d_eta=0.05):
    """Lattice sum of ``|Phi><Phi|`` over outcomes, as a ``dim^2`` square matrix."""
    eta = _eta_table(dim, L_eta, d_eta)
    grid = _outcome_axis(L_m, d_m)
    acc = np.zeros((dim * dim, dim * dim), dtype=complex)
    for q in grid:
        phi = _phi_row(q, grid, eta).reshape(grid.size, -1)
        acc += phi.T @ phi.conj()
    return acc * d_m**2


def completeness_constant(dim, L_m=6.0, d_m=0.1, L_eta=8.0, d_eta=0.05):
    """Measured normalisation of the outcome measure, read from the vacuum-vacuum entry."""
    eta = _eta_table(dim, L_eta, d_eta)
    grid = _outcome_axis(L_m, d_m)
    total = 0.0
    for q in grid:
        phi = _phi_row(q, grid, eta)
        total += float(np.sum(np.abs(phi[:, 0, 0]) ** 2))
    return total * d_m**2


def _outcome_axis(L_m, d_m):
    M = int(round(L_m / d_m))
    return np.arange(-M, M + 1) * d_m


def _components(state):
    """Pure components (weights, coefficient matrices) of a two-mode handle."""
    state = State.wrap(state)
    dim = state.fock.dim
    if state.ket is not None:
        return np.ones(1), [np.asarray(state.ket).reshape(dim, dim)]
    w, v = np.linalg.eigh(state.fock.mat)
    keep = w > 1e-14 * w[-1]
    return w[keep], [v[:, i].reshape(dim, dim) for i in np.nonzero(keep)[0]]


def _conditional_row(rho_in, comps, q, ps, eta):
    """Unnormalised Bob states for one q and a vector of p outcomes: (K, dim, dim)."""
    phi = _phi_row(q, ps, eta)
    # A[k, m, m'] = sum_{n, n'} conj(Phi[k, n, m]) rho_in[n, n'] Phi[k, n', m']
    A = np.conj(np.swapaxes(phi, 1, 2)) @ rho_in @ phi
    out = 0
    for w, C in zip(*comps):
        # rho_B[b, b'] = sum A[m, m'] C[m, b] conj(C[m', b'])
        out = out + w * (C.T @ A @ C.conj())
    return out


def conditional_bob_state(rho_in, rho_ab, q, p, L_eta=8.0, d_eta=0.05, constant=1.0):
    """Bob's unnormalised state for outcome (q, p) and its probability density."""
    rho_in = State.wrap(rho_in).fock
    comps = _components(rho_ab)
    eta = _eta_table(rho_in.dim, L_eta, d_eta)
    sigma = _conditional_row(rho_in.mat, comps, q, np.array([p], dtype=float), eta)[0]
    dens = float(np.trace(sigma).real) / constant
    if dens < -1e-10:
        raise OracleError("negative outcome probability", module="oracle",
                          check="prob_density", defect=dens, tolerance=-1e-10)
    return FockDensityMatrix(0.5 * (sigma + sigma.conj().T), modes=1), dens


def displacement_amplitude(q, p, gain="sqrt2"):
    """Bob's correction ``alpha(q, p)``; ``sqrt2`` shifts the quadratures by (q, p)."""
    mu = np.asarray(q) + 1j * np.asarray(p)
    if gain == "sqrt2":
        return mu / np.sqrt(2.0)
    if gain == "literal":
        return mu
    raise ValueError(f"unknown gain convention {gain!r}")


@dataclass
class OracleResult:
    rho: FockDensityMatrix
    total_probability: float
    completeness: float
    min_density: float
    outcomes: int

    @property
    def probability_deficit(self):
        return 1.0 - self.total_probability


def oracle_teleport_full(rho_in, rho_ab, L_m=6.0, d_m=0.1, gain="sqrt2", L_eta=8.0, d_eta=0.05,
                         threads=None):
    """Explicit measure / condition / displace / average simulation."""
    if gain not in GAINS:
        raise ValueError(f"gain must be one of {GAINS}")
    rho_in = State.wrap(rho_in).fock
    comps = _components(rho_ab)
    dim = rho_in.dim
    if comps[1][0].shape[0] != dim:
        raise OracleError("input and resource truncations differ", module="oracle", check="dim")
    eta = _eta_table(dim, L_eta, d_eta)
    axis = _outcome_axis(L_m, d_m)
    constant = completeness_constant(dim, max(L_m, CONSTANT_WINDOW), d_m, L_eta, d_eta)
    w = d_m**2

    def row(q):
        sigma = _conditional_row(rho_in.mat, comps, q, axis, eta)
        dens = np.real(np.trace(sigma, axis1=1, axis2=2)) / constant
        D = kernels.displacement_batch(displacement_amplitude(q, axis, gain), dim)
        moved = D @ sigma @ np.conj(np.swapaxes(D, 1, 2))
        return moved.sum(axis=0) * (w / constant), float(dens.sum() * w), float(dens.min())

    workers = threads or kernels.thread_cap()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(row, axis))
    else:
        rows = [row(q) for q in axis]
    # fixed reduction order keeps results independent of the thread count
    mat = np.sum(np.stack([r[0] for r in rows]), axis=0)
    total = float(np.sum([r[1] for r in rows]))
    min_dens = float(min(r[2] for r in rows))

    if min_dens < -1e-10:
        raise OracleError("negative outcome probability", module="oracle",
                          check="prob_density", defect=min_dens, tolerance=-1e-10)
    if 1.0 - total > PROB_DEFICIT_TOL:
        raise OracleError(
            f"outcome lattice misses {1.0 - total:.3%} of the probability; increase L_m",
            module="oracle", check="probability_deficit", defect=1.0 - total,
            tolerance=PROB_DEFICIT_TOL,
        )
    mat = 0.5 * (mat + mat.conj().T)
    mat = mat / np.trace(mat).real
    return OracleResult(FockDensityMatrix(mat, modes=1), total, constant, min_dens, axis.size**2)


def oracle_teleport(rho_in, rho_ab, outcome_lattice=(6.0, 0.1), gain_convention="sqrt2",
                    eta_lattice=(8.0, 0.05)):
    """Teleported density matrix from the brute-force protocol."""
    L_m, d_m = outcome_lattice
    L_eta, d_eta = eta_lattice
    return oracle_teleport_full(rho_in, rho_ab, L_m, d_m, gain_convention, L_eta, d_eta).rho
