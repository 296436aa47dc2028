"""Unit-gain teleportation through the CF product law and its noise/fidelity metrics.

The teleported CF is ``chi_out(lam) = chi_in(lam) * chi_AB(conj(lam), lam)``.
The resource factor is the normally ordered CF of a one-mode distorting
state ``rho_M``; its symmetric CF is that factor times ``exp(-|lam|^2/2)``.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .cf import (
    moments_from_state,
    reconstruct_with_defects,
    sample_grid,
    state_cf,
    state_cf2,
)
from .errors import DimensionError, DisplacedResourceError
from .fock import (
    annihilation,
    creation,
    exact_product,
    momentum,
    position,
)
from .gaussian import CovMatrix2
from .handle import State

SCHEMA_VERSION = "cvtele.report/1"
UNDISPLACED_TOL = 1e-10


@dataclass(frozen=True)
class Numerics:
    trunc: int = 20
    L: float = 6.0
    h: float = 0.1
    L_m: float = 6.0
    d_m: float = 0.1
    L_eta: float = 8.0
    d_eta: float = 0.05

    def __post_init__(self):
        for name in ("L", "h", "L_m", "d_m", "L_eta", "d_eta"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.h > self.L or self.d_m > self.L_m or self.d_eta > self.L_eta:
            raise ValueError("lattice step exceeds its half-width")
        if self.trunc < 2:
            raise ValueError("trunc must be >= 2")


@dataclass
class TeleportJob:
    input: State
    resource: State
    numerics: Numerics = field(default_factory=Numerics)
    input_spec: str = ""
    resource_spec: str = ""

    def __post_init__(self):
        self.input = State.wrap(self.input)
        self.resource = State.wrap(self.resource)
        if self.input.modes != 1 or self.resource.modes != 2:
            raise DimensionError("job needs a one-mode input and a two-mode resource",
                                 module="teleport", check="modes")


@dataclass
class TeleportResult:
    grid: object
    rho: object
    defects: dict


def resource_factor(resource, lam, path="auto"):
    """``chi_AB(conj(lam), lam)``: the normally ordered CF of the distorting state."""
    lam = np.asarray(lam, dtype=complex)
    return state_cf2(resource, np.conj(lam), lam, path=path)


def teleport_cf(job, path="auto"):
    """Sample the product CF on the job lattice and invert it to ``rho_out``."""
    num = job.numerics

    def evaluator(lam):
        return state_cf(job.input, lam, path=path) * resource_factor(job.resource, lam, path)

    grid = sample_grid(evaluator, num.L, num.h, meta="output")
    rec = reconstruct_with_defects(grid, num.trunc)
    return TeleportResult(grid, rec.rho, rec.defects)


def distorting_cf(resource, lam, path="auto"):
    """Symmetric-order CF of ``rho_M``."""
    lam = np.asarray(lam, dtype=complex)
    return resource_factor(resource, lam, path) * np.exp(-0.5 * np.abs(lam) ** 2)


def distorting_state_with_defects(resource, numerics=None, path="auto"):
    num = numerics or Numerics()
    grid = sample_grid(lambda lam: distorting_cf(resource, lam, path), num.L, num.h,
                       meta="distorting")
    return reconstruct_with_defects(grid, num.trunc)


def distorting_state(resource, numerics=None, path="auto"):
    """Reconstructed density matrix of the distorting field ``rho_M``."""
    return distorting_state_with_defects(resource, numerics, path).rho


def distorting_state_adaptive(resource, numerics=None, path="auto", tail_tol=1e-12, max_dim=160):
    """Reconstruct ``rho_M`` growing the cutoff until the top three levels hold < ``tail_tol``.

    The distorting state can be much hotter than the resource (two-mode vacuum
    already gives a thermal state with one photon), so its cutoff is chosen
    separately from the resource's. ``defects['dim']`` records the final size.
    """
    num = numerics or Numerics()
    dim = num.trunc
    while True:
        rec = distorting_state_with_defects(resource, replace(num, trunc=dim), path)
        tail = float(np.sum(rec.rho.populations()[-3:]))
        if tail <= tail_tol or dim >= max_dim:
            rec.defects["dim"] = dim
            rec.defects["tail"] = tail
            return rec
        dim = min(max_dim, int(dim * 1.5))


def distorting_cm_gaussian(resource):
    """CM of ``rho_M`` read off the exact Gaussian CF at three probe amplitudes."""
    resource = State.wrap(resource)
    if resource.gaussian is None:
        raise ValueError("analytic path needs a Gaussian resource")
    # -2 log chi_M(lam) = xi^T V xi with xi = sqrt(2) (Im lam, -Re lam)
    log_chi = {
        z: float(np.log(np.abs(distorting_cf(resource, z, "gaussian")))) for z in (1, 1j, 1 + 1j)
    }
    spp = -log_chi[1]
    sqq = -log_chi[1j]
    sqp = 0.5 * (sqq + spp + log_chi[1 + 1j])
    return CovMatrix2(sqq, sqp, spp)


# --- resource correlations -------------------------------------------------

_QUAD = {"q": position, "p": momentum}


def _fock_expect(rho, factors):
    """``<prod>`` for ``factors`` = [(factory, mode), ...] with exact single-mode products."""
    d = rho.dim
    per_mode = {1: [], 2: []}
    for make, mode in factors:
        per_mode[mode].append(make)
    mats = []
    for mode in (1, 2):
        mats.append(exact_product(*per_mode[mode], dim=d).mat if per_mode[mode] else np.eye(d))
    op = np.kron(mats[0], mats[1])
    return complex(np.sum(rho.mat.T * op))


def resource_cm(resource, path="auto"):
    """4x4 symmetrised quadrature correlation matrix in (q1, p1, q2, p2) order."""
    resource = State.wrap(resource)
    if path == "gaussian" or (path == "auto" and resource.gaussian is not None):
        g = resource.gaussian
        return np.array(g.cm) + np.outer(g.mean, g.mean)
    rho = resource.fock
    labels = [("q", 1), ("p", 1), ("q", 2), ("p", 2)]
    out = np.zeros((4, 4))
    for i, (x, mi) in enumerate(labels):
        for j, (y, mj) in enumerate(labels):
            if j < i:
                continue
            fx, fy = _QUAD[x], _QUAD[y]
            if mi == mj:
                val = 0.5 * (_fock_expect(rho, [(fx, mi), (fy, mj)])
                             + _fock_expect(rho, [(fy, mj), (fx, mi)])).real
            else:
                val = _fock_expect(rho, [(fx, mi), (fy, mj)]).real
            out[i, j] = out[j, i] = val
    return out


def require_undisplaced(resource, tol=UNDISPLACED_TOL):
    means = State.wrap(resource).first_moments()
    worst = float(np.max(np.abs(means)))
    if worst > tol:
        raise DisplacedResourceError(
            "resource must be undisplaced for the CM/EPR formulas",
            module="teleport", check="undisplaced", defect=worst, tolerance=tol,
        )


def cm_from_resource(resource, path="auto"):
    """CM of ``rho_M`` from the resource's second moments."""
    require_undisplaced(resource)
    s = resource_cm(resource, path)
    q1, p1, q2, p2 = 0, 1, 2, 3
    sqq = 0.5 + s[q2, q2] + s[q1, q1] - 2 * s[q1, q2]
    sqp = s[q2, p2] - s[q1, p1] + s[q2, p1] - s[q1, p2]
    spp = 0.5 + s[p2, p2] + s[p1, p1] + 2 * s[p1, p2]
    return CovMatrix2(float(sqq), float(sqp), float(spp))


def qp_correlators(resource):
    """``(<Q^2>, <P^2>, sym<QP>)`` with ``Q = q2 - q1`` and ``P = p1 + p2`` as Fock matrices."""
    rho = State.wrap(resource).fock
    d = rho.dim
    eye = np.eye(d)
    pad = d + 2
    q, p = position(pad).mat, momentum(pad).mat
    # same-mode squares need the padded products
    qq, pp = (q @ q)[:d, :d], (p @ p)[:d, :d]
    qp = (0.5 * (q @ p + p @ q))[:d, :d]
    qd, pd = q[:d, :d], p[:d, :d]
    Q2 = np.kron(eye, qq) + np.kron(qq, eye) - 2 * np.kron(qd, qd)
    P2 = np.kron(pp, eye) + np.kron(eye, pp) + 2 * np.kron(pd, pd)
    # sym(QP) = q2 p1 + sym(q2 p2) - sym(q1 p1) - q1 p2
    QP = np.kron(pd, qd) + np.kron(eye, qp) - np.kron(qp, eye) - np.kron(qd, pd)

    def ev(op):
        return float(np.sum(rho.mat.T * op).real)

    return ev(Q2), ev(P2), ev(QP)


def epr_uncertainty(resource, path="auto"):
    """``(<(q2 - q1)^2> + <(p1 + p2)^2>) / 2`` of an undisplaced two-mode state."""
    require_undisplaced(resource)
    s = resource_cm(resource, path)
    q1, p1, q2, p2 = 0, 1, 2, 3
    return float(0.5 * (s[q2, q2] + s[q1, q1] - 2 * s[q1, q2] + s[p1, p1] + s[p2, p2] + 2 * s[p1, p2]))


def added_noise(resource, numerics=None, path="auto"):
    """Mean photon number of ``rho_M``."""
    resource = State.wrap(resource)
    if path == "gaussian" or (path == "auto" and resource.gaussian is not None):
        return distorting_cm_gaussian(resource).mean_photon_number()
    return moments_from_state(distorting_state_adaptive(resource, numerics, path="fock").rho).n


def moment_relations_check(resource, numerics=None, path="fock"):
    """Compare ``<a^2>_M`` and ``<a^dag a>_M`` with their resource-moment expressions."""
    resource = State.wrap(resource)
    require_undisplaced(resource)
    rho_ab = resource.fock
    mom = moments_from_state(distorting_state_adaptive(resource, numerics, path=path).rho)

    def ev(*factors):
        return _fock_expect(rho_ab, list(factors))

    a, ad = annihilation, creation
    rhs_a2 = ev((a, 2), (a, 2)) + ev((ad, 1), (ad, 1)) - 2 * ev((ad, 1), (a, 2))
    rhs_n = 1 + ev((ad, 1), (a, 1)) + ev((ad, 2), (a, 2)) - ev((a, 1), (a, 2)) - ev((ad, 1), (ad, 2))
    return {
        "a2_M": mom.a2,
        "a2_resource": rhs_a2,
        "a2_defect": abs(mom.a2 - rhs_a2),
        "n_M": mom.n,
        "n_resource": rhs_n.real,
        "n_defect": abs(mom.n - rhs_n),
    }


# --- fidelities ------------------------------------------------------------


def fidelity_coherent(resource, numerics=None, path="auto"):
    """Coherent-input teleportation fidelity by lattice quadrature of the resource factor."""
    num = numerics or Numerics()
    grid = sample_grid(lambda lam: np.exp(-np.abs(lam) ** 2) * resource_factor(resource, lam, path),
                       num.L, num.h, meta="f_coh")
    return float((np.sum(grid.values) * num.h**2 / np.pi).real)


def q_function(rho, alpha=0.0):
    """``<alpha|rho|alpha>`` (no 1/pi factor)."""
    from .gaussian import coherent_amplitudes

    v = coherent_amplitudes(complex(alpha), rho.dim)
    return float(np.real(np.vdot(v, rho.mat @ v)))


def _psd_sqrt(m):
    w, v = np.linalg.eigh(0.5 * (m + m.conj().T))
    return (v * np.sqrt(np.clip(w, 0, None))) @ v.conj().T


def fidelity(rho_a, rho_b):
    """Uhlmann fidelity ``(tr sqrt(sqrt(a) b sqrt(a)))^2``."""
    if rho_a.dim != rho_b.dim or rho_a.modes != rho_b.modes:
        raise DimensionError("fidelity needs states of equal dimension", module="teleport",
                             check="dim")
    s = _psd_sqrt(rho_a.mat)
    w = np.linalg.eigvalsh(s @ rho_b.mat @ s)
    return float(np.sum(np.sqrt(np.clip(w, 0, None))) ** 2)


def cf_overlap(grid_a, grid_b):
    """``(1/pi) sum conj(chi_a) chi_b h^2``, i.e. ``tr(rho_a rho_b)`` on the lattice."""
    if grid_a.values.shape != grid_b.values.shape or grid_a.h != grid_b.h:
        raise DimensionError("grids differ", module="teleport", check="grid")
    return float((np.sum(grid_a.values.conj() * grid_b.values) * grid_a.h**2 / np.pi).real)


# --- report ----------------------------------------------------------------

REPORT_KEYS = (
    "schema_version", "input", "resource", "numerics", "cf_path",
    "added_noise", "delta_epr", "noise_epr_defect",
    "cm_sqq", "cm_sqp", "cm_spp", "det_cm", "min_eig_cm_minus_half",
    "f_coh", "q_m0", "f_in_out", "overlap_in_out",
    "defect_output_hermiticity", "defect_output_trace", "defect_output_min_eig",
    "defect_distorting_hermiticity", "defect_distorting_trace", "defect_distorting_min_eig",
    "oracle_fidelity", "probability_deficit",
)


@dataclass
class ProtocolReport:
    input: str
    resource: str
    numerics: dict
    cf_path: str
    added_noise: float
    delta_epr: float | None
    noise_epr_defect: float | None
    cm_M: CovMatrix2
    det_cm: float
    min_eig_cm_minus_half: float
    f_coh: float | None
    q_m0: float
    f_in_out: float
    overlap_in_out: float
    reconstruction_defects: dict
    oracle_fidelity: float | None = None
    probability_deficit: float | None = None

    def flat(self):
        """Flat dict in the frozen ``REPORT_KEYS`` order."""
        d = self.reconstruction_defects
        row = {
            "schema_version": SCHEMA_VERSION,
            "input": self.input,
            "resource": self.resource,
            "numerics": json.dumps(self.numerics, sort_keys=True),
            "cf_path": self.cf_path,
            "added_noise": self.added_noise,
            "delta_epr": self.delta_epr,
            "noise_epr_defect": self.noise_epr_defect,
            "cm_sqq": self.cm_M.sqq,
            "cm_sqp": self.cm_M.sqp,
            "cm_spp": self.cm_M.spp,
            "det_cm": self.det_cm,
            "min_eig_cm_minus_half": self.min_eig_cm_minus_half,
            "f_coh": self.f_coh,
            "q_m0": self.q_m0,
            "f_in_out": self.f_in_out,
            "overlap_in_out": self.overlap_in_out,
            "oracle_fidelity": self.oracle_fidelity,
            "probability_deficit": self.probability_deficit,
        }
        for which in ("output", "distorting"):
            for k, name in (("hermiticity", "hermiticity"), ("trace", "trace"),
                            ("min_eigenvalue", "min_eig")):
                row[f"defect_{which}_{name}"] = d.get(which, {}).get(k)
        return {k: row[k] for k in REPORT_KEYS}

    def to_json(self):
        row = self.flat()
        row["numerics"] = self.numerics
        return json.dumps(row, indent=2)

    def to_csv(self, header=True):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        if header:
            writer.writerow(REPORT_KEYS)
        writer.writerow(["" if v is None else (repr(float(v)) if isinstance(v, float) else v)
                         for v in self.flat().values()])
        return buf.getvalue()


def is_coherent_like(state):
    """True for vacuum/coherent inputs (isotropic CM 1/2, pure)."""
    g = State.wrap(state).gaussian
    return g is not None and g.modes == 1 and np.allclose(g.cm, 0.5 * np.eye(2), atol=1e-12)


def run_protocol(job, path="auto"):
    """Run the product-law pipeline and collect every metric into a report."""
    num = job.numerics
    tel = teleport_cf(job, path)
    dist = distorting_state_adaptive(job.resource, num, path)
    rho_in = job.input.fock_at(num.trunc)
    in_grid = sample_grid(lambda lam: state_cf(job.input, lam, path), num.L, num.h, meta="input")

    try:
        require_undisplaced(job.resource)
        undisplaced = True
    except DisplacedResourceError:
        undisplaced = False

    resource = job.resource
    use_gauss = path == "gaussian" or (path == "auto" and resource.gaussian is not None)
    if undisplaced:
        cm = cm_from_resource(resource, path)
        delta = epr_uncertainty(resource, path)
    else:
        cm = moments_from_state(dist.rho).cm
        delta = None
    noise = (distorting_cm_gaussian(resource).mean_photon_number() if use_gauss
             else moments_from_state(dist.rho).n)
    f_coh = fidelity_coherent(resource, num, path) if is_coherent_like(job.input) else None

    return ProtocolReport(
        input=job.input_spec or job.input.label,
        resource=job.resource_spec or job.resource.label,
        numerics=asdict(num),
        cf_path="gaussian" if use_gauss else "fock",
        added_noise=float(noise),
        delta_epr=delta,
        noise_epr_defect=None if delta is None else abs(noise - delta),
        cm_M=cm,
        det_cm=cm.det,
        min_eig_cm_minus_half=cm.min_eig_minus_half(),
        f_coh=f_coh,
        q_m0=q_function(dist.rho, 0.0),
        f_in_out=fidelity(rho_in, tel.rho),
        overlap_in_out=cf_overlap(in_grid, tel.grid),
        reconstruction_defects={"output": tel.defects, "distorting": dist.defects},
    )
