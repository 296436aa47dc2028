"""Verification matrix shared by ``cvtele verify`` and the acceptance tests."""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass

import numpy as np

from . import oracle as orc
from . import teleport as tp
from .cf import moments_from_state
from .states import build

DEFAULT_INPUTS = ("vacuum", "coherent:0.3+0.2i", "fock:1")
DEFAULT_RESOURCES = ("two-mode-vacuum", "svs:r=0.4", "psub-svs:r=0.4")

TOL = {
    "factorization": 0.005,  # 1 - fidelity
    "noise_epr_gaussian": 1e-8,
    "noise_epr_fock": 1e-5,
    "cm_pipeline": 1e-6,
    "robertson_schrodinger": 1e-9,
    "no_squeezing": 1e-9,
    "qp_consistency": 1e-8,
    "moment_relations": 1e-6,
    "fidelity_identity": 1e-6,
}


@dataclass
class Check:
    module: str
    check: str
    subject: str
    defect: float
    tolerance: float
    passed: bool
    seconds: float = 0.0

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.check:<22} {self.subject:<40} defect={self.defect:.3e} tol={self.tolerance:.1e}"

    def to_dict(self):
        return asdict(self)


def _check(module, name, subject, defect, tol=None, t0=None):
    tol = TOL[name] if tol is None else tol
    defect = float(defect)
    return Check(module, name, subject, defect, tol, bool(defect <= tol),
                 0.0 if t0 is None else round(time.perf_counter() - t0, 3))


def factorization_check(input_spec, resource_spec, trunc=12, L=6.0, h=0.1, L_m=6.0, d_m=0.1,
                        gain="sqrt2", L_eta=8.0, d_eta=0.05):
    """Oracle vs product-law fidelity for one (input, resource) cell."""
    t0 = time.perf_counter()
    inp = build(input_spec, trunc)
    res = build(resource_spec, trunc)
    num = tp.Numerics(trunc=trunc, L=L, h=h, L_m=L_m, d_m=d_m, L_eta=L_eta, d_eta=d_eta)
    fact = tp.teleport_cf(tp.TeleportJob(inp, res, num))
    ora = orc.oracle_teleport_full(inp, res, L_m, d_m, gain, L_eta, d_eta)
    fid = tp.fidelity(ora.rho, fact.rho)
    chk = _check("oracle", "factorization", f"{input_spec} | {resource_spec} | gain={gain}",
                 1.0 - fid, t0=t0)
    return chk, fid


def resource_checks(resource_spec, dim=25, trunc_m=20, L=6.0, h=0.08):
    """Noise-vs-EPR, CM pipeline, uncertainty and fidelity-identity checks for one resource."""
    res = build(resource_spec, dim)
    num = tp.Numerics(trunc=trunc_m, L=L, h=h)
    out = []

    t0 = time.perf_counter()
    delta = tp.epr_uncertainty(res, path="fock")
    noise = tp.added_noise(res, num, path="fock")
    out.append(_check("teleport", "noise_epr_fock", resource_spec, abs(noise - delta), t0=t0))
    if res.gaussian is not None:
        t0 = time.perf_counter()
        d_g = tp.epr_uncertainty(res, path="gaussian")
        n_g = tp.added_noise(res, path="gaussian")
        out.append(_check("teleport", "noise_epr_gaussian", resource_spec, abs(n_g - d_g), t0=t0))

    t0 = time.perf_counter()
    dist = tp.distorting_state_adaptive(res, num, path="fock").rho
    cm = tp.cm_from_resource(res, path="fock")
    cm_rho = moments_from_state(dist).cm
    out.append(_check("teleport", "cm_pipeline", resource_spec,
                      np.max(np.abs(cm.as_array() - cm_rho.as_array())), t0=t0))
    out.append(_check("teleport", "robertson_schrodinger", resource_spec, max(0.0, 0.25 - cm.det)))
    out.append(_check("teleport", "no_squeezing", resource_spec, max(0.0, -cm.min_eig_minus_half())))

    Q2, P2, QP = tp.qp_correlators(res)
    out.append(_check("teleport", "qp_consistency", resource_spec,
                      max(abs(cm.sqq - 0.5 - Q2), abs(cm.spp - 0.5 - P2), abs(cm.sqp - QP))))

    t0 = time.perf_counter()
    rel = tp.moment_relations_check(res, num)
    out.append(_check("teleport", "moment_relations", resource_spec,
                      max(rel["a2_defect"], rel["n_defect"]), t0=t0))

    t0 = time.perf_counter()
    f_coh = tp.fidelity_coherent(res, num, path="fock")
    out.append(_check("teleport", "fidelity_identity", resource_spec,
                      abs(f_coh - tp.q_function(dist, 0.0)), t0=t0))
    return out


def run_suite(inputs=DEFAULT_INPUTS, resources=DEFAULT_RESOURCES, trunc=12, L=6.0, h=0.1,
              L_m=6.0, d_m=0.1, gain="sqrt2", resource_dim=25, trunc_m=20, log=None):
    checks = []

    def emit(c):
        checks.append(c)
        if log is not None:
            log(c.line())

    for r in resources:
        for c in resource_checks(r, dim=resource_dim, trunc_m=trunc_m):
            emit(c)
    for i in inputs:
        for r in resources:
            emit(factorization_check(i, r, trunc=trunc, L=L, h=h, L_m=L_m, d_m=d_m, gain=gain)[0])
    return checks
