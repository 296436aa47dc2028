import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cvtele import gaussian as gs
from cvtele import teleport as tp
from cvtele.cf import moments_from_state
from cvtele.errors import DimensionError, DisplacedResourceError
from cvtele.fock import FockDensityMatrix, tensor
from cvtele.handle import State
from cvtele.states import build
from reference import coherent_ket, thermal_matrix

NUM = tp.Numerics(trunc=20, L=6.0, h=0.1)


def _job(inp, res, num=NUM):
    return tp.TeleportJob(build(inp, num.trunc), build(res, num.trunc), num, inp, res)


def test_vacuum_through_two_mode_vacuum_is_thermal():
    out = tp.teleport_cf(_job("vacuum", "two-mode-vacuum"))
    lam = out.grid.points()
    assert np.max(np.abs(out.grid.values - np.exp(-1.5 * np.abs(lam) ** 2))) <= 1e-12
    assert tp.fidelity(FockDensityMatrix(thermal_matrix(1.0, 20) / np.sum(thermal_matrix(1.0, 20))),
                       out.rho) >= 0.9999


def test_strong_squeezing_approaches_ideal():
    # r = 2 needs far more than 35 levels in Fock form, so the resource stays Gaussian
    num = tp.Numerics(trunc=35, L=6.0, h=0.1)
    alpha = 0.3 + 0.2j
    job = tp.TeleportJob(build("coherent:0.3+0.2i", 35), State(gaussian=gs.svs(2.0)), num)
    out = tp.teleport_cf(job)
    f = tp.fidelity(FockDensityMatrix.from_ket(coherent_ket(alpha, 35)), out.rho)
    assert f >= 0.95
    assert f == pytest.approx(1 / (1 + math.exp(-4)), abs=1e-6)


@pytest.mark.parametrize("inp,res", [("vacuum", "svs:r=0.4"), ("fock:1", "psub-svs:r=0.4"),
                                     ("cat:alpha=1,parity=even", "two-mode-vacuum")])
def test_output_cf_normalized(inp, res):
    out = tp.teleport_cf(_job(inp, res))
    assert out.grid.origin() == pytest.approx(1.0, abs=1e-12)


def test_job_mode_check():
    with pytest.raises(DimensionError):
        tp.TeleportJob(build("svs:r=0.4", 8), build("svs:r=0.4", 8))


def test_distorting_state_tmv_is_thermal():
    rho = tp.distorting_state(build("two-mode-vacuum", 20), NUM)
    ref = thermal_matrix(1.0, 20)
    assert tp.fidelity(FockDensityMatrix(ref / np.trace(ref)), rho) >= 0.9999
    assert rho.trace == pytest.approx(1.0, abs=1e-12)


def test_distorting_state_svs_cm():
    cm = moments_from_state(tp.distorting_state(build("svs:r=0.4", 25), tp.Numerics(trunc=25))).cm
    target = 0.5 + math.exp(-0.8)
    assert cm.sqq == pytest.approx(target, abs=1e-9)
    assert cm.spp == pytest.approx(target, abs=1e-9)
    assert cm.sqp == pytest.approx(0.0, abs=1e-9)


def test_adaptive_cutoff_grows_for_hot_distorting_states():
    rec = tp.distorting_state_adaptive(build("bell:c0=0.6,c1=0.5,c2=0.3+0.4i", 20),
                                       tp.Numerics(trunc=20, h=0.08))
    assert rec.defects["dim"] > 20
    assert rec.defects["tail"] <= 1e-12


def test_cm_from_resource_tmv():
    cm = tp.cm_from_resource(build("two-mode-vacuum", 10))
    assert (cm.sqq, cm.sqp, cm.spp) == pytest.approx((1.5, 0.0, 1.5), abs=1e-15)


@pytest.mark.parametrize("path", ["gaussian", "fock"])
def test_cm_from_resource_svs(path):
    cm = tp.cm_from_resource(build("svs:r=0.4", 30), path)
    assert cm.sqq == pytest.approx(0.5 + math.cosh(0.8) - math.sinh(0.8), abs=1e-9)
    assert cm.spp == pytest.approx(0.5 + math.exp(-0.8), abs=1e-9)


def test_cm_from_resource_psub_matches_distorting_state():
    res = build("psub-svs:r=0.4", 25)
    cm = tp.cm_from_resource(res, "fock")
    cm_rho = moments_from_state(tp.distorting_state_adaptive(res, tp.Numerics(trunc=20, h=0.08)).rho).cm
    assert np.max(np.abs(cm.as_array() - cm_rho.as_array())) <= 1e-6


def test_displaced_resource_rejected():
    a = FockDensityMatrix.from_ket(coherent_ket(0.5, 12) / np.linalg.norm(coherent_ket(0.5, 12)))
    res = State(fock=tensor(a, FockDensityMatrix.vacuum(12)))
    with pytest.raises(DisplacedResourceError):
        tp.cm_from_resource(res)
    with pytest.raises(DisplacedResourceError):
        tp.epr_uncertainty(res)
    # teleportation itself still runs
    out = tp.teleport_cf(tp.TeleportJob(build("vacuum", 12), res, tp.Numerics(trunc=12)))
    assert out.grid.origin() == pytest.approx(1.0)


def test_moment_relations_tmv():
    rel = tp.moment_relations_check(build("two-mode-vacuum", 10), NUM)
    assert rel["n_resource"] == pytest.approx(1.0, abs=1e-15)
    assert rel["n_defect"] <= 1e-9


def test_moment_relations_svs():
    rel = tp.moment_relations_check(build("svs:r=0.4", 25), NUM)
    r = 0.4
    closed = 1 + 2 * math.sinh(r) ** 2 - 2 * math.cosh(r) * math.sinh(r)
    assert closed == pytest.approx(math.exp(-0.8), abs=1e-15)
    assert rel["n_resource"] == pytest.approx(closed, abs=1e-9)
    assert rel["n_M"] == pytest.approx(closed, abs=1e-9)


def test_moment_relations_psub():
    rel = tp.moment_relations_check(build("psub-svs:r=0.4", 25), tp.Numerics(trunc=20, h=0.08))
    assert max(rel["a2_defect"], rel["n_defect"]) <= 1e-6


def test_epr_uncertainty_values():
    assert tp.epr_uncertainty(build("two-mode-vacuum", 6)) == pytest.approx(1.0, abs=1e-15)
    assert tp.epr_uncertainty(build("svs:r=0.4", 30), "gaussian") == pytest.approx(0.449329, abs=1e-6)
    assert tp.epr_uncertainty(build("svs:r=0.4", 30), "fock") == pytest.approx(math.exp(-0.8), abs=1e-8)


def test_added_noise_values():
    assert tp.added_noise(build("two-mode-vacuum", 6), path="gaussian") == pytest.approx(1.0, abs=1e-12)
    assert tp.added_noise(build("svs:r=0.4", 30), path="gaussian") == pytest.approx(math.exp(-0.8), abs=1e-12)


def test_added_noise_psub_fock_path():
    res = build("psub-svs:r=0.4", 25)
    noise = tp.added_noise(res, tp.Numerics(trunc=25, L=6, h=0.08), path="fock")
    assert abs(noise - tp.epr_uncertainty(res, "fock")) <= 1e-6


def test_fidelity_coherent_values():
    assert tp.fidelity_coherent(build("two-mode-vacuum", 6), NUM) == pytest.approx(0.5, abs=1e-9)
    assert tp.fidelity_coherent(build("svs:r=0.4", 20), NUM) == pytest.approx(0.689974, abs=1e-6)


@pytest.mark.parametrize("spec", ["two-mode-vacuum", "svs:r=0.4", "psub-svs:r=0.4"])
def test_fidelity_coherent_equals_q_at_origin(spec):
    res = build(spec, 25)
    f = tp.fidelity_coherent(res, NUM, path="fock")
    assert 0 < f <= 1
    assert f == pytest.approx(tp.q_function(tp.distorting_state(res, NUM, "fock"), 0.0), abs=1e-6)


def test_fidelity_basics(rng):
    from reference import random_density

    rho = FockDensityMatrix(random_density(6, rng))
    assert tp.fidelity(rho, rho) == pytest.approx(1.0, abs=1e-10)
    th = FockDensityMatrix(thermal_matrix(1.0, 40) / np.sum(thermal_matrix(1.0, 40)))
    assert tp.fidelity(FockDensityMatrix.vacuum(40), th) == pytest.approx(0.5, abs=1e-10)
    with pytest.raises(DimensionError):
        tp.fidelity(FockDensityMatrix.vacuum(4), FockDensityMatrix.vacuum(5))


def test_cf_overlap_matches_trace_product():
    job = _job("coherent:0.3+0.2i", "svs:r=0.4")
    out = tp.teleport_cf(job)
    from cvtele.cf import cf_eval, sample_grid

    rho_in = job.input.fock
    in_grid = sample_grid(lambda lam: cf_eval(rho_in, lam), NUM.L, NUM.h)
    direct = float(np.real(np.trace(rho_in.mat @ out.rho.mat)))
    assert tp.cf_overlap(in_grid, out.grid) == pytest.approx(direct, abs=1e-6)


def test_svs_monotone_in_r():
    rs = [0.0, 0.2, 0.4, 0.6, 0.8, 1.0]
    res = [State(gaussian=gs.svs(r)) for r in rs]
    f = [tp.fidelity_coherent(s, NUM) for s in res]
    n = [tp.added_noise(s) for s in res]
    assert all(b > a for a, b in zip(f, f[1:]))
    assert all(b < a for a, b in zip(n, n[1:]))


def test_report_schema_and_invariants():
    rep = tp.run_protocol(_job("coherent:0.3+0.2i", "svs:r=0.4"))
    flat = rep.flat()
    assert tuple(flat) == tp.REPORT_KEYS
    assert flat["schema_version"] == tp.SCHEMA_VERSION
    assert flat["added_noise"] >= 0
    assert flat["det_cm"] >= 0.25 - 1e-9
    assert flat["min_eig_cm_minus_half"] >= -1e-9
    assert flat["f_coh"] == pytest.approx(1 / (1 + math.exp(-0.8)), abs=1e-6)
    assert json.loads(rep.to_json())["resource"] == "svs:r=0.4"
    header, row = rep.to_csv().splitlines()
    assert header.split(",")[:3] == ["schema_version", "input", "resource"]


def test_report_non_coherent_input_has_no_f_coh():
    rep = tp.run_protocol(_job("fock:1", "two-mode-vacuum", tp.Numerics(trunc=12)))
    assert rep.f_coh is None
    assert rep.added_noise == pytest.approx(1.0, abs=1e-10)


def test_numerics_validation():
    with pytest.raises(ValueError):
        tp.Numerics(h=0)
    with pytest.raises(ValueError):
        tp.Numerics(L=1, h=2)
    with pytest.raises(ValueError):
        tp.Numerics(trunc=1)


@settings(max_examples=15, deadline=None)
@given(st.floats(0.0, 1.2))
def test_noise_equals_epr_gaussian_property(r):
    s = State(gaussian=gs.svs(r))
    assert abs(tp.added_noise(s) - tp.epr_uncertainty(s)) <= 1e-8
    cm = tp.cm_from_resource(s)
    assert cm.det >= 0.25 - 1e-9 and cm.min_eig_minus_half() >= -1e-9
