import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cvtele import states as sl
from cvtele.cf import moments_from_state
from cvtele.errors import CVTeleError, SpecParseError, TruncationError
from cvtele.fock import FockDensityMatrix, annihilation, expect
from reference import svs_coefficients, thermal_matrix

GRAMMAR = ["coherent:0.3+0.2i", "svs:r=0.4", "psub-svs:r=0.4", "fock:2", "thermal:n=1",
           "cat:alpha=1,parity=even", "bell:c0=0.8,c1=0.6"]


@pytest.mark.parametrize("text", GRAMMAR + ["vacuum", "two-mode-vacuum"])
def test_grammar_roundtrip(text):
    spec = sl.parse_spec(text)
    assert str(spec) == text
    assert sl.parse_spec(str(spec)) == spec


def test_aliases_and_complex_bell():
    assert sl.parse_spec("tmv").kind == "two-mode-vacuum"
    spec = sl.parse_spec("bell:c0=0.6,c1=0.5,c2=0.3+0.4i")
    assert spec.param("c2") == 0.3 + 0.4j


@pytest.mark.parametrize("bad", ["cohrent:1", "svs", "svs:r=-1", "fock:1.5", "cat:alpha=1,parity=odd2",
                                 "bell:x0=1", "vacuum:1", "svs:r=abc"])
def test_malformed_specs(bad):
    with pytest.raises(SpecParseError):
        sl.parse_spec(bad)


def test_svs_zero_is_two_mode_vacuum():
    a = sl.build("svs:r=0", 8).fock.mat
    b = sl.build("two-mode-vacuum", 8).fock.mat
    assert np.allclose(a, b)


def test_psub_svs_is_subtracted_series():
    # a1 a2 applied to the SVS Schmidt series, truncated and renormalised by hand
    N, r = 25, 0.4
    c = svs_coefficients(r, N + 1)
    d = np.array([(m + 1) * c[m + 1] for m in range(N)])
    d /= np.linalg.norm(d)
    ket = np.zeros((N, N))
    ket[np.arange(N), np.arange(N)] = d
    ref = np.outer(ket.ravel(), ket.ravel())
    assert np.max(np.abs(sl.build("psub-svs:r=0.4", N).fock.mat - ref)) <= 1e-10


def test_psub_population_guard_uses_full_norm():
    with pytest.raises(TruncationError):
        sl.build("psub-svs:r=0.9", 20)


def test_cat_parity_mean_zero():
    rho = sl.build("cat:alpha=1,parity=even", 20).fock
    assert abs(expect(rho, annihilation(20))) <= 1e-14


def test_thermal_matches_geometric_series():
    rho = sl.build("thermal:n=1", 40).fock
    ref = thermal_matrix(1.0, 40)
    assert np.max(np.abs(rho.mat - ref / np.trace(ref))) <= 1e-14


def test_fock_level_beyond_cutoff():
    with pytest.raises(TruncationError):
        sl.build("fock:5", 5)


def test_gaussian_kinds_carry_both_forms():
    for text in ("vacuum", "coherent:0.3+0.2i", "thermal:n=1", "svs:r=0.4", "two-mode-vacuum"):
        s = sl.build(text, 20)
        assert s.gaussian is not None and s.fock is not None


@pytest.mark.parametrize("text", GRAMMAR)
def test_catalog_invariants(text):
    s = sl.build(text, 25)
    s.fock.validate()


def test_product_state_entropy_zero():
    rec = sl.schmidt_entropy(sl.build("bell:c0=1", 10))
    assert rec.entropy == 0.0
    assert rec.delta_epr >= 1 - 1e-6


def test_svs_entropy_closed_form_vs_svd():
    r = 0.5
    closed = math.cosh(r) ** 2 * math.log2(math.cosh(r) ** 2) - math.sinh(r) ** 2 * math.log2(math.sinh(r) ** 2)
    assert sl.svs_entropy(r) == pytest.approx(closed, abs=1e-15)
    rec = sl.schmidt_entropy(sl.build("svs:r=0.5", 60))
    assert rec.entropy == pytest.approx(closed, abs=1e-8)
    assert np.sum(rec.schmidt**2) == pytest.approx(1.0, abs=1e-8)


def test_bell_pair_entropy_and_epr():
    c = 1 / math.sqrt(2)
    rec = sl.schmidt_entropy(sl.build(f"bell:c0={c!r},c1={c!r}", 6))
    assert rec.entropy == pytest.approx(1.0, abs=1e-12)
    # <a1 a2> = 1/2 and <n1> = <n2> = 1/2 give 1 + 1 - 2*(1/2) = 1
    assert rec.delta_epr == pytest.approx(1.0, abs=1e-12)


def test_schmidt_needs_pure_state():
    rho = FockDensityMatrix(np.eye(16) / 16, modes=2)
    with pytest.raises(CVTeleError):
        sl.schmidt_entropy(rho)


def test_sampling_is_deterministic_and_pure():
    a = sl.sample_pure_resources(30, 7)
    b = sl.sample_pure_resources(30, 7)
    assert [str(x) for x in a] == [str(x) for x in b]
    assert {x.kind for x in a} == {"bell", "psub-svs"}
    for spec in a:
        s = sl.build(spec)
        assert s.fock.purity() >= 1 - 1e-8
        assert np.max(np.abs(s.first_moments())) <= 1e-12
        if spec.kind == "bell":
            assert len(spec.params) <= 6


def test_sampling_count_check():
    with pytest.raises(ValueError):
        sl.sample_pure_resources(0, 1)


def test_svs_inversion_roundtrip():
    for r in (0.05, 0.4, 1.3):
        assert sl.svs_r_for_entropy(sl.svs_entropy(r)) == pytest.approx(r, abs=1e-12)
    assert sl.svs_frontier(0.0) == 1.0


def test_frontier_point_svs_on_curve():
    p = sl.frontier_point("svs:r=0.4", 40)
    assert abs(p.delta_epr - p.frontier) <= 1e-8
    assert not p.violation


def test_frontier_point_product_state():
    p = sl.frontier_point("two-mode-vacuum", 10)
    assert p.entropy == 0.0 and p.delta_epr >= 1 - 1e-6 and not p.violation


def test_svs_profile_detection():
    r = 0.4
    s = svs_coefficients(r, 40)
    assert sl.is_svs_profile(s, sl.svs_entropy(r))
    assert not sl.is_svs_profile(np.array([0.8, 0.6]), sl.entropy_bits([0.8, 0.6]))


@given(st.lists(st.floats(0.05, 1.0), min_size=1, max_size=6), st.integers(0, 2**31 - 1))
def test_entropy_properties(mags, seed):
    phases = np.exp(2j * np.pi * np.random.default_rng(seed).random(len(mags)))
    c = np.array(mags) * phases
    c /= np.linalg.norm(c)
    params = ",".join(f"c{k}={sl.format_complex(complex(v))}" for k, v in enumerate(c))
    rec = sl.schmidt_entropy(sl.build(f"bell:{params}", 8))
    assert rec.entropy >= -1e-12
    assert np.sum(rec.schmidt**2) == pytest.approx(1.0, abs=1e-8)
    assert rec.delta_epr >= sl.svs_frontier(rec.entropy) - 1e-6


@settings(max_examples=8, deadline=None)
@given(st.floats(0.0, 0.5))
def test_double_representation_svs_moments(r):
    from cvtele import teleport as tp

    s = sl.build(f"svs:r={r!r}", 32)
    assert tp.resource_cm(s, "fock") == pytest.approx(tp.resource_cm(s, "gaussian"), abs=1e-8)


def test_moments_of_coherent_state():
    m = moments_from_state(sl.build("coherent:0.3+0.2i", 25).fock)
    assert m.a == pytest.approx(0.3 + 0.2j, abs=1e-12)
