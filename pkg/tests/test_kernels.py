import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cvtele import kernels
from reference import displacement_expm, random_density

IMPLS = [pytest.param(kernels.python_impl, id="numpy")]
if kernels.compiled_impl is not None:
    IMPLS.append(pytest.param(kernels.compiled_impl, id="cython"))


@pytest.mark.parametrize("impl", IMPLS)
def test_displacement_batch_matches_expm(impl):
    alphas = np.array([0.0, 0.3 + 0.2j, -1.5 + 0.7j, 3.0j])
    D = impl.displacement_batch(alphas, 15)
    for a, m in zip(alphas, D):
        assert np.max(np.abs(m - displacement_expm(a, 15))) <= 1e-12


@pytest.mark.parametrize("impl", IMPLS)
def test_cf_trace_batch(impl, rng):
    rho = random_density(8, rng)
    alphas = rng.normal(size=7) + 1j * rng.normal(size=7)
    ref = [np.trace(rho @ displacement_expm(a, 8)) for a in alphas]
    assert np.allclose(impl.cf_trace_batch(rho, alphas), ref, atol=1e-12)


@pytest.mark.parametrize("impl", IMPLS)
def test_weyl_sum(impl, rng):
    alphas = rng.normal(size=9) + 1j * rng.normal(size=9)
    w = rng.normal(size=9) + 1j * rng.normal(size=9)
    ref = sum(wk * displacement_expm(a, 6) for a, wk in zip(alphas, w))
    assert np.allclose(impl.weyl_sum(alphas, w, 6), ref, atol=1e-12)


@pytest.mark.parametrize("impl", IMPLS)
def test_read_only_inputs(impl):
    rho = np.eye(4, dtype=complex) / 4
    a = np.array([0.1 + 0.1j])
    rho.setflags(write=False)
    a.setflags(write=False)
    impl.cf_trace_batch(rho, a)
    impl.weyl_sum(a, a, 4)
    impl.displacement_batch(a, 4)


@pytest.mark.skipif(kernels.compiled_impl is None, reason="extension not built")
@given(st.lists(st.complex_numbers(max_magnitude=4, allow_nan=False, allow_infinity=False),
                min_size=1, max_size=20), st.integers(2, 16))
def test_backends_agree(alphas, dim):
    a = np.array(alphas, dtype=complex)
    assert np.allclose(kernels.compiled_impl.displacement_batch(a, dim),
                       kernels.python_impl.displacement_batch(a, dim), atol=1e-12)
    w = np.linspace(-1, 1, a.size) + 0.5j
    assert np.allclose(kernels.compiled_impl.weyl_sum(a, w, dim),
                       kernels.python_impl.weyl_sum(a, w, dim), atol=1e-12)


def test_pure_python_switch():
    env = dict(os.environ, CVTELE_PURE_PYTHON="1")
    out = subprocess.run(
        [sys.executable, "-c",
         "from cvtele import kernels, teleport as tp, states;"
         "print(kernels.BACKEND);"
         "print(tp.fidelity_coherent(states.build('svs:r=0.4', 10), tp.Numerics(trunc=10)))"],
        env=env, capture_output=True, text=True, check=True,
    )
    backend, value = out.stdout.split()
    assert backend == "numpy"
    assert float(value) == pytest.approx(0.6899744811276124, abs=1e-9)


def test_thread_cap(monkeypatch):
    monkeypatch.setenv("CVTELE_THREADS", "3")
    assert kernels.thread_cap() == 3
    monkeypatch.setenv("CVTELE_THREADS", "junk")
    assert kernels.thread_cap() == 1
