import math
import subprocess
import sys

import numpy as np
import pytest
from conftest import random_disc_points

from eislab import _pykernels, kernels

needs_c = pytest.mark.skipif("cython" not in kernels.available_backends(),
                             reason="compiled extension not built")


@pytest.fixture
def data(canonical_ctx_coarse, rng):
    ctx = canonical_ctx_coarse
    z = random_disc_points(rng, 300, 0.95)
    return (np.ascontiguousarray(z.real), np.ascontiguousarray(z.imag),
            ctx.eta.real.copy(), ctx.eta.imag.copy(), ctx.c)


def run(backend, fn, *args):
    prev = kernels.use_backend(backend)
    try:
        return fn(*args)
    finally:
        kernels.use_backend(prev)


def test_default_backend_compiled_when_available():
    if "cython" in kernels.available_backends():
        assert kernels.backend_name() == "cython"
    with pytest.raises(ValueError):
        kernels.use_backend("fortran")


def test_fallback_selected_when_extension_missing():
    code = ("import sys; sys.modules['eislab._ckernels'] = None\n"
            "from eislab import kernels; print(kernels.backend_name())")
    out = subprocess.run([sys.executable, "-c", code], capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


@needs_c
@pytest.mark.parametrize("lam", [0.0, 7.5, 200.0])
def test_wave_sum_parity(data, lam):
    a = run("cython", kernels.wave_sum, *data, lam, True)
    b = run("python", kernels.wave_sum, *data, lam, True)
    for u, v in zip(a, b):
        assert np.max(np.abs(u - v)) <= 1e-12 * max(np.max(np.abs(v)), 1.0)


@needs_c
def test_e1_and_holo_parity(data, canonical_ctx_coarse, canonical_chart):
    a = run("cython", kernels.e1_sum, *data)
    b = run("python", kernels.e1_sum, *data)
    assert np.max(np.abs(a - b) / b) <= 1e-13
    cp, eta = canonical_ctx_coarse.chart_data(canonical_chart)
    zc = 0.7 * data[0][:50] + 0.7j * data[1][:50]
    args = (np.ascontiguousarray(zc.real), np.ascontiguousarray(zc.imag),
            eta.real.copy(), eta.imag.copy(), cp, 40.0)
    ra, ia, sa = run("cython", kernels.holo_sum, *args)
    rb, ib, sb = run("python", kernels.holo_sum, *args)
    assert np.allclose(sa, sb, rtol=1e-12)
    ma, mb = ra + 1j * ia, rb + 1j * ib
    assert np.max(np.abs(ma - mb)) <= 1e-10 * np.max(np.abs(mb))


@needs_c
def test_labels_parity(canonical_ctx_coarse, rng):
    sign = np.where(rng.random((120, 90)) > 0.5, 1, -1).astype(np.int8)
    mask = rng.random((120, 90)) > 0.1
    la, na = run("cython", kernels.label_components, sign, mask)
    lb, nb = run("python", kernels.label_components, sign, mask)
    assert na == nb and np.array_equal(la, lb)


@pytest.mark.parametrize("backend", kernels.available_backends())
def test_threads_bit_identical(data, backend):
    one = run(backend, kernels.wave_sum, *data, 31.0, True, 1)
    many = run(backend, kernels.wave_sum, *data, 31.0, True, 7)
    for u, v in zip(one, many):
        assert np.array_equal(u, v)


def test_compensated_summation():
    # one large term and many small ones of opposite sign: naive summation loses them
    n = 10001
    c = np.full(n, 2.0 * np.log(1e-9))
    c[0] = 2.0 * np.log(1e8)
    eta = np.ones(n)
    x, y = np.zeros(1), np.zeros(1)
    for backend in kernels.available_backends():
        re, _, mag = run(backend, kernels.wave_sum, x, y, eta, np.zeros(n), c, 0.0, False)
        terms = np.exp(0.5 * c)
        # naive left-to-right summation drops every small term
        assert float(np.add.accumulate(terms)[-1]) == terms[0]
        assert abs(re[0] - math.fsum(terms)) <= np.spacing(terms[0])
        assert mag[0] == re[0]


def test_python_label_components_direct():
    sign = np.array([[1, 1, -1], [-1, 1, -1], [-1, -1, 1]], dtype=np.int8)
    labels, n = _pykernels.label_components(sign, np.ones((3, 3), bool))
    assert n == 4
    assert labels[0, 0] == labels[1, 1] and labels[0, 2] == labels[1, 2]
