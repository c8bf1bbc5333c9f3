"""Both kernel backends must agree; the numpy path must also work on its own."""

import os
import subprocess
import sys

import numpy as np
import pytest

from condemit import kernels
from condemit._accel import HAVE_NUMBA

needs_numba = pytest.mark.skipif(not HAVE_NUMBA, reason="numba not installed")


@pytest.fixture
def grid_inputs(rng):
    na, nt = 17, 23
    return dict(
        c_ge=0.7, c_sg=1.9, c_ag=0.4, arg_sg=0.3, arg_ag=-1.2, weight=0.8,
        d23=rng.uniform(-4, 4, na), d33=rng.uniform(-30, 30, na), sin2a=rng.uniform(0, 1, na),
        times=np.linspace(0, 5, nt), gamma=1.0, dgamma=0.62, domega=0.43,
    )


@needs_numba
def test_closed_form_backends_agree(grid_inputs):
    a = kernels.closed_form_g3_np(**grid_inputs)
    b = kernels.closed_form_g3_nb(**grid_inputs)
    np.testing.assert_allclose(a, b, rtol=1e-13, atol=1e-15)


@needs_numba
def test_quadratic_form_backends_agree(rng):
    m = rng.normal(size=(11, 3, 3)) + 1j * rng.normal(size=(11, 3, 3))
    coh = m + np.conj(np.transpose(m, (0, 2, 1)))
    ph = rng.uniform(-20, 20, (9, 3))
    fac = rng.uniform(-1, 1, 9)
    np.testing.assert_allclose(kernels.field_quadratic_form_np(coh, ph, fac),
                               kernels.field_quadratic_form_nb(coh, ph, fac), rtol=1e-12, atol=1e-13)


@needs_numba
def test_fit_backends_agree(rng):
    t = np.linspace(0, 0.5, 51)
    y = np.exp(-np.outer(rng.uniform(0.1, 5, 20), t)) * (1 + 0.01 * rng.normal(size=(20, 51)))
    y[3, 7] = -1.0
    for a, b in zip(kernels.loglinear_fit_np(t, y), kernels.loglinear_fit_nb(t, y)):
        np.testing.assert_allclose(a, b, rtol=1e-12, equal_nan=True)


def test_quadratic_form_brute_force(rng):
    coh = rng.normal(size=(4, 3, 3)) + 1j * rng.normal(size=(4, 3, 3))
    coh = coh + np.conj(np.transpose(coh, (0, 2, 1)))
    ph = rng.uniform(-5, 5, (5, 3))
    fac = rng.uniform(-1, 1, 5)
    out = kernels.field_quadratic_form(coh, ph, fac)
    for a in range(5):
        w = np.exp(1j * ph[a])
        for k in range(4):
            assert out[a, k] == pytest.approx(fac[a] ** 2 * (w.conj() @ coh[k] @ w).real, abs=1e-12)


def test_results_independent_of_batching(rng):
    coh = rng.normal(size=(6, 3, 3)) + 1j * rng.normal(size=(6, 3, 3))
    ph = rng.uniform(-5, 5, (10, 3))
    fac = rng.uniform(-1, 1, 10)
    whole = kernels.field_quadratic_form(coh, ph, fac)
    parts = np.concatenate([kernels.field_quadratic_form(coh, ph[s], fac[s])
                            for s in (slice(0, 3), slice(3, 4), slice(4, 10))])
    assert whole.tobytes() == parts.tobytes()


def test_env_flag_selects_numpy_backend():
    code = (
        "import numpy as np\n"
        "from condemit import backend_name\n"
        "from condemit.coupling import pair_couplings, find_pair\n"
        "from condemit.correlations import g3_analytical_map, g3_numerical_map\n"
        "from condemit.geometry import AtomEnsemble\n"
        "e = AtomEnsemble.paper_geometry(); c = pair_couplings(e)\n"
        "a = np.linspace(0, 6, 30); t = np.linspace(0, 5, 20)\n"
        "x = g3_analytical_map(e, find_pair(c), 2*np.pi/3, np.pi/4.4, a, t)\n"
        "y = g3_numerical_map(e, c, 2*np.pi/3, np.pi/4.4, a, t)\n"
        "print(backend_name(), np.max(np.abs(x - y) / np.maximum(x, 1e-12)))\n"
    )
    env = dict(os.environ, CONDEMIT_DISABLE_NUMBA="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    name, err = out.stdout.split()
    assert name == "numpy"
    assert float(err) <= 1e-8
