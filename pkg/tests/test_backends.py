import os
import subprocess
import sys

import numpy as np
import pytest

from steklov import _accel
from steklov.kernels import REGISTERED, get_kernel

pytestmark = pytest.mark.skipif(not _accel.HAVE_NUMBA, reason="numba not installed")


@pytest.mark.parametrize("kid", REGISTERED + ("bspline:n=2,scale=2",))
def test_kernel_values_agree(kid):
    k = get_kernel(kid)
    x = np.linspace(-12, 12, 4001)
    a = _accel.kernel_values_numpy(k.code, np.asarray(k.pvec), x)
    b = _accel.kernel_values_numba(k.code, np.asarray(k.pvec), x)
    assert np.max(np.abs(a - b)) < 1e-12


@pytest.mark.parametrize("kid", REGISTERED)
@pytest.mark.parametrize("power,absolute", [(0, False), (1, False), (0, True), (0.5, True)])
def test_lattice_sums_agree(kid, power, absolute):
    k = get_kernel(kid)
    u = np.linspace(-3, 3, 37)
    args = (k.code, np.asarray(k.pvec), u, power, 300, absolute)
    a, b = _accel.lattice_sums_numpy(*args), _accel.lattice_sums_numba(*args)
    assert np.max(np.abs(a - b)) < 1e-11


@pytest.mark.parametrize("kid", REGISTERED)
def test_series_agree(kid):
    k = get_kernel(kid)
    rng = np.random.default_rng(3)
    coef = rng.normal(size=90)
    x = np.linspace(-4, 4, 301)
    args = (k.code, np.asarray(k.pvec), k.half_width, x, 8.0, -40.0, coef)
    a, b = _accel.series_eval_numpy(*args), _accel.series_eval_numba(*args)
    assert np.max(np.abs(a - b)) < 1e-12


def test_fejer_parity_trick_matches_direct_sinc():
    k = get_kernel("fejer")
    u = np.array([0.0, 0.37, 0.5, 0.99])
    R = 2000
    direct = np.array([np.sum(k(ui - np.arange(np.rint(ui) - R, np.rint(ui) + R + 1))) for ui in u])
    assert np.allclose(k.lattice_sums(u, 0, R, False), direct, atol=1e-12)


def test_env_flag_selects_numpy():
    env = dict(os.environ, STEKLOV_DISABLE_NUMBA="1")
    out = subprocess.run([sys.executable, "-c", "import steklov; print(steklov.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numpy"
    env["STEKLOV_DISABLE_NUMBA"] = "0"
    out = subprocess.run([sys.executable, "-c", "import steklov; print(steklov.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numba"
