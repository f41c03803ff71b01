import math
import os
import subprocess
import sys

import numpy as np
import pytest

from oracles import scipy_radial
from staticmd import kernels
from staticmd.grids import PhysicalConstants
from staticmd.spherical import tail_state

COMPILED = kernels.compiled_kernel()
needs_compiled = pytest.mark.skipif(COMPILED is None, reason="compiled kernel not built")


def _case(m=1.0, e=1.0, n=201, r0=100.0, r1=0.5):
    r = np.geomspace(r0, r1, n)
    y0 = np.array(tail_state(PhysicalConstants(m, e), r0))
    return r, y0


@needs_compiled
@pytest.mark.parametrize("m,e,eps", [(1.0, 1.0, 1), (2.0, 0.5, 1), (0.7, -1.3, -1)])
def test_compiled_matches_python_bitwise_close(m, e, eps):
    r, y0 = _case(m, e)
    y0 = y0 * np.array([eps, eps, 1, 1])
    a = kernels.integrate_radial_py(r, y0, m, e, eps, -1.0)
    b = COMPILED(r, y0, m, e, eps, -1.0)
    assert a[1:] == b[1:]
    assert np.allclose(a[0], b[0], rtol=1e-13, atol=1e-300)


@pytest.mark.parametrize("integrator", [kernels.integrate_radial_py, kernels.integrate_radial])
def test_kernel_matches_scipy_oracle(integrator):
    r, y0 = _case()
    Y, status, n_reached, *_ = integrator(r, y0, 1.0, 1.0, 1, -1.0)
    assert status == kernels.STATUS_OK and n_reached == r.size
    chi0 = [math.pi + y0[0], y0[1], y0[2], y0[3]]
    # both run inward, so rows line up
    r_ref, ref = scipy_radial(1.0, 1.0, r[0], chi0, r)
    assert np.array_equal(r_ref, r)
    mine = Y
    assert np.allclose(mine[:, 0] + math.pi, ref[0], rtol=1e-8, atol=1e-10)
    assert np.allclose(mine[:, 2], ref[2], rtol=1e-8)
    assert np.allclose(mine[:, 3], ref[3], rtol=1e-8, atol=1e-10)


def test_status_codes():
    r, y0 = _case(r1=1e-3)
    Y, status, n_reached, *_ = kernels.integrate_radial(r, y0, 1.0, 1.0, 1, -1.0, blowup=10.0)
    assert status == kernels.STATUS_SINGULAR and n_reached < r.size
    assert np.all(np.isnan(Y[n_reached:]))
    _, status, *_ = kernels.integrate_radial(r, y0, 1.0, 1.0, 1, -1.0, max_steps=5)
    assert status == kernels.STATUS_MAX_STEPS


def test_fallback_selected_by_environment():
    code = "from staticmd import kernels; print(kernels.BACKEND)"
    env = dict(os.environ, STATICMD_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True)
    assert out.stdout.strip() == "python"
    env.pop("STATICMD_PURE_PYTHON")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True)
    assert out.stdout.strip() == ("cython" if COMPILED is not None else "python")
