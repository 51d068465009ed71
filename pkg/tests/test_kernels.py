import os
import subprocess
import sys

import numpy as np
import pytest

from driveby import _pykernels, kernels
from driveby import bridge as bfem
from driveby import estimator as est
from driveby.vehicle import VehicleParams

ck = pytest.importorskip("driveby._ckernels")


@pytest.fixture(scope="module")
def newmark_args():
    beam = bfem.assemble(bfem.BridgeParams.damaged())
    loads = np.random.default_rng(0).standard_normal((2000, beam.n_free)) * 1e4
    x0 = np.linspace(-1e-3, 1e-3, beam.n_free)
    return beam.M, beam.C, beam.K, loads, 0.001, 0.5, 0.25, x0, np.zeros(beam.n_free)


@pytest.fixture(scope="module")
def kalman_args():
    q, r = est.noise_covariances(0.35)
    m = est.build_state_space(VehicleParams(), q, r, 0.001)
    obs = np.ascontiguousarray(np.random.default_rng(1).standard_normal((2000, 4)) * 0.1)
    return m.V_bar, m.H, m.Q, m.R, obs, np.zeros(12), np.diag(est.DEFAULT_P0)


def test_compiled_backend_selected():
    if os.environ.get("DRIVEBY_PURE_PYTHON"):
        pytest.skip("pure Python forced by environment")
    assert kernels.BACKEND == "cython"


def test_newmark_backends_agree(newmark_args):
    for a, b in zip(_pykernels.newmark_linear(*newmark_args), ck.newmark_linear(*newmark_args)):
        np.testing.assert_allclose(b, a, rtol=0, atol=1e-9 * np.abs(a).max())


def test_kalman_backends_agree(kalman_args):
    (za, pa), (zb, pb) = _pykernels.kalman_filter(*kalman_args), ck.kalman_filter(*kalman_args)
    np.testing.assert_allclose(zb, za, rtol=0, atol=1e-10 * np.abs(za).max())
    np.testing.assert_allclose(pb, pa, rtol=0, atol=1e-10 * np.abs(pa).max())


def test_kalman_rejects_indefinite_innovation(kalman_args):
    Vb, H, Q, R, obs, z0, P0 = kalman_args
    with pytest.raises(np.linalg.LinAlgError):
        ck.kalman_filter(Vb, H, Q, -np.eye(4), obs, z0, 0 * P0)


def test_env_forces_python_backend():
    env = {**os.environ, "DRIVEBY_PURE_PYTHON": "1"}
    out = subprocess.run([sys.executable, "-c", "import driveby.kernels as k; print(k.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
