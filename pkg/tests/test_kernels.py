import os
import subprocess
import sys

import numpy as np
import pytest

from varqed import kernels
from varqed._apply_py import apply_hamiltonian as apply_numpy
from varqed.matter import EmitterSpec, solve_matter
from varqed.modes import CavityGeometry
from varqed.oracle import build_operator

needs_ext = pytest.mark.skipif("cython" not in kernels.BACKENDS, reason="compiled kernel not built")


def _operator(Na, M, P, backend, lam=0.6):
    eig = solve_matter(EmitterSpec(Na, (0.2,), -0.4))
    return build_operator(eig, CavityGeometry(np.pi, 0.37 * np.pi, lam), M, P, backend=backend)


def test_numpy_backend_always_available():
    assert "numpy" in kernels.BACKENDS
    assert kernels.BACKEND in kernels.BACKENDS
    assert kernels.apply_hamiltonian is kernels.BACKENDS[kernels.BACKEND]


@needs_ext
@pytest.mark.parametrize("Na, M, P", [(2, 1, 4), (2, 8, 3), (3, 5, 4), (4, 16, 3)])
def test_backends_agree(Na, M, P):
    rng = np.random.default_rng(7)
    a = _operator(Na, M, P, "numpy")
    b = _operator(Na, M, P, "cython")
    V = rng.standard_normal((a.size, 3)) + 1j * rng.standard_normal((a.size, 3))
    np.testing.assert_allclose(b.apply(V), a.apply(V), rtol=0, atol=1e-12)


@needs_ext
def test_threads_do_not_change_result():
    eig = solve_matter(EmitterSpec(3, (), -0.4))
    cav = CavityGeometry(np.pi, 0.3 * np.pi, 0.5)
    one = build_operator(eig, cav, 10, 3, backend="cython", threads=1)
    two = build_operator(eig, cav, 10, 3, backend="cython", threads=2)
    v = np.random.default_rng(0).standard_normal(one.size).astype(complex)
    np.testing.assert_array_equal(one.apply(v), two.apply(v))


def test_numpy_kernel_on_single_state():
    # one matter level, one mode, cap 1: H is the 2x2 matrix built by hand
    diag = np.array([[0.0], [1.0]])
    up = np.array([[1], [-1]], dtype=np.int32)
    down = np.array([[-1], [0]], dtype=np.int32)
    occ = np.array([[0], [1]], dtype=np.int8)
    h = np.array([0.5])
    p = np.array([[0.0 + 0j]])
    c2 = 0.3
    H = np.column_stack([
        apply_numpy(np.array([[1.0 + 0j], [0]]), diag, up, down, occ, h, p, 0.0, c2).ravel(),
        apply_numpy(np.array([[0j], [1.0]]), diag, up, down, occ, h, p, 0.0, c2).ravel(),
    ])
    # normal-ordered X^2 inside the cap: a^dag a term only, 2 h^2 n
    expected = np.diag([0.0, 1.0 + c2 * 2 * h[0] ** 2])
    np.testing.assert_allclose(H, expected, atol=1e-15)


def test_environment_forces_numpy():
    env = dict(os.environ, VARQED_PURE_PYTHON="1")
    out = subprocess.run(
        [sys.executable, "-c", "from varqed import kernels; print(kernels.BACKEND)"],
        env=env, capture_output=True, text=True, check=True,
    )
    assert out.stdout.strip() == "numpy"
