import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import quad, trapezoid
from scipy.optimize import brentq

from helpers import one_sided_derivative, poles as _poles
from varqed.modes import (
    CavityGeometry,
    ModeError,
    bare_mode,
    gram_matrix,
    interacting_profile,
    mode_residual,
    solve_frequencies,
    verify_orthonormality,
)

GEOMETRIES = [(np.pi, 0.5), (np.pi, 0.3), (2.0, 0.37), (5.0, 0.123), (1.3, 0.81)]


def test_bare_limit_is_exact():
    cav = CavityGeometry(2.0, 0.7, 0.0)
    ms = solve_frequencies(cav, 12)
    np.testing.assert_array_equal(ms.omegas, np.arange(1, 13) * np.pi / 2.0)
    z = np.linspace(0, 2.0, 101)
    for i in range(12):
        _, prof = bare_mode(cav, i + 1)
        np.testing.assert_allclose(ms.profile(i, z), prof(z), atol=1e-13)


def test_centered_first_mode_against_independent_root():
    # at d = L/2 the odd modes solve 2 cot(w L/2) + lam/w = 0
    L, lam = np.pi, 0.8
    ms = solve_frequencies(CavityGeometry(L, L / 2, lam), 5)
    for n, i in ((1, 0), (3, 2), (5, 4)):
        lo, hi = (n - 1) * np.pi / L + 1e-12, (n + 1) * np.pi / L - 1e-12
        w = brentq(lambda w: 2.0 / np.tan(w * L / 2) + lam / w, lo, hi, xtol=1e-15, rtol=1e-15)
        assert abs(ms.omegas[i] - w) <= 1e-13 * w


def test_decoupled_modes_at_center():
    L = np.pi
    ms = solve_frequencies(CavityGeometry(L, L / 2, 3.0), 10)
    for i in range(1, 10, 2):
        assert ms.decoupled[i]
        assert ms.omegas[i] == (i + 1) * np.pi / L
        assert ms.at_emitter[i] == 0.0
    assert not ms.decoupled[0::2].any()


@pytest.mark.parametrize("L, frac", GEOMETRIES)
def test_residual_and_bracketing(L, frac):
    cav = CavityGeometry(L, frac * L, 1.7)
    ms = solve_frequencies(cav, 20)
    poles = _poles(L, frac * L, ms.omegas.max())
    for w, dec in zip(ms.omegas, ms.decoupled):
        if dec:
            assert np.min(np.abs(poles - w)) <= 1e-12 * w
            continue
        assert abs(mode_residual(cav, w)) <= 1e-9
        below = poles[poles < w]
        above = poles[poles > w]
        lo = below.max() if len(below) else 0.0
        assert lo < w < above.min()


@pytest.mark.parametrize("L, frac", GEOMETRIES)
def test_one_coupled_root_per_interval(L, frac):
    cav = CavityGeometry(L, frac * L, 0.9)
    ms = solve_frequencies(cav, 20)
    coupled = ms.omegas[~ms.decoupled]
    poles = np.unique(np.round(_poles(L, frac * L, ms.omegas.max()), 9))
    edges = np.concatenate([[0.0], poles])
    counts = np.histogram(coupled, bins=edges)[0]
    # every interval below the last solved root holds exactly one
    top = np.searchsorted(edges, coupled.max()) - 1
    assert np.all(counts[: top + 1] == 1)


@pytest.mark.parametrize("L, frac", GEOMETRIES)
def test_gram_orthonormality(L, frac):
    ms = solve_frequencies(CavityGeometry(L, frac * L, 2.5), 20)
    assert verify_orthonormality(ms) <= 1e-8


def test_orthonormality_against_adaptive_quadrature():
    L, d = 2.0, 0.74
    ms = solve_frequencies(CavityGeometry(L, d, 4.0), 6)
    for i in range(6):
        for j in range(i, 6):
            val = quad(lambda z: ms.profile(i, z) * ms.profile(j, z), 0, L, points=[d],
                       limit=400, epsabs=1e-13, epsrel=1e-13)[0]
            assert abs(val - (i == j)) <= 1e-10


def test_gram_matrix_default_is_close():
    ms = solve_frequencies(CavityGeometry(np.pi, 1.0, 1.0), 8)
    G = gram_matrix(ms, panels_per_halfwave=2)
    np.testing.assert_allclose(G, np.eye(8), atol=1e-12)


@pytest.mark.parametrize("L, frac", GEOMETRIES)
def test_jump_condition_by_finite_differences(L, frac):
    lam = 1.3
    d = frac * L
    ms = solve_frequencies(CavityGeometry(L, d, lam), 20)
    for i in np.flatnonzero(~ms.decoupled):
        w = ms.omegas[i]
        h = 0.02 / w
        f = lambda z, i=i: interacting_profile(ms, i, z)  # noqa: E731
        right = one_sided_derivative(f, d, h, +1)
        left = one_sided_derivative(f, d, h, -1)
        ratio = (right - left) / f(d)
        assert abs(ratio - lam) <= 1e-6 * lam


def test_profile_is_continuous_at_emitter():
    d = 0.9
    ms = solve_frequencies(CavityGeometry(2.0, d, 2.0), 10)
    for i in range(10):
        lhs = ms.left[i] * np.sin(ms.omegas[i] * d)
        rhs = ms.right[i] * np.sin(ms.omegas[i] * (2.0 - d))
        assert abs(lhs - rhs) <= 1e-13


def test_frequencies_rise_and_emitter_field_drops_with_coupling():
    lams = np.linspace(0.0, 6.0, 25)
    sets = [solve_frequencies(CavityGeometry(np.pi, 0.3 * np.pi, lam), 8) for lam in lams]
    W = np.array([s.omegas for s in sets])
    S = np.array([[s.suppression(i) for i in range(8)] for s in sets])
    assert np.all(np.diff(W, axis=0) >= 0)
    assert np.all(W >= sets[0].omegas)
    # the lowest mode is screened out of the emitter; higher modes need not be
    assert np.all(np.diff(S[:, 0]) <= 0)
    assert S[-1, 0] < 0.5
    assert np.any(S[:, 1:] > 1.0)


def test_invalid_geometry():
    with pytest.raises(ModeError, match="emitter_position"):
        CavityGeometry(1.0, 1.0)
    with pytest.raises(ModeError):
        CavityGeometry(-1.0, 0.5)
    with pytest.raises(ModeError):
        CavityGeometry(1.0, 0.5, -0.1)
    with pytest.raises(ModeError):
        solve_frequencies(CavityGeometry(1.0, 0.5, 1.0), 0)
    ms = solve_frequencies(CavityGeometry(1.0, 0.5, 1.0), 2)
    with pytest.raises(ModeError):
        ms.profile(0, 1.5)


def test_residual_is_nan_on_a_pole():
    cav = CavityGeometry(np.pi, np.pi / 2, 1.0)
    assert np.isnan(mode_residual(cav, 2.0))


@given(
    L=st.floats(0.5, 10.0),
    frac=st.floats(0.05, 0.95),
    lam=st.one_of(st.just(0.0), st.floats(1e-4, 20.0)),
)
def test_mode_properties(L, frac, lam):
    cav = CavityGeometry(L, frac * L, lam)
    ms = solve_frequencies(cav, 12)
    assert np.all(np.diff(ms.omegas) > 0)
    assert np.all(ms.omegas >= ms.bare_omegas * (1 - 1e-15))
    for w, dec in zip(ms.omegas, ms.decoupled):
        if not dec and lam > 0:
            r = mode_residual(cav, w)
            assert abs(r) <= 1e-9
    # unit norm through the closed-form branch integrals
    z = np.linspace(0, L, 4001)
    norms = trapezoid(np.array([ms.profile(i, z) ** 2 for i in range(3)]), z, axis=1)
    np.testing.assert_allclose(norms, 1.0, rtol=1e-4)
