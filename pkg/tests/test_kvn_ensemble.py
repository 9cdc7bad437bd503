import numpy as np
import pytest

from kvnlab import EnsembleDegenerate, SystemParams
from kvnlab.kvn_ensemble import (
    advance_to,
    dilation_expectation,
    evolve_ensemble,
    hamiltonian_expectation,
    moment_expectation,
)
from kvnlab.waves import GaussianWaveSpec

SAFE_SPEC = GaussianWaveSpec(
    dim=3, r_center=[1, 0, 0], y_center=[0, 1, 0], sigma_r=0.05, sigma_y=0.05,
    phase_r=[0, 0.8, 0], phase_y=[0.4, -0.2, 0],
)


def test_time_zero_moments_match_spec():
    p = SystemParams(g=0.5, dim=3)
    st = evolve_ensemble(SAFE_SPEC, p, n_samples=40_000, t=0.0, seed=1)
    # frames are identity at t = 0
    J = st.y[:, 6:].reshape(-1, 6, 6)
    assert np.max(np.abs(J - np.eye(6))) == 0.0
    r2, err = moment_expectation(st, lambda r, p_: np.einsum("ni,ni->n", r, r))
    exact = 1.0 + 3 * SAFE_SPEC.sigma_r**2
    assert abs(r2 - exact) < 3 * err + 1e-12


def test_free_flow_moments():
    p = SystemParams(g=0.0, dim=3)
    st = evolve_ensemble(SAFE_SPEC, p, n_samples=30_000, t=0.0, seed=2)
    r2_0, _ = moment_expectation(st, lambda r, p_: np.einsum("ni,ni->n", r, r))
    rp_0, _ = moment_expectation(st, lambda r, p_: np.einsum("ni,ni->n", r, p_))
    p2_0, _ = moment_expectation(st, lambda r, p_: np.einsum("ni,ni->n", p_, p_))
    t = 1.7
    advance_to(st, t)
    r2_t, err = moment_expectation(st, lambda r, p_: np.einsum("ni,ni->n", r, r))
    # closed-form Gaussian free flow
    assert r2_t == pytest.approx(r2_0 + 2 * rp_0 * t + p2_0 * t * t, abs=6 * err + 1e-10)


def test_dilation_conservation_within_errors():
    p = SystemParams(g=0.5, dim=3)
    st = evolve_ensemble(SAFE_SPEC, p, n_samples=20_000, t=0.0, seed=3, rtol=1e-8)
    D0, e0 = dilation_expectation(st)
    H0, _ = hamiltonian_expectation(st)
    assert abs(H0 - 0.6) < 0.05        # p_bar . phase_r - V_r . phase_y at centers
    for t in (1.0, 2.0):
        advance_to(st, t)
        D, eD = dilation_expectation(st)
        assert abs(D - D0) < 3 * max(eD, 1e-12)
    assert st.rejected_weight == 0.0


def test_real_centered_gaussian_has_zero_charge():
    spec = GaussianWaveSpec(dim=3, r_center=0.0, y_center=0.0, sigma_r=1.0, sigma_y=1.0)
    p = SystemParams(g=0.3, dim=3)
    st = evolve_ensemble(spec, p, n_samples=5_000, t=0.0, seed=4,
                         rejected_budget=1.0)  # capture-prone spec, probe t = 0 only
    D0, e0 = dilation_expectation(st)
    assert D0 == pytest.approx(0.0, abs=1e-12)  # pointwise-imaginary integrand


def test_capture_prone_ensemble_degenerates():
    # isotropic cloud at the origin scale: most samples have L^2 < g
    spec = GaussianWaveSpec(dim=3, r_center=[0.5, 0, 0], y_center=0.0,
                            sigma_r=0.1, sigma_y=0.1)
    p = SystemParams(g=1.25, dim=3)
    with pytest.raises(EnsembleDegenerate):
        st = evolve_ensemble(spec, p, n_samples=2_000, t=0.0, seed=5)
        advance_to(st, 3.0)
        st.require_usable()


def test_determinism_same_seed():
    p = SystemParams(g=0.5, dim=3)
    a = evolve_ensemble(SAFE_SPEC, p, n_samples=2_000, t=1.0, seed=42)
    b = evolve_ensemble(SAFE_SPEC, p, n_samples=2_000, t=1.0, seed=42)
    assert np.array_equal(a.y, b.y)
    c = evolve_ensemble(SAFE_SPEC, p, n_samples=2_000, t=1.0, seed=43)
    assert not np.array_equal(a.y, c.y)


def test_threaded_matches_serial(monkeypatch):
    p = SystemParams(g=0.5, dim=3)
    monkeypatch.setenv("KVNLAB_THREADS", "1")
    a = evolve_ensemble(SAFE_SPEC, p, n_samples=6_000, t=1.0, seed=7)
    monkeypatch.setenv("KVNLAB_THREADS", "3")
    b = evolve_ensemble(SAFE_SPEC, p, n_samples=6_000, t=1.0, seed=7)
    assert np.array_equal(a.y, b.y)
