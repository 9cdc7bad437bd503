import numpy as np
import pytest

from kvnlab import SystemParams
from kvnlab.classical import (
    DiscretePath,
    action_scale_variation,
    analytic_moments,
    dilation_charge,
    discrete_action,
    fit_first_order_coefficient,
    force,
    integrate_characteristics,
    integrate_trajectory,
    kvn_action_scale_variation,
    scale_transform,
)
from kvnlab.model import PhasePoint


def test_force_values():
    p = SystemParams(g=1.0)
    np.testing.assert_allclose(force([1, 0, 0], p), [-1, 0, 0], atol=1e-15)
    np.testing.assert_allclose(force([0, 2, 0], p), [0, -1 / 8, 0], atol=1e-15)


def test_force_matches_potential_gradient():
    # central finite differences of the regularized potential, step 1e-6
    from kvnlab import regularized_potential

    p = SystemParams(g=1.0, epsilon=1.0)
    r = np.array([1.0, 0.0, 0.0])
    fd = np.zeros(3)
    for i in range(3):
        e = np.zeros(3)
        e[i] = 1e-6
        fd[i] = -(regularized_potential(r + e, p) - regularized_potential(r - e, p)) / 2e-6
    np.testing.assert_allclose(force(r, p), fd, atol=1e-8)
    np.testing.assert_allclose(force(r, p), [-0.25, 0, 0], atol=1e-12)


def test_free_particle_is_exact():
    p = SystemParams(g=1e-300)  # force is identically ~0
    tr = integrate_trajectory(PhasePoint(r=[1, 0, 0], p=[1, 0, 0]), p, (0, 3), tol=1e-12)
    for t, pt in zip(tr.times, tr.points):
        np.testing.assert_allclose(pt.r, [1 + t, 0, 0], atol=1e-9)


def test_trajectory_against_moment_oracle():
    p = SystemParams(g=0.5)
    ic = PhasePoint(r=[1, 0, 0], p=[0, 1, 0])
    tr = integrate_trajectory(ic, p, (0, 10), tol=1e-10)
    assert not tr.captured
    r2, rp, H = analytic_moments(ic, p, tr.times)
    assert H == pytest.approx(0.25)
    r2_num = np.array([pt.r @ pt.r for pt in tr.points])
    rp_num = np.array([pt.r @ pt.p for pt in tr.points])
    assert np.max(np.abs(r2_num - r2)) < 1e-8
    assert np.max(np.abs(rp_num - rp)) < 1e-8


def test_energy_and_dilation_conservation():
    p = SystemParams(g=0.5)
    rng = np.random.Generator(np.random.Philox(2))
    for _ in range(5):
        r = rng.normal([1.2, 0, 0], 0.2)
        v = rng.normal([0, 1.1, 0], 0.2)
        ic = PhasePoint(r=r, p=v)
        if np.sum(np.cross(r, v) ** 2) < p.g + 0.1:
            continue
        tr = integrate_trajectory(ic, p, (0, 10), tol=1e-10)
        H = np.array([c.energy for c in tr.charges])
        D = np.array([c.dilation for c in tr.charges])
        assert np.max(np.abs(H - H[0])) < 1e-10 * max(1, abs(H[0]))
        # D(t) = -(1/2) r0.p0 for t0 = 0
        assert np.max(np.abs(D + 0.5 * (r @ v))) < 1e-9


def test_capture_dichotomy():
    p = SystemParams(g=0.5)
    # L^2 = 1 > g: no capture on [0, 10]
    tr = integrate_trajectory(PhasePoint(r=[1, 0, 0], p=[0, 1, 0]), p, (0, 10), tol=1e-10)
    assert not tr.captured
    # L = 0, inward (H < 0): falls to the center at t = sqrt(2)
    tr = integrate_trajectory(PhasePoint(r=[1, 0, 0], p=[0, 0, 0]), p, (0, 10), tol=1e-10)
    assert tr.captured
    assert tr.capture_time == pytest.approx(np.sqrt(2.0), abs=1e-6)


def test_tangent_frame_symplectic():
    p = SystemParams(g=0.5)
    tr = integrate_trajectory(
        PhasePoint(r=[1, 0, 0], p=[0, 1.1, 0.1]), p, (0, 5), tol=1e-10, with_frame=True
    )
    worst = max(f.symplectic_defect() for f in tr.frames)
    assert worst < 100 * 1e-10


def test_dilation_charge_at_t0():
    p = SystemParams(g=0.5)
    pt = PhasePoint(r=[1.0, 2.0, 0.0], p=[0.3, -0.2, 0.5])
    assert dilation_charge(pt, 0.0, p) == pytest.approx(-0.5 * (pt.r @ pt.p))


def test_scale_transform_identity_and_values():
    pt = PhasePoint(r=[1, 0, 0], p=[0, 1, 0])
    out, t1 = scale_transform(pt, 1.0, 0.0)
    np.testing.assert_allclose(out.r, pt.r)
    np.testing.assert_allclose(out.p, pt.p)
    assert t1 == 1.0
    out, t1 = scale_transform(pt, 1.0, 2.0 * np.log(2.0))
    np.testing.assert_allclose(out.r, [0.5, 0, 0], rtol=1e-15)
    np.testing.assert_allclose(out.p, [0, 2, 0], rtol=1e-15)
    assert t1 == pytest.approx(0.25)


def test_scale_transform_group_law_and_energy():
    from kvnlab.classical import hamiltonian

    p = SystemParams(g=0.7)
    pt = PhasePoint(r=[0.8, 0.1, -0.3], p=[0.2, 1.0, 0.4])
    a, b = 0.37, -0.61
    one, t1 = scale_transform(pt, 2.0, a)
    two, t2 = scale_transform(one, t1, b)
    direct, td = scale_transform(pt, 2.0, a + b)
    np.testing.assert_allclose(two.r, direct.r, rtol=1e-14)
    np.testing.assert_allclose(two.p, direct.p, rtol=1e-14)
    assert t2 == pytest.approx(td, rel=1e-14)
    # H scales with e^{+alpha} for the bare inverse-square potential
    assert hamiltonian(one, p) == pytest.approx(np.exp(a) * hamiltonian(pt, p), rel=1e-12)


def _smooth_path(n=400, T=3.0):
    t = np.linspace(0.0, T, n)
    r = np.stack([2.0 + np.cos(t), 1.5 * np.sin(t), 0.3 * np.ones_like(t)], axis=1)
    return DiscretePath(times=t, positions=r)


def test_action_variation_inverse_square_vs_harmonic():
    path = _smooth_path()
    alphas = [1e-2, 1e-3, 1e-4]
    d_inv = [action_scale_variation(path, a, g=0.8, tag="inverse-square") for a in alphas]
    d_har = [action_scale_variation(path, a, g=0.8, tag="harmonic") for a in alphas]
    assert abs(fit_first_order_coefficient(alphas, d_inv)) < 1e-6
    assert abs(fit_first_order_coefficient(alphas, d_har)) > 1e-2
    assert action_scale_variation(path, 0.0, g=0.8) == 0.0


def test_kvn_action_variation():
    t = np.linspace(0.0, 3.0, 400)
    r = np.stack([2.0 + np.cos(t), 1.5 * np.sin(t), 0.3 * np.ones_like(t)], axis=1)
    lam = np.stack([0.5 * np.sin(t), 1.0 + 0.2 * np.cos(t), -0.4 * np.ones_like(t)], axis=1)
    alphas = [1e-2, 1e-3, 1e-4]
    d_inv = [kvn_action_scale_variation(t, r, lam, a, g=0.8) for a in alphas]
    d_def = [kvn_action_scale_variation(t, r, lam, a, g=0.8, tag="exponent-2") for a in alphas]
    assert abs(fit_first_order_coefficient(alphas, d_inv)) < 1e-6
    assert abs(fit_first_order_coefficient(alphas, d_def)) > 1e-2
    assert kvn_action_scale_variation(t, r, lam, 0.0, g=0.8) == 0.0


def test_batch_integrator_matches_single():
    p = SystemParams(g=0.5)
    rng = np.random.Generator(np.random.Philox(4))
    y = np.zeros((8, 42))
    y[:, 0:3] = [1, 0, 0] + 0.05 * rng.standard_normal((8, 3))
    y[:, 3:6] = [0, 1.1, 0] + 0.05 * rng.standard_normal((8, 3))
    y[:, 6:] = np.eye(6).ravel()
    y0 = y.copy()
    integrate_characteristics(y, 0.0, 4.0, p, rtol=1e-10, atol=1e-12)
    for i in range(8):
        tr = integrate_trajectory(
            PhasePoint(r=y0[i, 0:3], p=y0[i, 3:6]), p, (0, 4.0), tol=1e-11,
            n_out=2, with_frame=True
        )
        np.testing.assert_allclose(y[i, 0:3], tr.points[-1].r, atol=5e-8)
        np.testing.assert_allclose(y[i, 3:6], tr.points[-1].p, atol=5e-8)
        np.testing.assert_allclose(
            y[i, 6:].reshape(6, 6), tr.frames[-1].jac, atol=5e-6
        )
