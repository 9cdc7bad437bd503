import numpy as np
import pytest
from scipy.integrate import quad

from kvnlab.waves import GaussianWaveSpec, SingularWaveSpec, gradient_selftest


def test_gaussian_normalization_quadrature():
    spec = GaussianWaveSpec(dim=1, r_center=0.5, y_center=-0.2, sigma_r=0.7, sigma_y=1.3)
    vr, _ = quad(lambda x: np.exp(-((x - 0.5) ** 2) / (2 * 0.7**2)), -np.inf, np.inf)
    vy, _ = quad(lambda x: np.exp(-((x + 0.2) ** 2) / (2 * 1.3**2)), -np.inf, np.inf)
    assert spec.norm_constant**2 * vr * vy == pytest.approx(1.0, rel=1e-12)


def test_singular_normalization_quadrature():
    spec = SingularWaveSpec(w=0.8, sigma_y=0.5)
    radial, _ = quad(
        lambda r: spec.norm_c**2 * np.exp(-(r**2) / spec.w**2) / r * 4 * np.pi * r**2,
        0,
        np.inf,
    )
    assert radial == pytest.approx(1.0, rel=1e-12)
    assert spec.chi0 == 1.0


def test_gradients_match_finite_differences():
    rng = np.random.Generator(np.random.Philox(7))
    gs = GaussianWaveSpec(
        dim=3, r_center=[1, 0, 0], y_center=[0, 1, 0], sigma_r=0.3, sigma_y=0.4,
        phase_r=[0.2, 0, -0.1], phase_y=[0, -0.3, 0.5],
    )
    ss = SingularWaveSpec(w=1.1, sigma_y=0.9, y_center=[0.2, 0, 0])
    assert gradient_selftest(gs, rng) < 1e-8
    assert gradient_selftest(ss, rng) < 1e-8


def test_sampling_moments():
    rng = np.random.Generator(np.random.Philox(9))
    gs = GaussianWaveSpec(dim=3, r_center=[1, 2, 3], y_center=[-1, 0, 1],
                          sigma_r=0.5, sigma_y=0.25)
    r, y = gs.sample(rng, 200_000)
    np.testing.assert_allclose(r.mean(axis=0), [1, 2, 3], atol=0.01)
    np.testing.assert_allclose(y.mean(axis=0), [-1, 0, 1], atol=0.01)
    np.testing.assert_allclose(r.std(axis=0), 0.5, atol=0.01)

    ss = SingularWaveSpec(w=1.0, sigma_y=1.0)
    r, y = ss.sample(rng, 400_000)
    rad = np.linalg.norm(r, axis=1)
    # radial density ~ r exp(-r^2/w^2): <r> = w sqrt(pi)/2
    assert rad.mean() == pytest.approx(np.sqrt(np.pi) / 2, rel=5e-3)


def test_phase_factors_enter_value():
    spec = GaussianWaveSpec(dim=1, phase_r=0.7)
    v = spec.value(np.array([[1.0]]), np.array([[0.0]]))
    assert np.angle(v[0]) == pytest.approx(0.7)
