import numpy as np
import pytest

from kvnlab import SingularInput, SystemParams
from kvnlab.kvn_anomaly import angular_surface_integral, anomaly_density, anomaly_pairing
from kvnlab.waves import GaussianWaveSpec, SingularWaveSpec


def test_density_closed_form_values():
    p = SystemParams(g=1.0, dim=3, epsilon=1.0)
    # lam orthogonal to r: density vanishes
    assert anomaly_density([1, 0, 0], [0, 1, 0], p) == 0.0
    # closed form -2 g eps^2 (lam.r)/(r^2+eps^2)^3
    assert anomaly_density([1, 0, 0], [1, 0, 0], p) == pytest.approx(-0.25)


def test_density_vanishes_at_zero_eps_off_origin():
    p = SystemParams(g=1.0, dim=3, epsilon=0.0)
    rng = np.random.Generator(np.random.Philox(1))
    for _ in range(20):
        r = rng.standard_normal(3)
        lam = rng.standard_normal(3)
        assert anomaly_density(r, lam, p) == 0.0
    with pytest.raises(SingularInput):
        anomaly_density([0, 0, 0], [1, 0, 0], p)


def test_density_matches_finite_difference_divergence():
    # A = -(g/2) div_r [ r (lam.r)/(r^2+eps^2)^2 ], via central differences
    g, eps = 1.3, 0.7
    p = SystemParams(g=g, dim=3, epsilon=eps)
    lam = np.array([0.4, -1.1, 0.2])
    rng = np.random.Generator(np.random.Philox(2))
    step = 1e-4
    for _ in range(10):
        r = rng.standard_normal(3) * 1.5

        def field(x, i):
            d = x @ x + eps**2
            return x[i] * (lam @ x) / d**2

        div = 0.0
        for i in range(3):
            e = np.zeros(3)
            e[i] = step
            div += (field(r + e, i) - field(r - e, i)) / (2 * step)
        np.testing.assert_allclose(anomaly_density(r, lam, p), -0.5 * g * div,
                                   rtol=1e-6, atol=1e-8)


def test_pairing_vanishes_by_parity():
    p = SystemParams(g=0.9, dim=3)
    ladder = [0.1, 0.03, 0.01, 0.003]
    singular = SingularWaveSpec(w=1.0, sigma_y=0.8, y_center=[0.3, -0.1, 0.2])
    gaussian = GaussianWaveSpec(dim=3, r_center=0.0, y_center=[0.5, 0, 0],
                                sigma_r=0.7, sigma_y=0.9)
    for spec in (singular, gaussian):
        for eps, value, err in anomaly_pairing(spec, p, ladder):
            assert abs(value) <= 1e-10
            assert err <= 1e-10


def test_pairing_zero_coupling():
    p = SystemParams(g=1e-300, dim=3)  # density is proportional to g
    spec = SingularWaveSpec(w=1.0, sigma_y=1.0, y_center=[1.0, 0, 0])
    for eps, value, err in anomaly_pairing(spec, p, [0.1, 0.01]):
        assert value == 0.0


def test_angular_integral_vanishes():
    for lam in ([1, 0, 0], [0, 0, 1], [0, 0, 0], [0.3, -0.7, 1.1]):
        assert abs(angular_surface_integral(np.array(lam, float))) < 1e-14


def test_angular_integral_rejects_tiny_orders():
    with pytest.raises(ValueError):
        angular_surface_integral(np.array([1.0, 0, 0]), n_theta=1)
