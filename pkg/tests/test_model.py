import numpy as np
import pytest

from kvnlab import InvalidParams, SingularInput, SystemParams, regularized_potential, validate


def test_validate_accepts_good_params():
    p = SystemParams(g=0.5, dim=3, epsilon=0.0, cutoff_a=0.01, box_R=50.0)
    assert validate(p) is p
    assert p.strong_coupling           # g > 1/4
    assert not SystemParams(g=0.2).strong_coupling


def test_validate_rejects_negative_coupling():
    with pytest.raises(InvalidParams) as ei:
        validate(SystemParams(g=-1.0))
    assert any("g" in v for v in ei.value.violations)


def test_validate_rejects_inverted_box():
    with pytest.raises(InvalidParams) as ei:
        validate(SystemParams(g=1.25, dim=3, cutoff_a=1.0, box_R=0.5))
    assert any("box_R" in v for v in ei.value.violations)


def test_validate_reports_every_violation():
    with pytest.raises(InvalidParams) as ei:
        validate(SystemParams(g=-1.0, dim=2, cutoff_a=-1.0))
    assert len(ei.value.violations) >= 3


def test_validate_idempotent():
    p = SystemParams(g=0.5)
    assert validate(validate(p)) == p


def test_potential_values():
    assert regularized_potential([1, 0, 0], SystemParams(g=2.0)) == pytest.approx(-1.0)
    assert regularized_potential([1, 0, 0], SystemParams(g=1.0, epsilon=1.0)) == pytest.approx(-0.25)


def test_potential_singular_origin():
    with pytest.raises(SingularInput):
        regularized_potential([0.0, 0.0, 0.0], SystemParams(g=1.0, epsilon=0.0))


def test_potential_even_and_homogeneous():
    rng = np.random.Generator(np.random.Philox(0))
    p0 = SystemParams(g=0.7, epsilon=0.0)
    pe = SystemParams(g=0.7, epsilon=0.4)
    for _ in range(25):
        r = rng.standard_normal(3)
        s = float(rng.uniform(0.2, 3.0))
        for p in (p0, pe):
            assert regularized_potential(-r, p) == pytest.approx(regularized_potential(r, p), rel=1e-14)
        # degree -2 homogeneity only without regularization
        assert regularized_potential(s * r, p0) == pytest.approx(
            regularized_potential(r, p0) / s**2, rel=1e-12
        )
