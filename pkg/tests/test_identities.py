import numpy as np
import pytest

from kvnlab.identities import kvn_identity_check, quantum_identity_check

# grid configurations are frozen here so the two-grid order tests compare
# the same continuum test functions on nested grids
Q1_GAUSS = dict(potential="gaussian-well", dim=1, L=8.0, q=6)
Q1_INV = dict(potential="inverse-square", dim=1, L=2.0, q=8, eps=0.3)
Q3_INV = dict(potential="inverse-square", dim=3, L=0.8, q=4, eps=0.3)
KVN_INV = dict(potential="inverse-square", L=0.7, q=6, eps=0.3)


def test_quantum_identity_gaussian_well_1d():
    assert quantum_identity_check(n=64, **Q1_GAUSS) < 1e-6


def test_quantum_identity_inverse_square_1d():
    assert quantum_identity_check(n=128, **Q1_INV) < 1e-5


def test_quantum_identity_inverse_square_3d():
    assert quantum_identity_check(n=32, **Q3_INV) < 1e-4


def test_quantum_identity_zero_potential():
    # kinetic parts cancel identically: both sides vanish
    assert quantum_identity_check(potential="zero", dim=1, n=64, L=8.0, q=6) < 1e-12


def test_kvn_identity_inverse_square():
    assert kvn_identity_check(n=64, **KVN_INV) < 1e-8


def test_kvn_identity_gaussian_well():
    assert kvn_identity_check(potential="gaussian-well", n=64, L=6.0, q=6) < 1e-8


def test_kvn_identity_zero_potential():
    assert kvn_identity_check(potential="zero", n=32, L=6.0, q=6) < 1e-14


def test_refinement_orders():
    # same continuum test functions on (n, 2n): convergence order >= 3.5
    pairs = [
        (quantum_identity_check(n=32, **Q1_GAUSS), quantum_identity_check(n=64, **Q1_GAUSS)),
        (quantum_identity_check(n=64, **Q1_INV), quantum_identity_check(n=128, **Q1_INV)),
        (quantum_identity_check(n=16, **Q3_INV), quantum_identity_check(n=32, **Q3_INV)),
        (kvn_identity_check(n=32, **KVN_INV), kvn_identity_check(n=64, **KVN_INV)),
    ]
    for coarse, fine in pairs:
        order = np.log2(coarse / fine)
        assert order >= 3.5
