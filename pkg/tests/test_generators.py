import numpy as np
import pytest

from phaseshadow import (
    Dimensions,
    mode_rotation,
    mode_squeeze,
    random_symplectic,
    symplecticity_defect,
    two_mode_rotation,
    two_mode_squeeze,
)


def test_elementary_factors_symplectic():
    dims = Dimensions(2, 1)
    factors = [
        mode_rotation(dims, 1, 0.7),
        mode_squeeze(dims, 2, 0.4),
        two_mode_rotation(dims, 0, 2, 1.1),
        two_mode_squeeze(dims, 1, 2, 0.3),
    ]
    for f in factors:
        assert symplecticity_defect(f, dims) <= 1e-14


def test_two_mode_factor_needs_distinct_modes():
    with pytest.raises(ValueError):
        two_mode_rotation(2, 1, 1, 0.5)
    with pytest.raises(ValueError):
        two_mode_squeeze(2, 0, 0, 0.5)


def test_random_symplectic_defect_and_determinism():
    for dims in [Dimensions(1, 0), Dimensions(1, 1), Dimensions(2, 2), Dimensions(3, 1)]:
        a = random_symplectic(dims, np.random.default_rng(42))
        b = random_symplectic(dims, np.random.default_rng(42))
        assert np.array_equal(a, b)
        assert symplecticity_defect(a, dims) <= 1e-12
        assert abs(np.linalg.det(a) - 1.0) <= 1e-10


def test_random_symplectic_not_diagonal():
    # couplings must actually mix A and B for n > 1
    dims = Dimensions(1, 1)
    mixed = 0
    for seed in range(20):
        s = random_symplectic(dims, np.random.default_rng(seed))
        if np.abs(s[:2, 2:]).max() > 1e-6:
            mixed += 1
    assert mixed >= 15


def test_random_symplectic_moderate_conditioning():
    rng = np.random.default_rng(0)
    for _ in range(50):
        s = random_symplectic(Dimensions(2, 2), rng)
        assert np.linalg.cond(s @ s.T) < 1e6
