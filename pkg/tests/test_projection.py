from dataclasses import replace

import numpy as np
import pytest

from phaseshadow import (
    Dimensions,
    containment_check,
    direct_sum,
    entropy_increase,
    mode_squeeze,
    project_ball,
    random_symplectic,
    shadow_area,
    symplectic_capacity,
    two_mode_rotation,
)

from oracles import schur_chain


def camel_example(r=np.log(2.0)):
    """Squeeze mode A by e^r, then mix A and B by a quarter-turn rotation.

    For this family the single shadow eigenvalue is exactly 1/cosh(r).
    """
    dims = Dimensions(1, 1)
    s = two_mode_rotation(dims, 0, 1, np.pi / 4) @ mode_squeeze(dims, 0, r)
    return dims, s


def test_identity_projection():
    dims = Dimensions(1, 2)
    res = project_ball(np.eye(6), dims, radius=2.0)
    assert np.allclose(res.spectrum, [1.0], atol=1e-12)
    assert res.entropy_increase == pytest.approx(0.0, abs=1e-12)
    assert res.volume_ratio == pytest.approx(1.0, abs=1e-12)
    assert np.allclose(res.omega_a.shape, np.eye(2), atol=1e-12)
    assert res.omega_a.radius == 2.0
    assert np.abs(res.omega_a.center).max() == 0.0


def test_direct_sum_is_equality_case():
    rng = np.random.default_rng(0)
    dims = Dimensions(1, 2)
    s_a = random_symplectic(1, rng)
    s_b = random_symplectic(2, rng)
    res = project_ball(direct_sum(s_a, s_b), dims)
    assert res.volume_ratio == pytest.approx(1.0, abs=1e-9)
    assert res.entropy_increase == pytest.approx(0.0, abs=1e-9)
    # the shadow coincides with the symplectic ball of the A factor
    assert np.allclose(res.omega_a.shape, np.linalg.inv(s_a @ s_a.T), atol=1e-9)


def test_coupled_squeeze_frozen_values():
    # hand/one-page derivation: squeeze e^r on A then quarter-turn mixing
    # gives M_A = diag(2/(1+e^{2r}), 2e^{2r}/(1+e^{2r})), lambda = 1/cosh(r);
    # for e^r = 2 that is spectrum (0.8), entropy ln(1.25), volume 1.25
    dims, s = camel_example()
    res = project_ball(s, dims)
    assert res.spectrum[0] == pytest.approx(0.8, abs=1e-12)
    assert res.entropy_increase == pytest.approx(np.log(1.25), abs=1e-12)
    assert res.volume_ratio == pytest.approx(1.25, abs=1e-12)
    assert np.allclose(res.omega_a.shape, np.diag([0.4, 1.6]), atol=1e-12)


def test_projection_against_brute_force_chain():
    rng = np.random.default_rng(1)
    for n, n_a in [(2, 1), (3, 1), (3, 2), (4, 2)]:
        dims = Dimensions(n_a, n - n_a)
        s = random_symplectic(dims, rng)
        res = project_ball(s, dims)
        chain = schur_chain(s, n_a)
        assert np.allclose(res.omega_a.shape, chain["m_a"], atol=1e-9)
        assert np.allclose(res.spectrum, chain["spectrum"], atol=1e-9)
        assert res.volume_ratio == pytest.approx(
            np.sqrt(chain["det_p_bb"]), rel=1e-8
        )
        assert res.entropy_increase == pytest.approx(
            0.5 * np.log(chain["det_p_bb"]), abs=1e-8
        )


def test_projection_center():
    rng = np.random.default_rng(2)
    dims = Dimensions(1, 1)
    s = random_symplectic(dims, rng)
    center = np.array([0.3, -0.7, 1.1, 0.2])
    res = project_ball(s, dims, center=center)
    assert np.allclose(res.omega_a.center, (s @ center)[:2], atol=1e-14)


def test_projection_rejects_non_symplectic():
    dims = Dimensions(1, 1)
    with pytest.raises(ValueError):
        project_ball(2.0 * np.eye(4), dims)
    with pytest.raises(ValueError):
        project_ball(np.eye(2), Dimensions(1, 0))
    with pytest.raises(ValueError):
        project_ball(np.eye(4), dims, radius=0.0)


def test_containment_identity():
    dims = Dimensions(1, 1)
    res = project_ball(np.eye(4), dims)
    assert containment_check(res, 1.0, 64, np.random.default_rng(0))


def test_containment_random_ensemble():
    rng = np.random.default_rng(3)
    for n, n_a in [(2, 1), (3, 2), (4, 1)]:
        dims = Dimensions(n_a, n - n_a)
        s = random_symplectic(dims, rng)
        res = project_ball(s, dims, radius=1.3)
        assert containment_check(res, 1.3, 10_000, np.random.default_rng(7))


def test_containment_detects_inflation():
    # strict-inequality case with lambda = 1/cosh(0.15) ~ 0.98885, so a 1%
    # inflation pushes boundary points outside: 1.01^2 * 0.98885 > 1
    dims, s = camel_example(r=0.15)
    res = project_ball(s, dims)
    assert res.spectrum[0] < 1.0 - 1e-4
    inflated = replace(res, s_a=1.01 * res.s_a)
    assert not containment_check(inflated, 1.0, 10_000, np.random.default_rng(11))
    assert containment_check(res, 1.0, 10_000, np.random.default_rng(11))


def test_containment_needs_samples():
    dims = Dimensions(1, 1)
    res = project_ball(np.eye(4), dims)
    with pytest.raises(ValueError):
        containment_check(res, 1.0, 0, np.random.default_rng(0))


def test_shadow_area_identity():
    assert shadow_area(np.eye(6), 0, 2.0) == pytest.approx(np.pi * 4.0, rel=1e-12)


def test_shadow_area_single_mode_squeeze_exact():
    # area-preserving map of the plane itself: area stays pi R^2
    s = np.diag([2.0, 0.5])
    assert shadow_area(s, 0, 1.0) == pytest.approx(np.pi, rel=1e-12)


def test_shadow_area_never_below_ball():
    rng = np.random.default_rng(4)
    for n in [1, 2, 3]:
        for _ in range(10):
            s = random_symplectic(n, rng)
            for mode in range(n):
                assert shadow_area(s, mode, 1.0) >= np.pi - 1e-9


def test_shadow_area_index_range():
    with pytest.raises(ValueError):
        shadow_area(np.eye(4), 2, 1.0)
    with pytest.raises(ValueError):
        shadow_area(np.eye(4), -1, 1.0)


def test_entropy_increase_values():
    assert entropy_increase(np.array([1.0, 1.0])) == 0.0
    assert entropy_increase(np.array([0.5, 0.5])) == pytest.approx(2.0 * np.log(2.0), rel=1e-14)
    assert entropy_increase(np.array([np.exp(-1.0)])) == pytest.approx(1.0, rel=1e-14)


def test_entropy_increase_validation():
    with pytest.raises(ValueError):
        entropy_increase(np.array([1.0, 0.0]))
    with pytest.raises(ValueError):
        entropy_increase(np.array([1.5]))


def test_capacity_of_shadow_never_squeezed():
    rng = np.random.default_rng(5)
    for _ in range(20):
        dims = Dimensions(1, 2)
        s = random_symplectic(dims, rng)
        res = project_ball(s, dims, radius=0.8)
        cap = symplectic_capacity(res.omega_a)
        assert cap >= np.pi * 0.64 - 1e-9
