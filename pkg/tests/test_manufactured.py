import numpy as np
import pytest

from gradflux.manufactured import (case1, case2, case3, sample_points,
                                   verify_strong_system)

PI = np.pi


# ----------------------------------------------------------------------
# case 1: spot values from the closed forms


def test_case1_potential_and_gradient_values():
    c = case1()
    assert c.u(0.0, 0.0) == pytest.approx(1.0)
    assert np.allclose(c.e(0.5, 0.5), [0.0, 0.0], atol=1e-14)


def test_case1_multiplier_values():
    c = case1()
    assert c.lam(0.0, 0.0) == pytest.approx(-1.0 / (20 * PI))
    assert np.allclose(c.mu(0.125, 0.0), [0.05, 0.0], atol=1e-15)


def test_case1_source_values():
    c = case1()
    # confirmed against the finite-difference oracle below before freezing
    assert c.q(0.0, 0.0) == pytest.approx(1.0 + 2 * PI ** 2, abs=1e-12)
    assert np.allclose(c.s(0.25, 0.25), [1.3770071, 1.3770071], atol=5e-8)
    assert c.f(0.0, 0.0) == pytest.approx(-1 / (20 * PI) + 2 * PI / 5,
                                          abs=1e-12)


def test_case1_flux_matches_normalized_law():
    # polynomial form vs -e/|e| (|e| - |e|^3/40) wherever e != 0
    c = case1()
    rng = np.random.default_rng(0)
    x, y = rng.random(200), rng.random(200)
    ev = c.e(x, y)
    mag = np.linalg.norm(ev, axis=-1)
    keep = mag > 1e-8
    normalized = -(ev[keep] / mag[keep, None]) \
        * (mag[keep] - mag[keep] ** 3 / 40.0)[:, None]
    assert np.abs(c.s(x, y)[keep] - normalized).max() < 1e-12


# ----------------------------------------------------------------------
# case 2


def test_case2_wedge_edges_are_zero():
    c = case2(PI / 2)
    psi = 1.5 * PI
    r = np.linspace(0.05, 1.0, 9)
    assert np.abs(c.u(r, np.zeros_like(r))).max() < 1e-13
    assert np.abs(c.u(r * np.cos(psi), r * np.sin(psi))).max() < 1e-13


def test_case2_gradient_magnitude():
    # |e| = nu r^(nu-1), checked against the FD gradient of u
    phi = PI / 2
    c = case2(phi)
    nu = PI / (2 * PI - phi)
    rng = np.random.default_rng(1)
    r = 0.2 + 0.7 * rng.random(20)
    theta = 0.1 + (1.5 * PI - 0.2) * rng.random(20)
    x, y = r * np.cos(theta), r * np.sin(theta)
    mag = np.linalg.norm(c.e(x, y), axis=-1)
    assert np.abs(mag - nu * r ** (nu - 1)).max() < 1e-12
    h = 1e-6
    fd = np.stack([(c.u(x + h, y) - c.u(x - h, y)) / (2 * h),
                   (c.u(x, y + h) - c.u(x, y - h)) / (2 * h)], axis=-1)
    assert np.abs(fd - c.e(x, y)).max() < 1e-7


def test_case2_origin_is_singular():
    c = case2(PI / 2)
    with pytest.raises(ValueError, match="singular"):
        c.e(0.0, 0.0)
    with pytest.raises(ValueError, match="singular"):
        c.s(np.array([0.3, 0.0]), np.array([0.2, 0.0]))


def test_case2_rejects_bad_angle():
    with pytest.raises(ValueError):
        case2(0.0)
    with pytest.raises(ValueError):
        case2(PI)


def test_case2_dirichlet_data_matches_fields_on_boundary():
    c = case2(PI / 4)
    psi = 2 * PI - PI / 4
    theta = np.linspace(0.0, psi, 33)
    x, y = np.cos(theta), np.sin(theta)
    assert np.allclose(c.u(x, y), np.sin(PI / psi * theta), atol=1e-12)


# ----------------------------------------------------------------------
# case 3


def test_case3_values():
    c = case3()
    assert c.u(0.5, 0.5) == pytest.approx(1.0)
    assert c.q(0.5, 0.5) == pytest.approx(1.0 + 2 * PI ** 2)
    x = np.linspace(0, 1, 11)
    assert np.abs(c.mu(x, x)).max() == 0.0
    assert np.abs(c.lam(x, x)).max() == 0.0
    assert np.allclose(c.e_data(x, x), c.e(x, x))


# ----------------------------------------------------------------------
# the finite-difference oracle


@pytest.mark.parametrize("factory", [case1, lambda: case2(PI / 2), case3])
def test_strong_system_residuals(factory):
    residuals = verify_strong_system(factory(), n_samples=300, fd_step=1e-5)
    assert max(residuals.values()) <= 1e-6, residuals


def test_strong_system_with_general_coefficients():
    residuals = verify_strong_system(case1(kappa=2.5, zeta=0.3),
                                     n_samples=200, fd_step=1e-5)
    assert max(residuals.values()) <= 1e-6, residuals


def test_coarse_fd_step_reports_large_residuals():
    residuals = verify_strong_system(case1(), n_samples=100, fd_step=1e-2)
    assert max(residuals.values()) > 1e-6


def test_second_law_sign_at_sample_points():
    for case in (case1(), case2(PI / 2), case3()):
        x, y = sample_points(case, 1000, 1e-3)
        dots = np.sum(case.s(x, y) * case.e(x, y), axis=-1)
        assert dots.max() <= 1e-14


def test_field_invariants_at_sample_points():
    for case in (case1(), case2(3 * PI / 4), case3()):
        x, y = sample_points(case, 1000, 1e-3)
        mu = case.mu(x, y)
        assert np.abs(case.e(x, y) + mu - case.e_data(x, y)).max() < 1e-13
        s_tilde = case.s(x, y) - case.grad_lam(x, y) / case.kappa
        assert np.abs(s_tilde - case.s_data(x, y)).max() < 1e-13
