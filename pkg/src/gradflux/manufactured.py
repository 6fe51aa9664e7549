"""Closed-form exact fields for the three verification problems.

Each case bundles vectorized evaluators for the five solution fields
(potential u, gradient e, flux s, multipliers lambda and mu), the data
fields, the sources and the exact divergences.  ``verify_strong_system``
checks the whole bundle against the coupled first-order optimality
system with central finite differences, which guards the hand-derived
source terms.
"""

from dataclasses import dataclass
from typing import Callable

import numpy as np

PI = np.pi


@dataclass
class ManufacturedCase:
    """Exact fields of one verification problem.

    Scalar evaluators map coordinate arrays (x, y) to an array of the
    same shape; vector evaluators return shape x.shape + (2,).
    """

    name: str
    kappa: float
    zeta: float
    domain: tuple               # ("square",) or ("sector", psi)
    u: Callable
    e: Callable
    s: Callable
    lam: Callable
    grad_lam: Callable
    mu: Callable
    e_data: Callable
    s_data: Callable
    q: Callable
    f: Callable
    div_e: Callable
    div_s: Callable
    div_mu: Callable


def _vec(a, b):
    return np.stack([a, b], axis=-1)


def _perturbation(x, y):
    # gradient-data perturbation shared by cases 1 and 2
    return _vec(np.sin(4 * PI * x), np.sin(4 * PI * y)) / 20.0


def _div_perturbation(x, y):
    return (PI / 5.0) * (np.cos(4 * PI * x) + np.cos(4 * PI * y))


def _lam_smooth(x, y):
    return -(np.cos(2 * PI * x) + np.cos(2 * PI * y)) / (40.0 * PI)


def _grad_lam_smooth(x, y):
    return _vec(np.sin(2 * PI * x), np.sin(2 * PI * y)) / 20.0


def case1(kappa=1.0, zeta=1.0):
    """Smooth fields on the unit square with a mildly nonlinear flux.

    The flux follows a linear law with a cubic correction,
    s = -e (1 - |e|^2 / 40), written in polynomial form so the removable
    singularity of the normalized expression at e = 0 never appears.
    """

    def u(x, y):
        return np.cos(PI * x) * np.cos(PI * y)

    def e(x, y):
        return _vec(-PI * np.sin(PI * x) * np.cos(PI * y),
                    -PI * np.cos(PI * x) * np.sin(PI * y))

    def s(x, y):
        ev = e(x, y)
        mag2 = np.sum(ev * ev, axis=-1)
        return -ev * (1.0 - mag2 / 40.0)[..., None]

    def div_e(x, y):
        return -2.0 * PI ** 2 * u(x, y)

    def div_s(x, y):
        sx, cx = np.sin(PI * x), np.cos(PI * x)
        sy, cy = np.sin(PI * y), np.cos(PI * y)
        mag2 = PI ** 2 * (sx ** 2 * cy ** 2 + cx ** 2 * sy ** 2)
        cross = (sx * cy * np.sin(2 * PI * x) * np.cos(2 * PI * y)
                 + cx * sy * np.sin(2 * PI * y) * np.cos(2 * PI * x))
        return (2.0 * PI ** 2 * cx * cy * (1.0 - mag2 / 40.0)
                - PI ** 4 / 40.0 * cross)

    def e_data(x, y):
        return e(x, y) + _perturbation(x, y)

    def s_data(x, y):
        return s(x, y) - _grad_lam_smooth(x, y) / kappa

    def q(x, y):
        return zeta * u(x, y) + div_s(x, y)

    def f(x, y):
        return zeta * _lam_smooth(x, y) + _div_perturbation(x, y)

    return ManufacturedCase(
        name="case1", kappa=kappa, zeta=zeta, domain=("square",),
        u=u, e=e, s=s, lam=_lam_smooth, grad_lam=_grad_lam_smooth,
        mu=_perturbation, e_data=e_data, s_data=s_data, q=q, f=f,
        div_e=div_e, div_s=div_s, div_mu=_div_perturbation)


def case2(phi, kappa=1.0, zeta=1.0):
    """Corner singularity r^nu sin(nu theta) on a unit-radius sector.

    The sector opens over theta in [0, psi], psi = 2 pi - phi, with the
    corner at the origin; nu = pi / psi < 1 for re-entrant corners.  The
    flux law is linear (s = -e) and the multiplier/data perturbations are
    those of case 1.  Gradient and flux are unbounded at the origin, so
    evaluating them exactly there raises.
    """
    if not 0.0 < phi < PI:
        raise ValueError(f"corner angle must lie in (0, pi), got {phi}")
    psi = 2.0 * PI - phi
    nu = PI / psi

    def theta_of(x, y):
        return np.mod(np.arctan2(y, x), 2.0 * PI)

    def u(x, y):
        r = np.hypot(x, y)
        return r ** nu * np.sin(nu * theta_of(x, y))

    def e(x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        r = np.hypot(x, y)
        if np.any(r == 0.0):
            raise ValueError("gradient/flux fields of the corner problem "
                             "are singular at the origin")
        ang = nu * theta_of(x, y)
        sin_a, cos_a = np.sin(ang), np.cos(ang)
        fac = nu * r ** (nu - 2.0)
        return _vec(fac * (x * sin_a - y * cos_a),
                    fac * (y * sin_a + x * cos_a))

    def s(x, y):
        return -e(x, y)

    def zero(x, y):
        return np.zeros(np.broadcast(np.asarray(x), np.asarray(y)).shape)

    def e_data(x, y):
        return e(x, y) + _perturbation(x, y)

    def s_data(x, y):
        return s(x, y) - _grad_lam_smooth(x, y) / kappa

    def q(x, y):
        # div s = -laplace(u) = 0 away from the corner (u is harmonic)
        return zeta * u(x, y)

    def f(x, y):
        return zeta * _lam_smooth(x, y) + _div_perturbation(x, y)

    return ManufacturedCase(
        name="case2", kappa=kappa, zeta=zeta, domain=("sector", psi),
        u=u, e=e, s=s, lam=_lam_smooth, grad_lam=_grad_lam_smooth,
        mu=_perturbation, e_data=e_data, s_data=s_data, q=q, f=f,
        div_e=zero, div_s=zero, div_mu=_div_perturbation)


def case3(kappa=1.0, zeta=1.0):
    """Linear-law fields on the unit square with exactly zero multipliers.

    Data coincides with the exact gradient/flux, which makes this the
    reference problem for the sampled-data assignment studies.
    """

    def u(x, y):
        return np.sin(PI * x) * np.sin(PI * y)

    def e(x, y):
        return _vec(PI * np.cos(PI * x) * np.sin(PI * y),
                    PI * np.sin(PI * x) * np.cos(PI * y))

    def s(x, y):
        return -e(x, y)

    def zero(x, y):
        return np.zeros(np.broadcast(np.asarray(x), np.asarray(y)).shape)

    def zero_vec(x, y):
        return np.zeros(np.broadcast(np.asarray(x), np.asarray(y)).shape
                        + (2,))

    def q(x, y):
        return (zeta + 2.0 * PI ** 2) * u(x, y)

    def div_e(x, y):
        return -2.0 * PI ** 2 * u(x, y)

    def div_s(x, y):
        return 2.0 * PI ** 2 * u(x, y)

    return ManufacturedCase(
        name="case3", kappa=kappa, zeta=zeta, domain=("square",),
        u=u, e=e, s=s, lam=zero, grad_lam=zero_vec, mu=zero_vec,
        e_data=e, s_data=s, q=q, f=zero,
        div_e=div_e, div_s=div_s, div_mu=zero)


# ----------------------------------------------------------------------
# finite-difference verification of the strong optimality system


def _halton(n, base):
    out = np.zeros(n)
    denom = 1.0
    idx = np.arange(1, n + 1)
    vals = idx.copy()
    while np.any(vals > 0):
        denom *= base
        out += (vals % base) / denom
        vals //= base
    return out


def sample_points(case, n_samples, margin):
    """Quasi-random (Halton) interior sample points for a case."""
    h1 = _halton(n_samples, 2)
    h2 = _halton(n_samples, 3)
    if case.domain[0] == "square":
        x = margin + (1.0 - 2.0 * margin) * h1
        y = margin + (1.0 - 2.0 * margin) * h2
    else:
        psi = case.domain[1]
        # stay away from the singular corner and the wedge edges so the
        # FD stencil never crosses the branch cut at theta = 0
        r = 0.1 + 0.85 * h1
        theta = 0.05 + (psi - 0.1) * h2
        x = r * np.cos(theta)
        y = r * np.sin(theta)
    return x, y


def _fd_grad(f, x, y, h):
    dx = (f(x + h, y) - f(x - h, y)) / (2.0 * h)
    dy = (f(x, y + h) - f(x, y - h)) / (2.0 * h)
    return _vec(dx, dy)


def _fd_div(f, x, y, h):
    dx = (f(x + h, y)[..., 0] - f(x - h, y)[..., 0]) / (2.0 * h)
    dy = (f(x, y + h)[..., 1] - f(x, y - h)[..., 1]) / (2.0 * h)
    return dx + dy


def verify_strong_system(case, n_samples=200, fd_step=1e-5):
    """Max residuals of the five strong optimality equations.

    Derivatives are replaced by central differences with the given step,
    so the hand-derived divergences and sources are checked against an
    independent oracle.  Returns a dict keyed by equation name.  Steps in
    [1e-7, 1e-3] keep the truncation error of smooth cases below 1e-6;
    coarser steps simply report larger residuals.
    """
    margin = max(2.0 * fd_step, 1e-4)
    x, y = sample_points(case, n_samples, margin)
    kp, zt = case.kappa, case.zeta

    r1 = zt * case.lam(x, y) + _fd_div(case.mu, x, y, fd_step) - case.f(x, y)
    r2 = case.e(x, y) + case.mu(x, y) - case.e_data(x, y)
    r3 = (kp * case.s(x, y) - _fd_grad(case.lam, x, y, fd_step)
          - kp * case.s_data(x, y))
    r4 = zt * case.u(x, y) + _fd_div(case.s, x, y, fd_step) - case.q(x, y)
    r5 = _fd_grad(case.u, x, y, fd_step) - case.e(x, y)

    return {
        "multiplier_balance": float(np.abs(r1).max()),
        "gradient_optimality": float(np.abs(r2).max()),
        "flux_optimality": float(np.abs(r3).max()),
        "conservation": float(np.abs(r4).max()),
        "compatibility": float(np.abs(r5).max()),
    }
