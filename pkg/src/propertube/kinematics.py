"""Worldlines, proper-time kinematics, and the retarded-time solver.

Built-in worldline families (rest, uniform, hyperbolic, circular) are
closed-form so that every verification below them is free of
interpolation error.  The retarded solver finds the proper time at which
the backward light cone of a field point meets the worldline; the
function ``h(tau) = (t - z0) - |x - z|`` is strictly decreasing along a
timelike worldline (dh/dtau = -gamma*kappa < 0), so a safeguarded
Newton iteration on a sign-changing bracket always converges.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .biquat import Biquaternion, four_vector, minkowski, space_part, time_part

__all__ = [
    "Worldline",
    "RetardedFrame",
    "NoRetardedPoint",
    "DegeneratePoint",
    "retarded_solve",
    "tube_point",
    "cone_point",
    "tube_points",
    "cone_points",
    "lorentz_boost",
]

DEGENERATE_EPS = 1e-9


class NoRetardedPoint(Exception):
    """The worldline domain contains no causal intersection for the point."""


class DegeneratePoint(Exception):
    """Field point is within epsilon of the worldline."""


@dataclass(frozen=True)
class Worldline:
    """Parametric timelike trajectory Z(tau) with closed-form kinematics.

    position/velocity/acceleration map proper time to 4-vectors
    Z, U = dZ/dtau, Udot = dU/dtau.  ``domain`` is the usable tau range.
    """

    position: Callable[[float], Biquaternion]
    velocity: Callable[[float], Biquaternion]
    acceleration: Callable[[float], Biquaternion]
    family: str = "custom"
    domain: tuple = (-50.0, 50.0)
    meta: dict = field(default_factory=dict, repr=False)

    # -- constructors -------------------------------------------------------

    @staticmethod
    def rest(origin=(0.0, 0.0, 0.0), t0=0.0, domain=(-50.0, 50.0)):
        x0 = np.asarray(origin, dtype=float)
        zero = np.zeros(3)
        return Worldline(
            position=lambda tau: four_vector(t0 + tau, x0),
            velocity=lambda tau: four_vector(1.0, zero),
            acceleration=lambda tau: four_vector(0.0, zero),
            family="rest",
            domain=domain,
        )

    @staticmethod
    def uniform(beta, origin=(0.0, 0.0, 0.0), t0=0.0, domain=(-50.0, 50.0)):
        b = np.asarray(beta, dtype=float)
        b2 = float(b @ b)
        if b2 >= 1.0:
            raise ValueError("speed must be < 1")
        g = 1.0 / np.sqrt(1.0 - b2)
        x0 = np.asarray(origin, dtype=float)
        zero = np.zeros(3)
        return Worldline(
            position=lambda tau: four_vector(t0 + g * tau, x0 + g * b * tau),
            velocity=lambda tau: four_vector(g, g * b),
            acceleration=lambda tau: four_vector(0.0, zero),
            family="uniform",
            domain=domain,
            meta={"beta": b, "gamma": g},
        )

    @staticmethod
    def hyperbolic(a, direction=(1.0, 0.0, 0.0), origin=(0.0, 0.0, 0.0),
                   t0=0.0, domain=(-50.0, 50.0)):
        """Constant proper acceleration ``a`` along ``direction``."""
        if a <= 0:
            raise ValueError("proper acceleration must be > 0")
        d = np.asarray(direction, dtype=float)
        d = d / np.linalg.norm(d)
        x0 = np.asarray(origin, dtype=float)
        return Worldline(
            position=lambda tau: four_vector(
                t0 + np.sinh(a * tau) / a, x0 + (np.cosh(a * tau) - 1.0) / a * d),
            velocity=lambda tau: four_vector(np.cosh(a * tau), np.sinh(a * tau) * d),
            acceleration=lambda tau: four_vector(
                a * np.sinh(a * tau), a * np.cosh(a * tau) * d),
            family="hyperbolic",
            domain=domain,
            meta={"a": a, "direction": d},
        )

    @staticmethod
    def circular(radius, omega, origin=(0.0, 0.0, 0.0), t0=0.0,
                 domain=(-50.0, 50.0)):
        """Circular motion in the xy plane; omega is the coordinate angular rate."""
        v = abs(radius * omega)
        if v >= 1.0:
            raise ValueError("orbital speed must be < 1")
        g = 1.0 / np.sqrt(1.0 - v * v)
        x0 = np.asarray(origin, dtype=float)

        def pos(tau):
            t = g * tau
            ph = omega * t
            return four_vector(t0 + t, x0 + radius * np.array(
                [np.cos(ph), np.sin(ph), 0.0]))

        def vel(tau):
            ph = omega * g * tau
            beta = radius * omega * np.array([-np.sin(ph), np.cos(ph), 0.0])
            return four_vector(g, g * beta)

        def acc(tau):
            ph = omega * g * tau
            bdot = radius * omega * omega * np.array([-np.cos(ph), -np.sin(ph), 0.0])
            return four_vector(0.0, g * g * bdot)

        return Worldline(position=pos, velocity=vel, acceleration=acc,
                         family="circular", domain=domain,
                         meta={"radius": radius, "omega": omega, "gamma": g})

    @staticmethod
    def custom(position, velocity, acceleration, domain=(-50.0, 50.0)):
        return Worldline(position, velocity, acceleration, "custom", domain)

    # -- kinematic helpers ---------------------------------------------------

    def gamma_beta(self, tau):
        """(gamma, beta, gamma_dot, beta_dot) at proper time tau.

        beta_dot is d(beta)/dtau, derived from U and Udot.
        """
        u = self.velocity(tau)
        ud = self.acceleration(tau)
        g = time_part(u)
        beta = space_part(u) / g
        gdot = time_part(ud)
        beta_dot = (space_part(ud) - beta * gdot) / g
        return g, beta, gdot, beta_dot


@dataclass(frozen=True)
class RetardedFrame:
    """Retarded data of a field point: null-separated worldline point and
    the invariant distance xi = scal(conj(U) * (X - Z))."""

    tau_r: float
    xi: float
    nhat: np.ndarray
    R: float


def _h(worldline, tau, t, x):
    z = worldline.position(tau)
    dt = t - time_part(z)
    dr = np.linalg.norm(x - space_part(z))
    return dt - dr, dr


def retarded_solve(worldline: Worldline, x: Biquaternion,
                   eps: float = DEGENERATE_EPS, tol: float = 1e-13,
                   max_iter: int = 200) -> RetardedFrame:
    """Solve the null condition for the retarded proper time of ``x``.

    Safeguarded Newton on h(tau) = (t - z0(tau)) - |x - z(tau)| inside a
    sign-changing bracket; h is strictly decreasing so the root is unique.

    Raises
    ------
    NoRetardedPoint
        If the worldline domain does not bracket a causal intersection.
    DegeneratePoint
        If the point lies within ``eps`` of the worldline.
    """
    t = float(time_part(x))
    xs = space_part(x)
    lo, hi = worldline.domain
    h_lo, _ = _h(worldline, lo, t, xs)
    h_hi, _ = _h(worldline, hi, t, xs)
    if h_lo < 0 or h_hi > 0:
        raise NoRetardedPoint(
            f"no retarded point in domain [{lo}, {hi}] for t={t}")

    a, b = lo, hi  # h(a) >= 0 >= h(b)
    tau = 0.5 * (a + b)
    scale = max(1.0, abs(t))
    for _ in range(max_iter):
        h, dr = _h(worldline, tau, t, xs)
        if h > 0:
            a = tau
        else:
            b = tau
        g, beta, _, _ = worldline.gamma_beta(tau)
        if dr > eps:
            n = (xs - space_part(worldline.position(tau))) / dr
            dh = -g * (1.0 - n @ beta)
        else:
            dh = -g
        step = h / dh
        nxt = tau - step
        if not (a < nxt < b):
            nxt = 0.5 * (a + b)
        if abs(nxt - tau) < tol * scale:
            tau = nxt
            break
        tau = nxt
    else:
        raise NoRetardedPoint("retarded solve did not converge")

    z = worldline.position(tau)
    dvec = xs - space_part(z)
    R = float(np.linalg.norm(dvec))
    if R < eps:
        raise DegeneratePoint(f"field point within {eps} of the worldline")
    nhat = dvec / R
    xi = float(np.real(minkowski(worldline.velocity(tau), x - z)))
    return RetardedFrame(tau_r=float(tau), xi=xi, nhat=nhat, R=R)


# -- points with prescribed retarded data ------------------------------------

def tube_points(worldline: Worldline, tau, nhat, xi2) -> Biquaternion:
    """Points with retarded proper time ``tau`` and retarded distance ``xi2``.

    nhat may be a batch (..., 3); R = xi2 / (gamma * (1 - n.beta)).
    """
    if xi2 <= 0:
        raise ValueError("xi2 must be > 0")
    n = np.asarray(nhat, dtype=float)
    g, beta, _, _ = worldline.gamma_beta(tau)
    kappa = 1.0 - n @ beta
    R = np.asarray(xi2 / (g * kappa))
    z = worldline.position(tau)
    return four_vector(time_part(z) + R, space_part(z) + R[..., None] * n)


def tube_point(worldline, tau, nhat, xi2) -> Biquaternion:
    """Single point of the constant-retarded-radius tube."""
    n = np.asarray(nhat, dtype=float)
    if abs(np.linalg.norm(n) - 1.0) > 1e-12:
        raise ValueError("nhat must be a unit vector")
    return tube_points(worldline, tau, n, xi2)


def cone_points(worldline: Worldline, tau_end, nhat, xi) -> Biquaternion:
    """Points on the forward light cone of Z(tau_end) at retarded radius xi."""
    n = np.asarray(nhat, dtype=float)
    xi = np.asarray(xi, dtype=float)
    g, beta, _, _ = worldline.gamma_beta(tau_end)
    kappa = 1.0 - n @ beta
    R = np.asarray(xi / (g * kappa))
    z = worldline.position(tau_end)
    return four_vector(time_part(z) + R, space_part(z) + R[..., None] * n)


def cone_point(worldline, tau_end, nhat, xi) -> Biquaternion:
    n = np.asarray(nhat, dtype=float)
    if abs(np.linalg.norm(n) - 1.0) > 1e-12:
        raise ValueError("nhat must be a unit vector")
    if xi < 0:
        raise ValueError("xi must be >= 0")
    return cone_points(worldline, tau_end, n, float(xi))


def lorentz_boost(q: Biquaternion, beta) -> Biquaternion:
    """Boost a 4-vector to the frame moving with velocity ``beta``.

    Component-level standard boost; independent of the quaternion product,
    so it can serve as an oracle for invariance checks.
    """
    b = np.asarray(beta, dtype=float)
    b2 = float(b @ b)
    if b2 == 0.0:
        return q
    g = 1.0 / np.sqrt(1.0 - b2)
    t = time_part(q)
    x = space_part(q)
    xpar = (x @ b) / b2 * b
    xperp = x - xpar
    t_new = g * (t - x @ b)
    x_new = xperp + g * (xpar - b * t)
    return four_vector(t_new, x_new)
