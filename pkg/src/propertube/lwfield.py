"""Retarded potential/field of a point singularity and external field families.

Conventions (Gaussian units, c = 1): the 4-potential is ``A = phi - i*Avec``
and the field carrier is ``B = E + i*H``.  The 4-gradient is the quaternion
operator ``nabla = -i*d/dt + e_k d/dx_k`` (scalar part differentiates along
imaginary time), for which ``vect(conj(nabla), A)`` evaluates to exactly
``E + i*H``.  The closed-form field is the production path; the numerical
4-gradient of the potential is kept as a cross-check.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .biquat import (Biquaternion, four_vector, six_vector, space_part,
                     time_part, vect)
from .kinematics import Worldline, retarded_solve

__all__ = [
    "SingularityField",
    "ExternalField",
    "ConstantPotential",
    "PolynomialSlow",
    "PlaneWave",
    "DistantCharge",
    "nabla_numeric",
    "nabla_bar_numeric",
    "field_from_potential_numeric",
    "check_regularity",
]


# -- numerical 4-gradient ----------------------------------------------------

_BASIS = [np.array([1.0, 0, 0, 0]), np.array([0, 1.0, 0, 0]),
          np.array([0, 0, 1.0, 0]), np.array([0, 0, 0, 1.0])]


def _shift(x: Biquaternion, mu: int, h: float) -> Biquaternion:
    d = _BASIS[mu] * h
    return four_vector(time_part(x) + d[0], space_part(x) + d[1:])


def _partials(f, x, h):
    """Central-difference partial derivatives of a quaternion field."""
    out = []
    for mu in range(4):
        fp = f(_shift(x, mu, h))
        fm = f(_shift(x, mu, -h))
        out.append(Biquaternion((fp.w - fm.w) / (2 * h), (fp.v - fm.v) / (2 * h)))
    return out


_Q_NABLA = [Biquaternion(-1j, np.zeros(3)),
            Biquaternion(0.0, [1.0, 0, 0]),
            Biquaternion(0.0, [0, 1.0, 0]),
            Biquaternion(0.0, [0, 0, 1.0])]


def nabla_numeric(f, x: Biquaternion, h: float = 1e-5) -> Biquaternion:
    """nabla f by central differences: (-i d_t + e_k d_k) f."""
    p = _partials(f, x, h)
    total = Biquaternion(0.0, np.zeros(3))
    for mu in range(4):
        total = total + _Q_NABLA[mu] * p[mu]
    return total


def nabla_bar_numeric(f, x: Biquaternion, h: float = 1e-5) -> Biquaternion:
    """conj(nabla) f by central differences: (-i d_t - e_k d_k) f."""
    p = _partials(f, x, h)
    total = Biquaternion(0.0, np.zeros(3))
    for mu in range(4):
        q = _Q_NABLA[mu].conj() if mu else _Q_NABLA[0]
        total = total + q * p[mu]
    return total


def field_from_potential_numeric(potential, x, h=1e-5) -> Biquaternion:
    """vect(conj(nabla), A): numerical field from a potential callable."""
    g = nabla_bar_numeric(potential, x, h)
    return Biquaternion(np.zeros_like(g.w), g.v)


def check_regularity(field_eval, samples, h=1e-4):
    """Max finite-difference residual of the homogeneous equation nabla B = 0.

    ``samples`` is an iterable of 4-vector points off all singular
    worldlines.  Returns the max absolute component of nabla B.
    """
    worst = 0.0
    for x in samples:
        r = nabla_numeric(field_eval, x, h)
        worst = max(worst, float(r.norm_max()))
    return worst


# -- moving point singularity -------------------------------------------------

@dataclass(frozen=True)
class SingularityField:
    """Retarded potential and field of a charge ``e`` on a worldline.

    potential(x) = e*U/xi at the retarded point; field(x) is the standard
    velocity + acceleration decomposition, which the numerical gradient
    cross-check reproduces.
    """

    e: float
    worldline: Worldline

    # closed forms from retarded data; nhat may be a batch (..., 3)

    def potential_from(self, tau_r, nhat, R) -> Biquaternion:
        g, beta, _, _ = self.worldline.gamma_beta(tau_r)
        n = np.asarray(nhat, dtype=float)
        R = np.asarray(R, dtype=float)
        kappa = 1.0 - n @ beta
        phi = self.e / (R * kappa)
        avec = phi[..., None] * beta
        return four_vector(phi, avec)

    def field_from(self, tau_r, nhat, R) -> Biquaternion:
        g, beta, _, beta_dot = self.worldline.gamma_beta(tau_r)
        n = np.asarray(nhat, dtype=float)
        R = np.asarray(R, dtype=float)
        kappa = 1.0 - n @ beta
        a_t = beta_dot / g  # d(beta)/dt at the retarded time
        nmb = n - beta
        vel = (1.0 - beta @ beta) * nmb / (kappa ** 3 * R * R)[..., None]
        rad = np.cross(n, np.cross(nmb, np.broadcast_to(a_t, n.shape))) \
            / (kappa ** 3 * R)[..., None]
        E = self.e * (vel + rad)
        H = np.cross(n, E)
        return six_vector(E, H)

    # solve-then-evaluate forms

    def potential(self, x: Biquaternion) -> Biquaternion:
        f = retarded_solve(self.worldline, x)
        return self.potential_from(f.tau_r, f.nhat, f.R)

    def field(self, x: Biquaternion) -> Biquaternion:
        f = retarded_solve(self.worldline, x)
        return self.field_from(f.tau_r, f.nhat, f.R)


# -- external field families --------------------------------------------------

class ExternalField:
    """Analytic external potential A_e with its field B_e = vect(conj(nabla), A_e)
    and the proper-time derivative of A_e along a worldline (chain rule)."""

    name = "external"

    def potential(self, x: Biquaternion) -> Biquaternion:
        raise NotImplementedError

    def field(self, x: Biquaternion) -> Biquaternion:
        raise NotImplementedError

    def potential_dot(self, worldline: Worldline, tau: float) -> Biquaternion:
        raise NotImplementedError

    def gradient_scale(self):
        """Characteristic |dA/dx| / |A| used by slow-variation reporting."""
        raise NotImplementedError


def _zero_like(x: Biquaternion) -> Biquaternion:
    shape = x.batch_shape
    return Biquaternion(np.zeros(shape, dtype=complex),
                        np.zeros(shape + (3,), dtype=complex))


@dataclass(frozen=True)
class ConstantPotential(ExternalField):
    """Uniform 4-potential; the associated field vanishes identically."""

    phi: float = 1.0
    avec: tuple = (0.0, 0.0, 0.0)
    name = "constant-potential"

    def _a0(self):
        return four_vector(self.phi, np.asarray(self.avec, dtype=float))

    def potential(self, x):
        a0 = self._a0()
        shape = x.batch_shape
        return Biquaternion(np.broadcast_to(a0.w, shape),
                            np.broadcast_to(a0.v, shape + (3,)))

    def field(self, x):
        return _zero_like(x)

    def potential_dot(self, worldline, tau):
        return four_vector(0.0, np.zeros(3))

    def gradient_scale(self):
        return 0.0


def _phase(x: Biquaternion, k0: float, kvec: np.ndarray):
    """Invariant linear phase scal(conj(K) X) = k0*t - k.x for K = k0 - i*k."""
    return k0 * time_part(x) - space_part(x) @ kvec


@dataclass(frozen=True)
class PolynomialSlow(ExternalField):
    """A_e(X) = A0 * (1 + eps * (k0*t - k.x)); eps controls the variation."""

    eps: float = 1e-3
    phi: float = 1.0
    avec: tuple = (0.0, 0.0, 0.0)
    k0: float = 0.5
    kvec: tuple = (0.5, 0.5, 0.5)
    name = "polynomial-slow"

    def potential(self, x):
        k = np.asarray(self.kvec, dtype=float)
        f = 1.0 + self.eps * _phase(x, self.k0, k)
        a0 = four_vector(self.phi, np.asarray(self.avec, dtype=float))
        return Biquaternion(f * a0.w, f[..., None] * a0.v)

    def field(self, x):
        # conj(nabla) f = -i*eps*k0 + eps*kvec, applied on the left of A0
        k = np.asarray(self.kvec, dtype=float)
        grad = Biquaternion(-1j * self.eps * self.k0, self.eps * k)
        a0 = four_vector(self.phi, np.asarray(self.avec, dtype=float))
        b = vect(grad, a0)
        shape = x.batch_shape
        return Biquaternion(np.broadcast_to(b.w, shape),
                            np.broadcast_to(b.v, shape + (3,)))

    def potential_dot(self, worldline, tau):
        k = np.asarray(self.kvec, dtype=float)
        u = worldline.velocity(tau)
        sdot = self.k0 * time_part(u) - space_part(u) @ k
        a0 = four_vector(self.phi, np.asarray(self.avec, dtype=float))
        return self.eps * sdot * a0

    def gradient_scale(self):
        k = np.asarray(self.kvec, dtype=float)
        return self.eps * max(abs(self.k0), float(np.max(np.abs(k))))


@dataclass(frozen=True)
class PlaneWave(ExternalField):
    """Transverse plane wave A_e = P * sin(k0*t - k.x + phase), k0 = |k|."""

    amplitude: tuple = (0.0, 1.0, 0.0)   # spatial polarization vector
    kvec: tuple = (0.0, 0.0, 1.0)
    phase: float = 0.0
    name = "plane-wave"

    def __post_init__(self):
        k = np.asarray(self.kvec, dtype=float)
        p = np.asarray(self.amplitude, dtype=float)
        if abs(p @ k) > 1e-12 * np.linalg.norm(p) * np.linalg.norm(k):
            raise ValueError("polarization must be transverse to kvec")

    def _k0(self):
        return float(np.linalg.norm(np.asarray(self.kvec, dtype=float)))

    def potential(self, x):
        k = np.asarray(self.kvec, dtype=float)
        s = np.sin(_phase(x, self._k0(), k) + self.phase)
        p = four_vector(0.0, np.asarray(self.amplitude, dtype=float))
        return Biquaternion(s * p.w, s[..., None] * p.v)

    def field(self, x):
        k = np.asarray(self.kvec, dtype=float)
        c = np.cos(_phase(x, self._k0(), k) + self.phase)
        grad = Biquaternion(-1j * self._k0(), k)
        b = vect(grad, four_vector(0.0, np.asarray(self.amplitude, dtype=float)))
        return Biquaternion(c * b.w, c[..., None] * b.v)

    def potential_dot(self, worldline, tau):
        k = np.asarray(self.kvec, dtype=float)
        z = worldline.position(tau)
        u = worldline.velocity(tau)
        c = np.cos(_phase(z, self._k0(), k) + self.phase)
        sdot = self._k0() * time_part(u) - space_part(u) @ k
        return c * sdot * four_vector(0.0, np.asarray(self.amplitude, dtype=float))

    def gradient_scale(self):
        return self._k0()


@dataclass(frozen=True)
class DistantCharge(ExternalField):
    """Static charge q at ``center``; slow variation ratio ~ xi2/|center|."""

    q: float = 1.0
    center: tuple = (0.0, 0.0, 100.0)
    name = "distant-charge"

    def potential(self, x):
        c = np.asarray(self.center, dtype=float)
        r = np.linalg.norm(space_part(x) - c, axis=-1)
        shape = x.batch_shape
        return Biquaternion((self.q / r).astype(complex),
                            np.zeros(shape + (3,), dtype=complex))

    def field(self, x):
        c = np.asarray(self.center, dtype=float)
        d = space_part(x) - c
        r = np.linalg.norm(d, axis=-1)
        E = self.q * d / (r ** 3)[..., None]
        return six_vector(E, np.zeros_like(E))

    def potential_dot(self, worldline, tau):
        c = np.asarray(self.center, dtype=float)
        z = worldline.position(tau)
        u = worldline.velocity(tau)
        d = space_part(z) - c
        r = float(np.linalg.norm(d))
        phidot = -self.q * (d @ space_part(u)) / r ** 3
        return four_vector(phidot, np.zeros(3))

    def gradient_scale(self):
        return 1.0 / float(np.linalg.norm(np.asarray(self.center, dtype=float)))
