"""Volume-form self-energy integrals and Hadamard finite-part regularization.

The rest-frame self-energy reduces to a radial integral of the actual
field-square density; it diverges as 1/xi1 when the inner cutoff shrinks.
The finite part subtracts the analytically integrated singular template
(1/xi^2 and 1/xi powers) and keeps the convergent remainder, so for the
self-energy integrand it returns exactly -e^2/(2*xi2): the value the tube
surface integral produces without any regularization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .biquat import four_vector, mul, scal
from .kinematics import Worldline
from .lwfield import SingularityField
from .quadrature import integrate_adaptive

__all__ = [
    "RadialIntegrand",
    "InvalidInterval",
    "SingularMismatch",
    "volume_self_energy",
    "self_energy_density",
    "hadamard_finite_part",
]


class InvalidInterval(Exception):
    pass


class SingularMismatch(Exception):
    """Residual after template subtraction still diverges under refinement."""


@dataclass(frozen=True)
class RadialIntegrand:
    """Radial profile with declared singular powers at xi -> 0.

    ``f`` maps an ndarray of radii to values; ``singular_orders`` lists the
    integer powers k whose coefficients c_k/xi^k must be subtracted
    (supported: 2 and 1).  ``domain`` is (0, xi_max].
    """

    f: object
    singular_orders: tuple = ()
    domain: tuple = (0.0, 1.0)
    coefficients: dict = field(default_factory=dict, repr=False)


def self_energy_density(e: float, xi):
    """Radial action density of a resting singularity.

    (1/8pi) * scal(conj(B) B) integrated over the direction sphere at
    radius xi, i.e. 4*pi*xi^2/(8*pi) times the field square; evaluated
    through the actual field pipeline rather than a formula.
    """
    wl = Worldline.rest()
    sf = SingularityField(e, wl)
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    nhat = np.broadcast_to(np.array([1.0, 0.0, 0.0]), xi.shape + (3,))
    b = sf.field_from(0.0, nhat, xi)
    density = np.real(scal(mul(b.conj(), b)))
    return density * 4.0 * np.pi * xi * xi / (8.0 * np.pi)


def volume_self_energy(fieldsrc: SingularityField, xi1: float, xi2: float,
                       tol: float = 1e-12) -> float:
    """Rest-frame volume self-energy per unit proper time on [xi1, xi2].

    Evaluates e^2 * int dxi / (2 xi^2) by adaptive quadrature of the real
    density; equals e^2*(1/(2*xi1) - 1/(2*xi2)) and diverges as xi1 -> 0.
    """
    if not (0.0 < xi1 < xi2):
        raise InvalidInterval(f"need 0 < xi1 < xi2, got [{xi1}, {xi2}]")
    if fieldsrc.worldline.family != "rest":
        raise InvalidInterval("volume self-energy is a rest-frame computation")
    if fieldsrc.e == 0.0:
        return 0.0
    e = fieldsrc.e
    val, _ = integrate_adaptive(lambda x: self_energy_density(e, x),
                                xi1, xi2, tol=tol)
    return float(val.real)


def _extrapolate_to_zero(xs, vals):
    """Polynomial Richardson limit of a sampled sequence as x -> 0."""
    xs = np.asarray(xs, dtype=float)
    vals = np.asarray(vals, dtype=float)
    total = 0.0
    for i in range(len(xs)):
        w = 1.0
        for j in range(len(xs)):
            if j != i:
                w *= xs[j] / (xs[j] - xs[i])
        total += w * vals[i]
    return total


def _fit_singular_coefficients(f, orders, xi_max):
    """Extract c_k of f ~ sum c_k/xi^k near 0 on a log-spaced sample.

    The estimate xi^k * f(xi) must settle as xi -> 0; if it keeps growing
    the integrand is more singular than declared.  Each coefficient is
    Richardson-extrapolated to remove subleading contamination.
    """
    orders = sorted(set(int(k) for k in orders), reverse=True)
    for k in orders:
        if k not in (1, 2):
            raise ValueError(f"unsupported singular order {k}")
    xs = xi_max * np.geomspace(1e-12, 1e-6, 13)
    vals = np.asarray(f(xs), dtype=float)
    coeffs = {}
    for k in orders:
        ck = vals * xs ** k
        if abs(ck[0]) > 100.0 * abs(ck[len(ck) // 2]) + 1e-12:
            raise SingularMismatch(
                f"declared order {k} does not match the local expansion")
        # extrapolate from the largest samples: subtraction noise is
        # smallest there and the polynomial contamination cancels anyway
        coeffs[k] = float(_extrapolate_to_zero(xs[-3:], ck[-3:]))
        vals = vals - coeffs[k] / xs ** k
    return coeffs


def hadamard_finite_part(integrand: RadialIntegrand, tol: float = 1e-11) -> float:
    """Finite part of int_0^X f(xi) dxi with power-law singularities at 0.

    Subtracts the fitted singular template and integrates the remainder;
    the discarded pieces contribute their finite antiderivative parts
    (-1/X for 1/xi^2, log X for 1/xi).  Coincides with the ordinary
    integral whenever f is regular at 0.  The remainder is driven to the
    origin through a cutoff sequence with Richardson extrapolation; a
    non-shrinking tail sequence means the declared orders were wrong.
    """
    lo, xi_max = integrand.domain
    if lo != 0.0:
        raise InvalidInterval("finite part is defined on a (0, xi_max] domain")
    if xi_max <= 0:
        raise InvalidInterval("xi_max must be > 0")
    f = integrand.f
    orders = tuple(integrand.singular_orders)
    if integrand.coefficients:
        coeffs = dict(integrand.coefficients)
    elif orders:
        coeffs = _fit_singular_coefficients(f, orders, xi_max)
    else:
        coeffs = {}

    def remainder(xs):
        xs = np.asarray(xs, dtype=float)
        r = np.asarray(f(xs), dtype=float).astype(float).copy()
        for k, c in coeffs.items():
            r = r - c / xs ** k
        return r

    x0 = 1e-3 * xi_max
    main, _ = integrate_adaptive(remainder, x0, xi_max, tol=tol)
    total = main.real

    cuts = np.array([3e-4, 1e-4, 3e-5]) * xi_max
    tails = []
    for a in cuts:
        seg, _ = integrate_adaptive(remainder, a, x0, tol=tol, n_min=3)
        tails.append(seg.real)
    d1 = tails[1] - tails[0]
    d2 = tails[2] - tails[1]
    scale = abs(total) + sum(abs(c) * (1.0 / xi_max if k == 2 else
                                       abs(math.log(xi_max)) + 1.0)
                             for k, c in coeffs.items()) + 1e-30
    if abs(d2) > 0.5 * abs(d1) and abs(d2) > 1e-7 * scale:
        raise SingularMismatch(
            "remainder integral does not converge at 0; "
            "declared singular orders are incomplete")
    # S(a) ~ S(0) - a*rem(0): extrapolate the last pair to a -> 0
    a1, a2 = cuts[1], cuts[2]
    total += tails[2] + (tails[2] - tails[1]) * a2 / (a1 - a2)

    finite_template = {2: -1.0 / xi_max, 1: math.log(xi_max)}
    for k, c in coeffs.items():
        total += c * finite_template[k]
    return float(total)
