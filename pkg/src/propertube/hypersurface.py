"""Directed hypersurface elements and quadrature over tube/cone patches.

A patch is a parameterized 3-surface in spacetime with parameter order
(principal, u, phi), where u = cos(theta) and (u, phi) chart the unit
sphere of retarded directions.  The directed element at a parameter
point is defined by duality: for every 4-vector V,

    scal(conj(V) * element) = det(V, T1, T2, T3)

with T_a the coordinate tangents as real 4-tuples.  This fixes the
element up to nothing; it equals the alternating quaternion triple
product (1/6) sum sgn(s) T_s1 conj(T_s2) T_s3, which the tests verify.

In action integrands the element enters as ``1j * element``.  That phase
and the per-patch orientation signs below are fixed once by the
closed-boundary identity

    sum of patch integrals = integral over the enclosed 4-region of
        scal(conj(nabla_bar a) b) + scal(conj(a) (nabla b))

(the Gauss test) together with the sign of the rest-frame tube term,
and are never searched for at runtime.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .biquat import Biquaternion, four_vector, mul, scal, space_part, time_part
from .kinematics import Worldline
from .lwfield import nabla_bar_numeric, nabla_numeric
from .quadrature import (NonConvergent, integrate_adaptive, integrate_fixed_gl,
                         sphere_grid)

__all__ = [
    "SurfacePatch",
    "TubePatch",
    "ConePatch",
    "FlatSlabPatch",
    "SurfaceElement",
    "PatchNodes",
    "DegenerateTangents",
    "NonConvergent",
    "element_at",
    "surface_integral",
    "boundary_patches",
    "gauss_check",
    "GaussCheckResult",
    "QuadratureSpec",
    "TUBE_SIGN",
    "INNER_TUBE_SIGN",
    "CONE_UPPER_SIGN",
    "CONE_LOWER_SIGN",
]

# Orientation constants for (principal, u, phi)-ordered patches, pinned by
# the Gauss test: with these signs the closed tube+cones boundary integral
# equals the enclosed 4-volume integral, and the rest-frame tube self-term
# is negative.
TUBE_SIGN = -1.0
INNER_TUBE_SIGN = +1.0
CONE_UPPER_SIGN = +1.0
CONE_LOWER_SIGN = -1.0

# Near-coincidence guard: tube radius must exceed this multiple of the
# degenerate-point epsilon used by field evaluation.
RADIUS_GUARD = 1e3


class DegenerateTangents(Exception):
    """Patch tangents are linearly dependent beyond tolerance."""


@dataclass(frozen=True)
class QuadratureSpec:
    """Mesh orders and tolerances for surface quadrature."""

    n_theta: int = 16
    n_phi: int = 24
    tol: float = 1e-10
    max_panels: int = 4000
    scheme: str = "adaptive-gk"   # or "fixed-gl"
    gl_order: int = 4
    gl_panels: int = 8

    def scaled(self, factor: float) -> "QuadratureSpec":
        """Globally refine (factor > 1) or coarsen the mesh."""
        return QuadratureSpec(
            n_theta=max(4, int(round(self.n_theta * factor))),
            n_phi=max(8, int(round(self.n_phi * factor))),
            tol=self.tol / factor ** 4,
            max_panels=self.max_panels,
            scheme=self.scheme,
            gl_order=self.gl_order,
            gl_panels=max(2, int(round(self.gl_panels * factor))),
        )


@dataclass(frozen=True)
class SurfaceElement:
    """Directed measure weight at a parameter point.

    ``element`` is the duality 4-vector as a biquaternion; ``jacobian``
    its Euclidean magnitude.
    """

    element: Biquaternion
    jacobian: float


@dataclass(frozen=True)
class PatchNodes:
    """One principal-value slice of a patch, batched over the sphere grid."""

    X: Biquaternion
    worldline: Worldline
    tau_r: float
    xi: object            # scalar (cone slice) or scalar tube radius
    nhat: np.ndarray
    R: np.ndarray


def _sphere_basis(u, phi):
    """nhat and its (u, phi) partials for u = cos(theta)."""
    u = np.asarray(u, dtype=float)
    phi = np.asarray(phi, dtype=float)
    s = np.sqrt(1.0 - u * u)
    cp, sp = np.cos(phi), np.sin(phi)
    n = np.stack([s * cp, s * sp, u], axis=-1)
    dn_du = np.stack([-u / s * cp, -u / s * sp, np.ones_like(u)], axis=-1)
    dn_dphi = np.stack([-s * sp, s * cp, np.zeros_like(u)], axis=-1)
    return n, dn_du, dn_dphi


def _dual_element(t1, t2, t3):
    """Duality 4-vector from three tangent rows, batched.

    Rows are real 4-tuples (..., 4).  Returns (C0, Cvec) such that
    det(V, T1, T2, T3) = V^0 C0 + Vvec . Cvec.
    """
    T = np.stack([t1, t2, t3], axis=-2)          # (..., 3, 4)
    cols = [T[..., [1, 2, 3]], T[..., [0, 2, 3]],
            T[..., [0, 1, 3]], T[..., [0, 1, 2]]]
    dets = [np.linalg.det(c) for c in cols]
    c0 = dets[0]
    cvec = np.stack([-dets[1], dets[2], -dets[3]], axis=-1)
    return c0, cvec


def _element_biq(c0, cvec, sign):
    """Duality components -> biquaternion 4-vector (C0, -Cvec), oriented."""
    return four_vector(sign * c0, -sign * cvec)


class SurfacePatch:
    """Base class: parameterized patch with directed-element machinery."""

    kind = "patch"

    def __init__(self, orientation=1.0):
        self.orientation = float(orientation)

    def principal_range(self):
        raise NotImplementedError

    def point(self, w, u, phi) -> Biquaternion:
        raise NotImplementedError

    def tangent_rows(self, w, u, phi):
        """Real 4-tuples (T_principal, T_u, T_phi), batched over (u, phi)."""
        raise NotImplementedError

    def nodes(self, w, nhat, u, phi) -> PatchNodes:
        raise NotImplementedError

    def element(self, w, u, phi) -> SurfaceElement:
        t1, t2, t3 = self.tangent_rows(w, u, phi)
        c0, cvec = _dual_element(t1, t2, t3)
        mag = np.sqrt(c0 * c0 + np.sum(cvec * cvec, axis=-1))
        tan_scale = max(float(np.max(np.abs(t))) for t in (t1, t2, t3))
        if np.any(mag < 1e-13 * tan_scale ** 3):
            raise DegenerateTangents("linearly dependent tangents")
        return SurfaceElement(_element_biq(c0, cvec, self.orientation),
                              float(np.max(mag)))

    def _element_batch(self, w, u, phi):
        t1, t2, t3 = self.tangent_rows(w, u, phi)
        c0, cvec = _dual_element(t1, t2, t3)
        return _element_biq(c0, cvec, self.orientation)


class TubePatch(SurfacePatch):
    """Constant-retarded-radius tube between two proper times."""

    kind = "tube"

    def __init__(self, worldline, xi2, tau1, tau2, orientation=TUBE_SIGN,
                 eps_guard=1e-9):
        super().__init__(orientation)
        if xi2 <= RADIUS_GUARD * eps_guard:
            raise ValueError(
                f"tube radius {xi2} under the near-coincidence guard "
                f"{RADIUS_GUARD * eps_guard}")
        if tau2 <= tau1:
            raise ValueError("need tau2 > tau1")
        self.worldline = worldline
        self.xi2 = float(xi2)
        self.tau1 = float(tau1)
        self.tau2 = float(tau2)

    def principal_range(self):
        return (self.tau1, self.tau2)

    def _geometry(self, tau, u, phi):
        n, dn_du, dn_dphi = _sphere_basis(u, phi)
        g, beta, gdot, beta_dot = self.worldline.gamma_beta(tau)
        kappa = 1.0 - n @ beta
        R = self.xi2 / (g * kappa)
        return n, dn_du, dn_dphi, g, beta, gdot, beta_dot, kappa, R

    def point(self, tau, u, phi):
        n, _, _, g, beta, _, _, kappa, R = self._geometry(tau, u, phi)
        z = self.worldline.position(tau)
        return four_vector(time_part(z) + R, space_part(z) + R[..., None] * n)

    def tangent_rows(self, tau, u, phi):
        n, dn_du, dn_dphi, g, beta, gdot, beta_dot, kappa, R = \
            self._geometry(tau, u, phi)
        uvec = self.worldline.velocity(tau)
        u4 = np.concatenate([[time_part(uvec)], space_part(uvec)])
        p4 = np.concatenate([np.ones(n.shape[:-1] + (1,)), n], axis=-1)
        # dR/dtau = -R * d(gamma*kappa)/dtau / (gamma*kappa)
        gk_dot = gdot * kappa - g * (n @ beta_dot)
        dR_dtau = -R * gk_dot / (g * kappa)
        t_tau = u4 + dR_dtau[..., None] * p4
        dR_du = R * (dn_du @ beta) / kappa
        dR_dphi = R * (dn_dphi @ beta) / kappa
        zero = np.zeros(n.shape[:-1] + (1,))
        t_u = dR_du[..., None] * p4 + np.concatenate(
            [zero, R[..., None] * dn_du], axis=-1)
        t_phi = dR_dphi[..., None] * p4 + np.concatenate(
            [zero, R[..., None] * dn_dphi], axis=-1)
        return t_tau, t_u, t_phi

    def nodes(self, tau, nhat, u, phi):
        g, beta, _, _ = self.worldline.gamma_beta(tau)
        kappa = 1.0 - nhat @ beta
        R = self.xi2 / (g * kappa)
        z = self.worldline.position(tau)
        X = four_vector(time_part(z) + R, space_part(z) + R[..., None] * nhat)
        return PatchNodes(X=X, worldline=self.worldline, tau_r=float(tau),
                          xi=self.xi2, nhat=nhat, R=R)


class ConePatch(SurfacePatch):
    """Forward light cone of Z(tau_end), xi in [xi1, xi2]."""

    kind = "cone"

    def __init__(self, worldline, tau_end, xi1, xi2, orientation):
        super().__init__(orientation)
        if not (0.0 < xi1 < xi2):
            raise ValueError("need 0 < xi1 < xi2")
        self.worldline = worldline
        self.tau_end = float(tau_end)
        self.xi1 = float(xi1)
        self.xi2 = float(xi2)

    def principal_range(self):
        return (self.xi1, self.xi2)

    def point(self, xi, u, phi):
        n, _, _ = _sphere_basis(u, phi)
        g, beta, _, _ = self.worldline.gamma_beta(self.tau_end)
        kappa = 1.0 - n @ beta
        R = xi / (g * kappa)
        z = self.worldline.position(self.tau_end)
        return four_vector(time_part(z) + R, space_part(z) + R[..., None] * n)

    def tangent_rows(self, xi, u, phi):
        n, dn_du, dn_dphi = _sphere_basis(u, phi)
        g, beta, _, _ = self.worldline.gamma_beta(self.tau_end)
        kappa = 1.0 - n @ beta
        p4 = np.concatenate([np.ones(n.shape[:-1] + (1,)), n], axis=-1)
        zero = np.zeros(n.shape[:-1] + (1,))
        gk = g * kappa
        t_xi = p4 / gk[..., None]
        # d/du of xi*(1, n)/ (g*kappa):
        #   xi*(0, dn_du)/(g*kappa) + xi*(1, n)*(dn_du.beta)/(g*kappa^2)
        du_n = np.concatenate([zero, dn_du], axis=-1)
        dphi_n = np.concatenate([zero, dn_dphi], axis=-1)
        t_u = xi * (du_n / gk[..., None]
                    + p4 * ((dn_du @ beta) / (g * kappa ** 2))[..., None])
        t_phi = xi * (dphi_n / gk[..., None]
                      + p4 * ((dn_dphi @ beta) / (g * kappa ** 2))[..., None])
        return t_xi, t_u, t_phi

    def nodes(self, xi, nhat, u, phi):
        g, beta, _, _ = self.worldline.gamma_beta(self.tau_end)
        kappa = 1.0 - nhat @ beta
        R = xi / (g * kappa)
        z = self.worldline.position(self.tau_end)
        X = four_vector(time_part(z) + R, space_part(z) + R[..., None] * nhat)
        return PatchNodes(X=X, worldline=self.worldline, tau_r=self.tau_end,
                          xi=float(xi), nhat=nhat, R=R)


class FlatSlabPatch(SurfacePatch):
    """Constant-time 3-plane over a coordinate box; sanity-test patch."""

    kind = "slab"

    def __init__(self, t0=0.0, orientation=1.0):
        super().__init__(orientation)
        self.t0 = float(t0)

    def principal_range(self):
        return (0.0, 1.0)

    def point(self, w, u, phi):
        x = np.stack([np.broadcast_arrays(w, u, phi)[i] for i in range(3)],
                     axis=-1).astype(float)
        return four_vector(np.full(x.shape[:-1], self.t0), x)

    def tangent_rows(self, w, u, phi):
        shape = np.broadcast_shapes(np.shape(w), np.shape(u), np.shape(phi))
        rows = []
        for k in range(3):
            r = np.zeros(shape + (4,))
            r[..., k + 1] = 1.0
            rows.append(r)
        return tuple(rows)

    def nodes(self, w, nhat, u, phi):
        raise NotImplementedError("slab patches are element-only test objects")


def element_at(patch: SurfacePatch, u_triple) -> SurfaceElement:
    """Directed element at one parameter point (principal, u, phi)."""
    w, u, phi = u_triple
    return patch.element(w, np.asarray(u, dtype=float),
                         np.asarray(phi, dtype=float))


@dataclass(frozen=True)
class SurfaceIntegralResult:
    value: complex
    error: float

    @property
    def real(self):
        return self.value.real


def _sphere_density(patch, w, a_fn, b_fn, grid):
    """Integral over the direction sphere at a fixed principal value."""
    nhat, wts, u, phi = grid
    elem = patch._element_batch(w, u, phi)
    nodes = patch.nodes(w, nhat, u, phi)
    a = a_fn(nodes)
    b = b_fn(nodes)
    integrand = scal(mul(mul(a.conj(), 1j * elem), b))
    return complex(np.sum(wts * integrand))


def surface_integral(patch: SurfacePatch, a_fn, b_fn,
                     spec: QuadratureSpec = QuadratureSpec()) -> SurfaceIntegralResult:
    """Integral of scal(conj(a) d3Sigma b) over the patch.

    a_fn and b_fn map PatchNodes batches to Biquaternion batches.  The
    principal direction uses adaptive Gauss-Kronrod panels (or a fixed
    composite Gauss-Legendre rule for convergence studies); the sphere
    uses the product grid.  Returns the complex value and an error
    estimate combining the 1D estimate with a sphere-refinement probe.
    """
    grid = sphere_grid(spec.n_theta, spec.n_phi)
    lo, hi = patch.principal_range()

    def density(ws):
        return np.array([_sphere_density(patch, w, a_fn, b_fn, grid)
                         for w in np.atleast_1d(ws)])

    if spec.scheme == "fixed-gl":
        value = integrate_fixed_gl(density, lo, hi, spec.gl_order, spec.gl_panels)
        err_1d = np.nan  # no estimate for the fixed rule
    else:
        value, err_1d = integrate_adaptive(density, lo, hi, tol=spec.tol,
                                           max_panels=spec.max_panels)

    # sphere refinement probe at the midpoint
    fine = sphere_grid(spec.n_theta + 8, spec.n_phi + 16)
    mid = 0.5 * (lo + hi)
    probe = abs(_sphere_density(patch, mid, a_fn, b_fn, grid)
                - _sphere_density(patch, mid, a_fn, b_fn, fine)) * (hi - lo)
    err = probe if math.isnan(err_1d) else err_1d + probe
    return SurfaceIntegralResult(value=value, error=float(err))


def boundary_patches(worldline, xi1, xi2, tau1, tau2, inner_tube=False):
    """Oriented patches closing the region tau_r in [tau1, tau2], xi <= xi2.

    Orientations are the documented constants; with them the patch sum
    equals the enclosed 4-volume integral of the divergence-form
    integrand.  With ``inner_tube`` the region is the shell xi in
    [xi1, xi2] (needed whenever the fields are singular on the worldline).
    """
    patches = {
        "tube": TubePatch(worldline, xi2, tau1, tau2, orientation=TUBE_SIGN),
        "cone_upper": ConePatch(worldline, tau2, xi1, xi2,
                                orientation=CONE_UPPER_SIGN),
        "cone_lower": ConePatch(worldline, tau1, xi1, xi2,
                                orientation=CONE_LOWER_SIGN),
    }
    if inner_tube:
        patches["tube_inner"] = TubePatch(worldline, xi1, tau1, tau2,
                                          orientation=INNER_TUBE_SIGN)
    return patches


# -- Gauss consistency check ---------------------------------------------------

def _region_tangent_rows(worldline, tau, xi, u, phi):
    """All four coordinate tangents of X(tau, xi, u, phi), batched."""
    n, dn_du, dn_dphi = _sphere_basis(u, phi)
    g, beta, gdot, beta_dot = worldline.gamma_beta(tau)
    kappa = 1.0 - n @ beta
    gk = g * kappa
    R = xi / gk
    p4 = np.concatenate([np.ones(n.shape[:-1] + (1,)), n], axis=-1)
    zero = np.zeros(n.shape[:-1] + (1,))
    uvec = worldline.velocity(tau)
    u4 = np.concatenate([[time_part(uvec)], space_part(uvec)])
    gk_dot = gdot * kappa - g * (n @ beta_dot)
    t_tau = u4 + (-R * gk_dot / gk)[..., None] * p4
    t_xi = p4 / gk[..., None]
    du_n = np.concatenate([zero, dn_du], axis=-1)
    dphi_n = np.concatenate([zero, dn_dphi], axis=-1)
    t_u = xi * (du_n / gk[..., None]
                + p4 * ((dn_du @ beta) / (g * kappa ** 2))[..., None])
    t_phi = xi * (dphi_n / gk[..., None]
                  + p4 * ((dn_dphi @ beta) / (g * kappa ** 2))[..., None])
    return t_tau, t_xi, t_u, t_phi


def _divergence_integrand(a_xfn, b_xfn, X, h):
    """scal(conj(nabla_bar a) b) + scal(conj(a) nabla b), batched over X."""
    na = nabla_bar_numeric(a_xfn, X, h)
    nb = nabla_numeric(b_xfn, X, h)
    a = a_xfn(X)
    b = b_xfn(X)
    return scal(mul(na.conj(), b)) + scal(mul(a.conj(), nb))


@dataclass(frozen=True)
class GaussCheckResult:
    surface: complex
    volume: complex

    @property
    def residual(self):
        """Absolute defect of the closed-surface / 4-volume identity."""
        return abs(self.surface - self.volume)

    @property
    def rel_residual(self):
        return self.residual / max(abs(self.surface), abs(self.volume), 1e-30)


def gauss_check(a_xfn, b_xfn, worldline, xi1, xi2, tau1, tau2,
                spec: QuadratureSpec = QuadratureSpec(),
                n_tau=10, n_xi=10, fd_step=1e-5, patches=None) -> GaussCheckResult:
    """Closed-surface vs 4-volume identity for smooth fields.

    a_xfn, b_xfn map (batched) 4-vector points to biquaternion values.
    The surface side sums the oriented boundary patches of the shell
    xi in [xi1, xi2]; the volume side integrates the divergence-form
    integrand with an independent product rule and finite-difference
    gradients.  ``patches`` overrides the boundary set (used by
    fault-injection tests).
    """
    if patches is None:
        patches = boundary_patches(worldline, xi1, xi2, tau1, tau2,
                                   inner_tube=True)

    def wrap(f):
        return lambda nodes: f(nodes.X)

    surface = 0.0 + 0.0j
    for p in patches.values():
        res = surface_integral(p, wrap(a_xfn), wrap(b_xfn), spec)
        surface += res.value

    # independent 4-volume quadrature in (tau, xi, u, phi)
    tnod, twts = np.polynomial.legendre.leggauss(n_tau)
    xnod, xwts = np.polynomial.legendre.leggauss(n_xi)
    taus = 0.5 * (tau1 + tau2) + 0.5 * (tau2 - tau1) * tnod
    xis = 0.5 * (xi1 + xi2) + 0.5 * (xi2 - xi1) * xnod
    grid_n, grid_w, gu, gphi = sphere_grid(spec.n_theta, spec.n_phi)

    total = 0.0 + 0.0j
    for tau, wt in zip(taus, twts * 0.5 * (tau2 - tau1)):
        for xi, wx in zip(xis, xwts * 0.5 * (xi2 - xi1)):
            t_tau, t_xi, t_u, t_phi = _region_tangent_rows(
                worldline, tau, xi, gu, gphi)
            J = np.abs(np.linalg.det(np.stack([t_tau, t_xi, t_u, t_phi],
                                              axis=-2)))
            g, beta, _, _ = worldline.gamma_beta(tau)
            kappa = 1.0 - grid_n @ beta
            R = xi / (g * kappa)
            z = worldline.position(tau)
            X = four_vector(time_part(z) + R,
                            space_part(z) + R[..., None] * grid_n)
            val = _divergence_integrand(a_xfn, b_xfn, X, fd_step)
            total += wt * wx * complex(np.sum(grid_w * J * val))

    return GaussCheckResult(surface=surface, volume=total)
