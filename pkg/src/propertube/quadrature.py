"""Deterministic quadrature building blocks.

1D integration uses adaptive Gauss-Kronrod (G7/K15) with worst-panel
bisection and a fixed, reproducible reduction order; sphere integration
uses a product rule of Gauss-Legendre nodes in cos(theta) and a uniform
periodic grid in phi.  Integrands may return complex values.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = [
    "NonConvergent",
    "gauss_kronrod_panel",
    "integrate_adaptive",
    "integrate_fixed_gl",
    "sphere_grid",
]


class NonConvergent(Exception):
    """Adaptive refinement stalled above the requested tolerance."""


# G7/K15 nodes and weights on [-1, 1]
_K15_NODES = np.array([
    -0.991455371120813, -0.949107912342759, -0.864864423359769,
    -0.741531185599394, -0.586087235467691, -0.405845151377397,
    -0.207784955007898, 0.0, 0.207784955007898, 0.405845151377397,
    0.586087235467691, 0.741531185599394, 0.864864423359769,
    0.949107912342759, 0.991455371120813,
])
_K15_WEIGHTS = np.array([
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728, 0.204432940075298,
    0.190350578064785, 0.169004726639267, 0.140653259715525,
    0.104790010322250, 0.063092092629979, 0.022935322010529,
])
_G7_WEIGHTS = np.array([
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469, 0.381830050505119, 0.279705391489277,
    0.129484966168870,
])
_G7_IDX = np.arange(1, 15, 2)


def gauss_kronrod_panel(f, a, b):
    """K15 value and |K15 - G7| error estimate of ``f`` on [a, b].

    ``f`` maps an ndarray of nodes to an ndarray of (complex) values.
    """
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    x = mid + half * _K15_NODES
    y = np.asarray(f(x))
    k15 = half * np.sum(_K15_WEIGHTS * y)
    g7 = half * np.sum(_G7_WEIGHTS * y[_G7_IDX])
    return k15, abs(k15 - g7)


def _initial_splits(a, b, n_min):
    """Panel seeds; geometric when the interval spans decades."""
    if a > 0 and b / a > 100.0:
        edges = np.geomspace(a, b, max(n_min, int(math.log10(b / a)) + 2))
    else:
        edges = np.linspace(a, b, n_min + 1)
    return list(zip(edges[:-1], edges[1:]))


def integrate_adaptive(f, a, b, tol=1e-10, max_panels=4000, n_min=1):
    """Adaptive G7/K15 integration of a (complex) vectorized integrand.

    Returns (value, error_estimate).  Splitting is worst-error-first and
    the final reduction sums panels in interval order, so reruns are
    bit-identical.  Raises NonConvergent if the budget is exhausted while
    the error estimate still exceeds ``tol`` by more than 100x.
    """
    if a == b:
        return 0.0 + 0.0j, 0.0
    panels = []
    for lo, hi in _initial_splits(a, b, n_min):
        val, err = gauss_kronrod_panel(f, lo, hi)
        panels.append((lo, hi, val, err))

    while True:
        total_err = math.fsum(p[3] for p in panels)
        scale = abs(math.fsum(p[2].real for p in panels)) + abs(
            math.fsum(p[2].imag for p in panels))
        if total_err <= max(tol, tol * scale):
            break
        if len(panels) >= max_panels:
            if total_err > 100.0 * max(tol, tol * scale):
                raise NonConvergent(
                    f"error {total_err:.3e} after {len(panels)} panels")
            break
        worst = max(range(len(panels)), key=lambda i: panels[i][3])
        lo, hi, _, _ = panels[worst]
        mid = 0.5 * (lo + hi)
        panels[worst] = (lo, mid, *gauss_kronrod_panel(f, lo, mid))
        panels.append((mid, hi, *gauss_kronrod_panel(f, mid, hi)))

    panels.sort(key=lambda p: p[0])
    value = (math.fsum(p[2].real for p in panels)
             + 1j * math.fsum(p[2].imag for p in panels))
    error = math.fsum(p[3] for p in panels)
    return value, error


def integrate_fixed_gl(f, a, b, order=3, panels=8):
    """Composite fixed-order Gauss-Legendre rule (for convergence studies)."""
    nodes, weights = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(a, b, panels + 1)
    vals = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        half = 0.5 * (hi - lo)
        x = 0.5 * (lo + hi) + half * nodes
        y = np.asarray(f(x))
        vals.append(half * np.sum(weights * y))
    return (math.fsum(v.real for v in vals)
            + 1j * math.fsum(v.imag for v in vals))


def sphere_grid(n_theta=16, n_phi=32):
    """Product quadrature on the unit sphere in (u = cos theta, phi).

    Returns (nhat (M,3), weights (M,), u (M,), phi (M,)); weights sum to
    4*pi.  Nodes avoid the poles, where the (u, phi) chart degenerates.
    """
    u, wu = np.polynomial.legendre.leggauss(n_theta)
    phi = np.arange(n_phi) * (2.0 * np.pi / n_phi)
    wphi = 2.0 * np.pi / n_phi
    uu, pp = np.meshgrid(u, phi, indexing="ij")
    uu = uu.ravel()
    pp = pp.ravel()
    s = np.sqrt(1.0 - uu * uu)
    nhat = np.stack([s * np.cos(pp), s * np.sin(pp), uu], axis=-1)
    w = np.repeat(wu, n_phi) * wphi
    return nhat, w, uu, pp
