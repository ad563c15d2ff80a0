"""Shared fixtures and independent oracles for the test suite."""

import numpy as np
import pytest

from propertube.biquat import Biquaternion, space_part, time_part


@pytest.fixture
def rng():
    return np.random.default_rng(20250810)


def random_biquaternion(rng, n=None, real=False):
    shape = () if n is None else (n,)
    if real:
        w = rng.standard_normal(shape)
        v = rng.standard_normal(shape + (3,))
    else:
        w = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
        v = rng.standard_normal(shape + (3,)) + 1j * rng.standard_normal(shape + (3,))
    return Biquaternion(w, v)


# -- independent component-table quaternion product ---------------------------

def quat_mul_oracle(p, q):
    """Hamilton product from the explicit 4x4 component table.

    Independent of the vector/cross-product implementation under test.
    Takes and returns plain complex 4-arrays (w, x, y, z).
    """
    w1, x1, y1, z1 = p
    w2, x2, y2, z2 = q
    return np.array([
        w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2,
        w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2,
        w1 * y2 + y1 * w2 + z1 * x2 - x1 * z2,
        w1 * z2 + z1 * w2 + x1 * y2 - y1 * x2,
    ])


def as_components(b):
    return np.array([complex(b.w), *[complex(c) for c in np.atleast_1d(b.v)]])


def bisection_retarded_oracle(worldline, x, tol=1e-13, max_iter=200):
    """Plain bisection on the null condition over a dense pre-bracket.

    Independent of the production Newton solver.
    """
    t = float(time_part(x))
    xs = space_part(x)

    def h(tau):
        z = worldline.position(tau)
        return (t - time_part(z)) - np.linalg.norm(xs - space_part(z))

    lo, hi = worldline.domain
    grid = np.linspace(lo, hi, 4000)
    vals = np.array([h(g) for g in grid])
    idx = np.nonzero((vals[:-1] > 0) & (vals[1:] <= 0))[0]
    assert idx.size == 1, "oracle bracket failed"
    a, b = grid[idx[0]], grid[idx[0] + 1]
    for _ in range(max_iter):
        mid = 0.5 * (a + b)
        if h(mid) > 0:
            a = mid
        else:
            b = mid
        if b - a < tol:
            break
    return 0.5 * (a + b)
