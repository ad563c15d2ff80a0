"""Complex-quaternion (biquaternion) algebra.

A biquaternion is ``Q = w + v`` with a complex scalar ``w`` and a complex
3-vector ``v`` multiplying under the Hamilton rules (``e1*e2 = e3``,
``e_k**2 = -1``).  All physical carriers used by this package are views of
the same algebra:

* 4-vectors store a real scalar and an imaginary vector,
  ``X = ct - i*xvec``, so the 4-velocity is ``U = gamma*(1 - i*beta)``.
* 6-vectors (electromagnetic field values) store a zero scalar and the
  complex vector ``E + i*H``.

Components may be numpy arrays; all operations broadcast over leading
axes, which is how the quadrature code evaluates whole spheres of points
at once.  Instances are immutable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Biquaternion",
    "ONE",
    "E1",
    "E2",
    "E3",
    "mul",
    "conj",
    "scal",
    "vect",
    "realpart",
    "minkowski",
    "four_vector",
    "six_vector",
    "time_part",
    "space_part",
    "electric_part",
    "magnetic_part",
]


def _as_complex(x):
    a = np.asarray(x, dtype=complex)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Biquaternion:
    """Immutable complex quaternion with broadcastable components.

    Attributes
    ----------
    w : complex ndarray, shape (...)
        Scalar part.
    v : complex ndarray, shape (..., 3)
        Vector part.
    """

    w: np.ndarray
    v: np.ndarray

    def __init__(self, w, v):
        object.__setattr__(self, "w", _as_complex(w))
        object.__setattr__(self, "v", _as_complex(v))
        if self.v.shape[-1:] != (3,):
            raise ValueError("vector part must have trailing dimension 3")

    # -- algebra ----------------------------------------------------------

    def __mul__(self, other):
        if isinstance(other, Biquaternion):
            return mul(self, other)
        other = np.asarray(other, dtype=complex)
        return Biquaternion(self.w * other, self.v * other[..., None])

    def __rmul__(self, other):
        # complex scalars commute with everything
        return self.__mul__(other)

    def __add__(self, other):
        if not isinstance(other, Biquaternion):
            other = Biquaternion(other, np.zeros(3))
        return Biquaternion(self.w + other.w, self.v + other.v)

    def __radd__(self, other):
        return self.__add__(other)

    def __sub__(self, other):
        if not isinstance(other, Biquaternion):
            other = Biquaternion(other, np.zeros(3))
        return Biquaternion(self.w - other.w, self.v - other.v)

    def __neg__(self):
        return Biquaternion(-self.w, -self.v)

    def __truediv__(self, other):
        return Biquaternion(self.w / other, self.v / other)

    def conj(self):
        """Quaternion conjugate: vector part negated, coefficients untouched."""
        return Biquaternion(self.w, -self.v)

    # -- views ------------------------------------------------------------

    @property
    def batch_shape(self):
        return np.broadcast_shapes(self.w.shape, self.v.shape[:-1])

    def norm_max(self):
        """Max absolute component; cheap size gauge for tolerances."""
        return max(np.max(np.abs(self.w), initial=0.0),
                   np.max(np.abs(self.v), initial=0.0))

    def __repr__(self):
        return f"Biquaternion(w={self.w!r}, v={self.v!r})"


def mul(p: Biquaternion, q: Biquaternion) -> Biquaternion:
    """Hamilton product with complex coefficients."""
    w = p.w * q.w - np.sum(p.v * q.v, axis=-1)
    v = (p.w[..., None] * q.v + q.w[..., None] * p.v + np.cross(p.v, q.v))
    return Biquaternion(w, v)


def conj(q: Biquaternion) -> Biquaternion:
    return q.conj()


def scal(q: Biquaternion):
    """Scalar part (complex)."""
    return q.w


def vect(p: Biquaternion, q: Biquaternion) -> Biquaternion:
    """Product with the scalar part discarded (pure-vector result)."""
    full = mul(p, q)
    return Biquaternion(np.zeros_like(full.w), full.v)


def realpart(q: Biquaternion) -> Biquaternion:
    """Componentwise real part of all complex coefficients."""
    return Biquaternion(q.w.real, q.v.real)


def minkowski(p: Biquaternion, q: Biquaternion):
    """scal(conj(p) * q); the invariant pairing (+,-,-,-) on 4-vectors."""
    return scal(mul(p.conj(), q))


# -- 4-vector and 6-vector views -------------------------------------------

def four_vector(t, x) -> Biquaternion:
    """Spacetime point / 4-vector ``t - i*x`` (c = 1 units)."""
    x = np.asarray(x, dtype=float)
    return Biquaternion(np.asarray(t, dtype=complex), -1j * x)


def six_vector(e, h=None) -> Biquaternion:
    """Field value ``E + i*H`` as a pure-vector biquaternion."""
    e = np.asarray(e, dtype=complex)
    if h is not None:
        e = e + 1j * np.asarray(h, dtype=float)
    return Biquaternion(np.zeros(e.shape[:-1], dtype=complex), e)


def time_part(q: Biquaternion):
    """Real scalar coordinate of a 4-vector."""
    return q.w.real


def space_part(q: Biquaternion):
    """Real spatial coordinates of a 4-vector (x = i*v for v = -i*x)."""
    return (1j * q.v).real


def electric_part(b: Biquaternion):
    return b.v.real


def magnetic_part(b: Biquaternion):
    return b.v.imag


ONE = Biquaternion(1.0, np.zeros(3))
E1 = Biquaternion(0.0, [1.0, 0.0, 0.0])
E2 = Biquaternion(0.0, [0.0, 1.0, 0.0])
E3 = Biquaternion(0.0, [0.0, 0.0, 1.0])
