import numpy as np
import pytest
from numpy.testing import assert_allclose

from propertube.biquat import (E1, E2, E3, ONE, Biquaternion, conj,
                               electric_part, four_vector, magnetic_part,
                               minkowski, mul, realpart, scal, six_vector,
                               vect)

from conftest import as_components, quat_mul_oracle, random_biquaternion


def test_basis_relations():
    r = mul(E1, E2)
    assert_allclose(r.v, E3.v)
    assert_allclose(r.w, 0.0)
    for e in (E1, E2, E3):
        sq = mul(e, e)
        assert_allclose(sq.w, -1.0)
        assert_allclose(sq.v, np.zeros(3), atol=1e-15)


def test_identity():
    q = Biquaternion(2.0 + 1j, [1.0, -2.0, 0.5 + 0.5j])
    r = mul(q, ONE)
    assert_allclose(r.w, q.w)
    assert_allclose(r.v, q.v)


def test_velocity_norm_product():
    # (1 + i*beta)(1 - i*beta) = 1 - beta^2 for beta = (0.6, 0, 0)
    beta = np.array([0.6, 0.0, 0.0])
    p = Biquaternion(1.0, 1j * beta)
    q = Biquaternion(1.0, -1j * beta)
    r = mul(p, q)
    assert_allclose(r.w, 0.64)
    assert_allclose(r.v, np.zeros(3), atol=1e-16)


def test_mul_against_component_table(rng):
    for _ in range(50):
        p = random_biquaternion(rng)
        q = random_biquaternion(rng)
        got = as_components(mul(p, q))
        want = quat_mul_oracle(as_components(p), as_components(q))
        assert_allclose(got, want, rtol=1e-13, atol=1e-13)


def test_conj_definition():
    v = np.array([1.0, 2.0, 3.0]) + 1j * np.array([0.5, 0.0, -1.0])
    q = Biquaternion(2.0, v)
    c = conj(q)
    assert_allclose(c.w, 2.0)
    assert_allclose(c.v, -v)
    back = conj(c)
    assert_allclose(back.v, q.v)


def test_conj_antihomomorphism(rng):
    for _ in range(50):
        p = random_biquaternion(rng)
        q = random_biquaternion(rng)
        lhs = conj(mul(p, q))
        rhs = mul(conj(q), conj(p))
        assert_allclose(lhs.w, rhs.w, rtol=1e-12, atol=1e-12)
        assert_allclose(lhs.v, rhs.v, rtol=1e-12, atol=1e-12)


def test_conj_q_times_q_is_scalar(rng):
    q = random_biquaternion(rng, n=200)
    r = mul(conj(q), q)
    assert np.max(np.abs(r.v)) < 1e-12 * max(1.0, float(np.max(np.abs(r.w))))


def test_scal_and_cyclicity(rng):
    assert scal(Biquaternion(3.0, [1, 2, 3])) == 3.0
    p = random_biquaternion(rng, n=500)
    q = random_biquaternion(rng, n=500)
    d = scal(mul(p, q)) - scal(mul(q, p))
    assert np.max(np.abs(d)) < 1e-12


def test_unit_velocity_scal():
    beta = np.array([0.6, 0.0, 0.0])
    g = 1.0 / np.sqrt(1 - 0.36)
    u = Biquaternion(g, -1j * g * beta)
    assert_allclose(minkowski(u, u), 1.0, rtol=1e-15)


def test_vect():
    v = Biquaternion(0.0, [1.0, 2.0, 3.0])
    r = vect(ONE, v)
    assert_allclose(r.v, v.v)
    assert_allclose(r.w, 0.0)
    # product of a real vector with itself is pure scalar
    r = vect(v, v)
    assert_allclose(r.v, np.zeros(3), atol=1e-15)
    assert_allclose(r.w, 0.0)


def test_realpart():
    assert realpart(Biquaternion(3 + 4j, np.zeros(3))).w == 3.0
    q = realpart(Biquaternion(0.0, 1j * np.array([1.0, 2.0, 3.0])))
    assert_allclose(q.v, np.zeros(3))


def test_field_square_identity(rng):
    # Re scal(conj(B) B) = |E|^2 - |H|^2 for B = E + iH with real E, H
    for _ in range(20):
        e = rng.standard_normal(3)
        h = rng.standard_normal(3)
        b = six_vector(e, h)
        val = scal(mul(conj(b), b))
        assert_allclose(val.real, e @ e - h @ h, rtol=1e-13)


def test_associativity(rng):
    p = random_biquaternion(rng, n=300)
    q = random_biquaternion(rng, n=300)
    r = random_biquaternion(rng, n=300)
    lhs = mul(mul(p, q), r)
    rhs = mul(p, mul(q, r))
    scale = float(np.max(np.abs(lhs.v))) + float(np.max(np.abs(lhs.w)))
    assert np.max(np.abs(lhs.w - rhs.w)) < 1e-12 * scale
    assert np.max(np.abs(lhs.v - rhs.v)) < 1e-12 * scale


def test_four_vector_view():
    x = four_vector(2.0, [1.0, 0.0, -1.0])
    assert x.w == 2.0
    assert_allclose(x.v, -1j * np.array([1.0, 0.0, -1.0]))


def test_six_vector_parts():
    e = np.array([1.0, 0.5, 0.0])
    h = np.array([0.0, 2.0, 1.0])
    b = six_vector(e, h)
    assert_allclose(electric_part(b), e)
    assert_allclose(magnetic_part(b), h)
    assert b.w == 0.0


def test_immutability():
    q = Biquaternion(1.0, [1.0, 2.0, 3.0])
    with pytest.raises((ValueError, RuntimeError)):
        q.v[0] = 5.0
