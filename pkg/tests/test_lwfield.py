import numpy as np
import pytest
from numpy.testing import assert_allclose

from propertube.biquat import (conj, electric_part, four_vector,
                               magnetic_part, minkowski, mul, scal,
                               space_part, time_part)
from propertube.kinematics import Worldline, lorentz_boost
from propertube.lwfield import (ConstantPotential, DistantCharge, PlaneWave,
                                PolynomialSlow, SingularityField,
                                check_regularity, field_from_potential_numeric,
                                nabla_bar_numeric)

SAMPLES = [four_vector(3.0, [1.5, 0.3, 0.2]),
           four_vector(2.0, [0.4, -0.8, 0.5]),
           four_vector(4.0, [2.0, 1.0, -0.7])]


def test_coulomb_potential():
    sf = SingularityField(1.0, Worldline.rest())
    a = sf.potential(four_vector(5.0, [2.0, 0.0, 0.0]))
    assert_allclose(a.w, 0.5, rtol=1e-12)
    assert_allclose(a.v, np.zeros(3), atol=1e-15)


def test_zero_charge():
    sf = SingularityField(0.0, Worldline.rest())
    a = sf.potential(four_vector(5.0, [2.0, 0.0, 0.0]))
    assert float(a.norm_max()) == 0.0
    b = sf.field(four_vector(5.0, [2.0, 0.0, 0.0]))
    assert float(b.norm_max()) == 0.0


def test_coulomb_field():
    sf = SingularityField(1.0, Worldline.rest())
    b = sf.field(four_vector(5.0, [2.0, 0.0, 0.0]))
    assert_allclose(electric_part(b), [0.25, 0.0, 0.0], atol=1e-14)
    assert_allclose(magnetic_part(b), np.zeros(3), atol=1e-14)
    assert_allclose(np.real(scal(mul(conj(b), b))), 1.0 / 16.0, rtol=1e-12)
    assert abs(scal(b)) == 0.0  # 6-vector purity


def test_boosted_coulomb_potential():
    # uniform-motion potential equals the boosted static solution
    beta = np.array([0.6, 0.0, 0.0])
    sf = SingularityField(1.0, Worldline.uniform(beta))
    for x in SAMPLES:
        a = sf.potential(x)
        xr = lorentz_boost(x, beta)
        r = np.linalg.norm(space_part(xr))
        a_oracle = lorentz_boost(four_vector(1.0 / r, [0, 0, 0]), -beta)
        assert_allclose(time_part(a), time_part(a_oracle), rtol=1e-10)
        assert_allclose(space_part(a), space_part(a_oracle), rtol=1e-10,
                        atol=1e-12)


@pytest.mark.parametrize("wl", [Worldline.rest(), Worldline.uniform((0.5, 0.1, 0.0)),
                                Worldline.hyperbolic(0.2),
                                Worldline.circular(1.0, 0.3)],
                         ids=["rest", "uniform", "hyperbolic", "circular"])
def test_field_matches_potential_gradient(wl):
    sf = SingularityField(1.3, wl)
    for x in SAMPLES:
        b = sf.field(x)
        b_num = field_from_potential_numeric(sf.potential, x, h=1e-5)
        scale = float(b.norm_max())
        assert np.max(np.abs(b.v - b_num.v)) < 1e-6 * scale


def test_fields_real_for_real_worldlines():
    sf = SingularityField(1.0, Worldline.circular(0.8, 0.4))
    for x in SAMPLES:
        b = sf.field(x)
        assert np.max(np.abs(electric_part(b) + 1j * magnetic_part(b) - b.v)) \
            < 1e-15 * float(b.norm_max())


def test_lorenz_condition():
    sf = SingularityField(1.0, Worldline.hyperbolic(0.2))
    for x in SAMPLES:
        g = nabla_bar_numeric(sf.potential, x, h=1e-5)
        assert abs(scal(g)) < 1e-6 * float(g.norm_max())


def test_regularity_and_convergence_order():
    sf = SingularityField(1.0, Worldline.hyperbolic(0.2))
    res = [check_regularity(sf.field, SAMPLES, h=h) for h in (0.08, 0.04, 0.02)]
    assert 3.5 < res[0] / res[1] < 4.5
    assert 3.5 < res[1] / res[2] < 4.5


def test_regularity_constant_and_planewave():
    const = ConstantPotential(phi=2.0, avec=(0.1, 0.0, 0.0))
    assert check_regularity(const.field, SAMPLES, h=1e-4) == 0.0
    pw = PlaneWave(amplitude=(0.0, 1.0, 0.0), kvec=(0.0, 0.0, 0.8), phase=0.3)
    assert check_regularity(pw.field, SAMPLES, h=1e-4) < 1e-6


def test_far_zone_radiation_scaling():
    # |radiation part| * xi approaches a constant along a fixed direction
    wl = Worldline.hyperbolic(0.5)
    sf = SingularityField(1.0, wl)
    n = np.array([0.0, 0.0, 1.0])
    xis = np.geomspace(20.0, 320.0, 5)
    b = sf.field_from(0.3, np.broadcast_to(n, (5, 3)), xis)
    mags = np.linalg.norm(electric_part(b), axis=-1)
    # fit |E| ~ C * xi^p; the radiation part dominates at large xi
    p = np.polyfit(np.log(xis), np.log(mags), 1)[0]
    assert abs(p + 1.0) < 0.02


@pytest.mark.parametrize("ext", [
    PolynomialSlow(eps=0.05, phi=1.0, avec=(0.3, 0.1, 0.0), k0=0.7,
                   kvec=(0.2, 0.5, 0.4)),
    PlaneWave(amplitude=(0.0, 1.0, 0.0), kvec=(0.0, 0.0, 0.8), phase=0.3),
    DistantCharge(q=10.0, center=(0.0, 0.0, 40.0)),
], ids=["polynomial", "planewave", "distant"])
def test_external_field_is_potential_gradient(ext):
    for x in SAMPLES:
        b = ext.field(x)
        b_num = field_from_potential_numeric(ext.potential, x, h=1e-5)
        scale = max(float(b.norm_max()), 1e-6)
        assert np.max(np.abs(b.v - b_num.v)) < 1e-6 * scale


@pytest.mark.parametrize("ext", [
    ConstantPotential(phi=1.5, avec=(0.0, 0.2, 0.0)),
    PolynomialSlow(eps=0.02, phi=1.0, avec=(0.1, 0.0, 0.3), k0=1.0,
                   kvec=(1.0, 1.0, 1.0)),
    PlaneWave(amplitude=(0.0, 0.7, 0.0), kvec=(0.0, 0.0, 0.5), phase=0.1),
    DistantCharge(q=5.0, center=(0.0, 0.0, 30.0)),
], ids=["constant", "polynomial", "planewave", "distant"])
@pytest.mark.parametrize("wl", [Worldline.hyperbolic(0.3),
                                Worldline.circular(1.0, 0.25)],
                         ids=["hyperbolic", "circular"])
def test_potential_dot_chain_rule(ext, wl):
    h = 1e-6
    for tau in (-0.4, 0.8):
        adot = ext.potential_dot(wl, tau)
        ap = ext.potential(wl.position(tau + h))
        am = ext.potential(wl.position(tau - h))
        scale = max(float(ap.norm_max()), 1.0)
        assert np.max(np.abs(adot.v - (ap.v - am.v) / (2 * h))) < 1e-7 * scale
        assert abs(adot.w - (ap.w - am.w) / (2 * h)) < 1e-7 * scale


def test_plane_wave_is_null_and_transverse():
    pw = PlaneWave(amplitude=(0.0, 1.0, 0.0), kvec=(0.0, 0.0, 0.8), phase=0.2)
    for x in SAMPLES:
        b = pw.field(x)
        e, h = electric_part(b), magnetic_part(b)
        assert abs(e @ e - h @ h) < 1e-12
        assert abs(e @ h) < 1e-12
    with pytest.raises(ValueError):
        PlaneWave(amplitude=(0.0, 0.0, 1.0), kvec=(0.0, 0.0, 0.8))
