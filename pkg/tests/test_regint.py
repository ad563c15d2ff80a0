import numpy as np
import pytest
from numpy.testing import assert_allclose

from propertube.kinematics import Worldline
from propertube.lwfield import SingularityField
from propertube.quadrature import integrate_adaptive
from propertube.regint import (InvalidInterval, RadialIntegrand,
                               SingularMismatch, hadamard_finite_part,
                               self_energy_density, volume_self_energy)


def rest_field(e=1.0):
    return SingularityField(e, Worldline.rest())


def test_volume_self_energy_capped_infinity():
    # e=1, xi1=0.5, xi2 -> infinity gives 1.0
    val = volume_self_energy(rest_field(), 0.5, 1e9)
    assert_allclose(val, 1.0, rtol=1e-6)


def test_volume_self_energy_interval():
    val = volume_self_energy(rest_field(), 1.0, 2.0)
    assert_allclose(val, 0.25, rtol=1e-10)


def test_volume_self_energy_zero_charge():
    assert volume_self_energy(rest_field(0.0), 1.0, 2.0) == 0.0


def test_volume_self_energy_matches_antiderivative():
    # adaptive radial quadrature against e^2 (1/(2 xi1) - 1/(2 xi2))
    for e, xi1, xi2 in [(1.0, 0.3, 5.0), (2.0, 0.05, 1.0), (0.7, 1.0, 30.0)]:
        val = volume_self_energy(rest_field(e), xi1, xi2)
        want = e * e * (0.5 / xi1 - 0.5 / xi2)
        assert_allclose(val, want, rtol=1e-10)


def test_volume_self_energy_divergence_rate():
    # the 1/xi1 blow-up is reported, never extrapolated away
    e = 1.0
    vals = [volume_self_energy(rest_field(e), xi1, 2.0)
            for xi1 in (1e-2, 1e-3, 1e-4)]
    for xi1, v in zip((1e-2, 1e-3, 1e-4), vals):
        assert_allclose(v, 0.5 / xi1 - 0.25, rtol=1e-8)


def test_volume_self_energy_invalid():
    with pytest.raises(InvalidInterval):
        volume_self_energy(rest_field(), 2.0, 1.0)
    with pytest.raises(InvalidInterval):
        volume_self_energy(rest_field(), 0.0, 1.0)
    with pytest.raises(InvalidInterval):
        volume_self_energy(SingularityField(1.0, Worldline.uniform((0.5, 0, 0))),
                           0.5, 1.0)


def test_finite_part_symmetric_parametrization():
    # two half-lines of 1/(4 xi^2) reproduce -e^2/(2 xi2) at xi2 = 1
    ri = RadialIntegrand(f=lambda x: 1.0 / (4.0 * x ** 2),
                         singular_orders=(2,), domain=(0.0, 1.0))
    assert_allclose(2.0 * hadamard_finite_part(ri), -0.5, rtol=1e-10)


def test_finite_part_regular_is_ordinary_integral():
    ri = RadialIntegrand(f=lambda x: np.ones_like(x), singular_orders=(),
                         domain=(0.0, 1.0))
    assert_allclose(hadamard_finite_part(ri), 1.0, rtol=1e-10)
    ri = RadialIntegrand(f=lambda x: np.cos(x), singular_orders=(),
                         domain=(0.0, 2.0))
    assert_allclose(hadamard_finite_part(ri), np.sin(2.0), rtol=1e-8)


def test_finite_part_inverse_square_plus_regular():
    ri = RadialIntegrand(f=lambda x: 1.0 / x ** 2 + 1.0, singular_orders=(2,),
                         domain=(0.0, 2.0))
    assert_allclose(hadamard_finite_part(ri), 1.5, rtol=1e-10)


def test_finite_part_log_template():
    ri = RadialIntegrand(f=lambda x: 1.0 / x + 1.0, singular_orders=(1,),
                         domain=(0.0, 2.0))
    assert_allclose(hadamard_finite_part(ri), np.log(2.0) + 2.0, rtol=1e-10)


def test_finite_part_mixed_orders():
    ri = RadialIntegrand(f=lambda x: 1.0 / x ** 2 + 2.0 / x + 3.0,
                         singular_orders=(2, 1), domain=(0.0, 1.0))
    assert_allclose(hadamard_finite_part(ri), 2.0, rtol=1e-6)


def test_finite_part_explicit_coefficients():
    ri = RadialIntegrand(f=lambda x: 1.0 / x ** 2 + 1.0, singular_orders=(2,),
                         domain=(0.0, 2.0), coefficients={2: 1.0})
    assert_allclose(hadamard_finite_part(ri), 1.5, rtol=1e-12)


def test_finite_part_self_energy_matches_closed_form():
    # the regularized self-energy is exactly -e^2/(2 xi2)
    for xi2 in np.geomspace(0.25, 8.0, 5):
        ri = RadialIntegrand(f=lambda x: self_energy_density(1.0, x),
                             singular_orders=(2,), domain=(0.0, xi2))
        assert_allclose(hadamard_finite_part(ri), -0.5 / xi2, rtol=1e-9)


def test_finite_part_mismatch_detection():
    ri = RadialIntegrand(f=lambda x: 1.0 / x ** 3, singular_orders=(2,),
                         domain=(0.0, 1.0))
    with pytest.raises(SingularMismatch):
        hadamard_finite_part(ri)
    ri = RadialIntegrand(f=lambda x: 1.0 / x ** 2 + 1.0 / x,
                         singular_orders=(2,), domain=(0.0, 1.0))
    with pytest.raises(SingularMismatch):
        hadamard_finite_part(ri)


def test_finite_part_domain_validation():
    ri = RadialIntegrand(f=lambda x: x, singular_orders=(), domain=(0.5, 1.0))
    with pytest.raises(InvalidInterval):
        hadamard_finite_part(ri)


def test_divergence_identity():
    # volume(xi1, xi2) + e^2/(2 xi2) - e^2/(2 xi1) = 0
    e = 1.0
    for xi1, xi2 in [(0.01, 1.0), (0.001, 2.0), (0.37, 11.0)]:
        val = volume_self_energy(rest_field(e), xi1, xi2)
        resid = val + e * e / (2 * xi2) - e * e / (2 * xi1)
        assert abs(resid) < 1e-8 * abs(val)


def test_adaptive_quadrature_basics():
    val, err = integrate_adaptive(lambda x: np.exp(-x), 0.0, 30.0, tol=1e-12)
    assert_allclose(val.real, 1.0, rtol=1e-10)
    assert err < 1e-8
