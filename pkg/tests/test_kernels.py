import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from neurofield.errors import InvalidParamsError
from neurofield.grid import GridSpec, kernel_spectrum, multiplier_values
from neurofield.kernels import (
    CANONICAL,
    DoGParams,
    constants,
    dog_eval,
    dog_radial,
    kernel_field,
    omega_hat,
    omega_hat_multiplier,
)


def test_canonical_constants(params):
    c = constants(params)
    assert c.mu_0 == pytest.approx(2.0, abs=1e-12)
    assert c.mu_c == pytest.approx(4.0, abs=1e-12)
    assert c.q_c == pytest.approx(math.sqrt(math.log(2)), abs=1e-14)
    assert params.balanced


@pytest.mark.parametrize("bad", [(0.0, 0.1, 0.2), (1.0, 0.2, 0.1), (1.0, 0.1, 0.1), (4.0, 0.1, 0.15)])
def test_invalid_parameters_rejected(bad):
    with pytest.raises(InvalidParamsError):
        DoGParams(*bad)


def test_transform_of_sampled_kernel_is_closed_form(params):
    spec = GridSpec(10.0, 256, 2)
    disc = kernel_spectrum(kernel_field(params, spec)).real
    closed = multiplier_values(omega_hat_multiplier(params), spec)
    assert np.max(np.abs(disc - closed)) < 1e-12


def test_one_dimensional_transform_by_quadrature(params):
    for xi in (0.0, 0.3, 0.83, 2.0):
        val = quad(lambda x: float(dog_radial(params, 1, x)) * math.cos(2 * math.pi * xi * x), -8, 8,
                   epsabs=1e-14, limit=200)[0]
        assert val == pytest.approx(float(omega_hat(params, 1, xi)), abs=1e-12)


def test_dog_eval_matches_radial_profile(params):
    pts = np.array([[0.0, 0.0], [0.3, -0.4], [1.0, 2.0]])
    assert np.allclose(dog_eval(params, 2, pts), dog_radial(params, 2, np.hypot(pts[:, 0], pts[:, 1])))


@settings(max_examples=30, deadline=None)
@given(
    kappa=st.floats(0.3, 3.0),
    s1=st.floats(0.1, 0.5),
    gap=st.floats(1.05, 3.0),
)
def test_l1_norm_against_radial_quadrature(kappa, s1, gap):
    s2 = s1 * max(gap, math.sqrt(kappa) * 1.05)
    p = DoGParams(kappa, s1, s2)
    c = constants(p)
    f = lambda r: abs(float(dog_radial(p, 2, r))) * 2 * math.pi * r
    theta = c.theta
    total = quad(f, 0, theta, epsabs=1e-13)[0] + quad(f, theta, np.inf, epsabs=1e-13)[0]
    assert c.l1_norm == pytest.approx(total, rel=1e-8, abs=1e-10)
    assert float(dog_radial(p, 2, theta)) == pytest.approx(0.0, abs=1e-9 * float(dog_radial(p, 2, 0.0)))


@settings(max_examples=30, deadline=None)
@given(kappa=st.floats(0.2, 3.0), s1=st.floats(0.05, 0.5), gap=st.floats(1.05, 3.0))
def test_critical_frequency_maximizes_transform(kappa, s1, gap):
    s2 = s1 * max(gap, math.sqrt(kappa) * 1.05)
    p = DoGParams(kappa, s1, s2)
    c = constants(p)
    grid = np.linspace(0, 5 / s1, 20001)
    vals = omega_hat(p, 1, grid)
    assert float(omega_hat(p, 1, c.q_c)) >= vals.max() - 1e-12
    if kappa * s2**2 / s1**2 <= 1:
        assert c.q_c == 0.0


def test_kernel_field_centred_on_origin(params):
    spec = GridSpec(4.0, 64, 2)
    k = kernel_field(params, spec)
    assert np.unravel_index(np.argmax(k.values), spec.shape) == (32, 32)
    assert np.array_equal(k.values, k.values.T)


def test_canonical_is_cached():
    assert DoGParams.canonical() == CANONICAL
