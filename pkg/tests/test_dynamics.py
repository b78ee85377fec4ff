import math

import numpy as np
import pytest

from neurofield.dynamics import (
    ConvolutionOperator,
    dphi_apply,
    gamma0_estimate,
    integrate,
    linearized_response,
    stationary_state,
    sup_bound_g1,
)
from neurofield.errors import BlowUpError, ContractionError, ConvergenceError, GridMismatchError
from neurofield.grid import Field, GridSpec, convolve, sample
from neurofield.kernels import DoGParams, kernel_field, omega_hat
from neurofield.response import ASYM_TANH, ERF, LINEAR, RATIONAL, TANH


def plane_wave(spec, k1, k2):
    x1, x2 = spec.mesh()
    return Field(spec, np.cos(2 * np.pi * (k1 * x1 + k2 * x2)))


def smooth_input(spec, rng, modes=6):
    x1, x2 = spec.mesh()
    v = np.zeros(spec.shape)
    for _ in range(modes):
        k = rng.integers(-5, 6, size=2) / (2 * spec.L)
        v += rng.uniform(-1, 1) * np.cos(2 * np.pi * (k[0] * x1 + k[1] * x2) + rng.uniform(0, 2 * np.pi))
    return Field(spec, v / np.abs(v).max())


@pytest.mark.parametrize("freq", [(0.0, 2.5), (0.5, 0.0), (0.8, 0.55), (0.0, 0.0)])
def test_linear_stationary_state_of_plane_wave(small_grid, params, freq):
    I = plane_wave(small_grid, *freq)
    a, rep = stationary_state(I, 1.0, LINEAR, params, tol=1e-13)
    expected = I / (1 - float(omega_hat(params, 2, np.array(freq))))
    assert (a - expected).sup() < 1e-12
    assert rep.converged and rep.residual <= 1e-13


@pytest.mark.parametrize("kind", [TANH, ERF, RATIONAL, ASYM_TANH], ids=str)
def test_nonlinear_stationary_state_solves_the_equation(params, rng, kind):
    # independent route: convolution with the sampled kernel instead of the closed-form transform;
    # n = 256 keeps the sampled kernel free of aliasing
    spec = GridSpec(10.0, 256, 2)
    I = smooth_input(spec, rng) * 2
    a, _ = stationary_state(I, 1.5, kind, params, tol=1e-13)
    k = kernel_field(params, spec)
    residual = a - I - 1.5 * convolve(k, a.map(kind))
    assert residual.sup() < 1e-10


def test_contraction_threshold_enforced(small_grid, params):
    I = plane_wave(small_grid, 0, 1)
    with pytest.raises(ContractionError):
        stationary_state(I, 2.0, TANH, params)
    with pytest.raises(ContractionError):
        stationary_state(I, 4.0, LINEAR, params, balanced=True)
    unbalanced = DoGParams(0.5, 0.2, 0.4)
    with pytest.raises(ContractionError):
        stationary_state(I, 0.5, LINEAR, unbalanced, balanced=True)


@pytest.mark.balanced
def test_balanced_mode_reaches_past_mu0(small_grid, params):
    I = plane_wave(small_grid, 0.0, 0.8)
    a, rep = stationary_state(I, 3.0, LINEAR, params, balanced=True, tol=1e-12, max_iter=5000)
    w = float(omega_hat(params, 2, np.array([0.0, 0.8])))
    assert (a - I / (1 - 3.0 * w)).sup() < 1e-10
    assert rep.contraction_ratio_estimate < 1


def test_iteration_cap_reports_best_iterate(small_grid, params, rng):
    I = smooth_input(small_grid, rng)
    with pytest.raises(ConvergenceError) as info:
        stationary_state(I, 1.9, TANH, params, tol=1e-14, max_iter=3)
    assert info.value.report.iterations == 3
    assert isinstance(info.value.best, Field)


def test_contraction_ratio_below_mu_over_mu0(small_grid, params, rng):
    _, rep = stationary_state(smooth_input(small_grid, rng), 1.0, RATIONAL, params, tol=1e-13)
    assert 0 < rep.contraction_ratio_estimate <= 0.5 + 1e-9


def test_linearized_response_matches_finite_difference(small_grid, params, rng):
    I = smooth_input(small_grid, rng) * 1.5
    h = smooth_input(small_grid, rng)
    a, _ = stationary_state(I, 1.2, TANH, params, tol=1e-14)
    eps = 1e-6
    ap, _ = stationary_state(I + h * eps, 1.2, TANH, params, tol=1e-14)
    am, _ = stationary_state(I - h * eps, 1.2, TANH, params, tol=1e-14)
    fd = (ap - am) / (2 * eps)
    lin = linearized_response(a, h, 1.2, TANH, params, tol=1e-13)
    assert (fd - lin).sup() < 1e-7
    with pytest.raises(GridMismatchError):
        linearized_response(a, Field.zeros(GridSpec(10.0, 64)), 1.2, TANH, params)


def test_dphi_apply_is_linear_in_direction(small_grid, params, rng):
    a = smooth_input(small_grid, rng)
    v = smooth_input(small_grid, rng)
    one = dphi_apply(a, v, 1.0, RATIONAL, params)
    two = dphi_apply(a, v * 2, 1.0, RATIONAL, params)
    assert (two - one * 2).sup() < 1e-14


def test_convolution_operator_matches_sampled_kernel(small_grid, params, rng):
    u = smooth_input(small_grid, rng)
    op = ConvolutionOperator(small_grid, params)
    direct = convolve(kernel_field(params, small_grid), u)
    assert np.max(np.abs(op(u.values) - direct.values)) < 1e-12


def test_stationary_state_is_a_fixed_point_of_both_integrators(small_grid, params, rng):
    I = smooth_input(small_grid, rng)
    a, _ = stationary_state(I, 1.0, TANH, params, tol=1e-14)
    for order in (1, 2):
        res = integrate(a, I, 1.0, TANH, params, t_final=1.0, dt=0.1, order=order, log_decay=False)
        assert (res.final - a).sup() < 1e-12


def _final(I, a0, dt, order):
    return integrate(a0, I, 1.0, RATIONAL, t_final=1.0, dt=dt, order=order, log_decay=False).final


@pytest.mark.parametrize("order", [1, 2])
def test_integrator_convergence_order(params, rng, order):
    spec = GridSpec(10.0, 32, 2)
    I = smooth_input(spec, rng)
    a0 = smooth_input(spec, rng) * 3
    ref = _final(I, a0, 1e-4, 2)
    e1 = (_final(I, a0, 0.04, order) - ref).sup()
    e2 = (_final(I, a0, 0.02, order) - ref).sup()
    assert math.log2(e1 / e2) == pytest.approx(order, abs=0.2)


def test_decay_towards_stationary_state(small_grid, params, rng):
    I = smooth_input(small_grid, rng)
    a0 = smooth_input(small_grid, rng) * 4
    res = integrate(a0, I, 1.0, TANH, params, t_final=6.0, dt=0.01, log_every=20,
                    snapshot_times=[1.0, 2.5])
    d0 = res.decay_log[0][1]
    for t, d in res.decay_log:
        assert d <= d0 * math.exp(-0.5 * t) * (1 + 1e-9)
    assert [t for t, _ in res.snapshots] == pytest.approx([0.0, 1.0, 2.5, 6.0])


def test_integrate_validates_arguments(small_grid, params):
    z = Field.zeros(small_grid)
    with pytest.raises(ValueError):
        integrate(z, z, 1.0, TANH, params, dt=0)
    with pytest.raises(ValueError):
        integrate(z, z, 1.0, TANH, params, order=3)
    with pytest.raises(GridMismatchError):
        integrate(z, Field.zeros(GridSpec(10.0, 64)), 1.0, TANH, params)


def test_unstable_linear_run_blows_up(params):
    spec = GridSpec(10.0, 32, 2)
    I = plane_wave(spec, 0.0, 0.8)
    with pytest.raises(BlowUpError) as info, np.errstate(over="ignore", invalid="ignore"):
        integrate(I, I, 60.0, LINEAR, params, t_final=200.0, dt=0.5, log_decay=False)
    assert info.value.t_last > 0


def test_sup_bound_rational_closed_form():
    # g(x) = 1 + r x / (1 + x) has the fixed point (r + sqrt(r^2 + 4)) / 2
    for mu in (0.2, 1.0, 1.9):
        r = mu / 2
        assert sup_bound_g1(mu, 2.0, RATIONAL) == pytest.approx((r + math.sqrt(r * r + 4)) / 2, abs=1e-13)
    with pytest.raises(ValueError):
        sup_bound_g1(1.0, 2.0, LINEAR)
    with pytest.raises(ContractionError):
        sup_bound_g1(2.0, 2.0, TANH)


def test_gamma0_linear_reference(params):
    exact = 1 - float(omega_hat(params, 1, 2.5))
    assert gamma0_estimate(1.0, LINEAR, params, tol=1e-9) == pytest.approx(exact, abs=1e-8)


def test_gamma0_censored_for_small_coupling(params):
    # with mu = 0.1 the saturating response keeps the peak below 1 only for gamma < ~1
    assert gamma0_estimate(0.1, TANH, params, gamma_max=0.5, samples=3) == math.inf


def test_sampled_input_on_1d_grid(grid_1d, params):
    I = sample(lambda x: np.cos(2 * np.pi * 0.5 * x), grid_1d)
    a, _ = stationary_state(I, 1.0, LINEAR, params, tol=1e-13)
    assert (a - I / (1 - float(omega_hat(params, 1, 0.5)))).sup() < 1e-12
