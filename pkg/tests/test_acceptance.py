"""End-to-end acceptance checks, one per criterion, each printing a PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -v``; the summary lines are
printed even when output capture is on.
"""

import math
import sys
import time

import numpy as np
import pytest
from scipy import integrate as sint
from scipy.optimize import brentq

from neurofield.analytic import (
    K_quadrature_eval,
    K_series_eval,
    b_heaviside_eval,
    gaussian_negative_control,
    locate_zeros,
    remainder_S,
)
from neurofield.control import ControlProblem, linear_control, small_time_control, tau_max
from neurofield.dynamics import integrate, stationary_state, sup_bound_g1
from neurofield.experiments import afterimage_profile, random_smooth_field, sign_alternations
from neurofield.grid import Field, GridSpec, apply_multiplier
from neurofield.kernels import CANONICAL, constants, dog_radial, omega_hat
from neurofield.response import CAPPED, ERF, LINEAR, RATIONAL, TANH
from neurofield.stimuli import GroupElement, Stimulus, act, binarize, generate, warp_to_retina

HALF_PERIOD = 1 / math.sqrt(2 * math.pi / 3)


@pytest.fixture
def verdict(capsys):
    """Print one summary line per criterion and fail the test if it did not pass."""

    def report(number, title, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'} criterion {number:>2}: {title} ({detail})"
        with capsys.disabled():
            sys.stdout.write("\n" + line + "\n")
        assert ok, line

    return report


class Timer:
    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.seconds = time.perf_counter() - self.start


def test_criterion_01_constants(verdict):
    with Timer() as t:
        c = constants(CANONICAL)
        root = brentq(lambda r: float(dog_radial(CANONICAL, 2, r)), 1e-3, 2.0)

        def integrand(r, phi):
            return abs(float(dog_radial(CANONICAL, 2, r))) * r

        inner = sint.dblquad(integrand, 0, 2 * math.pi, 0, root, epsabs=1e-13)[0]
        outer = sint.dblquad(integrand, 0, 2 * math.pi, root, 8.0, epsabs=1e-13)[0]
        quad_l1 = inner + outer
    err_l1 = abs(quad_l1 - c.l1_norm)
    ok = c.mu_0 == pytest.approx(2, abs=1e-12) and c.mu_c == pytest.approx(4, abs=1e-12)
    ok = ok and err_l1 <= 1e-6 and t.seconds < 1.0
    verdict(1, "mu_0 = 2, mu_c = 4, L1 norm vs 2D quadrature", ok,
            f"mu_0={c.mu_0:.15g}, mu_c={c.mu_c:.15g}, |L1 err|={err_l1:.1e}, {t.seconds:.2f} s")


def test_criterion_02_linear_stationary_state(verdict):
    with Timer() as t:
        spec = GridSpec(10.0, 512)
        I = generate(Stimulus("funnel"), spec)
        a, _ = stationary_state(I, 1.0, LINEAR, CANONICAL, tol=1e-13)
        w = float(omega_hat(CANONICAL, 2, np.array([0.0, 2.5])))
        err = (a - I / (1 - w)).sup()
    verdict(2, "linear stationary state of the funnel input", err <= 1e-8 and t.seconds < 10,
            f"sup error {err:.1e} on 512^2, {t.seconds:.1f} s")


def test_criterion_03_decay_rate(verdict):
    rng = np.random.default_rng(3)
    spec = GridSpec(10.0, 128)
    worst = 0.0
    with Timer() as t:
        for trial in range(10):
            kind = (TANH, RATIONAL, LINEAR, ERF, CAPPED)[trial % 5]
            a0 = random_smooth_field(spec, rng) * rng.uniform(0.5, 5)
            I = random_smooth_field(spec, rng)
            res = integrate(a0, I, 1.0, kind, CANONICAL, t_final=10.0, dt=0.01, log_every=10)
            d0 = res.decay_log[0][1]
            for tt, d in res.decay_log:
                worst = max(worst, d / d0 / math.exp(-0.5 * tt))
    verdict(3, "decay at rate 1 - mu ||w||_1 = 0.5", worst <= 1.02 and t.seconds < 120,
            f"max ratio to e^(-t/2) = {worst:.4f}, {t.seconds:.1f} s")


def test_criterion_04_series_vs_quadrature(verdict):
    with Timer() as t:
        xs = np.linspace(0.1, 5.0, 50)
        quad = np.array([K_quadrature_eval(x) for x in xs])
        err = float(np.max(np.abs(K_series_eval(xs) - quad)))
        s_max = float(np.max(np.abs(remainder_S(xs))))
    bound = math.sqrt(6) / (3 * math.pi**2)
    verdict(4, "residue series vs quadrature, remainder bound",
            err <= 1e-8 and s_max <= bound and t.seconds < 30,
            f"max |diff| = {err:.1e}, max |S| = {s_max:.4f} <= {bound:.4f}, {t.seconds:.1f} s")


def test_criterion_05_zero_localization(verdict, tmp_path):
    with Timer() as t:
        tables = [locate_zeros("K", 20), locate_zeros("b", 20)]
        for tab in tables:
            tab.to_csv(tmp_path / f"{tab.kind}.csv")
    ok = all(tab.all_pass and len(tab.rows) == 20 for tab in tables)
    ok = ok and all(r.sign_changes == 1 for tab in tables for r in tab.rows)
    worst = max(r.error / r.bound for tab in tables for r in tab.rows)
    verdict(5, "one zero per bracket within the arcsin bounds (K and b, k <= 20)", ok and t.seconds < 30,
            f"worst error/bound = {worst:.3f}, {t.seconds:.1f} s")


def test_criterion_06_heaviside_response(verdict):
    with Timer() as t:
        spec = GridSpec(32.0, 2**17, 1)
        x = spec.axis()
        # midpoint value at the jump keeps the discrete convolution second-order accurate
        step = np.where(x < 0, 1.0, 0.0)
        step[spec.n // 2] = 0.5
        H = Field(spec, step)
        kh = lambda xi: (lambda w: w / (1 - w))(omega_hat(CANONICAL, 1, xi))
        spectral = (H + apply_multiplier(kh, H)).values
        mask = (x >= 0.2) & (x <= 4.0)
        series = b_heaviside_eval(x[mask])
        err = float(np.max(np.abs(series - spectral[mask])))
    verdict(6, "step response series vs 1D spectral convolution", err <= 1e-6 and t.seconds < 10,
            f"max |diff| = {err:.1e} on [0.2, 4], {t.seconds:.1f} s")


def test_criterion_07_equivariance(verdict):
    rng = np.random.default_rng(7)
    spec = GridSpec(10.0, 128)
    tol = 1e-12
    elements = [
        GroupElement((37, -11), "identity"),
        GroupElement((0, 0), "reflect-x1"),
        GroupElement((5, 0), "reflect-x2"),
        GroupElement((0, 0), "rotate-90"),
        GroupElement((-8, 13), "rotate-180"),
    ]
    worst = 0.0
    with Timer() as t:
        for _ in range(5):
            I = random_smooth_field(spec, rng) * 2
            out, _ = stationary_state(I, 1.0, RATIONAL, CANONICAL, tol=tol)
            for g in elements:
                moved, _ = stationary_state(act(g, I), 1.0, RATIONAL, CANONICAL, tol=tol)
                worst = max(worst, (moved - act(g, out)).sup())
    verdict(7, "input-output map commutes with grid symmetries", worst <= 10 * tol and t.seconds < 120,
            f"max error {worst:.1e} <= {10 * tol:.0e}, {t.seconds:.1f} s")


def test_criterion_08_funnel_stays_a_funnel(verdict):
    spec = GridSpec(10.0, 512)
    I = generate(Stimulus("funnel"), spec)
    x2 = spec.axis()
    expected = (2 * np.arange(-50, 50) + 1) / 10  # zeros of cos(5 pi x2) in [-L, L)
    worst_var, worst_shift = 0.0, 0.0
    ok = True
    with Timer() as t:
        for kind in (LINEAR, TANH, ERF, RATIONAL, CAPPED):
            a, _ = stationary_state(I, 0.8, kind, CANONICAL, tol=1e-13)
            worst_var = max(worst_var, float(np.max(np.var(a.values, axis=0))))
            pattern = binarize(a)
            ok &= bool(np.all(pattern.bits == pattern.bits[0:1, :]))
            zs = sign_alternations(x2, a.values[0])
            ok &= zs.size == expected.size
            if zs.size == expected.size:
                worst_shift = max(worst_shift, float(np.max(np.abs(zs - expected))))
    ok = ok and worst_var <= 1e-10 and worst_shift <= spec.dx and t.seconds < 60
    verdict(8, "funnel input gives a pure stripe pattern for every response", ok,
            f"max x1-variance {worst_var:.1e}, max zero shift {worst_shift:.1e} (dx = {spec.dx:.4f}), "
            f"{t.seconds:.1f} s")


def _ray_transitions(diff: Field, lo: float, hi: float) -> int:
    """Black/white changes of the warped difference along the ray through x2 = 0.1."""
    px = 2048
    r_max = math.exp(6.0)
    scale = 2 / math.pi
    img = warp_to_retina(binarize(diff), px, r_max, scale)
    theta = 0.1 / scale
    radii = np.linspace(math.exp(lo), math.exp(hi), 4000)
    cols = (px / 2 + radii * math.cos(theta) / r_max * px / 2 - 0.5).round().astype(int)
    rows = (px / 2 - radii * math.sin(theta) / r_max * px / 2 - 0.5).round().astype(int)
    samples = img[rows, cols]
    return int(np.count_nonzero(samples[1:] != samples[:-1]))


def test_criterion_09_mackay_rays(verdict):
    spec = GridSpec(10.0, 512)
    rays = generate(Stimulus("mackay_rays", epsilon=0.025, theta=2.0), spec)
    funnel = generate(Stimulus("funnel"), spec)
    counts, spacing_err, rings = {}, {}, {}
    with Timer() as t:
        for kind in (LINEAR, RATIONAL):
            a, _ = stationary_state(rays, 1.0, kind, CANONICAL, tol=1e-14, max_iter=3000)
            f, _ = stationary_state(funnel, 1.0, kind, CANONICAL, tol=1e-14, max_iter=3000)
            prof = afterimage_profile(a, f, x2=0.1, window=(2.5, 6.0))
            counts[kind.name] = prof.count
            spacing_err[kind.name] = float(np.max(np.abs(prof.spacings - HALF_PERIOD)) / HALF_PERIOD)
            rings[kind.name] = _ray_transitions(a - f, 2.5, 6.0)
    ok = counts["linear"] >= 5 and spacing_err["linear"] <= 0.15
    ok = ok and counts["rational"] == counts["linear"] and spacing_err["rational"] <= 0.15
    ok = ok and rings["linear"] >= 5 and t.seconds < 300
    verdict(9, "MacKay rays afterimage: sign alternations, spacing, rings, nonlinear rerun", ok,
            f"alternations linear={counts['linear']} rational={counts['rational']}, "
            f"spacing deviation {spacing_err['linear']:.3f}/{spacing_err['rational']:.3f}, "
            f"retinal ring edges {rings['linear']}, {t.seconds:.1f} s")


def test_criterion_10_control(verdict):
    rng = np.random.default_rng(10)
    with Timer() as t:
        big = GridSpec(10.0, 256)
        lin = max(
            linear_control(ControlProblem(random_smooth_field(big, rng), random_smooth_field(big, rng), 2.0))
            .endpoint_error
            for _ in range(3)
        )
        small = GridSpec(10.0, 64)
        tau = 0.1
        limit = tau_max(1.0, constants(CANONICAL).mu_0)
        nonlin = max(
            small_time_control(ControlProblem(random_smooth_field(small, rng), random_smooth_field(small, rng),
                                              tau, kind=kind)).endpoint_error
            for kind in (RATIONAL, TANH, RATIONAL)
        )
    ok = lin <= 1e-8 and nonlin <= 1e-4 and tau <= limit and t.seconds < 300
    verdict(10, "exact controls (linear closed form, nonlinear short horizon)", ok,
            f"linear {lin:.1e} on 256^2, nonlinear {nonlin:.1e} on 64^2 with tau={tau} <= {limit:.3f}, "
            f"{t.seconds:.1f} s")


def test_criterion_11_sup_bound(verdict):
    g1 = sup_bound_g1(1.0, constants(CANONICAL).mu_0, RATIONAL)
    spec = GridSpec(10.0, 128)
    rng = np.random.default_rng(11)
    x1, x2 = spec.mesh()
    q = constants(CANONICAL).q_c
    inputs = [random_smooth_field(spec, rng) for _ in range(6)]
    # the most amplified mode and the constant input are the adversarial cases
    inputs.append(Field(spec, np.cos(2 * np.pi * x2 * round(q * 2 * spec.L) / (2 * spec.L))))
    inputs.append(Field(spec, np.ones(spec.shape)))
    worst = 0.0
    with Timer() as t:
        for I in inputs:
            res = integrate(Field.zeros(spec), I, 1.0, RATIONAL, CANONICAL, t_final=30.0, dt=0.05,
                            snapshot_times=np.arange(10.0, 30.1, 1.0), log_decay=False)
            worst = max(worst, max(s.sup() for tt, s in res.snapshots if tt >= 10.0))
    verdict(11, "long-run sup norm below the smaller fixed point g1", worst <= g1 + 0.02,
            f"max sup norm {worst:.4f} <= g1 + 0.02 = {g1 + 0.02:.4f} (g1 = {g1:.4f}), {t.seconds:.1f} s")


def test_criterion_12_gaussian_negative_control(verdict):
    with Timer() as t:
        rep = gaussian_negative_control()
    ok = rep.gaussian_sign_changes == 0 and rep.dog_sign_changes >= 10 and t.seconds < 10
    verdict(12, "pure Gaussian kernel has no sign changes on (0.1, 10)", ok,
            f"Gaussian {rep.gaussian_sign_changes}, DoG {rep.dog_sign_changes} sign changes, "
            f"{t.seconds:.1f} s")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
