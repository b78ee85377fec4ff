"""Steering the field between two states with a time-constant input.

The linearized generator is ``A u = -u + mu w * u``, diagonal in Fourier
space with symbol ``a(xi) = mu w_hat(xi) - 1``.  With a constant input
``I`` the linear flow reaches

    a(T) = e^{TA} a0 + A^{-1} (e^{TA} - 1) I,

which is inverted frequency by frequency.  For a nonlinear response the
input is found by a shooting iteration on short horizons, optionally after
a phase of free decay.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import fft as sfft
from scipy.special import lambertw

from .dynamics import ConvolutionOperator, integrate
from .errors import ContractionError, ConvergenceError, GridMismatchError, HorizonError, NearPoleError
from .grid import Field, norm, save_field
from .kernels import CANONICAL, DoGParams, constants, omega_hat_multiplier
from .response import LINEAR, ResponseKind, f_eval

log = logging.getLogger(__name__)

__all__ = [
    "ControlProblem",
    "ControlSegment",
    "ControlResult",
    "semigroup_apply",
    "tau_max",
    "linear_control",
    "small_time_control",
    "two_phase_control",
    "simulate_schedule",
    "flow_derivative_defect",
    "write_schedule",
]


@dataclass(frozen=True)
class ControlProblem:
    a0: Field
    a_target: Field
    T: float
    mu: float = 1.0
    kind: ResponseKind = LINEAR
    params: DoGParams = CANONICAL

    def __post_init__(self):
        if self.a0.spec != self.a_target.spec:
            raise GridMismatchError(f"grid mismatch: {self.a0.spec} vs {self.a_target.spec}")
        if not self.T > 0:
            raise ValueError(f"horizon must be positive, got {self.T}")

    @property
    def spec(self):
        return self.a0.spec


@dataclass(frozen=True)
class ControlSegment:
    t_start: float
    t_end: float
    control: Field


@dataclass
class ControlResult:
    schedule: list
    endpoint_error: float
    iterations: int
    tol: float
    history: list = field(default_factory=list)

    @property
    def success(self) -> bool:
        return math.isfinite(self.endpoint_error) and self.endpoint_error <= self.tol

    @property
    def control(self) -> Field:
        """The input on the last (steering) segment."""
        return self.schedule[-1].control


def _symbol(spec, mu, params):
    return mu * np.broadcast_to(omega_hat_multiplier(params)(*spec.frequencies()), spec.half_shape) - 1.0


def _fwd(u: Field):
    return sfft.rfftn(u.values)


def _inv(spectrum, spec):
    return Field(spec, sfft.irfftn(spectrum, s=spec.shape))


def semigroup_apply(t: float, u: Field, mu: float, params: DoGParams = CANONICAL) -> Field:
    """``e^{tA} u`` via the multiplier ``exp(t (mu w_hat - 1))``."""
    if t < 0:
        raise ValueError("semigroup time must be nonnegative")
    if t == 0:
        return u
    return _inv(np.exp(t * _symbol(u.spec, mu, params)) * _fwd(u), u.spec)


def linear_endpoint(a0: Field, I: Field, T: float, mu: float, params: DoGParams = CANONICAL) -> Field:
    """Exact linear state at time ``T`` under the constant input ``I``."""
    a = _symbol(a0.spec, mu, params)
    E = np.exp(T * a)
    return _inv(E * _fwd(a0) + np.expm1(T * a) / a * _fwd(I), a0.spec)


def tau_max(mu: float, mu0: float) -> float:
    """Horizon below which ``tau (1 + mu/mu0) exp((1 + mu/mu0) tau) < 1``."""
    g = 1.0 + mu / mu0
    return float(lambertw(1.0).real) / g


def _require_dissipative(mu, params):
    mu0 = constants(params).mu_0
    if not abs(mu) < mu0:
        raise ContractionError(f"|mu| = {abs(mu)} is not below mu_0 = {mu0:.6g}")
    return mu0


def linear_control(problem: ControlProblem, tol: float = 1e-8, p=np.inf) -> ControlResult:
    """Closed-form constant input steering the linear flow exactly.

    ``I = (e^{TA} - 1)^{-1} A (a1 - e^{TA} a0)``, evaluated per frequency and
    verified by evolving the closed-form linear flow.
    """
    _require_dissipative(problem.mu, problem.params)
    spec, T = problem.spec, problem.T
    a = _symbol(spec, problem.mu, problem.params)
    Em1 = np.expm1(T * a)
    if np.any(np.abs(Em1) < 1e-14):
        raise NearPoleError("1 - e^{TA} is numerically singular at a represented frequency")
    rhs = _fwd(problem.a_target) - (Em1 + 1.0) * _fwd(problem.a0)
    control = _inv(a * rhs / Em1, spec)
    end = linear_endpoint(problem.a0, control, T, problem.mu, problem.params)
    err = norm(end - problem.a_target, p)
    return ControlResult([ControlSegment(0.0, T, control)], err, 1, tol)


def _neumann_linear(problem, tol, p):
    spec, tau = problem.spec, problem.T
    a = _symbol(spec, problem.mu, problem.params)
    z = tau * a
    o = np.expm1(z) / z - 1.0  # (e^z - 1)/z - 1, small for small tau
    rhs = (_fwd(problem.a_target) - np.exp(z) * _fwd(problem.a0)) / tau
    total = rhs.copy()
    term = rhs
    terms = 1
    while True:
        term = -o * term
        total = total + term
        terms += 1
        if np.max(np.abs(term)) <= 1e-17 * max(1.0, np.max(np.abs(total))) or terms > 200:
            break
    control = _inv(total, spec)
    end = linear_endpoint(problem.a0, control, tau, problem.mu, problem.params)
    return ControlResult([ControlSegment(0.0, tau, control)], norm(end - problem.a_target, p), terms, tol)


def _endpoint(a0, I, tau, mu, kind, params, dt, order):
    res = integrate(a0, I, mu, kind, params, t_final=tau, dt=dt, order=order, log_decay=False)
    return res.final


def small_time_control(
    problem: ControlProblem,
    tol: float | None = None,
    max_iter: int = 50,
    dt: float | None = None,
    order: int = 2,
    p=np.inf,
    verify: bool = True,
) -> ControlResult:
    """Constant input on a short horizon ``tau = problem.T``.

    Linear responses use a Neumann series for ``((e^{tau A} - 1)/(tau A))^{-1}``.
    Other responses use the shooting iteration
    ``I <- I + damping * (a_target - a_I(tau)) / tau`` with the damping halved
    whenever the endpoint mismatch grows.  The final input is re-simulated
    with a step ten times finer than the one used for synthesis.

    Raises
    ------
    HorizonError
        ``tau`` is not below :func:`tau_max`.
    ConvergenceError
        The mismatch stagnates (less than 1% reduction over 10 iterations)
        or ``max_iter`` is reached; ``best`` holds the best input found.
    """
    mu0 = _require_dissipative(problem.mu, problem.params)
    tau = problem.T
    limit = tau_max(problem.mu, mu0)
    if not tau < limit:
        raise HorizonError(f"horizon {tau} is not below the admissible bound {limit:.6g}")
    if problem.kind.is_linear:
        return _neumann_linear(problem, 1e-8 if tol is None else tol, p)

    tol = 1e-4 if tol is None else tol
    dt = tau / 50 if dt is None else dt
    mu, kind, params = problem.mu, problem.kind, problem.params
    target = problem.a_target
    # Start from the input that would hold the target state in place,
    # corrected by the linear steering term.
    op = ConvolutionOperator(problem.spec, params)
    hold = target.values - mu * op(f_eval(kind, target.values))
    I = Field(problem.spec, hold) + (target - problem.a0) / tau
    damping = 1.0
    history = []
    best = (math.inf, I)
    for it in range(1, max_iter + 1):
        end = _endpoint(problem.a0, I, tau, mu, kind, params, dt, order)
        miss = target - end
        err = norm(miss, p)
        history.append(err)
        if err < best[0]:
            best = (err, I)
        log.debug("shooting iteration %d: endpoint error %.3e (damping %.3g)", it, err, damping)
        if err <= 0.1 * tol:
            break
        if len(history) > 1 and err > history[-2]:
            damping *= 0.5
            I = best[1]
            continue
        if len(history) > 10 and history[-1] > 0.99 * history[-11]:
            raise ConvergenceError(
                f"shooting stagnated at endpoint error {best[0]:.3e}", report=history, best=best[1]
            )
        I = I + miss * (damping / tau)
    else:
        if best[0] > tol:
            raise ConvergenceError(
                f"shooting did not reach {tol:g} in {max_iter} iterations (best {best[0]:.3e})",
                report=history,
                best=best[1],
            )
    I = best[1]
    err = best[0]
    if verify:
        end = _endpoint(problem.a0, I, tau, mu, kind, params, dt / 10, order)
        err = norm(end - target, p)
    return ControlResult([ControlSegment(0.0, tau, I)], err, len(history), tol, history)


def two_phase_control(
    problem: ControlProblem,
    tau: float,
    tol: float | None = None,
    dt: float = 0.01,
    order: int = 2,
    p=np.inf,
    verify: bool = True,
    **shooting,
) -> ControlResult:
    """Zero input on ``[0, T - tau]``, then a short steering phase.

    During the first phase the state decays toward the zero stationary state,
    so the steering phase starts close to the origin.
    """
    T = problem.T
    if not T > tau:
        raise HorizonError(f"total horizon {T} must exceed the steering time {tau}")
    spec = problem.spec
    zero = Field.zeros(spec)
    t_free = T - tau
    if problem.kind.is_linear:
        mid = semigroup_apply(t_free, problem.a0, problem.mu, problem.params)
    else:
        mid = integrate(problem.a0, zero, problem.mu, problem.kind, problem.params,
                        t_final=t_free, dt=dt, order=order, log_decay=False).final
    short = ControlProblem(mid, problem.a_target, tau, problem.mu, problem.kind, problem.params)
    steer = small_time_control(short, tol=tol, order=order, p=p, verify=False, **shooting)
    schedule = [ControlSegment(0.0, t_free, zero), ControlSegment(t_free, T, steer.control)]
    err = steer.endpoint_error
    if verify:
        if problem.kind.is_linear:
            end = linear_endpoint(mid, steer.control, tau, problem.mu, problem.params)
        else:
            end = simulate_schedule(problem, schedule, dt=dt / 10, order=order)
        err = norm(end - problem.a_target, p)
    return ControlResult(schedule, err, steer.iterations, steer.tol, steer.history)


def simulate_schedule(problem: ControlProblem, schedule, dt: float = 0.001, order: int = 2,
                      min_steps: int = 500) -> Field:
    """Run the flow through a piecewise-constant schedule.

    Each segment uses at least ``min_steps`` steps, and none longer than ``dt``.
    """
    a = problem.a0
    for seg in schedule:
        span = seg.t_end - seg.t_start
        a = integrate(a, seg.control, problem.mu, problem.kind, problem.params,
                      t_final=span, dt=min(dt, span / min_steps), order=order, log_decay=False).final
    return a


def flow_derivative_defect(
    a0: Field,
    t: float,
    mu: float,
    kind: ResponseKind,
    params: DoGParams = CANONICAL,
    directions: int = 20,
    eps: float = 1e-6,
    dt: float | None = None,
    seed: int = 0,
) -> float:
    """Largest ``||(U(t, a0 + eps v) - U(t, a0))/eps - v||_inf`` over random unit ``v``.

    ``U`` is the flow with zero input.  The result estimates the operator
    norm of ``D_{a0} U(t) - Id`` from below.
    """
    rng = np.random.default_rng(seed)
    zero = Field.zeros(a0.spec)
    dt = t / 50 if dt is None else dt

    def flow(u):
        return integrate(u, zero, mu, kind, params, t_final=t, dt=dt, order=2, log_decay=False).final

    base = flow(a0)
    worst = 0.0
    for _ in range(directions):
        v = rng.uniform(-1, 1, a0.spec.shape)
        v /= np.max(np.abs(v))
        vf = Field(a0.spec, v)
        diff = (flow(a0 + vf * eps) - base) / eps - vf
        worst = max(worst, diff.sup())
    return worst


def write_schedule(result: ControlResult, directory, stem: str = "control") -> Path:
    """CSV ``t_start, t_end, field_file`` with one binary field file per segment."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    path = directory / f"{stem}_schedule.csv"
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t_start", "t_end", "field_file"])
        for i, seg in enumerate(result.schedule):
            name = f"{stem}_segment{i}.nfld"
            save_field(directory / name, seg.control)
            w.writerow([f"{seg.t_start:.12g}", f"{seg.t_end:.12g}", name])
    return path
