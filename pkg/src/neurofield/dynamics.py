"""Time evolution, stationary states and the linearized input-output map.

The field equation is ``da/dt = -a + mu * (w * f(a)) + I`` with ``w`` the
difference-of-Gaussians kernel.  Convolutions use the closed-form kernel
transform as a Fourier multiplier on the periodic grid, so they are exact
up to the (negligible) periodization of the kernel.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import fft as sfft

from .errors import BlowUpError, ContractionError, ConvergenceError, GridMismatchError
from .grid import Field, GridSpec
from .grid import norm as grid_norm
from .kernels import CANONICAL, DoGParams, constants, omega_hat_multiplier
from .response import ResponseKind, f_eval, f_prime

log = logging.getLogger(__name__)

__all__ = [
    "SolverReport",
    "EvolutionResult",
    "ConvolutionOperator",
    "stationary_state",
    "integrate",
    "linearized_response",
    "dphi_apply",
    "sup_bound_g1",
    "gamma0_estimate",
]

# Updates below this multiple of machine precision (relative to the iterate)
# are rounding noise and are not used to estimate the contraction ratio.
_NOISE_FLOOR = 1e3 * np.finfo(float).eps


@dataclass
class SolverReport:
    iterations: int
    residual: float
    contraction_ratio_estimate: float
    converged: bool = True
    residual_history: list = field(default_factory=list, repr=False)


@dataclass
class EvolutionResult:
    snapshots: list
    stationary: Field | None
    decay_log: list

    @property
    def final(self) -> Field:
        return self.snapshots[-1][1]


class ConvolutionOperator:
    """``v -> w * v`` on a fixed grid, with the transform precomputed."""

    def __init__(self, spec: GridSpec, params: DoGParams = CANONICAL):
        self.spec = spec
        self.params = params
        freqs = spec.frequencies()
        self.symbol = np.broadcast_to(omega_hat_multiplier(params)(*freqs), spec.half_shape)

    def __call__(self, values: np.ndarray) -> np.ndarray:
        return sfft.irfftn(self.symbol * sfft.rfftn(values), s=self.spec.shape)


def _threshold(mu, params, balanced):
    c = constants(params)
    if balanced:
        if not params.balanced:
            raise ContractionError("balanced mode requires kappa = 1")
        return c.mu_c, "mu_c"
    return c.mu_0, "mu_0"


def _check_mu(mu, params, balanced):
    limit, label = _threshold(mu, params, balanced)
    if not abs(mu) < limit:
        raise ContractionError(f"|mu| = {abs(mu)} is not below {label} = {limit:.6g}")
    return limit


def _picard(step, u0, tol, max_iter, what):
    """Iterate ``u <- step(u)`` until the sup-norm update is at most ``tol``."""
    u = u0
    history = []
    ratio = 0.0
    prev = None
    for it in range(1, max_iter + 1):
        new = step(u)
        if not np.all(np.isfinite(new)):
            raise ConvergenceError(f"{what}: iterate became non-finite at step {it}")
        upd = float(np.max(np.abs(new - u)))
        history.append(upd)
        scale = max(1.0, float(np.max(np.abs(new))))
        if prev is not None and prev > _NOISE_FLOOR * scale and upd > _NOISE_FLOOR * scale:
            ratio = max(ratio, upd / prev)
        prev = upd
        u = new
        if upd <= tol:
            return u, SolverReport(it, upd, ratio, True, history)
    report = SolverReport(max_iter, history[-1], ratio, False, history)
    raise ConvergenceError(
        f"{what}: no convergence in {max_iter} iterations (last update {history[-1]:.3e})",
        report=report,
        best=u,
    )


def stationary_state(
    I: Field,
    mu: float,
    kind: ResponseKind,
    params: DoGParams = CANONICAL,
    tol: float = 1e-10,
    max_iter: int = 500,
    balanced: bool = False,
    initial: Field | None = None,
):
    """Solve ``a = I + mu * w * f(a)`` by fixed-point iteration.

    Parameters
    ----------
    I : Field
        Sensory input.
    mu : float
        Coupling strength; must be below the contraction threshold ``mu_0``
        (or below ``mu_c`` with ``balanced=True`` and ``kappa = 1``).
    kind : ResponseKind
        Firing-rate nonlinearity.
    tol : float
        Stop once the sup-norm of successive updates is at most ``tol``.
    initial : Field, optional
        Starting iterate; defaults to ``I``.

    Returns
    -------
    (Field, SolverReport)

    Raises
    ------
    ContractionError
        ``mu`` is at or above the admissible threshold.
    ConvergenceError
        Iteration cap reached; carries the report and best iterate.
    """
    _check_mu(mu, params, balanced)
    op = ConvolutionOperator(I.spec, params)
    src = I.values
    start = src if initial is None else initial.values

    def step(u):
        return src + mu * op(f_eval(kind, u))

    try:
        u, report = _picard(step, start, tol, max_iter, "stationary state")
    except ConvergenceError as exc:
        exc.best = Field(I.spec, exc.best)
        raise
    log.debug("stationary state: %d iterations, residual %.2e", report.iterations, report.residual)
    return Field(I.spec, u), report


def linearized_response(
    a_base: Field,
    h: Field,
    mu: float,
    kind: ResponseKind,
    params: DoGParams = CANONICAL,
    tol: float = 1e-10,
    max_iter: int = 500,
    balanced: bool = False,
) -> Field:
    """Solve ``u = h + mu * w * (f'(a_base) u)``.

    At ``a_base = Psi(I)`` this is the derivative of the input-output map
    at ``I`` in direction ``h``.
    """
    _check_mu(mu, params, balanced)
    if a_base.spec != h.spec:
        raise GridMismatchError(f"grid mismatch: {a_base.spec} vs {h.spec}")
    op = ConvolutionOperator(h.spec, params)
    gain = f_prime(kind, a_base.values)
    src = h.values

    def step(u):
        return src + mu * op(gain * u)

    u, _ = _picard(step, src, tol, max_iter, "linearized response")
    return Field(h.spec, u)


def dphi_apply(a: Field, v: Field, mu: float, kind: ResponseKind, params: DoGParams = CANONICAL) -> Field:
    """Derivative of ``u -> I + mu w * f(u)`` at ``a`` applied to ``v``."""
    op = ConvolutionOperator(v.spec, params)
    return Field(v.spec, mu * op(f_prime(kind, a.values) * v.values))


def _exp_euler(a, rhs, h):
    e = math.exp(-h)
    return e * a + (1.0 - e) * rhs(a)


def _etd2rk(a, rhs, h):
    e = math.exp(-h)
    fa = rhs(a)
    pred = e * a + (1.0 - e) * fa
    # second-order correction for the drive varying along the step
    return pred + ((e - 1.0 + h) / h) * (rhs(pred) - fa)


def integrate(
    a0: Field,
    I: Field,
    mu: float,
    kind: ResponseKind,
    params: DoGParams = CANONICAL,
    t_final: float = 10.0,
    dt: float = 0.01,
    order: int = 1,
    snapshot_times=None,
    log_every: int = 1,
    norm_p=np.inf,
    stationary: Field | None = None,
    stationary_tol: float = 1e-12,
    log_decay: bool = True,
) -> EvolutionResult:
    """Integrate the field equation with an exponential integrator.

    The linear ``-a`` term is integrated exactly; the nonlinear drive
    ``I + mu w * f(a)`` is frozen over each step (``order=1``) or corrected
    with a second stage (``order=2``).  Both schemes keep stationary states
    as exact discrete fixed points.

    Parameters
    ----------
    snapshot_times : sequence of float, optional
        Times at which to store the state, rounded to the nearest step.
        ``0`` and ``t_final`` are always stored.
    log_every : int
        Record ``||a(t) - a_I||`` every this many steps.  Skipped when no
        stationary state is available (``mu >= mu_0`` and none supplied).
    norm_p : {1, 2, inf}
        Norm used in the decay log.
    log_decay : bool
        Set to False to skip the stationary solve and the decay log.
    """
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if t_final < 0:
        raise ValueError(f"t_final must be nonnegative, got {t_final}")
    if a0.spec != I.spec:
        raise GridMismatchError(f"grid mismatch: {a0.spec} vs {I.spec}")
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    spec = a0.spec
    steps = max(1, int(round(t_final / dt))) if t_final > 0 else 0
    h = t_final / steps if steps else 0.0

    if not log_decay:
        stationary = None
    elif stationary is None and abs(mu) < constants(params).mu_0:
        stationary, _ = stationary_state(I, mu, kind, params, tol=stationary_tol)

    op = ConvolutionOperator(spec, params)
    src = I.values

    def rhs(a):
        return src + mu * op(f_eval(kind, a))

    advance = _exp_euler if order == 1 else _etd2rk
    keep = {0, steps}
    if snapshot_times is not None:
        keep.update(min(steps, max(0, int(round(t / h)))) for t in snapshot_times if h)

    def distance(a):
        return grid_norm(Field(spec, a - stationary.values), norm_p)

    a = np.array(a0.values)
    snapshots = [(0.0, a0)]
    decay = [(0.0, distance(a))] if stationary is not None else []
    for k in range(1, steps + 1):
        a = advance(a, rhs, h)
        if not np.all(np.isfinite(a)):
            raise BlowUpError(f"state became non-finite at t = {k * h:.6g}", t_last=(k - 1) * h)
        t = k * h
        if k in keep:
            snapshots.append((t, Field(spec, a)))
        if stationary is not None and (k % log_every == 0 or k == steps):
            decay.append((t, distance(a)))
    return EvolutionResult(snapshots=snapshots, stationary=stationary, decay_log=decay)


def sup_bound_g1(mu: float, mu0: float, kind: ResponseKind, max_iter: int = 10_000) -> float:
    """Limit of ``x <- 1 + (mu/mu0) f(x)`` started at ``1 + mu/mu0``.

    This is the smaller fixed point of ``g(x) = 1 + (mu/mu0) f(x)`` above 1
    and bounds ``limsup ||a(t)||_inf`` for inputs with ``||I||_inf <= 1``.
    """
    if not kind.bounded:
        raise ValueError("the sup bound needs a bounded response function")
    if not 0 <= mu < mu0:
        raise ContractionError(f"need 0 <= mu < mu0, got mu={mu}, mu0={mu0}")
    r = mu / mu0
    x = 1.0 + r
    for _ in range(max_iter):
        nxt = 1.0 + r * float(f_eval(kind, x))
        if abs(nxt - x) <= 1e-15 * max(1.0, abs(x)):
            return nxt
        x = nxt
    raise ConvergenceError(f"g1 iteration did not settle in {max_iter} steps (last {x})")


def gamma0_estimate(
    mu: float,
    kind: ResponseKind,
    params: DoGParams = CANONICAL,
    lam: float = 2.5,
    tol: float = 1e-6,
    gamma_max: float = 10.0,
    spec: GridSpec | None = None,
    samples: int = 21,
    solver_tol: float = 1e-12,
) -> float:
    """Largest ``gamma`` with ``||Psi(gamma P_F)||_inf <= 1`` for ``P_F = cos(2 pi lam x2)``.

    The funnel input depends on one coordinate only, so the computation runs
    on a 1D grid (the 1D kernel has the same transform).  Returns ``inf`` if
    the predicate still holds at ``gamma_max``.
    """
    _check_mu(mu, params, False)
    spec = spec or GridSpec(10.0, 512, 1)
    if spec.d == 2:
        pattern = np.cos(2 * np.pi * lam * spec.mesh()[1])
    else:
        pattern = np.cos(2 * np.pi * lam * spec.axis())

    def ok(gamma):
        out, _ = stationary_state(Field(spec, gamma * pattern), mu, kind, params, tol=solver_tol)
        return out.sup() <= 1.0

    grid = np.linspace(0.0, gamma_max, samples)
    flags = [ok(g) for g in grid]
    if all(flags):
        return math.inf
    first_false = flags.index(False)
    if any(flags[first_false:]):
        warnings.warn(
            "sup-norm predicate is not monotone in gamma; returning the lowest crossing",
            RuntimeWarning,
            stacklevel=2,
        )
    if first_false == 0:
        return 0.0
    lo, hi = grid[first_false - 1], grid[first_false]
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if ok(mid):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
