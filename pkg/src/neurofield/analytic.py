"""Residue-series kernels for the balanced canonical parameters.

Everything here assumes ``kappa = mu = 1``, ``2 pi^2 sigma1^2 = 1`` and
``2 pi^2 sigma2^2 = 2``.  In that case the 1D resolvent kernel ``K`` with
transform ``w1_hat / (1 - w1_hat)`` has poles on four lattice rays and

    K(x) / (2 sqrt(pi)) = e^{-A} cos(pi/12 + A)
                          + sum_k e^{-c_k A} / c_k cos(pi/12 + c_k A)
                          + sum_k e^{-d_k A} / d_k sin(pi/12 - d_k A)

with ``A = alpha |x|``, ``alpha = pi sqrt(2 pi / 3)``, ``c_k = sqrt(1 + 6k)``
and ``d_k = sqrt(6k - 1)``.  Integrating from ``x`` to infinity gives the
response ``b`` to the step input ``H(-x)``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import integrate

from .errors import ConvergenceError, DomainError, NearPoleError, StructuralError
from .kernels import DoGParams

__all__ = [
    "ALPHA",
    "SQRT_RATE",
    "h_eval",
    "khat_eval",
    "poles_and_residues",
    "SeriesKernel",
    "K_series_eval",
    "K_scaled_eval",
    "K_derivative_scaled_eval",
    "K_quadrature_eval",
    "remainder_S",
    "remainder_T",
    "b_heaviside_eval",
    "b_scaled_eval",
    "b_quadrature_eval",
    "heaviside_remainder",
    "ZeroRow",
    "ZeroTable",
    "locate_zeros",
    "GaussianControlReport",
    "gaussian_negative_control",
    "is_canonical",
]

SQRT_RATE = math.sqrt(2 * math.pi / 3)
ALPHA = math.pi * SQRT_RATE
_SQRT_PI = math.sqrt(math.pi)
_B_PREFACTOR = math.sqrt(3) / math.pi
# |khat(xi)| < 1e-18 beyond this frequency
_XI_MAX = 6.5


def is_canonical(params: DoGParams, mu: float = 1.0, rtol: float = 1e-12) -> bool:
    """True for the parameter set this module is derived for."""
    return (
        abs(params.kappa - 1) <= rtol
        and abs(2 * math.pi**2 * params.sigma1**2 - 1) <= rtol
        and abs(2 * math.pi**2 * params.sigma2**2 - 2) <= rtol
        and abs(mu - 1) <= rtol
    )


# -- transform side ----------------------------------------------------------

def h_eval(z):
    """Denominator ``1 - exp(-z^2) + exp(-2 z^2)`` (complex)."""
    z2 = np.square(np.asarray(z, dtype=complex))
    e = np.exp(-z2)
    return 1.0 - e + e * e


def _w1hat(z):
    e = np.exp(-np.square(np.asarray(z, dtype=complex)))
    return e - e * e


def khat_eval(z):
    """``w1_hat(z) / h(z)`` at complex ``z``; raises near a pole."""
    den = h_eval(z)
    if np.any(np.abs(den) < 1e-12):
        raise NearPoleError(f"|h(z)| < 1e-12 at z = {z}")
    return _w1hat(z) / den


def _khat_real(xi):
    e = np.exp(-np.square(xi))
    return (e - e * e) / (1.0 - e + e * e)


def c_seq(k):
    return np.sqrt(1.0 + 6.0 * np.asarray(k, dtype=float))


def d_seq(k):
    return np.sqrt(6.0 * np.asarray(k, dtype=float) - 1.0)


def poles_and_residues(k_max: int, labels: bool = False):
    """Poles of ``khat`` with ``|index| <= k_max`` and their residues.

    Two families sit on the diagonals ``e^{i pi/4} i^l``: ``p_{k,l}`` with
    modulus ``c_k sqrt(pi/3)`` (``k >= 0``) and ``q_{k,l}`` with modulus
    ``d_k sqrt(pi/3)`` (``k >= 1``).

    Returns
    -------
    list of (pole, residue), or (family, k, l, pole, residue) with ``labels``.
    """
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    rot = np.exp(1j * math.pi / 4)
    base = math.sqrt(math.pi / 3)
    out = []
    for k in range(k_max + 1):
        ck = float(c_seq(k))
        for ell in range(4):
            u = rot * 1j**ell
            sgn = (-1) ** ell
            z = ck * u * base
            res = -u * np.exp(1j * sgn * math.pi / 3) / (2 * ck * _SQRT_PI)
            out.append(("p", k, ell, z, res))
        if k == 0:
            continue
        dk = float(d_seq(k))
        for ell in range(4):
            u = rot * 1j**ell
            sgn = (-1) ** ell
            z = dk * u * base
            res = u * np.exp(-1j * sgn * math.pi / 3) / (2 * dk * _SQRT_PI)
            out.append(("q", k, ell, z, res))
    if labels:
        return out
    return [(z, r) for *_, z, r in out]


# -- residue series for K ----------------------------------------------------

def _tail_K(A, n):
    # sum over k > n of both families, majorized by an integral in d
    return 2 * _SQRT_PI * 2 * np.exp(-A * float(d_seq(n))) / (3 * A)


def _tail_b(A, n):
    dn = float(d_seq(n))
    return _B_PREFACTOR * 2 * np.exp(-A * dn) / (3 * A * dn)


def _terms_needed(A_min, tol, kind, scaled):
    n = 1
    tail = {"K": _tail_K, "b_heaviside": _tail_b, "dK": _tail_dK}[kind]
    factor = math.exp(A_min) if scaled else 1.0
    while tail(A_min, n) * factor >= tol:
        n *= 2
        if n > 1 << 24:
            raise ConvergenceError(f"series needs more than {n} terms at A = {A_min}")
    lo, hi = n // 2, n
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if tail(A_min, mid) * factor < tol:
            hi = mid
        else:
            lo = mid
    return max(hi, 1)


def _scaled_K_body(a, c, d):
    ec, ed = np.exp(-(c - 1) * a), np.exp(-(d - 1) * a)
    return (
        np.cos(math.pi / 12 + a[:, 0])
        + np.sum(ec / c * np.cos(math.pi / 12 + c * a), axis=1)
        + np.sum(ed / d * np.sin(math.pi / 12 - d * a), axis=1)
    )


def _scaled_b_body(a, c, d):
    ec, ed = np.exp(-(c - 1) * a), np.exp(-(d - 1) * a)
    return _B_PREFACTOR * (
        np.cos(math.pi / 3 + a[:, 0])
        + np.sum(ec / c**2 * np.cos(math.pi / 3 + c * a), axis=1)
        # integrating sin(pi/12 - dA) term by term gives cos(pi/3 - dA)
        - np.sum(ed / d**2 * np.cos(math.pi / 3 - d * a), axis=1)
    )


def _scaled_dK_body(a, c, d):
    ec, ed = np.exp(-(c - 1) * a), np.exp(-(d - 1) * a)
    return (
        -np.sin(math.pi / 3 + a[:, 0])
        - np.sum(ec * np.sin(math.pi / 3 + c * a), axis=1)
        - np.sum(ed * np.sin(math.pi / 3 - d * a), axis=1)
    )


_CHUNK_ELEMENTS = 4_000_000


def _chunked(A, n_for, body):
    """Evaluate ``body`` on sorted chunks of ``A`` with ``n_for(min A)`` terms each."""
    flat = A.reshape(-1)
    order = np.argsort(flat)
    out = np.empty(flat.shape)
    i = 0
    while i < flat.size:
        n = n_for(float(flat[order[i]]))
        step = max(1, _CHUNK_ELEMENTS // n)
        idx = order[i : i + step]
        k = np.arange(1, n + 1)
        out[idx] = body(flat[idx, None], c_seq(k), d_seq(k))
        i += step
    return out.reshape(A.shape) if A.ndim else float(out[0])


def _tail_dK(A, n):
    # sum_{k>n} e^{-d_k A} over both families, integral majorant in d
    dn = float(d_seq(n))
    return 2 * (1 + A * dn) * np.exp(-A * dn) / (3 * A * A)


@dataclass(frozen=True)
class SeriesKernel:
    """Residue series truncated after ``n_terms`` terms of each family.

    ``kind`` is ``"K"`` for the resolvent kernel or ``"b_heaviside"`` for the
    step response on ``x > 0``.
    """

    n_terms: int
    kind: str = "K"

    def __post_init__(self):
        if self.kind not in ("K", "b_heaviside"):
            raise ValueError(f"unknown series kind {self.kind!r}")
        if self.n_terms < 1:
            raise ValueError("n_terms must be >= 1")

    @classmethod
    def for_tolerance(cls, kind: str, x_min: float, tol: float, scaled: bool = False):
        """Smallest truncation whose tail bound is below ``tol`` for ``|x| >= x_min``."""
        if x_min <= 0:
            raise DomainError("x_min must be positive")
        kind = "K" if kind == "K" else "b_heaviside"
        return cls(_terms_needed(ALPHA * x_min, tol, kind, scaled), kind)

    def tail_bound(self, x):
        """Upper bound on the dropped terms at ``|x|`` (unscaled)."""
        A = ALPHA * np.abs(np.asarray(x, dtype=float))
        fn = _tail_K if self.kind == "K" else _tail_b
        return fn(A, self.n_terms)

    def scaled(self, x):
        """``e^{A} K(x) / (2 sqrt pi)`` or ``e^{A} b(x)``; no underflow for large x."""
        A = ALPHA * np.abs(np.asarray(x, dtype=float))
        body = _scaled_K_body if self.kind == "K" else _scaled_b_body
        return _chunked(A, lambda a: self.n_terms, body)

    def evaluate(self, x):
        x = np.asarray(x, dtype=float)
        A = ALPHA * np.abs(x)
        scale = 2 * _SQRT_PI if self.kind == "K" else 1.0
        return scale * np.exp(-A) * self.scaled(x)


def _as_nonzero(x):
    x = np.asarray(x, dtype=float)
    if np.any(x == 0):
        raise DomainError("the residue series is only valid for x != 0")
    return x


def K_series_eval(x, tol: float = 1e-12, x_switch: float = 0.05):
    """Resolvent kernel ``K`` from its residue series (even in ``x``).

    Points with ``|x| < x_switch`` fall back to :func:`K_quadrature_eval`.
    """
    x = _as_nonzero(x)
    return _split_eval(np.abs(x), x_switch, "K", tol, K_quadrature_eval)


def _split_eval(ax, x_switch, kind, tol, fallback):
    flat = ax.reshape(-1)
    out = np.empty(flat.shape)
    far = flat >= x_switch
    if np.any(far):
        series = SeriesKernel.for_tolerance(kind, float(flat[far].min()), tol)
        out[far] = series.evaluate(flat[far])
    for i in np.flatnonzero(~far):
        out[i] = fallback(float(flat[i]))
    return out.reshape(ax.shape) if ax.ndim else float(out[0])


def K_scaled_eval(x, tol: float = 1e-14):
    """``e^{alpha |x|} K(x) / (2 sqrt pi)``; approaches ``cos(pi/12 + alpha|x|)``."""
    A = ALPHA * np.abs(_as_nonzero(x))
    return _chunked(A, lambda a: _terms_needed(a, tol, "K", True), _scaled_K_body)


def K_derivative_scaled_eval(x, tol: float = 1e-14):
    """``sqrt(3) e^{A} K'(x) / (4 pi^2)`` for ``x > 0`` from the differentiated series."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise DomainError("derivative series is evaluated for x > 0")
    return _chunked(ALPHA * x, lambda a: _terms_needed(a, tol, "dK", True), _scaled_dK_body)


def _oscillatory_quad(fn, omega, trig, epsabs, limit):
    # the product rule is tighter than QAWO for the moderate frequencies used here
    val, err = integrate.quad(
        lambda t: fn(t) * trig(omega * t), 0.0, _XI_MAX, epsabs=epsabs, epsrel=1e-13, limit=limit
    )
    return val, err


def K_quadrature_eval(x: float, epsabs: float = 1e-14, limit: int = 2000) -> float:
    """``K(x) = 2 int_0^Xi khat(xi) cos(2 pi xi x) d xi`` by adaptive quadrature.

    Independent of the residue machinery; used as an oracle.
    """
    x = abs(float(x))
    val, err = _oscillatory_quad(_khat_real, 2 * math.pi * x, math.cos, epsabs, limit)
    if err > 1e-10:
        raise ConvergenceError(f"quadrature error estimate {err:.2e} at x = {x}", best=2 * val)
    return 2.0 * val


def remainder_S(x, tol: float = 1e-15):
    """``S(x) = x (e^{A} K(x) / (2 sqrt pi) - cos(pi/12 + A))`` for ``x > 0``."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise DomainError("S is defined for x > 0")
    A = ALPHA * x
    full = _chunked(A, lambda a: _terms_needed(a, tol, "K", True), _scaled_K_body)
    return x * (full - np.cos(math.pi / 12 + A))


def remainder_T(x, tol: float = 1e-15):
    """``T(x)``: the differentiated series minus ``-sin(pi/3 + A)``."""
    x = np.asarray(x, dtype=float)
    A = ALPHA * x
    out = np.asarray(K_derivative_scaled_eval(x, tol)) + np.sin(math.pi / 3 + A)
    return out if out.ndim else float(out)


# -- step response b -----------------------------------------------------------

def _b_integrand_over_xi(xi: float) -> float:
    # khat(xi) / (pi xi), which vanishes at 0
    if xi < 1e-8:
        return 0.0
    e = math.exp(-xi * xi)
    return e * -math.expm1(-xi * xi) / xi / (1.0 - e + e * e) / math.pi


def b_quadrature_eval(x: float, epsabs: float = 1e-14, limit: int = 2000) -> float:
    """``b(x) = H(-x) + int_x^inf K`` via its sine transform (any real ``x``)."""
    x = float(x)
    if x == 0:
        return 0.0
    val, err = _oscillatory_quad(_b_integrand_over_xi, 2 * math.pi * abs(x), math.sin, epsabs, limit)
    if err > 1e-10:
        raise ConvergenceError(f"quadrature error estimate {err:.2e} at x = {x}", best=val)
    # int_0^|x| K equals val; since int_0^inf K = 0, b(x) = -val for x > 0
    return -val if x > 0 else 1.0 + val


def b_heaviside_eval(x, tol: float = 1e-12, x_switch: float = 0.05):
    """Step response ``b(x)`` for ``x > 0`` from the integrated residue series."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise DomainError("the series for b holds on x > 0; use the convolution route otherwise")
    return _split_eval(x, x_switch, "b_heaviside", tol, b_quadrature_eval)


def b_scaled_eval(x, tol: float = 1e-14):
    """``e^{A} b(x)``; approaches ``(sqrt 3/pi) cos(pi/3 + A)``."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise DomainError("b series needs x > 0")
    return _chunked(ALPHA * x, lambda a: _terms_needed(a, tol, "b_heaviside", True), _scaled_b_body)


def heaviside_remainder(x):
    """``x (e^{A} b(x) - (sqrt 3/pi) cos(pi/3 + A))``, bounded for large ``x``."""
    x = np.asarray(x, dtype=float)
    out = x * (np.asarray(b_scaled_eval(x)) - _B_PREFACTOR * np.cos(math.pi / 3 + ALPHA * x))
    return out if out.ndim else float(out)


# -- zero localization ---------------------------------------------------------

@dataclass
class ZeroRow:
    k: int
    bracket_lo: float
    bracket_hi: float
    zero: float
    reference: float
    bound: float
    sign_changes: int
    slope_ok: bool

    @property
    def error(self) -> float:
        return abs(self.reference - self.zero)

    @property
    def passed(self) -> bool:
        inside = self.bracket_lo < self.zero < self.bracket_hi
        return inside and self.sign_changes == 1 and self.slope_ok and self.error <= self.bound


@dataclass
class ZeroTable:
    kind: str
    rows: list = field(default_factory=list)

    @property
    def all_pass(self) -> bool:
        return all(r.passed for r in self.rows)

    def to_csv(self, path) -> Path:
        path = Path(path)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["k", "bracket_lo", "bracket_hi", "zero", "reference", "bound", "pass"])
            for r in self.rows:
                w.writerow([
                    r.k, f"{r.bracket_lo:.15g}", f"{r.bracket_hi:.15g}", f"{r.zero:.15g}",
                    f"{r.reference:.15g}", f"{r.bound:.15g}", str(r.passed).lower(),
                ])
        return path


def _zero_geometry(kind, k):
    if kind == "K":
        lo = (k - 1 / 12) / SQRT_RATE
        hi = (k + 1 - 1 / 12) / SQRT_RATE
        ref = (k + 1 - 7 / 12) / SQRT_RATE
        bound = math.asin(8 / (math.pi * (12 * k - 1))) / ALPHA
    else:
        lo = (k - 1 / 3) / SQRT_RATE
        hi = (k + 1 - 1 / 3) / SQRT_RATE
        ref = (k + 1 / 6) / SQRT_RATE
        bound = math.sqrt(6) / (2 * math.pi**2) * math.asin(
            2 * math.sqrt(5) / (5 * math.pi * (3 * k - 1))
        )
    return lo, hi, ref, bound


def locate_zeros(kind: str = "K", k_max: int = 20, xtol: float = 1e-12, probes: int = 4001) -> ZeroTable:
    """Bracket, isolate and bisect the positive zeros of ``K`` or ``b``.

    Bracket ``k`` runs between consecutive extrema of the leading cosine.
    Inside each bracket the sign changes of the scaled function are counted
    on a fine probe grid, the zero is bisected to ``xtol`` and the slope at
    the zero is checked against the sign the leading term predicts.

    Raises
    ------
    StructuralError
        A bracket whose endpoints do not have opposite signs.
    """
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    if kind not in ("K", "b", "b_heaviside"):
        raise ValueError(f"unknown zero table kind {kind!r}")
    is_K = kind == "K"
    x_first = _zero_geometry(kind, 1)[0]
    series = SeriesKernel.for_tolerance("K" if is_K else "b_heaviside", x_first, 1e-15, scaled=True)

    def g(x):
        return series.scaled(x)

    table = ZeroTable("K" if is_K else "b_heaviside")
    for k in range(1, k_max + 1):
        lo, hi, ref, bound = _zero_geometry(kind, k)
        g_lo, g_hi = float(g(lo)), float(g(hi))
        if not g_lo * g_hi < 0:
            raise StructuralError(f"{table.kind} bracket {k} = ({lo}, {hi}) has no sign change")
        probe = g(np.linspace(lo, hi, probes))
        signs = np.sign(probe)
        changes = int(np.count_nonzero(signs[1:] * signs[:-1] < 0))
        a, b = lo, hi
        while b - a > xtol:
            m = 0.5 * (a + b)
            if float(g(m)) * g_lo > 0:
                a = m
            else:
                b = m
        z = 0.5 * (a + b)
        # the leading cosine crosses upwards for odd k and downwards for even k
        expected = 1.0 if k % 2 else -1.0
        if is_K:
            slope = float(K_derivative_scaled_eval(z))
        else:
            slope = -float(K_scaled_eval(z))  # b' = -K
        table.rows.append(ZeroRow(k, lo, hi, z, ref, bound, changes, slope * expected > 0))
    return table


# -- Gaussian comparison ----------------------------------------------------------

@dataclass
class GaussianControlReport:
    mu: float
    dog_sign_changes: int
    gaussian_sign_changes: int
    series_vs_mixture_max_error: float
    even: bool

    @property
    def passed(self) -> bool:
        return self.gaussian_sign_changes == 0 and self.dog_sign_changes >= 10 and self.even


def gaussian_pole_series(x, mu: float = 0.5, m_max: int = 4000):
    """Resolvent kernel for the single Gaussian ``w1_hat = exp(-xi^2)``.

    Poles solve ``exp(-z^2) = 1/mu``; each has residue ``1/(2 mu z)``, so
    ``K(x) = (pi i / mu) sum_z exp(2 pi i z |x|) / z`` over upper half-plane poles.
    """
    if not 0 < mu < 1:
        raise ValueError("need 0 < mu < 1 for an integrable kernel")
    ax = np.abs(np.asarray(x, dtype=float)).reshape(-1, 1)
    m = np.arange(-m_max, m_max + 1)
    z = np.sqrt(math.log(mu) + 2j * math.pi * m)
    z = np.where(z.imag < 0, -z, z)
    val = (math.pi * 1j / mu * np.sum(np.exp(2j * math.pi * z * ax) / z, axis=1)).real
    out = val.reshape(np.shape(x))
    return out if out.ndim else float(out)


def gaussian_mixture_kernel(x, mu: float = 0.5, n_max: int = 400):
    """Same kernel from the geometric expansion ``sum mu^{n-1} exp(-n xi^2)``."""
    ax = np.asarray(x, dtype=float).reshape(-1, 1)
    n = np.arange(1, n_max + 1)
    val = np.sum(mu ** (n - 1) * np.sqrt(math.pi / n) * np.exp(-math.pi**2 * ax**2 / n), axis=1)
    out = val.reshape(np.shape(x))
    return out if out.ndim else float(out)


def _sign_changes(v):
    s = np.sign(v)
    s = s[s != 0]
    return int(np.count_nonzero(s[1:] != s[:-1]))


def gaussian_negative_control(mu: float = 0.5, step: float = 1e-3) -> GaussianControlReport:
    """Count sign changes of the DoG and pure-Gaussian kernels on (0.1, 10).

    The coupling must stay below ``1`` for the Gaussian (its ``mu_0`` is 1);
    ``mu = 0.5`` is used by default.
    """
    xs = np.arange(0.1 + step, 10.0, step)
    dog = K_scaled_eval(xs)
    gauss = gaussian_pole_series(xs, mu)
    probe = np.array([0.1, 0.5, 1.0, 2.0, 4.0])
    err = float(np.max(np.abs(gaussian_pole_series(probe, mu) - gaussian_mixture_kernel(probe, mu))))
    even = bool(
        np.array_equal(gaussian_pole_series(probe, mu), gaussian_pole_series(-probe, mu))
        and np.array_equal(K_series_eval(probe), K_series_eval(-probe))
    )
    return GaussianControlReport(mu, _sign_changes(dog), _sign_changes(gauss), err, even)
