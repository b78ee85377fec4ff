"""Difference-of-Gaussians connectivity kernel and its derived constants."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParamsError
from .grid import Field, GridSpec, sample

__all__ = [
    "DoGParams",
    "KernelConstants",
    "CANONICAL",
    "dog_eval",
    "dog_radial",
    "omega_hat",
    "constants",
    "kernel_field",
    "omega_hat_multiplier",
]


@dataclass(frozen=True)
class DoGParams:
    """Excitation width ``sigma1``, inhibition width ``sigma2``, inhibition weight ``kappa``."""

    kappa: float
    sigma1: float
    sigma2: float

    def __post_init__(self):
        _validate(self.kappa, self.sigma1, self.sigma2)

    @classmethod
    def canonical(cls) -> "DoGParams":
        """kappa = 1, 2 pi^2 sigma1^2 = 1, 2 pi^2 sigma2^2 = 2."""
        return cls(1.0, 1.0 / (math.pi * math.sqrt(2.0)), 1.0 / math.pi)

    @property
    def balanced(self) -> bool:
        return abs(self.kappa - 1.0) < 1e-12


def _validate(kappa, s1, s2):
    if not kappa > 0:
        raise InvalidParamsError(f"kappa must be positive, got {kappa}")
    if not 0 < s1 < s2:
        raise InvalidParamsError(f"need 0 < sigma1 < sigma2, got {s1}, {s2}")
    if not s1 * math.sqrt(kappa) < s2:
        raise InvalidParamsError(
            f"need sigma1*sqrt(kappa) < sigma2, got {s1 * math.sqrt(kappa)} >= {s2}"
        )


CANONICAL = DoGParams.canonical()


@dataclass(frozen=True)
class KernelConstants:
    q_c: float
    mu_c: float
    mu_0: float
    l1_norm: float
    theta: float


def dog_radial(params: DoGParams, d: int, r):
    """Kernel value as a function of the distance ``r`` to the origin."""
    r2 = np.square(np.asarray(r, dtype=float))
    s1, s2, k = params.sigma1, params.sigma2, params.kappa
    if d == 2:
        c1, c2 = 1.0 / (2 * math.pi * s1**2), k / (2 * math.pi * s2**2)
    elif d == 1:
        c1, c2 = 1.0 / (s1 * math.sqrt(2 * math.pi)), k / (s2 * math.sqrt(2 * math.pi))
    else:
        raise ValueError(f"d must be 1 or 2, got {d}")
    return c1 * np.exp(-r2 / (2 * s1**2)) - c2 * np.exp(-r2 / (2 * s2**2))


def dog_eval(params: DoGParams, d: int, x):
    """Evaluate the normalized Gaussian difference at position(s) ``x``.

    For ``d == 2`` the last axis of ``x`` holds the two coordinates.
    """
    x = np.asarray(x, dtype=float)
    if d == 2:
        r = np.sqrt(np.sum(x * x, axis=-1))
    else:
        r = np.abs(x)
    return dog_radial(params, d, r)


def omega_hat(params: DoGParams, d: int, xi):
    """Fourier transform ``exp(-2 pi^2 s1^2 |xi|^2) - kappa exp(-2 pi^2 s2^2 |xi|^2)``.

    The expression is the same in one and two dimensions; ``d`` only says
    whether the last axis of ``xi`` is a 2-vector.
    """
    xi = np.asarray(xi, dtype=float)
    q2 = np.sum(xi * xi, axis=-1) if (d == 2 and xi.ndim and xi.shape[-1] == 2) else xi * xi
    return _hat_of_q2(params, q2)


def _hat_of_q2(params, q2):
    a1 = 2 * math.pi**2 * params.sigma1**2
    a2 = 2 * math.pi**2 * params.sigma2**2
    return np.exp(-a1 * q2) - params.kappa * np.exp(-a2 * q2)


def constants(params: DoGParams) -> KernelConstants:
    """Critical frequency, thresholds ``mu_c``/``mu_0`` and the L1 norm.

    ``f'(0) = 1`` is assumed, so ``mu_c = 1 / max omega_hat``.
    """
    k, s1, s2 = params.kappa, params.sigma1, params.sigma2
    _validate(k, s1, s2)
    ratio = k * s2**2 / s1**2
    if ratio > 1:
        q_c = math.sqrt(math.log(ratio) / (2 * math.pi**2 * (s2**2 - s1**2)))
    else:
        # omega_hat is then decreasing in |xi| and peaks at the origin
        q_c = 0.0
    peak = float(_hat_of_q2(params, q_c**2))
    mu_c = 1.0 / peak if peak > 0 else math.inf
    theta = s1 * s2 * math.sqrt(2 * math.log(s2**2 / (k * s1**2)) / (s2**2 - s1**2))
    l1 = (1 - k) + 2 * (k * math.exp(-theta**2 / (2 * s2**2)) - math.exp(-theta**2 / (2 * s1**2)))
    return KernelConstants(q_c=q_c, mu_c=mu_c, mu_0=1.0 / l1, l1_norm=l1, theta=theta)


def kernel_field(params: DoGParams, spec: GridSpec) -> Field:
    """Kernel sampled on ``spec`` with the origin on the central node."""
    def fn(*xs):
        return dog_radial(params, spec.d, np.sqrt(sum(x * x for x in xs)))

    return sample(fn, spec)


def omega_hat_multiplier(params: DoGParams):
    """``omega_hat`` as a multiplier callable for :func:`grid.apply_multiplier`."""
    def m(*xis):
        return _hat_of_q2(params, sum(x * x for x in xis))

    return m
