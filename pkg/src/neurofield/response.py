"""Firing-rate nonlinearities ``f`` with ``f(0) = 0`` and ``f'(0) = max f' = 1``.

Variants:

``linear``         f(s) = s
``tanh``           f(s) = tanh(s)
``erf-sigmoid``    f(s) = erf(sqrt(pi) s / 2)
``rational``       f(s) = s / (1 + |s|)
``capped-linear``  f(s) = s on |s| <= 1, saturating at +-1.  With ``delta > 0``
                   the corner is replaced by a C^2 blend on [1 - delta, 1 + delta].
``asym-tanh``      tanh(s) for s >= 0 and tanh(2s)/2 for s < 0.  Admissible but
                   not odd; used to probe the zero-gap estimate for non-odd f.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erf

__all__ = [
    "ResponseKind",
    "LINEAR",
    "TANH",
    "ERF",
    "RATIONAL",
    "CAPPED",
    "ASYM_TANH",
    "f_eval",
    "f_prime",
    "parse_response",
]

_KINDS = ("linear", "tanh", "erf-sigmoid", "rational", "capped-linear", "asym-tanh")
_ALIASES = {"erf": "erf-sigmoid", "capped": "capped-linear", "identity": "linear"}
_SQRT_PI_2 = math.sqrt(math.pi) / 2


@dataclass(frozen=True)
class ResponseKind:
    name: str
    delta: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "name", _ALIASES.get(self.name, self.name))
        object.__setattr__(self, "delta", float(self.delta))
        if self.name not in _KINDS:
            raise ValueError(f"unknown response kind {self.name!r}; expected one of {_KINDS}")
        if self.delta < 0 or (self.delta and self.name != "capped-linear"):
            raise ValueError("delta applies to capped-linear only and must be >= 0")
        if self.delta >= 1:
            raise ValueError("capped-linear smoothing half-width must be < 1")

    @property
    def is_linear(self) -> bool:
        return self.name == "linear"

    @property
    def is_odd(self) -> bool:
        return self.name != "asym-tanh"

    @property
    def bounded(self) -> bool:
        return self.name != "linear"

    @property
    def sup_second_derivative(self) -> float:
        """``sup |f''|`` (infinite for the unsmoothed capped-linear corner)."""
        if self.name == "linear":
            return 0.0
        if self.name == "capped-linear":
            return 0.75 / self.delta if self.delta else math.inf
        if self.name == "rational":
            return 2.0
        if self.name == "erf-sigmoid":
            # |d/ds exp(-pi s^2/4)| peaks at s = sqrt(2/pi)
            return math.sqrt(math.pi / 2) * math.exp(-0.5)
        # tanh'' = -2 tanh sech^2 peaks at 4/(3 sqrt 3); asym branch doubles it
        return 4 / (3 * math.sqrt(3)) * (2.0 if self.name == "asym-tanh" else 1.0)

    def __call__(self, s):
        return f_eval(self, s)

    def prime(self, s):
        return f_prime(self, s)

    def __str__(self):
        return f"{self.name}:{self.delta:g}" if self.delta else self.name


LINEAR = ResponseKind("linear")
TANH = ResponseKind("tanh")
ERF = ResponseKind("erf-sigmoid")
RATIONAL = ResponseKind("rational")
CAPPED = ResponseKind("capped-linear")
ASYM_TANH = ResponseKind("asym-tanh")


def parse_response(text: str) -> ResponseKind:
    """Parse ``name`` or ``capped-linear:delta``."""
    name, _, delta = text.strip().partition(":")
    return ResponseKind(name.strip(), float(delta) if delta else 0.0)


def _blend_parts(a, delta):
    # a = |s|; returns f(a) and f'(a) for a >= 0 on the smoothed cap
    lo, hi = 1.0 - delta, 1.0 + delta
    t = np.clip((a - lo) / (2 * delta), 0.0, 1.0)
    # f' = 1 - smoothstep(t); integral of smoothstep from 0 to t is t^3 - t^4/2
    val = np.where(a <= lo, a, np.where(a >= hi, 1.0, lo + 2 * delta * (t - t**3 + 0.5 * t**4)))
    der = np.where(a <= lo, 1.0, np.where(a >= hi, 0.0, 1.0 - (3 * t**2 - 2 * t**3)))
    return val, der


def f_eval(kind: ResponseKind, s):
    s = np.asarray(s, dtype=float)
    name = kind.name
    if name == "linear":
        return s * 1.0
    if name == "tanh":
        return np.tanh(s)
    if name == "erf-sigmoid":
        return erf(_SQRT_PI_2 * s)
    if name == "rational":
        return s / (1.0 + np.abs(s))
    if name == "capped-linear":
        if kind.delta == 0:
            return np.clip(s, -1.0, 1.0)
        val, _ = _blend_parts(np.abs(s), kind.delta)
        return np.sign(s) * val
    # asym-tanh
    return np.where(s >= 0, np.tanh(s), 0.5 * np.tanh(2 * s))


def f_prime(kind: ResponseKind, s):
    """First derivative; at the unsmoothed cap corners the value 1 is used."""
    s = np.asarray(s, dtype=float)
    name = kind.name
    if name == "linear":
        return np.ones_like(s)
    if name == "tanh":
        return 1.0 - np.tanh(s) ** 2
    if name == "erf-sigmoid":
        return np.exp(-math.pi * s * s / 4)
    if name == "rational":
        return 1.0 / (1.0 + np.abs(s)) ** 2
    if name == "capped-linear":
        if kind.delta == 0:
            return np.where(np.abs(s) <= 1.0, 1.0, 0.0)
        _, der = _blend_parts(np.abs(s), kind.delta)
        return der
    return np.where(s >= 0, 1.0 - np.tanh(s) ** 2, 1.0 - np.tanh(2 * s) ** 2)
