"""Uniform periodic grids on [-L, L]^d and spectral operations on them.

Sample coordinates follow the cell-corner convention ``x_j = -L + j*dx``,
``dx = 2L/n``, so the origin sits on node ``n/2``.  Axis 0 of a 2D field
is ``x1`` and axis 1 is ``x2``.

Convolutions are periodic discrete convolutions weighted by ``dx**d`` so
that they approximate the whole-space integral ``int k(x - y) u(y) dy``
whenever the kernel has decayed well inside the box.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np
from scipy import fft as sfft

from .errors import GridMismatchError, MultiplierError, SamplingError

__all__ = [
    "GridSpec",
    "Field",
    "sample",
    "convolve",
    "apply_multiplier",
    "norm",
    "shift",
    "field_to_bytes",
    "field_from_bytes",
    "save_field",
    "load_field",
]


@dataclass(frozen=True)
class GridSpec:
    """Square periodic grid of ``n**d`` nodes on ``[-L, L)^d``."""

    L: float
    n: int
    d: int = 2

    def __post_init__(self):
        if not (np.isfinite(self.L) and self.L > 0):
            raise ValueError(f"half-width L must be positive, got {self.L}")
        if int(self.n) != self.n or self.n < 2 or self.n % 2:
            raise ValueError(f"n must be an even integer >= 2, got {self.n}")
        if self.d not in (1, 2):
            raise ValueError(f"d must be 1 or 2, got {self.d}")
        object.__setattr__(self, "L", float(self.L))
        object.__setattr__(self, "n", int(self.n))

    @property
    def dx(self) -> float:
        return 2.0 * self.L / self.n

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n,) * self.d

    @property
    def cell_volume(self) -> float:
        return self.dx**self.d

    @property
    def half_shape(self) -> tuple[int, ...]:
        """Shape of the real-FFT half spectrum."""
        return self.shape[:-1] + (self.n // 2 + 1,)

    def axis(self) -> np.ndarray:
        """1D node coordinates along any axis."""
        return -self.L + self.dx * np.arange(self.n)

    def mesh(self) -> tuple[np.ndarray, ...]:
        """Node coordinates, one array per axis (``indexing='ij'``)."""
        ax = self.axis()
        if self.d == 1:
            return (ax,)
        return tuple(np.meshgrid(ax, ax, indexing="ij"))

    def frequencies(self) -> tuple[np.ndarray, ...]:
        """Frequencies ``k/(2L)`` broadcast over the real-FFT half spectrum."""
        full = sfft.fftfreq(self.n, d=self.dx)
        half = sfft.rfftfreq(self.n, d=self.dx)
        if self.d == 1:
            return (half,)
        return (full[:, None], half[None, :])

    def index_of(self, x: float) -> int:
        """Index of the node nearest to coordinate ``x``."""
        return int(round((x + self.L) / self.dx)) % self.n


class Field:
    """Immutable real samples of a function on a :class:`GridSpec`.

    Arithmetic between fields requires identical grids; scalars broadcast.
    """

    __slots__ = ("spec", "values")

    def __init__(self, spec: GridSpec, values):
        arr = np.array(values, dtype=np.float64, copy=True)
        if arr.shape != spec.shape:
            raise ValueError(f"values of shape {arr.shape} do not match grid {spec.shape}")
        if not np.all(np.isfinite(arr)):
            bad = np.argwhere(~np.isfinite(arr))[0]
            raise SamplingError(f"non-finite sample at node {tuple(int(i) for i in bad)}")
        arr.flags.writeable = False
        object.__setattr__(self, "spec", spec)
        object.__setattr__(self, "values", arr)

    def __setattr__(self, name, value):
        raise AttributeError("Field is immutable")

    def __repr__(self):
        return f"Field({self.spec!r}, max|u|={np.abs(self.values).max():.3g})"

    @classmethod
    def zeros(cls, spec: GridSpec) -> "Field":
        return cls(spec, np.zeros(spec.shape))

    def _other(self, other):
        if isinstance(other, Field):
            if other.spec != self.spec:
                raise GridMismatchError(f"grid mismatch: {self.spec} vs {other.spec}")
            return other.values
        return other

    def __add__(self, other):
        return Field(self.spec, self.values + self._other(other))

    __radd__ = __add__

    def __sub__(self, other):
        return Field(self.spec, self.values - self._other(other))

    def __rsub__(self, other):
        return Field(self.spec, self._other(other) - self.values)

    def __mul__(self, other):
        return Field(self.spec, self.values * self._other(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return Field(self.spec, self.values / self._other(other))

    def __neg__(self):
        return Field(self.spec, -self.values)

    def map(self, fn: Callable[[np.ndarray], np.ndarray]) -> "Field":
        """Apply a pointwise function to the samples."""
        return Field(self.spec, fn(self.values))

    def sup(self) -> float:
        return float(np.max(np.abs(self.values)))


def _check_same(a: Field, b: Field):
    if a.spec != b.spec:
        raise GridMismatchError(f"grid mismatch: {a.spec} vs {b.spec}")


def sample(fn, spec: GridSpec) -> Field:
    """Evaluate ``fn`` at every grid node.

    ``fn`` receives one coordinate array per axis and must broadcast; a
    scalar result is expanded to the full grid.
    """
    coords = spec.mesh()
    vals = np.broadcast_to(np.asarray(fn(*coords), dtype=np.float64), spec.shape)
    bad = ~np.isfinite(vals)
    if bad.any():
        idx = tuple(int(i) for i in np.argwhere(bad)[0])
        where = tuple(float(c[idx]) for c in coords)
        raise SamplingError(f"function is not finite at node {idx}, x = {where}")
    return Field(spec, vals)


def _forward(values: np.ndarray) -> np.ndarray:
    return sfft.rfftn(values)


def _inverse(spectrum: np.ndarray, spec: GridSpec) -> np.ndarray:
    return sfft.irfftn(spectrum, s=spec.shape)


def kernel_spectrum(kernel: Field) -> np.ndarray:
    """Half-spectrum of a centred kernel, including the ``dx**d`` weight."""
    k0 = sfft.ifftshift(kernel.values)
    return _forward(k0) * kernel.spec.cell_volume


def convolve(kernel: Field, u: Field) -> Field:
    """Periodic convolution ``dx^d * sum_j kernel(x_i - x_j) u(x_j)``.

    The kernel is given centred: its sample at the origin lives on node
    ``n/2`` along each axis.
    """
    _check_same(kernel, u)
    out = _inverse(kernel_spectrum(kernel) * _forward(u.values), u.spec)
    return Field(u.spec, out)


def multiplier_values(m, spec: GridSpec) -> np.ndarray:
    """Evaluate a frequency multiplier on the real-FFT half spectrum."""
    freqs = spec.frequencies()
    vals = np.broadcast_to(np.asarray(m(*freqs)), spec.half_shape)
    bad = ~np.isfinite(vals)
    if bad.any():
        idx = tuple(int(i) for i in np.argwhere(bad)[0])
        xi = tuple(float(np.broadcast_to(f, vals.shape)[idx]) for f in freqs)
        raise MultiplierError(f"multiplier is not finite at xi = {xi}")
    return vals


def apply_multiplier(m, u: Field) -> Field:
    """Inverse transform of ``m(xi) * u_hat(xi)``.

    ``m`` is called with the frequency arrays of :meth:`GridSpec.frequencies`
    (half spectrum only), so it must be conjugate-symmetric for the result
    to represent a real operator.
    """
    vals = multiplier_values(m, u.spec)
    return Field(u.spec, _inverse(vals * _forward(u.values), u.spec))


def norm(u: Field, p=2) -> float:
    """Discrete L^p norm with ``dx**d`` quadrature weights; ``p`` in {1, 2, inf}."""
    a = np.abs(u.values)
    if p in (np.inf, "inf", "∞"):
        return float(a.max())
    if p == 1:
        return float(a.sum() * u.spec.cell_volume)
    if p == 2:
        return float(np.sqrt(np.sum(a * a) * u.spec.cell_volume))
    raise ValueError(f"unsupported norm order {p!r}")


def shift(u: Field, nodes) -> Field:
    """Translate by whole nodes: ``shift(u, k)(x) = u(x - k*dx)`` (periodic)."""
    nodes = np.atleast_1d(nodes).astype(int)
    return Field(u.spec, np.roll(u.values, tuple(nodes), axis=tuple(range(u.spec.d))))


# -- binary serialization --------------------------------------------------

_MAGIC = b"NFLD"
_VERSION = 1
_HEADER = struct.Struct("<4sIIId8x")  # 32 bytes, the last 8 reserved


def field_to_bytes(u: Field) -> bytes:
    """Header ``NFLD | version | d | n | L`` followed by little-endian f64 samples."""
    head = _HEADER.pack(_MAGIC, _VERSION, u.spec.d, u.spec.n, u.spec.L)
    return head + u.values.astype("<f8").tobytes(order="C")


def field_from_bytes(buf: bytes) -> Field:
    if len(buf) < _HEADER.size:
        raise ValueError("buffer too short for a field header")
    magic, version, d, n, L = _HEADER.unpack_from(buf)
    if magic != _MAGIC:
        raise ValueError(f"bad magic {magic!r}")
    if version != _VERSION:
        raise ValueError(f"unsupported field format version {version}")
    spec = GridSpec(L=L, n=n, d=d)
    body = np.frombuffer(buf, dtype="<f8", offset=_HEADER.size)
    if body.size != n**d:
        raise ValueError(f"expected {n**d} samples, found {body.size}")
    return Field(spec, body.reshape(spec.shape))


def save_field(path, u: Field) -> Path:
    path = Path(path)
    path.write_bytes(field_to_bytes(u))
    return path


def load_field(path) -> Field:
    return field_from_bytes(Path(path).read_bytes())
