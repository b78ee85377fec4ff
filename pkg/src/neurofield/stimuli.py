"""Visual stimuli on the cortex, binary rendering and the log-polar warp.

Cortical coordinates are ``(x1, x2) = (log r, theta)``.  Funnel patterns
(fans of rays on the retina) are stripes in ``x2``; tunnel patterns
(concentric rings) are stripes in ``x1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np
from scipy import ndimage

from .errors import DomainError, GridMismatchError, UnsupportedElementError
from .grid import Field, GridSpec, sample

__all__ = [
    "heaviside",
    "Stimulus",
    "generate",
    "BinaryPattern",
    "binarize",
    "retino_cortical",
    "cortical_to_retina",
    "warp_to_retina",
    "GroupElement",
    "act",
    "field_to_image",
    "pattern_to_image",
    "write_pgm",
    "read_pgm",
    "write_pbm",
    "read_pbm",
    "write_png",
]

STIMULUS_KINDS = ("funnel", "tunnel", "mackay_rays", "mackay_target", "custom")


def heaviside(s):
    """Step function with ``H(0) = 1``."""
    return (np.asarray(s) >= 0).astype(float)


@dataclass(frozen=True)
class Stimulus:
    """Declarative description of a cortical input.

    ``mackay_rays``:   cos(2 pi lam x2) + epsilon H(theta - x1)
    ``mackay_target``: cos(2 pi lam x1) + epsilon (H(-x2 - o1) + H(x2 - o2) + H(o3 - |x2|))
    ``custom``:        ``fn(x1, x2)``
    """

    kind: str
    lam: float = 2.5
    epsilon: float = 0.0
    theta: float = 0.0
    offsets: tuple = (9.75, 9.75, 0.25)
    fn: Callable | None = None

    def __post_init__(self):
        if self.kind not in STIMULUS_KINDS:
            raise ValueError(f"unknown stimulus kind {self.kind!r}; expected one of {STIMULUS_KINDS}")
        if not self.lam > 0:
            raise ValueError("lam must be positive")
        if self.epsilon < 0:
            raise ValueError("epsilon must be nonnegative")
        if self.kind == "custom" and self.fn is None:
            raise ValueError("custom stimulus needs fn")
        object.__setattr__(self, "offsets", tuple(float(o) for o in self.offsets))

    def __call__(self, x1, x2):
        k = 2 * math.pi * self.lam
        if self.kind == "custom":
            return self.fn(x1, x2)
        if self.kind == "funnel":
            return np.cos(k * x2) + 0 * x1
        if self.kind == "tunnel":
            return np.cos(k * x1) + 0 * x2
        if self.kind == "mackay_rays":
            return np.cos(k * x2) + self.epsilon * heaviside(self.theta - x1)
        o1, o2, o3 = self.offsets
        bumps = heaviside(-x2 - o1) + heaviside(x2 - o2) + heaviside(o3 - np.abs(x2))
        return np.cos(k * x1) + self.epsilon * bumps


def generate(stim: Stimulus, spec: GridSpec) -> Field:
    """Sample a stimulus on a 2D grid."""
    if spec.d != 2:
        raise ValueError("stimuli are defined on the 2D cortex")
    return sample(stim, spec)


@dataclass(frozen=True, eq=False)
class BinaryPattern:
    """One bit per node: 0 (black) where the source is positive, 1 (white) elsewhere."""

    spec: GridSpec
    bits: np.ndarray

    def __post_init__(self):
        b = np.array(self.bits, dtype=np.uint8, copy=True)
        if b.shape != self.spec.shape:
            raise ValueError(f"bits of shape {b.shape} do not match grid {self.spec.shape}")
        if np.any(b > 1):
            raise ValueError("bits must be 0 or 1")
        b.flags.writeable = False
        object.__setattr__(self, "bits", b)

    def __eq__(self, other):
        if not isinstance(other, BinaryPattern):
            return NotImplemented
        return self.spec == other.spec and np.array_equal(self.bits, other.bits)

    def __hash__(self):
        return hash((self.spec, self.bits.tobytes()))

    @property
    def black_fraction(self) -> float:
        return float(1.0 - self.bits.mean())

    def mismatch(self, other: "BinaryPattern") -> float:
        """Fraction of nodes where two patterns differ."""
        if self.spec != other.spec:
            raise GridMismatchError(f"grid mismatch: {self.spec} vs {other.spec}")
        return float(np.mean(self.bits != other.bits))


def binarize(h: Field) -> BinaryPattern:
    return BinaryPattern(h.spec, (h.values <= 0).astype(np.uint8))


# -- retino-cortical map ------------------------------------------------------

def retino_cortical(r, theta):
    """Retinal polar ``(r, theta)`` to cortical ``(log r, theta)``."""
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise DomainError("retinal radius must be positive")
    return np.log(r), np.asarray(theta, dtype=float) * 1.0


def cortical_to_retina(x1, x2):
    """Inverse map ``(x1, x2) -> (e^{x1}, x2 mod 2 pi)``."""
    return np.exp(np.asarray(x1, dtype=float)), np.mod(x2, 2 * math.pi)


def _pixel_polar(out_px, r_max):
    c = (np.arange(out_px) + 0.5 - out_px / 2) / (out_px / 2) * r_max
    X, Y = np.meshgrid(c, -c)  # row 0 at the top
    return np.hypot(X, Y), np.arctan2(Y, X)


def warp_to_retina(
    cortical,
    out_px: int = 512,
    r_max: float | None = None,
    angular_scale: float = 1.0,
    background: int = 255,
) -> np.ndarray:
    """Render a cortical field or binary pattern as a retinal image.

    Each pixel at polar position ``(r, theta)``, ``theta`` in ``(-pi, pi]``,
    samples the cortex at ``(log r, angular_scale * theta)``.  Fields are
    interpolated bilinearly and shown with positive values dark; binary
    patterns use the nearest node.  The angular coordinate wraps around the
    periodic grid; pixels with ``log r`` outside ``[-L, L - dx]`` get
    ``background``.

    Returns
    -------
    (out_px, out_px) uint8 array, row 0 at the top.
    """
    if out_px < 64:
        raise ValueError("out_px must be at least 64")
    spec = cortical.spec
    if spec.d != 2:
        raise ValueError("warping needs a 2D cortical field")
    r_max = math.exp(spec.L) if r_max is None else float(r_max)
    r, th = _pixel_polar(out_px, r_max)
    with np.errstate(divide="ignore"):
        x1 = np.log(r)
    x2 = angular_scale * th
    inside = (r > 0) & (x1 >= -spec.L) & (x1 <= spec.L - spec.dx)
    coords = np.stack([(x1[inside] + spec.L) / spec.dx, (x2[inside] + spec.L) / spec.dx])
    img = np.full((out_px, out_px), background, dtype=np.uint8)
    if isinstance(cortical, BinaryPattern):
        vals = ndimage.map_coordinates(cortical.bits.astype(float), coords, order=0, mode="grid-wrap")
        img[inside] = np.where(vals > 0.5, 255, 0).astype(np.uint8)
    else:
        vals = ndimage.map_coordinates(np.asarray(cortical.values), coords, order=1, mode="grid-wrap")
        img[inside] = _to_gray(vals, cortical.values)
    return img


def _to_gray(vals, reference):
    lo, hi = float(np.min(reference)), float(np.max(reference))
    if hi - lo <= 0:
        return np.full(vals.shape, 127, dtype=np.uint8)
    # positive values dark
    return np.clip(np.rint(255 * (hi - vals) / (hi - lo)), 0, 255).astype(np.uint8)


def field_to_image(u: Field) -> np.ndarray:
    """Cortical field as grayscale, ``x1`` to the right and ``x2`` upward."""
    return _to_gray(u.values, u.values).T[::-1]


def pattern_to_image(p: BinaryPattern) -> np.ndarray:
    return (p.bits.astype(np.uint8) * 255).T[::-1]


# -- Euclidean group on the grid ------------------------------------------------

_ORTHO = {
    "identity": ((1, 0), (0, 1)),
    "reflect-x1": ((-1, 0), (0, 1)),
    "reflect-x2": ((1, 0), (0, -1)),
    "rotate-90": ((0, -1), (1, 0)),
    "rotate-180": ((-1, 0), (0, -1)),
    "rotate-270": ((0, 1), (-1, 0)),
    "reflect-diagonal": ((0, 1), (1, 0)),
    "reflect-antidiagonal": ((0, -1), (-1, 0)),
}


@dataclass(frozen=True)
class GroupElement:
    """``g x = R x + t`` with ``t`` in whole grid nodes and ``R`` a grid symmetry."""

    translation: tuple = (0, 0)
    orthogonal: str = "identity"

    def __post_init__(self):
        t = tuple(self.translation)
        if len(t) != 2 or any(float(v) != int(v) for v in t):
            raise UnsupportedElementError(f"translation {t} is not a whole number of nodes")
        if self.orthogonal not in _ORTHO:
            raise UnsupportedElementError(
                f"orthogonal part {self.orthogonal!r} does not preserve the grid; "
                f"expected one of {tuple(_ORTHO)}"
            )
        object.__setattr__(self, "translation", tuple(int(v) for v in t))

    @classmethod
    def from_displacement(cls, shift, spec: GridSpec, orthogonal: str = "identity"):
        """Build from a translation in length units; it must be a node multiple."""
        nodes = np.asarray(shift, dtype=float) / spec.dx
        if np.any(np.abs(nodes - np.rint(nodes)) > 1e-9):
            raise UnsupportedElementError(f"translation {tuple(shift)} is not a multiple of dx = {spec.dx}")
        return cls(tuple(int(v) for v in np.rint(nodes)), orthogonal)

    @property
    def matrix(self) -> np.ndarray:
        return np.array(_ORTHO[self.orthogonal])

    def inverse(self) -> "GroupElement":
        rinv = self.matrix.T
        t = -rinv @ np.array(self.translation)
        return GroupElement(tuple(int(v) for v in t), _name_of(rinv))

    def compose(self, other: "GroupElement") -> "GroupElement":
        """``(self o other) x = self(other(x))``."""
        r = self.matrix @ other.matrix
        t = self.matrix @ np.array(other.translation) + np.array(self.translation)
        return GroupElement(tuple(int(v) for v in t), _name_of(r))


def _name_of(mat):
    for name, m in _ORTHO.items():
        if np.array_equal(np.array(m), mat):
            return name
    raise UnsupportedElementError(f"matrix {mat.tolist()} is not a supported symmetry")


def act(g: GroupElement, u: Field) -> Field:
    """``(T_g u)(x) = u(g^{-1} x)`` as an exact permutation of periodic nodes."""
    spec = u.spec
    if spec.d != 2:
        raise ValueError("group actions are defined on 2D fields")
    n, half = spec.n, spec.n // 2
    i, j = np.meshgrid(np.arange(n) - half, np.arange(n) - half, indexing="ij")
    rinv = g.matrix.T
    p1 = i - g.translation[0]
    p2 = j - g.translation[1]
    s1 = (rinv[0, 0] * p1 + rinv[0, 1] * p2 + half) % n
    s2 = (rinv[1, 0] * p1 + rinv[1, 1] * p2 + half) % n
    return Field(spec, u.values[s1, s2])


# -- raster I/O -------------------------------------------------------------------

def write_pgm(path, img: np.ndarray) -> Path:
    """Binary PGM (P5, maxval 255)."""
    img = np.asarray(img)
    if img.ndim != 2:
        raise ValueError("PGM needs a 2D array")
    path = Path(path)
    head = f"P5\n{img.shape[1]} {img.shape[0]}\n255\n".encode("ascii")
    path.write_bytes(head + np.clip(img, 0, 255).astype(np.uint8).tobytes())
    return path


def _header_tokens(buf, count):
    tokens, pos = [], 0
    while len(tokens) < count:
        while buf[pos : pos + 1].isspace():
            pos += 1
        if buf[pos : pos + 1] == b"#":
            pos = buf.index(b"\n", pos) + 1
            continue
        start = pos
        while not buf[pos : pos + 1].isspace():
            pos += 1
        tokens.append(buf[start:pos].decode("ascii"))
    return tokens, pos + 1


def read_pgm(path) -> np.ndarray:
    buf = Path(path).read_bytes()
    (magic, w, h, maxval), pos = _header_tokens(buf, 4)
    if magic != "P5" or int(maxval) > 255:
        raise ValueError("only 8-bit binary PGM (P5) is supported")
    w, h = int(w), int(h)
    return np.frombuffer(buf, dtype=np.uint8, count=w * h, offset=pos).reshape(h, w).copy()


def write_pbm(path, white: np.ndarray) -> Path:
    """Binary PBM (P4).  ``white`` holds 1 for white pixels; PBM stores 1 = black."""
    white = np.asarray(white, dtype=np.uint8)
    path = Path(path)
    h, w = white.shape
    packed = np.packbits(1 - white, axis=1)
    path.write_bytes(f"P4\n{w} {h}\n".encode("ascii") + packed.tobytes())
    return path


def read_pbm(path) -> np.ndarray:
    """Inverse of :func:`write_pbm`: returns 1 for white pixels."""
    buf = Path(path).read_bytes()
    (magic, w, h), pos = _header_tokens(buf, 3)
    if magic != "P4":
        raise ValueError("only binary PBM (P4) is supported")
    w, h = int(w), int(h)
    row = (w + 7) // 8
    packed = np.frombuffer(buf, dtype=np.uint8, count=row * h, offset=pos).reshape(h, row)
    return (1 - np.unpackbits(packed, axis=1)[:, :w]).astype(np.uint8)


def write_png(path, img: np.ndarray) -> Path:
    """Write a grayscale PNG; needs the optional Pillow dependency."""
    try:
        from PIL import Image
    except ImportError as exc:  # pragma: no cover - depends on environment
        raise ImportError("PNG output needs Pillow (pip install 'artifact[png]')") from exc
    path = Path(path)
    Image.fromarray(np.asarray(img, dtype=np.uint8), mode="L").save(path)
    return path
