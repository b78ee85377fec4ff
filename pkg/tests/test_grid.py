import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from neurofield.errors import GridMismatchError, MultiplierError, SamplingError
from neurofield.grid import (
    Field,
    GridSpec,
    apply_multiplier,
    convolve,
    field_from_bytes,
    field_to_bytes,
    load_field,
    norm,
    sample,
    save_field,
    shift,
)


def test_grid_geometry():
    g = GridSpec(10.0, 2000)
    assert g.dx == pytest.approx(0.01)
    assert g.shape == (2000, 2000)
    assert g.half_shape == (2000, 1001)
    assert g.axis()[g.n // 2] == 0.0
    assert g.index_of(0.1) == 1010


@pytest.mark.parametrize("kwargs", [dict(L=0, n=4), dict(L=1, n=5), dict(L=1, n=4, d=3), dict(L=np.inf, n=4)])
def test_grid_rejects_bad_parameters(kwargs):
    with pytest.raises(ValueError):
        GridSpec(**kwargs)


def test_field_is_immutable(small_grid):
    u = Field.zeros(small_grid)
    with pytest.raises(AttributeError):
        u.values = np.ones(small_grid.shape)
    with pytest.raises(ValueError):
        u.values[0, 0] = 1.0


def test_field_arithmetic_requires_same_grid(small_grid):
    other = GridSpec(10.0, 64)
    with pytest.raises(GridMismatchError):
        Field.zeros(small_grid) + Field.zeros(other)
    u = Field.zeros(small_grid) + 2.0
    assert (3 * u - 1).sup() == 5.0
    assert (-(u / 4)).values.max() == -0.5


def test_sample_reports_nonfinite_node(grid_1d):
    with pytest.raises(SamplingError, match="x ="), np.errstate(divide="ignore"):
        sample(lambda x: 1.0 / x, grid_1d)


def test_convolution_matches_direct_sum(rng):
    g = GridSpec(3.0, 48, 1)
    k = sample(lambda x: np.exp(-4 * x * x), g)
    u = Field(g, rng.normal(size=g.shape))
    # oracle: periodic sum with the kernel centred on node n/2
    kc = np.roll(k.values, -g.n // 2)
    direct = np.array([sum(kc[(i - j) % g.n] * u.values[j] for j in range(g.n)) for i in range(g.n)]) * g.dx
    assert np.max(np.abs(convolve(k, u).values - direct)) < 1e-12


def test_convolution_2d_against_direct_sum(rng):
    g = GridSpec(2.0, 12, 2)
    k = sample(lambda x, y: np.exp(-(x * x + 2 * y * y)), g)
    u = Field(g, rng.normal(size=g.shape))
    kc = np.roll(k.values, (-6, -6), axis=(0, 1))
    n = g.n
    direct = np.zeros(g.shape)
    for i in range(n):
        for j in range(n):
            direct[i, j] = sum(
                kc[(i - p) % n, (j - q) % n] * u.values[p, q] for p in range(n) for q in range(n)
            )
    assert np.max(np.abs(convolve(k, u).values - direct * g.cell_volume)) < 1e-12


def test_multiplier_shifts_a_plane_wave(grid_1d):
    x = grid_1d.axis()
    freq = 3 / (2 * grid_1d.L)
    u = Field(grid_1d, np.cos(2 * np.pi * freq * x))
    out = apply_multiplier(lambda xi: np.exp(-(xi**2)), u)
    assert np.max(np.abs(out.values - np.exp(-(freq**2)) * u.values)) < 1e-13


def test_multiplier_must_be_finite(grid_1d):
    with pytest.raises(MultiplierError), np.errstate(divide="ignore"):
        apply_multiplier(lambda xi: 1.0 / xi, Field.zeros(grid_1d))


def test_norms(grid_1d):
    u = Field.zeros(grid_1d) + 2.0
    assert norm(u, 1) == pytest.approx(40.0)
    assert norm(u, 2) == pytest.approx(np.sqrt(80.0))
    assert norm(u, np.inf) == 2.0
    with pytest.raises(ValueError):
        norm(u, 3)


def test_shift_moves_by_whole_nodes(grid_1d):
    u = sample(lambda x: np.exp(-x * x), grid_1d)
    moved = shift(u, 5)
    assert moved.values[grid_1d.n // 2 + 5] == u.values[grid_1d.n // 2]


@settings(max_examples=25, deadline=None)
@given(
    n=st.sampled_from([2, 4, 8, 16]),
    d=st.sampled_from([1, 2]),
    L=st.floats(1e-3, 1e3),
    seed=st.integers(0, 2**31),
)
def test_serialization_round_trip(n, d, L, seed):
    g = GridSpec(L, n, d)
    u = Field(g, np.random.default_rng(seed).normal(size=g.shape))
    buf = field_to_bytes(u)
    assert len(buf) == 32 + 8 * n**d
    assert buf[:4] == b"NFLD"
    back = field_from_bytes(buf)
    assert back.spec == g
    assert np.array_equal(back.values, u.values)


def test_serialization_rejects_corrupt_data(tmp_path, grid_1d):
    u = Field.zeros(grid_1d)
    buf = field_to_bytes(u)
    with pytest.raises(ValueError):
        field_from_bytes(b"XXXX" + buf[4:])
    with pytest.raises(ValueError):
        field_from_bytes(buf[:-8])
    with pytest.raises(ValueError):
        field_from_bytes(buf[:10])
    path = save_field(tmp_path / "u.nfld", u)
    assert np.array_equal(load_field(path).values, u.values)
