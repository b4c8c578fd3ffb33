import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ivca.energy import EnergyMap, block_energy, block_energies, dct2d, energy_map, spatial_feature
from ivca.video_io import BlockGrid, LumaPlane
from oracles import dct_direct, energy_direct


def test_dct_zero_tile():
    assert np.all(dct2d(np.zeros((8, 8))) == 0)


def test_dct_constant_tile_dc():
    coeffs = dct2d(np.full((8, 8), 3.0))
    assert coeffs[0, 0] == pytest.approx(8 * 3.0, abs=1e-12)
    coeffs[0, 0] = 0
    assert np.abs(coeffs).max() < 1e-12


@pytest.mark.parametrize("w", [4, 8])
def test_dct_matches_direct_sum(rng, w):
    tile = rng.integers(0, 256, (w, w)).astype(float)
    np.testing.assert_allclose(dct2d(tile), dct_direct(tile), atol=1e-9)


def test_dct_rejects_non_square():
    with pytest.raises(ValueError):
        dct2d(np.zeros((4, 8)))


def test_energy_zero_tile():
    assert block_energy(np.zeros((8, 8))) == 0.0


def test_energy_constant_one_tile():
    # only DC survives: DCT(0,0) = 8, weight exp(|0 - 1|) = e
    assert block_energy(np.ones((8, 8))) == pytest.approx(8 * math.e, rel=1e-12)
    assert energy_direct(np.ones((8, 8))) == pytest.approx(8 * math.e, rel=1e-12)


def test_energy_random_tile_matches_oracle(rng):
    tile = rng.integers(0, 256, (4, 4))
    assert block_energy(tile) == pytest.approx(energy_direct(tile), rel=1e-9)


def test_batched_energies_match_single(rng):
    tiles = rng.integers(0, 256, (10, 8, 8))
    np.testing.assert_allclose(block_energies(tiles), [block_energy(t) for t in tiles], rtol=1e-12)


@pytest.mark.parametrize("c", [1, 17, 255])
def test_dc_weight_ratio(c):
    tile = np.full((16, 16), c)
    assert block_energy(tile) / abs(dct2d(tile)[0, 0]) == pytest.approx(math.e, abs=1e-12)


def test_energy_map_constant_frame():
    emap = energy_map(LumaPlane.from_array(np.full((64, 96), 40)), 32)
    assert emap.values.shape == (6,)
    assert np.ptp(emap.values) == 0


def test_energy_map_textured_block_is_largest(rng):
    frame = np.full((64, 64), 128, dtype=np.uint8)
    frame[32:, :32] = rng.integers(0, 256, (32, 32))
    emap = energy_map(LumaPlane.from_array(frame), 32)
    assert len(emap.values) == 4
    assert np.argmax(emap.values) == 2
    assert emap.values[2] > max(np.delete(emap.values, 2))
    assert emap.values[2] == pytest.approx(block_energy(frame[32:, :32]), rel=1e-12)


def test_spatial_feature_examples(rng):
    grid = BlockGrid(32, 4, 2)
    assert spatial_feature(EnergyMap(0, grid, np.zeros(8))) == 0.0
    assert spatial_feature(EnergyMap(0, grid, np.full(8, 5.0))) == pytest.approx(5.0 / 32**2, rel=1e-15)
    values = rng.random(8) * 1e4
    expected = sum(values) / (8 * 32 * 32)
    assert spatial_feature(EnergyMap(0, grid, values)) == pytest.approx(expected, rel=1e-12)


def test_energy_map_length_checked():
    with pytest.raises(ValueError, match="needs 4"):
        EnergyMap(0, BlockGrid(32, 2, 2), np.zeros(3))


@settings(max_examples=50, deadline=None)
@given(
    logw=st.integers(2, 5),
    amplitude=st.floats(1, 120),
    mean=st.integers(60, 190),
    seed=st.integers(0, 2**32 - 1),
)
def test_noise_beats_constant(logw, amplitude, mean, seed):
    w = 1 << logw
    rng = np.random.default_rng(seed)
    noise = np.clip(np.rint(mean + rng.normal(0, amplitude, (2 * w, 2 * w))), 0, 255)
    const = np.full_like(noise, round(noise.mean()))
    e_noise = spatial_feature(energy_map(LumaPlane.from_array(noise), w))
    e_const = spatial_feature(energy_map(LumaPlane.from_array(const), w))
    assert e_noise > e_const >= 0


@settings(max_examples=50, deadline=None)
@given(st.lists(st.integers(0, 255), min_size=64, max_size=64))
def test_energy_nonnegative(values):
    assert block_energy(np.array(values).reshape(8, 8)) >= 0
