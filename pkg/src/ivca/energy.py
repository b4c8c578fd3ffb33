"""DCT texture energy per block and the frame-level spatial feature."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.fft import dctn

from .video_io import BlockGrid, LumaPlane, partition


@dataclass(frozen=True)
class EnergyMap:
    frame_index: int
    grid: BlockGrid
    values: np.ndarray = field(repr=False)  # (B,) float64, raster order

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.shape != (self.grid.block_count,):
            raise ValueError(
                f"energy map has {values.size} values, grid {self.grid.describe()} "
                f"needs {self.grid.block_count}"
            )
        object.__setattr__(self, "values", values)

    def as_rows(self) -> np.ndarray:
        """Values reshaped to (blocks_per_col, blocks_per_row)."""
        return self.values.reshape(self.grid.blocks_per_col, self.grid.blocks_per_row)


@lru_cache(maxsize=16)
def energy_weights(w: int) -> np.ndarray:
    """exp(|(i*j/w^2)^2 - 1|) for every coefficient position (i, j)."""
    i = np.arange(w, dtype=np.float64)
    ratio = np.outer(i, i) / (w * w)
    weights = np.exp(np.abs(ratio**2 - 1.0))
    weights.setflags(write=False)
    return weights


def dct2d(tile) -> np.ndarray:
    """Orthonormal type-II 2-D DCT. Accepts a single tile or a stack (..., w, w)."""
    tile = np.asarray(tile, dtype=np.float64)
    if tile.ndim < 2 or tile.shape[-1] != tile.shape[-2]:
        raise ValueError(f"expected square tiles, got shape {tile.shape}")
    return dctn(tile, type=2, norm="ortho", axes=(-2, -1))


def block_energy(tile) -> float:
    tile = np.asarray(tile, dtype=np.float64)
    coeffs = dct2d(tile)
    return float(np.sum(energy_weights(tile.shape[-1]) * np.abs(coeffs)))


def block_energies(tiles) -> np.ndarray:
    """Vectorised block_energy over a (B, w, w) stack."""
    tiles = np.asarray(tiles, dtype=np.float64)
    coeffs = dct2d(tiles)
    np.abs(coeffs, out=coeffs)
    return np.einsum("bij,ij->b", coeffs, energy_weights(tiles.shape[-1]))


def energy_map(plane: LumaPlane, w: int = 32) -> EnergyMap:
    parts = partition(plane, w)
    return EnergyMap(plane.frame_index, parts.grid, block_energies(parts.tiles))


def normalizer(grid: BlockGrid) -> float:
    """Per-pixel normalisation B * w^2 shared by the spatial and temporal features."""
    return float(grid.block_count * grid.block_size**2)


def spatial_feature(emap: EnergyMap) -> float:
    if emap.grid.block_count == 0:
        raise ValueError("empty energy map")
    return float(np.sum(emap.values)) / normalizer(emap.grid)
