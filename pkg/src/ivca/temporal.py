"""Temporal features: block-wise SAD between energy maps."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .energy import EnergyMap, normalizer
from .video_io import BlockGrid


class GridMismatchError(ValueError):
    pass


@dataclass(frozen=True)
class SadMap:
    frame_index: int
    reference_index: int
    grid: BlockGrid
    values: np.ndarray = field(repr=False)


def check_grids(current: EnergyMap, reference: EnergyMap) -> None:
    if current.grid != reference.grid:
        raise GridMismatchError(
            f"grid mismatch: frame {current.frame_index} has {current.grid.describe()}, "
            f"frame {reference.frame_index} has {reference.grid.describe()}"
        )


def sad_map(current: EnergyMap, reference: EnergyMap) -> SadMap:
    check_grids(current, reference)
    return SadMap(
        current.frame_index,
        reference.frame_index,
        current.grid,
        np.abs(current.values - reference.values),
    )


def temporal_feature(current: EnergyMap, reference: EnergyMap) -> float:
    """Per-pixel SAD between two energy maps.

    Works for both the previous-frame baseline and the structural reference:
    the caller picks which map is passed as ``reference``.
    """
    sad = sad_map(current, reference)
    return float(np.sum(sad.values)) / normalizer(current.grid)
