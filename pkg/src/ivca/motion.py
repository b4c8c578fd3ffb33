"""Feature-domain motion estimation over energy maps.

For every block a window of ``window_n`` energies centred on the block is
compared (cosine similarity) against the reference map's window displaced by
``j`` blocks, horizontally within the block row and vertically within the
block column.  The best similarities feed a per-block attenuation factor
that discounts SAD caused by motion a codec predicts cheaply.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .energy import EnergyMap, normalizer
from .temporal import check_grids

QUANT_MAX = 65535


@dataclass(frozen=True)
class MeParams:
    window_n: int = 8
    search_range: int = 4
    quantize: bool = False

    def __post_init__(self):
        if self.window_n < 2 or self.window_n % 2:
            raise ValueError(f"window_n must be even and >= 2, got {self.window_n}")
        if self.search_range < 1:
            raise ValueError(f"search_range must be >= 1, got {self.search_range}")

    def offsets(self) -> list[int]:
        """Candidate offsets, smallest |j| first, negative before positive."""
        r = self.search_range
        return sorted(range(-r, r + 1), key=lambda j: (abs(j), j))


@dataclass(frozen=True)
class AttenuationMap:
    frame_index: int
    values: np.ndarray = field(repr=False)  # mu per block
    similarities: np.ndarray = field(repr=False)  # (B, 2): S_hor, S_ver
    offsets: np.ndarray = field(repr=False)  # (B, 2) best j per direction, 0 when none valid


def _cosine(a: np.ndarray, b: np.ndarray) -> float:
    na = math.sqrt(float(np.dot(a, a)))
    nb = math.sqrt(float(np.dot(b, b)))
    if na == 0.0 and nb == 0.0:
        return 1.0
    if na == 0.0 or nb == 0.0:
        return 0.0
    return min(1.0, max(0.0, float(np.dot(a, b)) / (na * nb)))


def _line_similarity(cur_line, ref_line, pos: int, params: MeParams) -> float:
    half = params.window_n // 2
    length = len(cur_line)
    idx = np.array([pos + half - i for i in range(params.window_n)])
    if idx.min() < 0 or idx.max() >= length:
        return 0.0
    best = 0.0
    for j in params.offsets():
        shifted = idx + j
        if shifted.min() < 0 or shifted.max() >= length:
            continue
        best = max(best, _cosine(cur_line[idx], ref_line[shifted]))
    return best


def _check_index(emap: EnergyMap, k: int) -> None:
    if not 0 <= k < emap.grid.block_count:
        raise IndexError(f"block index {k} out of range [0, {emap.grid.block_count})")


def horiz_similarity(current: EnergyMap, reference: EnergyMap, k: int, params: MeParams = MeParams()) -> float:
    check_grids(current, reference)
    _check_index(current, k)
    row, col = divmod(k, current.grid.blocks_per_row)
    return _line_similarity(current.as_rows()[row], reference.as_rows()[row], col, params)


def vert_similarity(current: EnergyMap, reference: EnergyMap, k: int, params: MeParams = MeParams()) -> float:
    check_grids(current, reference)
    _check_index(current, k)
    row, col = divmod(k, current.grid.blocks_per_row)
    return _line_similarity(current.as_rows()[:, col], reference.as_rows()[:, col], row, params)


def attenuation(s_hor: float, s_ver: float) -> float:
    if not (0.0 <= s_hor <= 1.0 and 0.0 <= s_ver <= 1.0):
        raise ValueError(f"similarities must lie in [0, 1], got ({s_hor}, {s_ver})")
    total = s_hor + s_ver
    if total <= 1.0:
        return 1.0 - total
    return 1.0 - max(s_hor, s_ver)


def attenuation_array(s_hor: np.ndarray, s_ver: np.ndarray) -> np.ndarray:
    total = s_hor + s_ver
    return np.where(total <= 1.0, 1.0 - total, 1.0 - np.maximum(s_hor, s_ver))


def _quantize(values: np.ndarray) -> np.ndarray:
    top = values.max(initial=0.0)
    if top <= 0:
        return np.zeros_like(values)
    return np.rint(values * (QUANT_MAX / top))


def _window_sums(a: np.ndarray, n: int) -> np.ndarray:
    """Sums of every length-n window along the last axis."""
    c = np.cumsum(a, axis=-1)
    out = c[..., n - 1:].copy()
    out[..., 1:] -= c[..., :-n]
    return out


def _row_similarities(cur: np.ndarray, ref: np.ndarray, params: MeParams):
    """Best similarity and offset for every position of every row of (rows, L) arrays."""
    rows, length = cur.shape
    n, half, r = params.window_n, params.window_n // 2, params.search_range
    best = np.zeros((rows, length))
    best_j = np.zeros((rows, length), dtype=np.int64)
    if length < n:
        return best, best_j
    starts = length - n + 1
    offsets = np.array(params.offsets())
    padded = np.pad(ref, ((0, 0), (r, r)))
    # products cur[x] * ref[x + j] for every offset at once: (rows, J, L)
    shifted = padded[:, np.arange(length)[None, :] + (offsets + r)[:, None]]
    dot = _window_sums(shifted * cur[:, None, :], n)  # (rows, J, starts); start s centres on s + half - 1
    cur_sq = _window_sums(cur * cur, n)[:, None, :]
    pos = np.arange(starts)[None, :] + offsets[:, None]
    ref_sq = _window_sums(padded * padded, n)[:, pos + r]
    valid = (pos >= 0) & (pos < starts)
    with np.errstate(divide="ignore", invalid="ignore"):
        if params.quantize:
            # squared cosine orders candidates identically and skips the roots
            sim = dot * dot / (cur_sq * ref_sq)
        else:
            sim = dot / np.sqrt(cur_sq * ref_sq)
    cur_zero, ref_zero = cur_sq == 0.0, ref_sq == 0.0
    sim = np.where(cur_zero | ref_zero, (cur_zero & ref_zero).astype(np.float64), sim)
    np.clip(sim, 0.0, 1.0, out=sim)
    sim[:, ~valid] = -1.0
    pick = np.argmax(sim, axis=1)  # first maximum: smallest |j| wins ties
    top = np.take_along_axis(sim, pick[:, None, :], axis=1)[:, 0, :]
    found = top >= 0.0
    centre = slice(half - 1, half - 1 + starts)
    best[:, centre] = np.where(found, top, 0.0)
    best_j[:, centre] = np.where(found, offsets[pick], 0)
    if params.quantize:
        np.sqrt(best, out=best)
    return best, best_j


def similarity_maps(current: EnergyMap, reference: EnergyMap, params: MeParams = MeParams()):
    """(S_hor, S_ver, j_hor, j_ver) as flat per-block arrays for the whole frame."""
    check_grids(current, reference)
    cur, ref = current.as_rows(), reference.as_rows()
    if params.quantize:
        cur, ref = _quantize(cur), _quantize(ref)
    s_hor, j_hor = _row_similarities(cur, ref, params)
    s_ver, j_ver = _row_similarities(np.ascontiguousarray(cur.T), np.ascontiguousarray(ref.T), params)
    return s_hor.ravel(), s_ver.T.ravel(), j_hor.ravel(), j_ver.T.ravel()


def attenuation_map(current: EnergyMap, reference: EnergyMap, params: MeParams = MeParams()) -> AttenuationMap:
    s_hor, s_ver, j_hor, j_ver = similarity_maps(current, reference, params)
    return AttenuationMap(
        current.frame_index,
        attenuation_array(s_hor, s_ver),
        np.stack([s_hor, s_ver], axis=1),
        np.stack([j_hor, j_ver], axis=1),
    )


def attenuated_temporal_feature(
    current: EnergyMap, reference: EnergyMap, params: MeParams = MeParams()
) -> tuple[float, AttenuationMap]:
    amap = attenuation_map(current, reference, params)
    sad = np.abs(current.values - reference.values)
    h = float(np.sum(amap.values * sad)) / normalizer(current.grid)
    return h, amap
