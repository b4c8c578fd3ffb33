"""Correlation of estimated complexity against encoder bitrate, and helpers."""

from __future__ import annotations

import csv
import itertools
import math
import os
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .gop import LayerWeights


DEFAULT_GRID = (0.0, 0.0001, 0.0005, 0.001, 0.005, 0.01, 0.04, 0.11, 0.5, 1.0)
TIE_TOLERANCE = 1e-12


class EvaluationError(ValueError):
    pass


@dataclass(frozen=True)
class BitrateRecord:
    clip: str
    bitrate: float
    note: str = ""

    def __post_init__(self):
        if not self.bitrate > 0:
            raise EvaluationError(f"clip {self.clip!r}: bitrate must be positive, got {self.bitrate}")


@dataclass(frozen=True)
class CorrelationResult:
    pcc: float
    slope: float
    intercept: float
    n: int


def _series(xs, ys) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(xs, dtype=np.float64)
    y = np.asarray(ys, dtype=np.float64)
    if x.ndim != 1 or x.shape != y.shape:
        raise EvaluationError(f"series length mismatch: {x.size} vs {y.size}")
    if x.size < 2:
        raise EvaluationError("need at least two samples")
    if np.ptp(x) == 0 or np.ptp(y) == 0:
        raise EvaluationError("correlation undefined for a constant series")
    return x, y


def pearson(xs: Sequence[float], ys: Sequence[float]) -> float:
    x, y = _series(xs, ys)
    dx = x - x.mean()
    dy = y - y.mean()
    r = float(np.dot(dx, dy) / math.sqrt(float(np.dot(dx, dx)) * float(np.dot(dy, dy))))
    return max(-1.0, min(1.0, r))


def linear_fit(xs: Sequence[float], ys: Sequence[float]) -> tuple[float, float]:
    """Least-squares slope and intercept of ys on xs."""
    x, y = _series(xs, ys)
    dx = x - x.mean()
    slope = float(np.dot(dx, y - y.mean()) / np.dot(dx, dx))
    return slope, float(y.mean() - slope * x.mean())


def correlate(xs, ys) -> CorrelationResult:
    slope, intercept = linear_fit(xs, ys)
    return CorrelationResult(pearson(xs, ys), slope, intercept, len(xs))


def _pcc_rows(cs: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Pearson correlation of every row of ``cs`` against ``y``; NaN where a row is constant."""
    dc = cs - cs.mean(axis=1, keepdims=True)
    dy = y - y.mean()
    var = np.einsum("tn,tn->t", dc, dc)
    cov = dc @ dy
    with np.errstate(divide="ignore", invalid="ignore"):
        r = cov / np.sqrt(var * np.dot(dy, dy))
    spread = np.ptp(cs, axis=1)
    r[spread <= 1e-15 * np.maximum(np.abs(cs).max(axis=1), 1e-300)] = np.nan
    return np.clip(r, -1.0, 1.0)


def calibrate_weights(
    components: Sequence[Sequence[float]],
    bitrates: Sequence[float],
    grid: Sequence[Sequence[float]] | Sequence[float] = DEFAULT_GRID,
    chunk: int = 65536,
) -> tuple[LayerWeights, float]:
    """Exhaustive grid search for layer weights maximising PCC against bitrate.

    ``components`` holds per-clip (sum E intra, sum h L0, sum h L1, sum h L2).
    ``grid`` is either one axis shared by all four weights or four axes.
    Weight tuples that make every clip's complexity equal are skipped.
    Ties (within 1e-12) go to the lexicographically smallest tuple.
    Returns the weights and the PCC they achieve.
    """
    comps = np.asarray(components, dtype=np.float64)
    y = np.asarray(bitrates, dtype=np.float64)
    if comps.ndim != 2 or comps.shape[1] != 4:
        raise EvaluationError("components must be an (n_clips, 4) table")
    if comps.shape[0] != y.size:
        raise EvaluationError(f"{comps.shape[0]} component rows but {y.size} bitrates")
    if y.size < 2:
        raise EvaluationError("calibration needs at least two clips")
    if np.ptp(y) == 0:
        raise EvaluationError("bitrates are constant; correlation undefined")
    axes = _grid_axes(grid)

    # product() over sorted axes is lexicographic, so the first near-maximal
    # tuple seen is the lexicographically smallest among ties
    best_r, best_t = -math.inf, None
    tuples = itertools.product(*axes)
    while True:
        block = np.array(list(itertools.islice(tuples, chunk)), dtype=np.float64)
        if block.size == 0:
            break
        r = _pcc_rows(block @ comps.T, y)
        if np.isnan(r).all():
            continue
        top = np.nanmax(r)
        if top > best_r + TIE_TOLERANCE:
            first = int(np.argmax(np.nan_to_num(r, nan=-math.inf) >= top - TIE_TOLERANCE))
            best_t = tuple(float(v) for v in block[first])
        best_r = max(best_r, top)
    if best_t is None:
        raise EvaluationError("every weight tuple on the grid gives constant complexity")

    scaled = _pcc_rows(2.0 * np.array([best_t]) @ comps.T, y)[0]
    if not abs(scaled - best_r) <= 1e-9:
        raise AssertionError(f"PCC not invariant to weight scaling: {best_r} vs {scaled}")
    return LayerWeights(*best_t), float(best_r)


def _grid_axes(grid) -> list[list[float]]:
    grid = list(grid)
    if grid and all(isinstance(g, (int, float)) for g in grid):
        axes = [sorted(set(float(g) for g in grid))] * 4
    else:
        axes = [sorted(set(float(v) for v in axis)) for axis in grid]
    if len(axes) != 4:
        raise EvaluationError(f"expected one shared axis or four axes, got {len(axes)}")
    if any(len(axis) == 0 for axis in axes):
        raise EvaluationError("every grid axis needs at least one value")
    return axes


def read_bitrates(path) -> list[BitrateRecord]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"clip", "bitrate"} <= set(reader.fieldnames):
            raise EvaluationError(f"{path}: expected header 'clip,bitrate'")
        records = []
        for row in reader:
            try:
                rate = float(row["bitrate"])
            except (TypeError, ValueError):
                raise EvaluationError(f"{path}: bad bitrate {row['bitrate']!r} for {row['clip']!r}") from None
            records.append(BitrateRecord(row["clip"].strip(), rate, row.get("note") or ""))
    seen = set()
    for rec in records:
        if rec.clip in seen:
            raise EvaluationError(f"{path}: duplicate clip id {rec.clip!r}")
        seen.add(rec.clip)
    return records


def join_bitrates(values: Mapping[str, object], records: Sequence[BitrateRecord]) -> list[tuple[str, object, float]]:
    """Match bitrate rows to analysed clips by id, sorted by clip id."""
    missing = sorted(r.clip for r in records if r.clip not in values)
    if missing:
        raise EvaluationError(f"no report for clip(s): {', '.join(missing)}")
    return sorted((r.clip, values[r.clip], r.bitrate) for r in records)


def correlation_report(complexities: Mapping[str, float], records: Sequence[BitrateRecord]) -> dict:
    rows = join_bitrates(complexities, records)
    result = correlate([c for _, c, _ in rows], [b for _, _, b in rows])
    return {
        "pcc": result.pcc,
        "slope": result.slope,
        "intercept": result.intercept,
        "n": result.n,
        "per_clip": [{"clip": c, "complexity": x, "bitrate": b} for c, x, b in rows],
    }


def heatmap_pixels(values) -> np.ndarray:
    v = np.asarray(values, dtype=np.float64)
    lo, hi = v.min(), v.max()
    if hi == lo:
        return np.full(v.shape, 128, dtype=np.uint8)
    return np.rint((v - lo) * (255.0 / (hi - lo))).astype(np.uint8)


def emit_heatmap(values, grid, path) -> None:
    """Write per-block values as a binary PGM, one pixel per block, min-max scaled."""
    values = np.asarray(values, dtype=np.float64)
    if values.size != grid.block_count:
        raise ValueError(f"{values.size} values for {grid.block_count} blocks")
    pixels = heatmap_pixels(values).reshape(grid.blocks_per_col, grid.blocks_per_row)
    try:
        with open(path, "wb") as fh:
            fh.write(f"P5\n{grid.blocks_per_row} {grid.blocks_per_col}\n255\n".encode("ascii"))
            fh.write(pixels.tobytes())
    except OSError as exc:
        raise OSError(f"cannot write heatmap {os.fspath(path)}: {exc.strerror}") from exc


def read_pgm(path) -> np.ndarray:
    with open(path, "rb") as fh:
        data = fh.read()
    tokens = []
    pos = 0
    while len(tokens) < 4:
        while data[pos:pos + 1].isspace():
            pos += 1
        if data[pos:pos + 1] == b"#":
            pos = data.index(b"\n", pos) + 1
            continue
        end = pos
        while not data[end:end + 1].isspace():
            end += 1
        tokens.append(data[pos:end])
        pos = end
    if tokens[0] != b"P5":
        raise ValueError(f"{path}: not a binary PGM")
    width, height, maxval = (int(t) for t in tokens[1:])
    if maxval > 255:
        raise ValueError(f"{path}: 16-bit PGM not supported")
    pos += 1
    return np.frombuffer(data[pos:pos + width * height], dtype=np.uint8).reshape(height, width)


def measure_fps(frames: int, seconds: float) -> float:
    if frames < 1:
        raise ValueError("at least one frame must be analysed")
    if seconds <= 0:
        raise ValueError("elapsed time must be positive")
    return frames / seconds
