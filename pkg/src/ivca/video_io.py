"""Luma ingestion from Y4M / planar YUV files and block partitioning."""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from typing import BinaryIO, Iterator

import numpy as np

Y4M_MAGIC = b"YUV4MPEG2"
FRAME_TAG = b"FRAME"

# Y4M colorspace tag -> chroma format
Y4M_COLORSPACES = {
    "420": 420,
    "420jpeg": 420,
    "420mpeg2": 420,
    "420paldv": 420,
    "422": 422,
    "444": 444,
}


class VideoFormatError(ValueError):
    """Raised for malformed or unsupported video input."""


@dataclass(frozen=True)
class VideoSpec:
    width: int
    height: int
    frame_rate: float = 30.0
    bit_depth: int = 8
    chroma_format: int = 420

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise VideoFormatError(f"invalid dimensions {self.width}x{self.height}")
        if self.bit_depth != 8:
            raise VideoFormatError(f"unsupported bit depth {self.bit_depth} (8-bit only)")
        if self.chroma_format not in (420, 422, 444):
            raise VideoFormatError(f"unsupported chroma format {self.chroma_format}")

    @property
    def luma_size(self) -> int:
        return self.width * self.height

    @property
    def chroma_size(self) -> int:
        """Bytes of one chroma plane."""
        if self.chroma_format == 420:
            return ((self.width + 1) // 2) * ((self.height + 1) // 2)
        if self.chroma_format == 422:
            return ((self.width + 1) // 2) * self.height
        return self.width * self.height

    @property
    def frame_size(self) -> int:
        return self.luma_size + 2 * self.chroma_size


@dataclass(frozen=True)
class LumaPlane:
    spec: VideoSpec
    samples: np.ndarray  # (height, width) uint8, read-only
    frame_index: int = 0

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.uint8)
        if samples.size != self.spec.luma_size:
            raise VideoFormatError(
                f"plane has {samples.size} samples, expected {self.spec.luma_size}"
            )
        samples = samples.reshape(self.spec.height, self.spec.width)
        if samples.flags.writeable:
            samples = samples.copy()
            samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)

    @classmethod
    def from_array(cls, array, frame_index: int = 0, frame_rate: float = 30.0) -> "LumaPlane":
        array = np.asarray(array)
        spec = VideoSpec(width=array.shape[1], height=array.shape[0], frame_rate=frame_rate)
        return cls(spec, array, frame_index)


@dataclass(frozen=True)
class BlockGrid:
    block_size: int
    blocks_per_row: int
    blocks_per_col: int

    @property
    def block_count(self) -> int:
        return self.blocks_per_row * self.blocks_per_col

    @classmethod
    def for_frame(cls, width: int, height: int, block_size: int) -> "BlockGrid":
        return cls(block_size, math.ceil(width / block_size), math.ceil(height / block_size))

    def describe(self) -> str:
        return f"{self.blocks_per_row}x{self.blocks_per_col} blocks of {self.block_size}px"


@dataclass(frozen=True)
class Partition:
    """A frame split into edge-padded w x w tiles in raster order."""

    grid: BlockGrid
    tiles: np.ndarray = field(repr=False)  # (B, w, w)

    def tile(self, k: int) -> np.ndarray:
        if not 0 <= k < self.grid.block_count:
            raise IndexError(f"block index {k} out of range [0, {self.grid.block_count})")
        return self.tiles[k]


def check_block_size(w: int) -> None:
    if w < 4 or w & (w - 1):
        raise ValueError(f"block size must be a power of two >= 4, got {w}")


def partition(plane: LumaPlane, w: int = 32) -> Partition:
    check_block_size(w)
    height, width = plane.samples.shape
    if w > width and w > height:
        raise ValueError(f"block size {w} exceeds both frame dimensions {width}x{height}")
    grid = BlockGrid.for_frame(width, height, w)
    pad_h = grid.blocks_per_col * w - height
    pad_w = grid.blocks_per_row * w - width
    samples = plane.samples
    if pad_h or pad_w:
        samples = np.pad(samples, ((0, pad_h), (0, pad_w)), mode="edge")
    tiles = (
        samples.reshape(grid.blocks_per_col, w, grid.blocks_per_row, w)
        .swapaxes(1, 2)
        .reshape(grid.block_count, w, w)
    )
    return Partition(grid, tiles)


def _parse_frame_rate(value: str) -> float:
    num, _, den = value.partition(":")
    try:
        num_f = float(num)
        den_f = float(den) if den else 1.0
    except ValueError:
        raise VideoFormatError(f"malformed frame rate {value!r}") from None
    if den_f == 0:
        raise VideoFormatError(f"malformed frame rate {value!r}")
    return num_f / den_f


def parse_y4m_header(line: bytes) -> VideoSpec:
    tokens = line.rstrip(b"\n").split(b" ")
    if not tokens or tokens[0] != Y4M_MAGIC:
        raise VideoFormatError("missing YUV4MPEG2 signature")
    width = height = None
    frame_rate = 30.0
    chroma = 420
    for raw in tokens[1:]:
        if not raw:
            continue
        token = raw.decode("ascii", errors="replace")
        key, value = token[0], token[1:]
        try:
            if key == "W":
                width = int(value)
            elif key == "H":
                height = int(value)
        except ValueError:
            raise VideoFormatError(f"malformed header token {token!r}") from None
        if key == "F":
            frame_rate = _parse_frame_rate(value)
        elif key == "C":
            if value not in Y4M_COLORSPACES:
                raise VideoFormatError(f"unsupported colorspace tag C{value}")
            chroma = Y4M_COLORSPACES[value]
    if width is None or height is None:
        raise VideoFormatError("Y4M header lacks W or H")
    return VideoSpec(width=width, height=height, frame_rate=frame_rate, chroma_format=chroma)


def _read_exact(fh: BinaryIO, n: int) -> bytes:
    buf = fh.read(n)
    while len(buf) < n:
        more = fh.read(n - len(buf))
        if not more:
            break
        buf += more
    return buf


class Y4MReader:
    """Iterates luma planes of a Y4M file; chroma is skipped.

    The header is parsed on construction so ``spec`` is available before
    iteration starts.
    """

    def __init__(self, path):
        self.path = os.fspath(path)
        self._fh = open(self.path, "rb")
        try:
            header = self._fh.readline(4096)
            if not header.endswith(b"\n"):
                raise VideoFormatError(f"{self.path}: malformed Y4M header")
            self.spec = parse_y4m_header(header)
        except Exception:
            self._fh.close()
            raise

    def __iter__(self) -> Iterator[LumaPlane]:
        spec = self.spec
        chroma_bytes = 2 * spec.chroma_size
        index = 0
        try:
            while True:
                line = self._fh.readline(4096)
                if not line:
                    return
                if not line.startswith(FRAME_TAG) or not line.endswith(b"\n"):
                    raise VideoFormatError(f"{self.path}: bad FRAME marker at frame {index}")
                luma = _read_exact(self._fh, spec.luma_size)
                if len(luma) < spec.luma_size:
                    raise VideoFormatError(f"{self.path}: truncated payload in frame {index}")
                if len(_read_exact(self._fh, chroma_bytes)) < chroma_bytes:
                    raise VideoFormatError(f"{self.path}: truncated payload in frame {index}")
                yield LumaPlane(spec, np.frombuffer(luma, dtype=np.uint8), index)
                index += 1
        finally:
            self._fh.close()

    def close(self):
        self._fh.close()


def open_y4m(path) -> tuple[VideoSpec, Iterator[LumaPlane]]:
    reader = Y4MReader(path)
    return reader.spec, iter(reader)


def open_raw_yuv(path, spec: VideoSpec) -> Iterator[LumaPlane]:
    """Yield luma planes of a headerless planar YUV file.

    The size check happens eagerly so a mismatched file fails before any
    frame is produced.
    """
    path = os.fspath(path)
    size = os.path.getsize(path)
    if size % spec.frame_size:
        raise VideoFormatError(
            f"{path}: file size {size} is not a multiple of frame size {spec.frame_size}"
        )
    return _iter_raw(path, spec, size // spec.frame_size)


def _iter_raw(path: str, spec: VideoSpec, count: int) -> Iterator[LumaPlane]:
    with open(path, "rb") as fh:
        for index in range(count):
            luma = _read_exact(fh, spec.luma_size)
            fh.seek(2 * spec.chroma_size, os.SEEK_CUR)
            yield LumaPlane(spec, np.frombuffer(luma, dtype=np.uint8), index)


def write_y4m(path, planes, spec: VideoSpec) -> None:
    """Write luma planes as a Y4M file with mid-gray chroma (test fixtures, demos)."""
    tag = {420: "420jpeg", 422: "422", 444: "444"}[spec.chroma_format]
    rate = f"{int(spec.frame_rate)}:1" if float(spec.frame_rate).is_integer() else f"{spec.frame_rate}:1"
    chroma = bytes([128]) * (2 * spec.chroma_size)
    with open(path, "wb") as fh:
        fh.write(f"YUV4MPEG2 W{spec.width} H{spec.height} F{rate} Ip A1:1 C{tag}\n".encode())
        for plane in planes:
            samples = plane.samples if isinstance(plane, LumaPlane) else np.asarray(plane, np.uint8)
            fh.write(FRAME_TAG + b"\n")
            fh.write(np.ascontiguousarray(samples, dtype=np.uint8).tobytes())
            fh.write(chroma)
