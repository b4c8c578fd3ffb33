import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ivca.video_io import (
    LumaPlane,
    VideoFormatError,
    VideoSpec,
    open_raw_yuv,
    open_y4m,
    partition,
    write_y4m,
)


def _y4m_bytes(header, frames, chroma=420):
    out = header.encode() + b"\n"
    for f in frames:
        h, w = f.shape
        csize = {420: ((w + 1) // 2) * ((h + 1) // 2), 422: ((w + 1) // 2) * h, 444: w * h}[chroma]
        out += b"FRAME\n" + f.astype(np.uint8).tobytes() + bytes(2 * csize)
    return out


def test_minimal_y4m_header(tmp_path, rng):
    frame = rng.integers(0, 256, (64, 64), dtype=np.uint8)
    path = tmp_path / "a.y4m"
    path.write_bytes(_y4m_bytes("YUV4MPEG2 W64 H64 F30:1 C420", [frame]))
    spec, planes = open_y4m(path)
    planes = list(planes)
    assert (spec.width, spec.height, spec.frame_rate, spec.bit_depth, spec.chroma_format) == (64, 64, 30, 8, 420)
    assert len(planes) == 1 and planes[0].samples.size == 4096
    np.testing.assert_array_equal(planes[0].samples, frame)


def test_y4m_frame_count_preserved(tmp_path, rng):
    frames = [rng.integers(0, 256, (16, 24), dtype=np.uint8) for _ in range(3)]
    path = tmp_path / "b.y4m"
    path.write_bytes(_y4m_bytes("YUV4MPEG2 W24 H16 F25:1 Ip A1:1 C444", frames, 444))
    _, planes = open_y4m(path)
    planes = list(planes)
    assert [p.frame_index for p in planes] == [0, 1, 2]
    for p, f in zip(planes, frames):
        np.testing.assert_array_equal(p.samples, f)


def test_y4m_truncated_frame_names_index(tmp_path, rng):
    frames = [rng.integers(0, 256, (16, 16), dtype=np.uint8) for _ in range(3)]
    data = _y4m_bytes("YUV4MPEG2 W16 H16 F30:1 C420", frames)
    path = tmp_path / "t.y4m"
    path.write_bytes(data[: len(data) - 200])  # cut inside frame 2
    _, planes = open_y4m(path)
    with pytest.raises(VideoFormatError, match="frame 2"):
        list(planes)


@pytest.mark.parametrize("tag,chroma", [("C420jpeg", 420), ("C420mpeg2", 420), ("C422", 422), ("", 420)])
def test_y4m_colorspaces(tmp_path, tag, chroma):
    frame = np.full((8, 8), 7, np.uint8)
    path = tmp_path / "c.y4m"
    path.write_bytes(_y4m_bytes(f"YUV4MPEG2 W8 H8 F30000:1001 {tag}".strip(), [frame, frame], chroma))
    spec, planes = open_y4m(path)
    assert spec.chroma_format == chroma
    assert spec.frame_rate == pytest.approx(29.97, abs=1e-2)
    assert len(list(planes)) == 2


@pytest.mark.parametrize(
    "header,match",
    [
        ("YUV4MPEG2 W8 H8 F30:1 Cmono", "colorspace"),
        ("YUV4MPEG2 W8 H8 F30:1 C420p10", "colorspace"),
        ("YUV4MPEG2 W8 F30:1", "W or H"),
        ("YUV4MPEG W8 H8", "signature"),
        ("YUV4MPEG2 Wx H8", "malformed"),
    ],
)
def test_y4m_bad_headers(tmp_path, header, match):
    path = tmp_path / "bad.y4m"
    path.write_bytes(header.encode() + b"\n")
    with pytest.raises(VideoFormatError, match=match):
        open_y4m(path)


def test_y4m_bad_frame_marker(tmp_path):
    path = tmp_path / "m.y4m"
    path.write_bytes(b"YUV4MPEG2 W4 H4 C444\nFRAMX\n" + bytes(48))
    _, planes = open_y4m(path)
    with pytest.raises(VideoFormatError, match="frame 0"):
        list(planes)


def test_raw_frame_arithmetic(tmp_path):
    spec = VideoSpec(64, 64)
    assert spec.frame_size == 6144
    path = tmp_path / "r.yuv"
    path.write_bytes(bytes(18432))
    assert len(list(open_raw_yuv(path, spec))) == 3


def test_raw_empty_file(tmp_path):
    path = tmp_path / "e.yuv"
    path.write_bytes(b"")
    assert list(open_raw_yuv(path, VideoSpec(64, 64))) == []


def test_raw_size_mismatch(tmp_path):
    path = tmp_path / "o.yuv"
    path.write_bytes(bytes(6145))
    with pytest.raises(VideoFormatError, match="6145.*6144"):
        open_raw_yuv(path, VideoSpec(64, 64))


def test_raw_round_trip(tmp_path, rng):
    spec = VideoSpec(30, 18, chroma_format=420)
    data = rng.integers(0, 256, spec.frame_size * 4, dtype=np.uint8).tobytes()
    path = tmp_path / "rt.yuv"
    path.write_bytes(data)
    luma = b"".join(p.samples.tobytes() for p in open_raw_yuv(path, spec))
    expected = b"".join(data[i * spec.frame_size: i * spec.frame_size + spec.luma_size] for i in range(4))
    assert luma == expected


def test_write_y4m_round_trip(tmp_path, rng):
    frames = [rng.integers(0, 256, (20, 36), dtype=np.uint8) for _ in range(2)]
    spec = VideoSpec(36, 20)
    write_y4m(tmp_path / "w.y4m", [LumaPlane(spec, f, i) for i, f in enumerate(frames)], spec)
    _, planes = open_y4m(tmp_path / "w.y4m")
    for p, f in zip(planes, frames):
        np.testing.assert_array_equal(p.samples, f)


def test_spec_rejects_invalid():
    with pytest.raises(VideoFormatError):
        VideoSpec(0, 10)
    with pytest.raises(VideoFormatError, match="bit depth"):
        VideoSpec(10, 10, bit_depth=10)


def test_planes_are_immutable(rng):
    plane = LumaPlane.from_array(rng.integers(0, 256, (8, 8)))
    with pytest.raises(ValueError):
        plane.samples[0, 0] = 1


@pytest.mark.parametrize("width,height,w,grid", [(64, 64, 32, (2, 2, 4)), (100, 60, 32, (4, 2, 8))])
def test_partition_geometry(width, height, w, grid):
    parts = partition(LumaPlane.from_array(np.zeros((height, width))), w)
    g = parts.grid
    assert (g.blocks_per_row, g.blocks_per_col, g.block_count) == grid
    assert parts.tiles.shape == (g.block_count, w, w)


def test_partition_constant_padding():
    parts = partition(LumaPlane.from_array(np.full((60, 100), 77)), 32)
    assert np.all(parts.tile(7) == 77)


def test_partition_rejects_bad_block_sizes():
    plane = LumaPlane.from_array(np.zeros((16, 16)))
    for w in (2, 12, 0):
        with pytest.raises(ValueError, match="power of two"):
            partition(plane, w)
    with pytest.raises(ValueError, match="exceeds"):
        partition(plane, 32)
    partition(LumaPlane.from_array(np.zeros((8, 40))), 32)  # wider than tall is fine
    with pytest.raises(IndexError):
        partition(plane, 8).tile(4)


@settings(max_examples=60, deadline=None)
@given(
    width=st.integers(4, 70),
    height=st.integers(4, 70),
    logw=st.integers(2, 4),
    seed=st.integers(0, 2**32 - 1),
)
def test_partition_coverage_and_padding(width, height, logw, seed):
    w = 1 << logw
    if w > width and w > height:
        return
    frame = np.random.default_rng(seed).integers(0, 256, (height, width), dtype=np.uint8)
    parts = partition(LumaPlane.from_array(frame), w)
    g = parts.grid
    owner = np.zeros((height, width), dtype=int)
    for k in range(g.block_count):
        r, c = divmod(k, g.blocks_per_row)
        y0, x0 = r * w, c * w
        tile = parts.tile(k)
        ys, xs = slice(y0, min(y0 + w, height)), slice(x0, min(x0 + w, width))
        owner[ys, xs] += 1
        inside = tile[: ys.stop - y0, : xs.stop - x0]
        np.testing.assert_array_equal(inside, frame[ys, xs])
        # padding replicates the last row / column
        np.testing.assert_array_equal(tile[:, xs.stop - x0 - 1:], np.repeat(tile[:, xs.stop - x0 - 1:xs.stop - x0], w - (xs.stop - x0) + 1, axis=1))
    assert np.all(owner == 1)
