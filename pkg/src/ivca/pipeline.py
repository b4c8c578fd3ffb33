"""Per-clip analysis: energy maps -> temporal features -> complexity report."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Optional

import numpy as np

from .aggregate import ComplexityReport, FrameFeatures, build_report
from .energy import EnergyMap, energy_map, spatial_feature
from .gop import GopStructure, classify, select_reference
from .motion import MeParams, attenuated_temporal_feature
from .temporal import sad_map, temporal_feature
from .video_io import LumaPlane, VideoSpec, open_raw_yuv, open_y4m


@dataclass(frozen=True)
class Mode:
    name: str
    me: bool
    weighted: bool
    structural_ref: bool

    @property
    def h_variant(self) -> str:
        if self.me:
            return "me+ref" if self.structural_ref else "me"
        return "ref" if self.structural_ref else "baseline"


MODES = {
    m.name: m
    for m in (
        Mode("vca", me=False, weighted=False, structural_ref=False),
        Mode("vca+me", me=True, weighted=False, structural_ref=False),
        Mode("vca+weights", me=False, weighted=True, structural_ref=False),
        Mode("vca+me+weights", me=True, weighted=True, structural_ref=False),
        Mode("ivca", me=True, weighted=True, structural_ref=True),
    )
}


@dataclass
class AnalysisConfig:
    mode: str = "ivca"
    block_size: int = 32
    me: MeParams = field(default_factory=MeParams)
    gop: GopStructure = field(default_factory=GopStructure)
    heatmap_every: int = 0  # 0 disables diagnostic map capture

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}; choose from {', '.join(MODES)}")
        if self.heatmap_every < 0:
            raise ValueError("heatmap_every must be >= 0")

    def echo(self) -> dict:
        mode = MODES[self.mode]
        return {
            "mode": self.mode,
            "block_size": self.block_size,
            "me": {
                "enabled": mode.me,
                "window_n": self.me.window_n,
                "search_range": self.me.search_range,
                "quantize": self.me.quantize,
            },
            "gop": {
                "gop_size": self.gop.gop_size,
                "intra_period": self.gop.intra_period,
                "weights": list(self.gop.weights.as_tuple()),
            },
            "weighted": mode.weighted,
            "structural_reference": mode.structural_ref,
        }


@dataclass
class Diagnostics:
    """Per-block maps captured for heatmap output, keyed by poc."""

    grid: object = None
    sad: dict = field(default_factory=dict)
    mu: dict = field(default_factory=dict)


class ClipAnalyzer:
    """Streams luma planes and accumulates per-frame features for one clip."""

    def __init__(self, config: AnalysisConfig):
        self.config = config
        self.mode = MODES[config.mode]
        self.features: list[FrameFeatures] = []
        self.diagnostics = Diagnostics()
        self._maps: dict[int, EnergyMap] = {}
        self._pending: dict[int, list[int]] = {}  # reference poc -> waiting pocs

    def _reference_for(self, poc: int, frame_count: Optional[int] = None) -> int:
        if self.mode.structural_ref:
            return select_reference(poc, self.config.gop, frame_count)
        return poc - 1

    def _emit(self, poc: int, ref: int) -> None:
        cur, refmap = self._maps[poc], self._maps[ref]
        cls = classify(poc, self.config.gop)
        mu_mean = None
        mu = None
        if self.mode.me:
            h, amap = attenuated_temporal_feature(cur, refmap, self.config.me)
            mu = amap.values
            mu_mean = float(np.mean(mu))
        else:
            h = temporal_feature(cur, refmap)
        self.features.append(
            FrameFeatures(poc, cls, spatial_feature(cur), h, self.mode.h_variant, ref, mu_mean)
        )
        every = self.config.heatmap_every
        if every and poc % every == 0:
            self.diagnostics.grid = cur.grid
            self.diagnostics.sad[poc] = sad_map(cur, refmap).values
            if mu is not None:
                self.diagnostics.mu[poc] = mu

    def push(self, plane: LumaPlane) -> None:
        poc = plane.frame_index
        emap = energy_map(plane, self.config.block_size)
        self._maps[poc] = emap
        cls = classify(poc, self.config.gop)
        if cls.is_intra:
            self.features.append(FrameFeatures(poc, cls, spatial_feature(emap)))
        else:
            ref = self._reference_for(poc)
            if ref in self._maps:
                self._emit(poc, ref)
            else:
                self._pending.setdefault(ref, []).append(poc)
        for waiting in self._pending.pop(poc, []):
            self._emit(waiting, poc)
        self._evict(poc)

    def _evict(self, poc: int) -> None:
        horizon = poc - 2 * self.config.gop.gop_size
        keep = set(self._pending)
        keep.update(p for waiting in self._pending.values() for p in waiting)
        for old in [p for p in self._maps if p < horizon and p not in keep]:
            del self._maps[old]

    def finish(self, frame_count: int) -> list[FrameFeatures]:
        for waiting in [p for ps in self._pending.values() for p in ps]:
            self._emit(waiting, self._reference_for(waiting, frame_count))
        self._pending.clear()
        return sorted(self.features, key=lambda f: f.poc)


def analyze_planes(
    planes: Iterable[LumaPlane],
    config: AnalysisConfig = AnalysisConfig(),
    clip: str = "clip",
    clock: Callable[[], float] = time.perf_counter,
) -> tuple[ComplexityReport, Diagnostics]:
    """Analyse a stream of planes.  Timing spans decode plus feature extraction only."""
    analyzer = ClipAnalyzer(config)
    count = 0
    start = clock()
    for plane in planes:
        analyzer.push(plane)
        count += 1
    if count == 0:
        raise ValueError(f"{clip}: no frames to analyse")
    features = analyzer.finish(count)
    seconds = clock() - start
    report = build_report(clip, config.mode, features, config.gop.weights, config.echo(), seconds)
    return report, analyzer.diagnostics


def open_clip(path, raw_spec: Optional[VideoSpec] = None):
    """Plane iterator for a Y4M file, or a raw planar file when ``raw_spec`` is given."""
    if raw_spec is not None:
        return open_raw_yuv(path, raw_spec)
    _, frames = open_y4m(path)
    return frames


def analyze_file(path, config: AnalysisConfig = AnalysisConfig(), raw_spec: Optional[VideoSpec] = None, clip: Optional[str] = None):
    clip = clip or Path(path).stem
    return analyze_planes(open_clip(path, raw_spec), config, clip)

