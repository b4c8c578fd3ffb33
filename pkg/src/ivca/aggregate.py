"""Sequence-level complexity from per-frame features, plus report I/O."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .gop import FrameClass, LayerWeights


@dataclass
class FrameFeatures:
    poc: int
    frame_class: FrameClass
    E: float
    h: Optional[float] = None
    h_variant: str = "baseline"
    reference: Optional[int] = None
    mu_mean: Optional[float] = None

    def __post_init__(self):
        if self.frame_class.is_intra and self.h is not None:
            raise ValueError(f"intra frame {self.poc} cannot carry a temporal feature")
        if not self.frame_class.is_intra and self.h is None:
            raise ValueError(f"inter frame {self.poc} lacks a temporal feature")

    def to_dict(self) -> dict:
        return {
            "poc": self.poc,
            "kind": self.frame_class.kind,
            "layer": self.frame_class.layer,
            "reference": self.reference,
            "E": self.E,
            "h": self.h,
            "h_variant": self.h_variant,
            "mu_mean": self.mu_mean,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FrameFeatures":
        return cls(
            poc=d["poc"],
            frame_class=FrameClass(d["kind"], d.get("layer")),
            E=d["E"],
            h=d.get("h"),
            h_variant=d.get("h_variant", "baseline"),
            reference=d.get("reference"),
            mu_mean=d.get("mu_mean"),
        )


def complexity_baseline(features: Sequence[FrameFeatures]) -> float:
    if not features:
        raise ValueError("no frame features to aggregate")
    return math.fsum(f.E if f.frame_class.is_intra else f.h for f in features)


def layer_components(features: Sequence[FrameFeatures]) -> tuple[float, float, float, float]:
    """(sum E over intra, sum h over layer 0, layer 1, layer >= 2)."""
    buckets = [[], [], [], []]
    for f in features:
        if f.frame_class.is_intra:
            buckets[0].append(f.E)
        else:
            if f.frame_class.layer is None:
                raise ValueError(f"inter frame {f.poc} has no layer")
            buckets[1 + min(f.frame_class.layer, 2)].append(f.h)
    return tuple(math.fsum(b) for b in buckets)


def complexity_layered(features: Sequence[FrameFeatures], weights: LayerWeights = LayerWeights()) -> float:
    if not features:
        raise ValueError("no frame features to aggregate")
    comps = layer_components(features)
    return math.fsum(w * c for w, c in zip(weights.as_tuple(), comps))


@dataclass
class ComplexityReport:
    clip: str
    mode: str
    per_frame: list
    C_baseline: float
    C_layered: float
    config: dict = field(default_factory=dict)
    frames: int = 0
    seconds: float = 0.0

    def __post_init__(self):
        pocs = [f.poc for f in self.per_frame]
        if pocs != list(range(len(pocs))):
            raise ValueError("per-frame features must be sorted by poc and contiguous from 0")

    @property
    def fps(self) -> float:
        return self.frames / self.seconds if self.seconds > 0 else math.inf

    @property
    def complexity(self) -> float:
        """Headline C for the mode: layer-weighted when the mode weights layers."""
        return self.C_layered if self.config.get("weighted") else self.C_baseline

    @property
    def components(self) -> tuple[float, float, float, float]:
        return layer_components(self.per_frame)

    def to_dict(self, timing: bool = True) -> dict:
        d = {
            "clip": self.clip,
            "mode": self.mode,
            "complexity": self.complexity,
            "C_baseline": self.C_baseline,
            "C_layered": self.C_layered,
            "components": dict(zip(("E_intra", "h_L0", "h_L1", "h_L2"), self.components)),
            "config": self.config,
            "per_frame": [f.to_dict() for f in self.per_frame],
        }
        if timing:
            fps = self.fps
            d["timing"] = {
                "frames": self.frames,
                "seconds": self.seconds,
                "fps": fps if math.isfinite(fps) else None,
            }
        return d

    def to_json(self, timing: bool = True) -> str:
        return json.dumps(self.to_dict(timing), indent=2, sort_keys=True) + "\n"

    def to_csv(self, timing: bool = True) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["poc", "kind", "layer", "reference", "E", "h", "mu_mean"])
        for f in self.per_frame:
            writer.writerow([
                f.poc,
                f.frame_class.kind,
                "" if f.frame_class.layer is None else f.frame_class.layer,
                "" if f.reference is None else f.reference,
                repr(f.E),
                "" if f.h is None else repr(f.h),
                "" if f.mu_mean is None else repr(f.mu_mean),
            ])
        footer = ["#summary", f"C_baseline={self.C_baseline!r}", f"C_layered={self.C_layered!r}"]
        if timing:
            footer.append(f"fps={self.fps:.3f}")
        writer.writerow(footer)
        return buf.getvalue()

    @classmethod
    def from_dict(cls, d: dict) -> "ComplexityReport":
        timing = d.get("timing") or {}
        return cls(
            clip=d["clip"],
            mode=d["mode"],
            per_frame=[FrameFeatures.from_dict(f) for f in d["per_frame"]],
            C_baseline=d["C_baseline"],
            C_layered=d["C_layered"],
            config=d.get("config", {}),
            frames=timing.get("frames", 0),
            seconds=timing.get("seconds", 0.0),
        )


def load_report(path) -> ComplexityReport:
    with open(path, encoding="utf-8") as fh:
        return ComplexityReport.from_dict(json.load(fh))


def build_report(clip, mode, features, weights: LayerWeights, config=None, seconds=0.0) -> ComplexityReport:
    features = sorted(features, key=lambda f: f.poc)
    return ComplexityReport(
        clip=clip,
        mode=mode,
        per_frame=features,
        C_baseline=complexity_baseline(features),
        C_layered=complexity_layered(features, weights),
        config=dict(config or {}),
        frames=len(features),
        seconds=seconds,
    )

