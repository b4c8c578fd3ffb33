"""Hierarchical (dyadic) GOP model: frame layers and reference selection.

Defaults follow the x264 layout of 3 layers, GOP size 4 and intra period
250: poc 0, 4, 8, ... are anchors (layer 0, or intra on the intra period),
poc 2 mod 4 is layer 1, odd pocs are layer 2.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

INTRA = "I"
INTER = "P"


@dataclass(frozen=True)
class LayerWeights:
    w_i: float = 0.11
    w_l0: float = 0.04
    w_l1: float = 0.0001
    w_l2: float = 0.0005

    def __post_init__(self):
        if min(self.as_tuple()) < 0:
            raise ValueError(f"layer weights must be nonnegative, got {self.as_tuple()}")

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.w_i, self.w_l0, self.w_l1, self.w_l2)

    def for_layer(self, layer: int) -> float:
        # layers deeper than 2 reuse the layer-2 weight
        return (self.w_l0, self.w_l1, self.w_l2)[min(layer, 2)]

    @classmethod
    def parse(cls, text: str) -> "LayerWeights":
        parts = [p for p in text.split(",") if p.strip()]
        if len(parts) != 4:
            raise ValueError(f"expected 4 comma-separated weights wI,wL0,wL1,wL2, got {text!r}")
        return cls(*(float(p) for p in parts))


@dataclass(frozen=True)
class GopStructure:
    gop_size: int = 4
    intra_period: int = 250
    weights: LayerWeights = field(default_factory=LayerWeights)

    def __post_init__(self):
        if self.gop_size < 2 or self.gop_size & (self.gop_size - 1):
            raise ValueError(f"gop_size must be a power of two >= 2, got {self.gop_size}")
        # 0 means only poc 0 is intra; the x264 default of 250 is not a GOP multiple
        if self.intra_period < 0:
            raise ValueError(f"intra_period must be >= 0, got {self.intra_period}")

    @property
    def layer_count(self) -> int:
        return self.gop_size.bit_length()  # log2(gop_size) + 1


@dataclass(frozen=True)
class FrameClass:
    kind: str
    layer: Optional[int] = None

    @property
    def is_intra(self) -> bool:
        return self.kind == INTRA

    def label(self) -> str:
        return INTRA if self.is_intra else f"L{self.layer}"


def _trailing_zeros(n: int) -> int:
    return (n & -n).bit_length() - 1


def classify(poc: int, structure: GopStructure = GopStructure()) -> FrameClass:
    if poc < 0:
        raise ValueError(f"poc must be nonnegative, got {poc}")
    if poc == 0 or (structure.intra_period and poc % structure.intra_period == 0):
        return FrameClass(INTRA)
    offset = poc % structure.gop_size
    if offset == 0:
        return FrameClass(INTER, 0)
    layer = structure.layer_count - 1 - _trailing_zeros(offset)
    return FrameClass(INTER, max(1, layer))


def _rank(cls: FrameClass) -> int:
    return -1 if cls.is_intra else cls.layer


def select_reference(poc: int, structure: GopStructure = GopStructure(), frame_count: Optional[int] = None) -> int:
    """Reference frame used for the temporal feature of ``poc``.

    Layer-0 frames reference the nearest past anchor (intra or layer 0).  Deeper
    layers take the nearest frame of a strictly lower layer (or intra) within
    ``[0, poc + gop_size]``, the past candidate winning ties.  With
    ``frame_count`` set, candidates beyond the sequence end are excluded.
    """
    cls = classify(poc, structure)
    if cls.is_intra:
        raise ValueError(f"poc {poc} is an intra frame and has no reference")
    if cls.layer == 0:
        for q in range(poc - 1, -1, -1):
            if _rank(classify(q, structure)) <= 0:
                return q
    limit = poc + structure.gop_size
    if frame_count is not None:
        limit = min(limit, frame_count - 1)
    rank = _rank(cls)
    for distance in range(1, structure.gop_size + 1):
        for q in (poc - distance, poc + distance):
            if 0 <= q <= limit and _rank(classify(q, structure)) < rank:
                return q
    # unreachable: the anchor poc - (poc mod gop_size) always qualifies
    raise AssertionError(f"no reference found for poc {poc}")
