"""Inter-relation-aware video complexity analysis.

DCT texture energy per block gives a spatial feature per frame and, via SAD
against a reference frame's energies, a temporal feature.  Feature-domain
motion estimation discounts translational change, a hierarchical GOP model
supplies frame layers and references, and layer-aware weights combine the
features into one complexity value per clip.
"""

from .aggregate import ComplexityReport, FrameFeatures, complexity_baseline, complexity_layered
from .energy import EnergyMap, block_energy, dct2d, energy_map, spatial_feature
from .evaluation import calibrate_weights, emit_heatmap, linear_fit, measure_fps, pearson
from .gop import FrameClass, GopStructure, LayerWeights, classify, select_reference
from .motion import (
    AttenuationMap,
    MeParams,
    attenuated_temporal_feature,
    attenuation,
    horiz_similarity,
    vert_similarity,
)
from .pipeline import MODES, AnalysisConfig, analyze_file, analyze_planes
from .temporal import SadMap, sad_map, temporal_feature
from .video_io import BlockGrid, LumaPlane, VideoSpec, open_raw_yuv, open_y4m, partition

__version__ = "0.1.0"
