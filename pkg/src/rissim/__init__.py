"""Design and simulation toolkit for RF-switch reconfigurable intelligent surfaces."""

from .array_model import (
    ABSORB,
    ArrayGeometry,
    LinkGeometry,
    PhaseSet,
    RisConfiguration,
    SteeringAngles,
    apply_config,
    cascaded_channel,
    los_channel,
    optimal_config,
    quantize_phase,
    upa_response,
)
from .board import BoardSpec, named_pattern, tile_boards, virtual_geometry
from .codebook import Codebook, build_codebook, load_codebook, save_codebook
from .errors import RisError

__version__ = "0.1.0"
