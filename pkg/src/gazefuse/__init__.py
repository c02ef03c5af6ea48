"""Gradient-domain fusion of gaze position and velocity channels."""

from ._backend import BACKEND
from .calibration import (
    PolyCalibration,
    VelocityCalibration,
    display_delay,
    fit_poly,
    fit_velocity_map,
)
from .compensation import combine_glints, compensate, fit_circle
from .confidence import ConfidenceConfig, build_weight_schedule, classify_blinks
from .config import RunConfig, load_config
from .errors import GazefuseError, InputError, NumericalError, SingularSystemError
from .events import EventConfig, adaptive_threshold, detect_microsaccades, ivt_detect, tv_denoise
from .fusion import FusionResult, WeightSchedule, assemble_system, constant_weights, fuse, solve
from .metrics import accuracy, detrend_pursuit, fixation_window, s2s_rms, std_precision
from .simulator import SimConfig, run_study
from .traces import ChannelTrace, VelocityTrace

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "ChannelTrace",
    "ConfidenceConfig",
    "EventConfig",
    "FusionResult",
    "GazefuseError",
    "InputError",
    "NumericalError",
    "PolyCalibration",
    "RunConfig",
    "SimConfig",
    "SingularSystemError",
    "VelocityCalibration",
    "VelocityTrace",
    "WeightSchedule",
    "accuracy",
    "adaptive_threshold",
    "assemble_system",
    "build_weight_schedule",
    "classify_blinks",
    "combine_glints",
    "compensate",
    "constant_weights",
    "detect_microsaccades",
    "detrend_pursuit",
    "display_delay",
    "fit_circle",
    "fit_poly",
    "fit_velocity_map",
    "fixation_window",
    "fuse",
    "ivt_detect",
    "load_config",
    "run_study",
    "s2s_rms",
    "solve",
    "std_precision",
    "tv_denoise",
]
