"""Multi-attention LPLC2 looming detector and stimulus generator."""
from .attention import AttentionField, DetectionEvent, EnsembleState
from .config import CALIBRATED_THRESHOLDS, ConfigError, ModelConfig, load_config
from .detector import Detector, run_detector
from .lobula import DirectionalMotion
from .oracle import oracle_run
from .stimuli import StimulusSpec, builtin_scenarios, render

__all__ = [
    "AttentionField",
    "CALIBRATED_THRESHOLDS",
    "ConfigError",
    "DetectionEvent",
    "Detector",
    "DirectionalMotion",
    "EnsembleState",
    "ModelConfig",
    "StimulusSpec",
    "builtin_scenarios",
    "load_config",
    "oracle_run",
    "render",
    "run_detector",
]

__version__ = "0.1.0"
