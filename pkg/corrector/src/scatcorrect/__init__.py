"""Neural correctors for processed scattering data on the polar disk grid."""
from .data import TASKS, ArchiveError, load_task
from .infer import correct
from .model import PolarUNet, build_model
from .padding import circular_pad
from .train import PRESETS, DivergenceError, TrainingConfig, load_artifact

__version__ = "0.1.0"
__all__ = ["TASKS", "ArchiveError", "load_task", "correct", "PolarUNet",
           "build_model", "circular_pad", "PRESETS", "DivergenceError",
           "TrainingConfig", "load_artifact", "__version__"]
