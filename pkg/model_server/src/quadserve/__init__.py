"""Fine-tune and serve an encoder-decoder model behind the /generate protocol."""

from .checkpoints import init_checkpoint
from .data import MalformedPairsError, read_pairs
from .serving import create_app, greedy_generate
from .training import CheckpointNotFoundError, TrainConfig, fine_tune

__version__ = "0.1.0"

__all__ = [
    "CheckpointNotFoundError",
    "MalformedPairsError",
    "TrainConfig",
    "create_app",
    "fine_tune",
    "greedy_generate",
    "init_checkpoint",
    "read_pairs",
]
