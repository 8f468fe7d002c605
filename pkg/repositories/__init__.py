from repositories.base import BaseRepository
from repositories.checkpoint_repository import Checkpoint, load_checkpoint, save_checkpoint
from repositories.run_repository import RunRepository
from repositories.volume_repository import VolumeRepository, load_volume, save_volume

__all__ = [
    "BaseRepository",
    "Checkpoint",
    "RunRepository",
    "VolumeRepository",
    "load_checkpoint",
    "load_volume",
    "save_checkpoint",
    "save_volume",
]
