from models.base import Module, Sequential
from models.blocks import ResidualBlock, residual_block
from models.discriminator import Discriminator, build_discriminator
from models.generator import Generator, build_generator
from models.presets import PRESETS, resolve_preset
from models.schedule import ScheduleStep, stride_schedule

__all__ = [
    "Discriminator",
    "Generator",
    "Module",
    "PRESETS",
    "ResidualBlock",
    "ScheduleStep",
    "Sequential",
    "build_discriminator",
    "build_generator",
    "residual_block",
    "resolve_preset",
    "stride_schedule",
]
