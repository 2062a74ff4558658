"""Bandwidth-aware multi-agent collaborative perception on synthetic BEV scenes."""

from .harness import Ablations, EpisodeResult, ExperimentConfig, ablate, calibrate_codebook, run_episode, sweep
from .scenario import WorldConfig

__all__ = ["Ablations", "EpisodeResult", "ExperimentConfig", "WorldConfig", "ablate", "calibrate_codebook",
           "run_episode", "sweep"]
