"""Stale messages with and without the flow predictor.

Each delivered message is `latency` steps old.  Naive fusion pastes old
features where objects used to be; the predictor moves them along tracks
first.
"""
from dataclasses import replace

import numpy as np

from collabsim import ExperimentConfig, run_episode
from collabsim.exchange import ChannelModel

seeds = range(3)
cfg = ExperimentConfig()
alone = np.mean([run_episode(cfg, s, baseline=True).baseline.ap50 for s in seeds])
print(f"single agent AP@0.5: {alone:.3f}\n")
print(f"{'latency':>7} {'predictor':>10} {'naive':>7}")
for latency in (0, 1, 2, 3, 4):
    late = replace(cfg, channel=ChannelModel(latency=latency))
    pred = np.mean([run_episode(late, s).ap50 for s in seeds])
    naive_cfg = replace(late, ablations=late.ablations.without("predictor"))
    naive = np.mean([run_episode(naive_cfg, s).ap50 for s in seeds])
    print(f"{latency:>7} {pred:>10.3f} {naive:>7.3f}")
