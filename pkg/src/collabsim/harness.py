"""Episode orchestration, codebook calibration, sweeps and ablations."""

import configparser
import csv
import io
import logging
import os
from dataclasses import dataclass, field, fields, replace

import numpy as np

from . import compression, exchange, geometry, perception, scenario, tracker, utilization
from .metrics import (assemble_tradeoff, average_precision, average_precisions, clear_mot, merge_reports,
                      write_tradeoff_csv)
from .scenario import WorldConfig

log = logging.getLogger(__name__)

AXES = ("budget", "interval", "codebook", "latency", "pose_error")
STAGES = ("spatial", "temporal", "channel", "predictor", "collaboration")


@dataclass(frozen=True)
class Ablations:
    """Stage switches; ``False`` bypasses the stage."""

    spatial: bool = True
    temporal: bool = True
    channel: bool = True
    predictor: bool = True
    collaboration: bool = True

    def without(self, stage):
        return replace(self, **{stage: False})


@dataclass(frozen=True)
class ExperimentConfig:
    world: WorldConfig = field(default_factory=WorldConfig)
    budgets: tuple = (1.0,)  # fractions of the grid offered per agent per step
    interval: int = 1
    threshold: float = 2.0
    n_L: int = 256
    n_R: int = 1
    codebook_iters: int = 20
    calibration_seeds: tuple = (10_000, 10_001)
    calibration_stride: int = 3
    channel: exchange.ChannelModel = field(default_factory=exchange.ChannelModel)
    pose_error_std: float = 0.0
    ablations: Ablations = field(default_factory=Ablations)
    output_dir: str = "out"
    seeds: tuple = (0,)
    conf_threshold: float = 0.5
    nms_iou: float = 0.1
    peak_window: int = 3
    request_threshold: float = 0.5
    history_decay: float = 0.7
    eval_range: float = None  # defaults to the sensing range
    mot_distance: float = 2.0
    tracking: tracker.TrackerConfig = field(default_factory=tracker.TrackerConfig)
    flow_tracking: tracker.TrackerConfig = None  # followers of stale messages; None reuses ``tracking``
    intervals: tuple = (1, 2, 3, 4)
    codebooks: tuple = ((16, 1), (64, 1), (256, 1), (256, 2))
    latencies: tuple = (0, 1, 2, 3, 4, 5)
    pose_errors: tuple = (0.0, 0.2, 0.4, 0.6)

    def validate(self):
        self.world.validate()
        if not self.budgets:
            raise ValueError("budgets must not be empty")
        if any(b < 0 for b in self.budgets):
            raise ValueError("budgets must be non-negative")
        if self.interval < 1:
            raise ValueError("interval must be at least 1")
        if self.threshold < 0:
            raise ValueError("threshold must be non-negative")
        if self.n_L < 1 or self.n_R < 1:
            raise ValueError("codebook sizes must be positive")
        if self.pose_error_std < 0:
            raise ValueError("pose_error_std must be non-negative")
        return self

    @property
    def budget(self):
        return max(self.budgets)

    def cells_for(self, fraction):
        return int(round(fraction * self.world.grid_height * self.world.grid_width))


@dataclass
class EpisodeResult:
    seed: int
    budget: float
    detections: dict  # (t, agent) -> [DetectionBox]
    ground_truth: dict  # (t, agent) -> [ObjectState]
    tracks: dict  # (t, agent) -> [(track_id, box, velocity)]
    ledger: list
    ap50: float = 0.0
    ap70: float = 0.0
    mota: float = 0.0
    motp: float = 0.0
    min_covariance_eigenvalue: float = np.inf
    budget_cells: int = 0
    max_sender_cells: int = 0
    unsolicited_cells: int = 0
    adjacency_mismatch: int = 0
    sampled: tuple = ()  # timestamps where the temporal mask was all-ones
    baseline: "EpisodeResult" = None  # ego-only run on the same observations

    @property
    def raw_bytes(self):
        return sum(e.raw_bytes for e in self.ledger)

    @property
    def payload_bytes(self):
        return sum(e.payload_bytes for e in self.ledger)

    @property
    def paper_metric(self):
        return exchange.log2_bytes(self.payload_bytes)

    def ap(self, iou_thr=0.5, timestamps=None):
        keep = (lambda t: True) if timestamps is None else (lambda t: t in set(timestamps))
        dets = [(d, key) for key, ds in self.detections.items() if keep(key[0]) for d in ds]
        gt = {key: objs for key, objs in self.ground_truth.items() if keep(key[0])}
        return average_precision(dets, gt, iou_thr)

    def summary(self, label=None):
        return {"budget": self.budget if label is None else label, "raw_bytes": float(self.raw_bytes),
                "paper_metric": self.paper_metric, "ap50": self.ap50, "ap70": self.ap70,
                "mota": self.mota, "motp": self.motp}

    def write(self, directory):
        os.makedirs(directory, exist_ok=True)
        with open(os.path.join(directory, "detections.csv"), "w", newline="") as fh:
            fh.write(self.detections_csv())
        with open(os.path.join(directory, "tracks.csv"), "w", newline="") as fh:
            fh.write(self.tracks_csv())
        with open(os.path.join(directory, "ledger.csv"), "w", newline="") as fh:
            exchange.write_ledger_csv(self.ledger, fh)
        with open(os.path.join(directory, "summary.csv"), "w", newline="") as fh:
            write_tradeoff_csv(assemble_tradeoff([self.summary()]), fh)

    def detections_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "agent", "confidence", "x", "y", "h", "w", "heading"])
        for (t, a), ds in sorted(self.detections.items()):
            for d in ds:
                w.writerow([t, a] + [f"{v:.6f}" for v in (d.confidence, *d.box)])
        return buf.getvalue()

    def tracks_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["agent", "timestamp", "track_id", "x", "y", "h", "w", "alpha", "vx", "vy"])
        for (t, a), ts in sorted(self.tracks.items()):
            for tid, box, vel in ts:
                w.writerow([a, t, tid] + [f"{v:.6f}" for v in (*box, *vel)])
        return buf.getvalue()


# ---------------------------------------------------------------- calibration

_CODEBOOKS = {}


def calibrate_codebook(cfg, seeds=None, path=None):
    """Learn the shared codebook from single-agent features on calibration scenes."""
    seeds = tuple(cfg.calibration_seeds if seeds is None else seeds)
    if not seeds:
        raise ValueError("calibration needs at least one seed")
    world = cfg.world
    key = (world, seeds, cfg.calibration_stride, cfg.n_L, cfg.n_R, cfg.codebook_iters)
    if key not in _CODEBOOKS:
        feats, confs = [], []
        for s in seeds:
            wc = replace(world, seed=s)
            frames = scenario.generate_world(wc)
            for frame in frames[::cfg.calibration_stride]:
                for pose in scenario.place_agents(wc):
                    feat = perception.encode(scenario.sense(frame, pose, wc, s), wc)
                    feats.append(feat)
                    confs.append(perception.confidence_map(perception.decode(feat, wc.cell_size)))
        _CODEBOOKS[key] = compression.learn_codebook(feats, confs, cfg.n_L, cfg.n_R, cfg.codebook_iters, seeds[0])
    book = _CODEBOOKS[key]
    if path is not None:
        compression.save_codebook(book, path)
    return book


# ---------------------------------------------------------------- episode


def _in_range(pose, radius):
    return lambda o: np.hypot(o.x - pose.x, o.y - pose.y) <= radius


def _warp_sparse(z, tracks, world, age, decay=1.0):
    """Carry a message sent ``age`` steps ago forward along ``tracks``, which
    describe the scene at the message's send time."""
    H, W = world.shape
    flow = utilization.estimate_flow(tracks, world, steps=age, snap="shift")
    # content no track explains has unknown motion and is dropped
    margin = perception.KERNEL_RADIUS * world.cell_size
    covered = np.zeros((H, W), dtype=bool)
    for trk in tracks.tracks:
        covered |= geometry.box_footprint(trk.box, H, W, world.cell_size, margin)
    keep = covered[z.rows, z.cols]
    z = compression.SparseFeatureMap(z.shape, z.rows[keep], z.cols[keep], z.values[keep], z.agent_id, z.timestamp)
    dense = utilization.CollabFeature.empty(z.agent_id, z.timestamp, (H, W, z.values.shape[1]))
    dense.values[z.rows, z.cols] = z.values
    dense.provenance[z.rows, z.cols] = utilization.HISTORY
    moved = utilization.warp(dense, flow, decay)
    rows, cols = np.nonzero(moved.present())
    return compression.SparseFeatureMap((H, W, z.values.shape[1]), rows, cols, moved.values[rows, cols],
                                        z.agent_id, z.timestamp)


class _Arm:
    """Per-agent trackers plus the records one pipeline variant produces."""

    def __init__(self, result, poses, cfg, eval_range):
        self.result = result
        self.poses = poses
        self.trackers = [tracker.Tracker(p.agent_id, cfg.tracking) for p in poses]
        self.inside = [_in_range(p, eval_range) for p in poses]
        self.min_eig = np.inf

    def record(self, frame, j, dets):
        t, inside, res = frame.timestamp, self.inside[j], self.result
        trk = self.trackers[j].step(dets, t)
        self.min_eig = min(self.min_eig, tracker.min_covariance_eigenvalue(trk))
        res.detections[(t, j)] = [d for d in dets if inside(d)]
        res.ground_truth[(t, j)] = [o for o in frame.objects if inside(o)]
        res.tracks[(t, j)] = [(x.track_id, x.box, (x.state[7], x.state[8]))
                              for x in self.trackers[j].reported() if inside(_Centre(x.box))]


def run_episode(cfg, seed, codebook=None, baseline=False):
    """Simulate one episode and score it.

    With ``baseline=True`` an ego-only pipeline runs on the same observations
    and is returned, scored, as ``result.baseline``.
    """
    cfg.validate()
    world = replace(cfg.world, seed=seed)
    ab = cfg.ablations
    collaborate = ab.collaboration and world.num_agents > 1
    use_codes = collaborate and ab.channel
    if use_codes and codebook is None:
        codebook = calibrate_codebook(cfg)
    predictor = ab.predictor and ab.temporal
    H, W = world.shape
    C = perception.N_CHANNELS
    budget_cells = cfg.cells_for(cfg.budget)
    eval_range = world.sensing_range if cfg.eval_range is None else cfg.eval_range

    frames = scenario.generate_world(world)
    poses = scenario.place_agents(world, cfg.pose_error_std)
    n = len(poses)
    history = [None] * n
    available = [None] * n
    channel = exchange.Channel(cfg.channel)
    result = EpisodeResult(seed, cfg.budget, {}, {}, {}, [], budget_cells=budget_cells)
    main = _Arm(result, poses, cfg, eval_range)
    trackers = main.trackers
    solo = None
    if baseline and collaborate:
        result.baseline = EpisodeResult(seed, 0.0, {}, {}, {}, [])
        solo = _Arm(result.baseline, poses, cfg, eval_range)
    ones = np.ones((H, W), dtype=bool)
    requests_at = {}
    stale = {}  # (sender, receiver) -> Tracker over delivered messages
    detect = lambda heat: perception.nms(heat, cfg.conf_threshold, cfg.nms_iou, cfg.peak_window)

    for frame in frames:
        t = frame.timestamp
        obs = [scenario.sense(frame, p, world, seed) for p in poses]
        feats = [perception.encode(o, world) for o in obs]
        heats = [perception.decode(f, world.cell_size) for f in feats]
        confs = [perception.confidence_map(h) for h in heats]

        fused = list(feats)
        if collaborate:
            spatial = [compression.spatial_select(c, budget_cells) if ab.spatial else ones for c in confs]
            if ab.temporal:
                temporal = []
                for i in range(n):
                    dyn = compression.temporal_dynamic(trackers[i].at(t - 1), trackers[i].at(t - 2), world)
                    temporal.append(compression.temporal_sample(dyn, t, cfg.interval, cfg.threshold))
            else:
                temporal = [ones] * n
            if all(m.all() for m in temporal):
                result.sampled += (t,)
            requests = [exchange.build_request(available[j], (H, W)) for j in range(n)]
            requests_at[t] = requests
            adjacency = exchange.build_adjacency(spatial, temporal, requests)

            outgoing = []
            for i in range(n):
                if not adjacency[i].any():
                    continue
                sender_feat = feats[i]
                if cfg.pose_error_std > 0:
                    noisy = scenario.perturb_pose(poses[i], cfg.pose_error_std, [seed, i, t])
                    drow = int(round((noisy.y - poses[i].y) / world.cell_size))
                    dcol = int(round((noisy.x - poses[i].x) / world.cell_size))
                    sender_feat = perception.encode(scenario.shift_observation(obs[i], drow, dcol), world)
                offer = spatial[i] & temporal[i]
                base = compression.select_content(sender_feat, offer, ones, ones)
                codes = compression.quantize(base, codebook) if use_codes else None
                sent_cells = np.zeros((H, W), dtype=bool)
                for j in np.nonzero(adjacency[i])[0]:
                    keep = requests[j][base.rows, base.cols]
                    if use_codes:
                        grid = compression.CodeIndexGrid((H, W), base.rows[keep], base.cols[keep], codes.indices[keep])
                        msg = exchange.pack(grid, i, int(j), t, codebook)
                        vol = exchange.comm_volume(msg, codebook)
                    else:
                        z = compression.SparseFeatureMap(base.shape, base.rows[keep], base.cols[keep], base.values[keep])
                        msg = exchange.pack_raw(z, i, int(j), t)
                        vol = exchange.comm_volume(msg, channels=C)
                    sent_cells[base.rows[keep], base.cols[keep]] = True
                    outgoing.append(msg)
                    result.ledger.append(exchange.LedgerEntry(t, i, int(j), len(msg), vol.raw_bytes, vol.per_vector,
                                                              msg.payload_bits, vol.payload_bytes))
                result.max_sender_cells = max(result.max_sender_cells, int(sent_cells.sum()))
            result.adjacency_mismatch += int(adjacency.sum()) - sum(1 for m in outgoing)

            channel.send(outgoing, t)
            inbox = [[] for _ in range(n)]
            for msg in channel.deliver(t):
                inbox[msg.receiver].append(msg)

            for j in range(n):
                decoded = []
                for msg in inbox[j]:
                    cells = msg.cells.astype(np.int64)
                    req = requests_at[msg.timestamp][j]
                    result.unsolicited_cells += int((~req[cells[:, 0], cells[:, 1]]).sum()) if len(cells) else 0
                    z = utilization.decompress(msg, codebook, channels=C, grid=(H, W))
                    age = t - msg.timestamp
                    if age > 0 and predictor:
                        # track the sender's stale view in its own time frame, then extrapolate
                        follow = stale.setdefault((msg.sender, j), tracker.Tracker(j, cfg.flow_tracking or cfg.tracking))
                        view = perception.decode(z.to_dense(), world.cell_size)
                        follow.step(detect(view), msg.timestamp)
                        if len(z):
                            z = _warp_sparse(z, follow.tracks, world, age, cfg.history_decay ** age)
                    decoded.append(z)
                predicted = None
                # at fully sampled steps everything is resent, so stale history is dropped
                if predictor and history[j] is not None and t % cfg.interval != 0:
                    flow = utilization.estimate_flow(trackers[j].tracks, world)
                    predicted = utilization.warp(history[j], flow, cfg.history_decay)
                if decoded or predicted is not None:
                    collab = utilization.fuse(feats[j], decoded, predicted)
                    collab.agent_id, collab.timestamp = j, t
                    history[j] = collab.collaborative_part() if predictor else None
                    fused[j] = collab.values
                else:
                    history[j] = None
                available[j] = spatial[j] & (confs[j] >= cfg.request_threshold)

        for j in range(n):
            ego_dets = detect(heats[j]) if (solo or fused[j] is feats[j]) else None
            if solo:
                solo.record(frame, j, ego_dets)
            dets = ego_dets if fused[j] is feats[j] else detect(perception.decode(fused[j], world.cell_size))
            main.record(frame, j, dets)

    result.min_covariance_eigenvalue = main.min_eig
    _score(result, cfg, n)
    if solo:
        result.baseline.min_covariance_eigenvalue = solo.min_eig
        _score(result.baseline, cfg, n)
    return result


class _Centre:
    def __init__(self, box):
        self.x, self.y = box[0], box[1]


def _score(result, cfg, n):
    have_gt = any(result.ground_truth.values())
    if have_gt:
        dets = [(d, key) for key, ds in result.detections.items() for d in ds]
        result.ap50, result.ap70 = average_precisions(dets, result.ground_truth, (0.5, 0.7))
    else:
        result.ap50 = result.ap70 = 0.0
    reports = []
    for j in range(n):
        gt = {t: objs for (t, a), objs in result.ground_truth.items() if a == j}
        if not any(gt.values()):
            continue
        hyps = {t: [(tid, box) for tid, box, _ in ts] for (t, a), ts in result.tracks.items() if a == j}
        reports.append(clear_mot(hyps, gt, cfg.mot_distance))
    if reports:
        report = merge_reports(reports)
        result.mota, result.motp = report.mota, report.motp


# ---------------------------------------------------------------- sweeps


def axis_settings(cfg, axis):
    """(label, config) pairs for each value along ``axis``."""
    if axis == "budget":
        return [(b, replace(cfg, budgets=(b,))) for b in cfg.budgets]
    if axis == "interval":
        return [(k, replace(cfg, interval=k)) for k in cfg.intervals]
    if axis == "codebook":
        return [(f"{nl}x{nr}", replace(cfg, n_L=nl, n_R=nr)) for nl, nr in cfg.codebooks]
    if axis == "latency":
        return [(k, replace(cfg, channel=replace(cfg.channel, latency=k))) for k in cfg.latencies]
    if axis == "pose_error":
        return [(s, replace(cfg, pose_error_std=s)) for s in cfg.pose_errors]
    raise ValueError(f"unknown axis {axis!r}; choose from {AXES}")


def average_runs(label, runs):
    keys = ("raw_bytes", "ap50", "ap70", "mota", "motp")
    out = {"budget": label}
    out.update({k: float(np.mean([r.summary()[k] for r in runs])) for k in keys})
    out["paper_metric"] = exchange.log2_bytes(float(np.mean([r.payload_bytes for r in runs])))
    return out


def sweep(cfg, axis, seeds=None, write=True):
    """Run every (axis value, seed) pair and average over seeds."""
    seeds = tuple(cfg.seeds if seeds is None else seeds)
    rows = []
    per_run = {}
    for label, sub in axis_settings(cfg, axis):
        runs = [run_episode(sub, s) for s in seeds]
        per_run[label] = runs
        rows.append(average_runs(label, runs))
    records = assemble_tradeoff(rows)
    if write:
        write_sweep(cfg.output_dir, axis, records, per_run)
    return records


def ablate(cfg, seeds=None, write=True):
    """Full pipeline plus one run per disabled stage, averaged over seeds."""
    seeds = tuple(cfg.seeds if seeds is None else seeds)
    rows, per_run = [], {}
    for label, ab in [("full", cfg.ablations)] + [(f"no_{s}", cfg.ablations.without(s)) for s in STAGES]:
        runs = [run_episode(replace(cfg, ablations=ab), s) for s in seeds]
        per_run[label] = runs
        rows.append(average_runs(label, runs))
    records = assemble_tradeoff(rows)
    if write:
        write_sweep(cfg.output_dir, "ablation", records, per_run)
    return records


def write_sweep(directory, name, records, per_run):
    os.makedirs(directory, exist_ok=True)
    with open(os.path.join(directory, f"sweep_{name}.csv"), "w", newline="") as fh:
        write_tradeoff_csv(records, fh)
    with open(os.path.join(directory, f"sweep_{name}_runs.csv"), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["budget", "seed", "raw_bytes", "ap50", "ap70", "mota", "motp"])
        for label, runs in per_run.items():
            for r in runs:
                w.writerow([label, r.seed, r.raw_bytes] + [f"{v:.6f}" for v in (r.ap50, r.ap70, r.mota, r.motp)])
    write_plot_script(directory)


PLOT_SCRIPT = '''"""Render AP-vs-communication curves from the sweep CSVs in this directory."""
import csv
import glob
import math
import os

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

here = os.path.dirname(os.path.abspath(__file__))
for path in sorted(glob.glob(os.path.join(here, "sweep_*.csv"))):
    if path.endswith("_runs.csv"):
        continue
    with open(path) as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        continue
    name = os.path.basename(path)[len("sweep_"):-len(".csv")]
    nbytes = [float(r["raw_bytes"]) for r in rows]
    fig, axes = plt.subplots(1, 2, figsize=(10, 4))
    for ax, xs, xlabel in ((axes[0], [math.log2(max(b, 1.0)) for b in nbytes], "log2(raw bytes per episode)"),
                           (axes[1], [float(r["paper_metric"]) for r in rows], "log2(index payload bytes)")):
        for key in ("ap50", "ap70"):
            ax.plot(xs, [float(r[key]) for r in rows], marker="o", label=key.upper())
        for x, r in zip(xs, rows):
            ax.annotate(r["budget"], (x, float(r["ap50"])), fontsize=7)
        ax.set_xlabel(xlabel)
        ax.set_ylabel("AP")
        ax.legend()
    fig.suptitle(name)
    fig.tight_layout()
    fig.savefig(os.path.join(here, f"{name}.png"), dpi=120)
    print("wrote", f"{name}.png")
'''


def write_plot_script(directory):
    path = os.path.join(directory, "plot_tradeoff.py")
    with open(path, "w") as fh:
        fh.write(PLOT_SCRIPT)
    return path


# ---------------------------------------------------------------- config files


def _floats(text):
    return tuple(float(v) for v in text.replace(",", " ").split())


def _ints(text):
    return tuple(int(v) for v in text.replace(",", " ").split())


def _seeds(text):
    out = []
    for part in text.replace(",", " ").split():
        if "-" in part:
            lo, hi = part.split("-")
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(part))
    return tuple(out)


def _coerce(kind, text):
    if kind is bool:
        return text.strip().lower() in ("1", "true", "yes", "on")
    if kind in (int, float, str):
        return kind(text)
    return text


def parse_config(text):
    """ExperimentConfig from INI text with [world], [experiment], [channel],
    [ablations], [tracker] and [sweep] sections.  Missing keys keep defaults."""
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    cp.read_string(text)
    world_kw = {}
    if cp.has_section("world"):
        for f in fields(WorldConfig):
            if cp.has_option("world", f.name):
                raw = cp.get("world", f.name)
                world_kw[f.name] = _floats(raw) if f.name == "object_speed_range" else _coerce(type(getattr(WorldConfig(), f.name)), raw)
    kw = {"world": WorldConfig(**world_kw)}

    if cp.has_section("experiment"):
        sec = cp["experiment"]
        lists = {"budgets": _floats, "seeds": _seeds, "calibration_seeds": _seeds}
        for f in fields(ExperimentConfig):
            if f.name in sec:
                if f.name in lists:
                    kw[f.name] = lists[f.name](sec[f.name])
                elif f.name == "eval_range":
                    kw[f.name] = float(sec[f.name])
                else:
                    kw[f.name] = _coerce(type(getattr(ExperimentConfig(), f.name)), sec[f.name])
    if cp.has_section("channel"):
        sec = cp["channel"]
        kw["channel"] = exchange.ChannelModel(int(sec.get("latency", 0)), float(sec.get("drop_probability", 0.0)),
                                              int(sec.get("seed", 0)))
    if cp.has_section("ablations"):
        kw["ablations"] = Ablations(**{s: cp.getboolean("ablations", s) for s in STAGES if cp.has_option("ablations", s)})
    if cp.has_section("tracker"):
        kw["tracking"] = tracker.TrackerConfig(**{
            f.name: _coerce(type(getattr(tracker.TrackerConfig(), f.name)), cp.get("tracker", f.name))
            for f in fields(tracker.TrackerConfig) if cp.has_option("tracker", f.name)})
    if cp.has_section("sweep"):
        sec = cp["sweep"]
        if "intervals" in sec:
            kw["intervals"] = _ints(sec["intervals"])
        if "codebooks" in sec:
            kw["codebooks"] = tuple(tuple(int(v) for v in item.split("x")) for item in sec["codebooks"].replace(",", " ").split())
        if "latencies" in sec:
            kw["latencies"] = _ints(sec["latencies"])
        if "pose_errors" in sec:
            kw["pose_errors"] = _floats(sec["pose_errors"])
    return ExperimentConfig(**kw).validate()


def load_config(path):
    with open(path) as fh:
        return parse_config(fh.read())
