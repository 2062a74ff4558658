"""Synthetic BEV worlds: moving rectangular objects, static agents, occlusion-aware sensing."""

import csv
from dataclasses import dataclass, replace

import numpy as np

from .geometry import box_footprint, cell_centres, segments_cross_box, wrap_angle


@dataclass(frozen=True)
class WorldConfig:
    grid_height: int = 64
    grid_width: int = 96
    cell_size: float = 0.5  # meters per cell
    num_agents: int = 4
    num_objects: int = 24
    duration: int = 30
    seed: int = 0
    object_speed_range: tuple = (0.5, 1.5)  # cells per step
    turn_probability: float = 0.05
    object_length: float = 4.0
    object_width: float = 2.0
    sensing_range: float = 16.0
    clutter_rate: float = 0.004

    def validate(self):
        if self.grid_height < 1 or self.grid_width < 1:
            raise ValueError("grid must have at least one cell")
        if self.duration < 1:
            raise ValueError("duration must be at least one timestamp")
        if self.num_agents < 1:
            raise ValueError("need at least one agent")
        if self.num_objects < 0:
            raise ValueError("num_objects must be non-negative")
        if self.cell_size <= 0:
            raise ValueError("cell_size must be positive")
        lo, hi = self.object_speed_range
        if lo < 0 or hi < lo:
            raise ValueError(f"bad object_speed_range {self.object_speed_range}")
        if not 0.0 <= self.turn_probability <= 1.0:
            raise ValueError("turn_probability must be in [0, 1]")
        if self.object_length <= 0 or self.object_width <= 0:
            raise ValueError("object extents must be positive")
        if self.sensing_range <= 0:
            raise ValueError("sensing_range must be positive")
        if not 0.0 <= self.clutter_rate <= 1.0:
            raise ValueError("clutter_rate must be in [0, 1]")
        return self

    @property
    def shape(self):
        return (self.grid_height, self.grid_width)


@dataclass(frozen=True)
class ObjectState:
    id: int
    x: float
    y: float
    h: float
    w: float
    heading: float
    vx: float
    vy: float

    @property
    def box(self):
        return (self.x, self.y, self.h, self.w, self.heading)


@dataclass(frozen=True)
class AgentPose:
    agent_id: int
    x: float
    y: float
    sensing_range: float
    pose_error_std: float = 0.0


@dataclass(frozen=True)
class GroundTruthFrame:
    timestamp: int
    objects: tuple = ()


@dataclass(frozen=True, eq=False)
class Observation:
    """One agent's sensing result on the shared grid.

    Hit points are stored column-wise.  Each hit also carries the heading of
    the surface it came from (clutter gets a random one), which is what lets
    the encoder put orientation into the feature direction.
    """

    agent_id: int
    timestamp: int
    visible_cells: np.ndarray
    hit_rows: np.ndarray
    hit_cols: np.ndarray
    hit_strength: np.ndarray
    hit_heading: np.ndarray

    @property
    def hit_points(self):
        return [((int(r), int(c)), float(s)) for r, c, s in zip(self.hit_rows, self.hit_cols, self.hit_strength)]


def _spawn(config, rng, agents):
    lo, hi = config.object_speed_range
    width_m = config.grid_width * config.cell_size
    height_m = config.grid_height * config.cell_size
    margin = config.object_length / 2
    clearance = config.object_length + 1.0
    objects = []
    for oid in range(config.num_objects):
        for _ in range(200):
            x = rng.uniform(margin, max(margin, width_m - margin))
            y = rng.uniform(margin, max(margin, height_m - margin))
            near = any(np.hypot(o.x - x, o.y - y) < clearance for o in objects)
            near |= any(np.hypot(a.x - x, a.y - y) < clearance for a in agents)
            if not near:
                break
        heading = float(wrap_angle(rng.uniform(-np.pi, np.pi)))
        speed = rng.uniform(lo, hi) * config.cell_size
        objects.append(ObjectState(oid, x, y, config.object_length, config.object_width,
                                   heading, speed * np.cos(heading), speed * np.sin(heading)))
    return objects


def _reflect(pos, vel, lo, hi):
    if hi <= lo:
        return (lo + hi) / 2, vel
    if pos < lo:
        return 2 * lo - pos, abs(vel)
    if pos > hi:
        return 2 * hi - pos, -abs(vel)
    return pos, vel


def _advance(obj, config, rng):
    vx, vy = obj.vx, obj.vy
    heading = obj.heading
    if config.turn_probability > 0 and rng.random() < config.turn_probability:
        speed = np.hypot(vx, vy)
        heading = float(wrap_angle(heading + rng.uniform(-np.pi / 2, np.pi / 2)))
        vx, vy = speed * np.cos(heading), speed * np.sin(heading)
    margin = obj.h / 2
    x, vx2 = _reflect(obj.x + vx, vx, margin, config.grid_width * config.cell_size - margin)
    y, vy2 = _reflect(obj.y + vy, vy, margin, config.grid_height * config.cell_size - margin)
    if (vx2, vy2) != (vx, vy):
        heading = float(wrap_angle(np.arctan2(vy2, vx2)))
    return replace(obj, x=x, y=y, vx=vx2, vy=vy2, heading=heading)


def place_agents(config, pose_error_std=0.0):
    """Static agents on a regular lattice over the grid."""
    n = config.num_agents
    cols = max(1, min(n, int(round(np.sqrt(n * config.grid_width / config.grid_height)))))
    rows = int(np.ceil(n / cols))
    width_m = config.grid_width * config.cell_size
    height_m = config.grid_height * config.cell_size
    poses = []
    for k in range(n):
        r, c = divmod(k, cols)
        poses.append(AgentPose(k, (c + 0.5) * width_m / cols, (r + 0.5) * height_m / rows,
                               config.sensing_range, pose_error_std))
    return poses


def generate_world(config, initial_objects=None):
    """Ground-truth frames for ``config.duration`` steps.

    ``initial_objects`` overrides the random spawn; the motion model still
    draws turn events from the seeded generator.
    """
    config.validate()
    rng = np.random.default_rng(config.seed)
    if initial_objects is None:
        objects = _spawn(config, rng, place_agents(config))
    else:
        objects = list(initial_objects)
    frames = [GroundTruthFrame(0, tuple(objects))]
    for t in range(1, config.duration):
        objects = [_advance(o, config, rng) for o in objects]
        frames.append(GroundTruthFrame(t, tuple(objects)))
    return frames


def visibility(frame, pose, config):
    """Cells within sensing range whose line of sight is free of other objects' boxes."""
    cx, cy = cell_centres(config.grid_height, config.grid_width, config.cell_size)
    dist = np.hypot(cx - pose.x, cy - pose.y)
    visible = dist <= pose.sensing_range
    ends = np.stack([cx, cy], axis=-1)
    origin = (pose.x, pose.y)
    reach = pose.sensing_range
    for obj in frame.objects:
        box = obj.box
        # boxes out of reach or around the sensor itself cannot occlude
        radius = 0.5 * np.hypot(obj.h, obj.w)
        if np.hypot(obj.x - pose.x, obj.y - pose.y) > reach + radius:
            continue
        if _contains(box, origin):
            continue
        # only still-visible cells beyond the box's near side can be hidden by it
        rr, cc = np.nonzero(visible & (dist > np.hypot(obj.x - pose.x, obj.y - pose.y) - radius))
        blocked = segments_cross_box(origin, ends[rr, cc], box)
        blocked &= ~_contains(box, (cx[rr, cc], cy[rr, cc]))
        visible[rr[blocked], cc[blocked]] = False
    return visible


def _contains(box, point):
    x, y, h, w, a = box
    dx, dy = np.asarray(point[0]) - x, np.asarray(point[1]) - y
    u = dx * np.cos(a) + dy * np.sin(a)
    v = -dx * np.sin(a) + dy * np.cos(a)
    return (np.abs(u) <= h / 2) & (np.abs(v) <= w / 2)


def sense(frame, pose, config, seed=0):
    """Ray-cast one agent's view of a frame.

    Visible object cells become hits of strength 1; visible cells also get
    sparse clutter hits of strength at most 0.3.
    """
    vis = visibility(frame, pose, config)
    rows, cols, strength, heading = [], [], [], []
    H, W = config.shape
    for obj in frame.objects:
        cells = box_footprint(obj.box, H, W, config.cell_size) & vis
        r, c = np.nonzero(cells)
        rows.append(r)
        cols.append(c)
        strength.append(np.ones(len(r)))
        heading.append(np.full(len(r), obj.heading))

    rng = np.random.default_rng([seed, pose.agent_id, frame.timestamp])
    vr, vc = np.nonzero(vis)
    pick = rng.random(len(vr)) < config.clutter_rate
    n = int(pick.sum())
    rows.append(vr[pick])
    cols.append(vc[pick])
    strength.append(rng.uniform(0.05, 0.3, n))
    heading.append(rng.uniform(-np.pi, np.pi, n))

    return Observation(pose.agent_id, frame.timestamp, vis,
                       np.concatenate(rows).astype(int), np.concatenate(cols).astype(int),
                       np.concatenate(strength), np.concatenate(heading))


def perturb_pose(pose, std, seed):
    if std < 0:
        raise ValueError("std must be non-negative")
    if std == 0:
        return pose
    dx, dy = np.random.default_rng(seed).normal(0.0, std, 2)
    return replace(pose, x=pose.x + dx, y=pose.y + dy, pose_error_std=std)


def shift_observation(obs, drow, dcol):
    """Translate an observation by whole cells, dropping whatever leaves the grid.

    Models an agent that believes it is offset from its true pose: everything
    it perceives lands displaced in the shared frame.
    """
    if drow == 0 and dcol == 0:
        return obs
    H, W = obs.visible_cells.shape
    vis = np.zeros_like(obs.visible_cells)
    src_r = slice(max(0, -drow), min(H, H - drow))
    dst_r = slice(max(0, drow), min(H, H + drow))
    src_c = slice(max(0, -dcol), min(W, W - dcol))
    dst_c = slice(max(0, dcol), min(W, W + dcol))
    vis[dst_r, dst_c] = obs.visible_cells[src_r, src_c]
    r = obs.hit_rows + drow
    c = obs.hit_cols + dcol
    keep = (r >= 0) & (r < H) & (c >= 0) & (c < W)
    return Observation(obs.agent_id, obs.timestamp, vis, r[keep], c[keep],
                       obs.hit_strength[keep], obs.hit_heading[keep])


FRAME_FIELDS = ["timestamp", "id", "x", "y", "h", "w", "alpha", "vx", "vy"]


def write_frames_csv(frames, fh):
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(FRAME_FIELDS)
    for frame in frames:
        for o in frame.objects:
            writer.writerow([frame.timestamp, o.id] + [f"{v:.6f}" for v in (o.x, o.y, o.h, o.w, o.heading, o.vx, o.vy)])
