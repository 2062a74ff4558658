"""Single-agent perception: feature encoding, dense decoding, NMS, confidence maps."""

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import convolve, maximum_filter, uniform_filter

from .geometry import cell_centres, iou_matrix, rotated_iou

N_CHANNELS = 64
N_BUCKETS = 16
KERNEL_RADIUS = 2
BOX_SIZE = (4.0, 2.0)  # nominal (along, across) extent in meters
ENERGY_SCALE = 1.0
CENTROID_WINDOW = 9


@dataclass(eq=False)
class FeatureMap:
    agent_id: int
    timestamp: int
    values: np.ndarray  # (H, W, C), non-negative

    @property
    def shape(self):
        return self.values.shape


@dataclass(eq=False)
class DenseHeatmap:
    values: np.ndarray  # (H, W, 7): c, x, y, h, w, cos, sin


@dataclass(frozen=True)
class DetectionBox:
    confidence: float
    x: float
    y: float
    h: float
    w: float
    heading: float

    @property
    def box(self):
        return (self.x, self.y, self.h, self.w, self.heading)


def heading_codes(n_channels=N_CHANNELS, n_buckets=N_BUCKETS):
    """Fixed non-negative unit vector per heading bucket, shape (n_buckets, C)."""
    rng = np.random.default_rng(20240607)
    v = np.abs(rng.standard_normal((n_buckets, n_channels)))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def heading_bucket(heading, n_buckets=N_BUCKETS):
    width = 2 * np.pi / n_buckets
    return (np.floor((np.asarray(heading) + np.pi) / width).astype(int)) % n_buckets


def bucket_heading(bucket, n_buckets=N_BUCKETS):
    width = 2 * np.pi / n_buckets
    return -np.pi + (np.asarray(bucket) + 0.5) * width


def deposit_kernel(radius=KERNEL_RADIUS):
    r = np.arange(-radius, radius + 1)
    d = np.hypot(r[:, None], r[None, :])
    return np.where(d <= radius, 1.0 - d / (radius + 1), 0.0)


_CODES = heading_codes()
_KERNEL = deposit_kernel()


def encode(obs, config):
    """Deposit each hit as a decaying kernel along its heading-bucket direction.

    Linear in the hits; anything outside ``obs.visible_cells`` is zero.
    """
    H, W = config.shape
    if obs.visible_cells.shape != (H, W):
        raise ValueError(f"observation grid {obs.visible_cells.shape} does not match config {(H, W)}")
    strength = np.zeros((N_BUCKETS, H, W))
    if len(obs.hit_rows):
        b = heading_bucket(obs.hit_heading)
        np.add.at(strength, (b, obs.hit_rows, obs.hit_cols), obs.hit_strength)
    used = np.nonzero(strength.reshape(N_BUCKETS, -1).any(axis=1))[0]
    spread = np.stack([convolve(strength[k], _KERNEL, mode="constant") for k in used]) if len(used) else np.zeros((0, H, W))
    spread *= obs.visible_cells
    values = (spread.reshape(len(used), H * W).T @ _CODES[used]).reshape(H, W, N_CHANNELS)
    return FeatureMap(obs.agent_id, obs.timestamp, values)


def decode(feat, cell_size=1.0, box_size=BOX_SIZE, energy_scale=ENERGY_SCALE):
    """Dense per-cell boxes from features.

    Confidence saturates with feature energy; position is the energy-weighted
    centroid of the surrounding window; heading comes from the bucket code
    best aligned with the feature.
    """
    values = feat.values if isinstance(feat, FeatureMap) else np.asarray(feat)
    H, W, _ = values.shape
    energy = np.sqrt(np.einsum("hwc,hwc->hw", values, values))
    conf = np.clip(1.0 - np.exp(-energy / energy_scale), 0.0, 1.0)

    cx, cy = cell_centres(H, W, cell_size)
    size = CENTROID_WINDOW
    mass = uniform_filter(energy, size, mode="constant")
    mx = uniform_filter(energy * cx, size, mode="constant")
    my = uniform_filter(energy * cy, size, mode="constant")
    has = mass > 1e-12
    x = np.where(has, mx / np.where(has, mass, 1.0), cx)
    y = np.where(has, my / np.where(has, mass, 1.0), cy)

    bucket = np.argmax(values @ _CODES.T, axis=-1)
    alpha = bucket_heading(bucket)
    out = np.stack([conf, x, y, np.full_like(conf, box_size[0]), np.full_like(conf, box_size[1]),
                    np.cos(alpha), np.sin(alpha)], axis=-1)
    return DenseHeatmap(out)


def nms(heatmap, conf_threshold=0.5, iou_threshold=0.1, peak_window=1):
    """Greedy rotated-box NMS over cells above ``conf_threshold``.

    With ``peak_window > 1`` only cells that are maximal within that square
    neighbourhood are candidates.  Candidates are visited by confidence
    descending, then (row, col).
    """
    if not (0 <= conf_threshold <= 1 and 0 <= iou_threshold <= 1):
        raise ValueError("thresholds must lie in [0, 1]")
    v = heatmap.values
    conf = v[..., 0]
    cand_mask = conf > conf_threshold
    if peak_window > 1:
        cand_mask &= conf >= maximum_filter(conf, peak_window, mode="constant")
    rows, cols = np.nonzero(cand_mask)
    if len(rows) == 0:
        return []
    c = conf[rows, cols]
    order = np.lexsort((cols, rows, -c))
    cand = v[rows[order], cols[order]]
    boxes = np.stack([cand[:, 1], cand[:, 2], cand[:, 3], cand[:, 4],
                      np.arctan2(cand[:, 6], cand[:, 5])], axis=1)

    alive = np.ones(len(boxes), dtype=bool)
    keep = []
    if len(boxes) <= 512:
        # few candidates: one pass over the upper triangle beats a call per kept box
        overlaps = np.zeros((len(boxes), len(boxes)), dtype=bool)
        reach = np.hypot(boxes[:, 2], boxes[:, 3])  # twice the circumradius
        d = np.hypot(boxes[:, None, 0] - boxes[None, :, 0], boxes[:, None, 1] - boxes[None, :, 1])
        ii, jj = np.nonzero(np.triu(d < 0.5 * (reach[:, None] + reach[None, :]), 1))
        if len(ii):
            overlaps[ii, jj] = rotated_iou(boxes[ii], boxes[jj]) >= iou_threshold
        for i in range(len(boxes)):
            if alive[i]:
                keep.append(i)
                alive[i + 1:] &= ~overlaps[i, i + 1:]
    else:
        for i in range(len(boxes)):
            if not alive[i]:
                continue
            keep.append(i)
            rest = np.nonzero(alive[i + 1:])[0] + i + 1
            if len(rest):
                ious = iou_matrix(boxes[i:i + 1], boxes[rest])[0]
                alive[rest[ious >= iou_threshold]] = False
    return [DetectionBox(float(cand[i, 0]), *map(float, boxes[i])) for i in keep]


def confidence_map(heatmap):
    return heatmap.values[..., 0].copy()


def detect(feat, cell_size=1.0, conf_threshold=0.5, iou_threshold=0.1, peak_window=1):
    """decode + nms in one call."""
    return nms(decode(feat, cell_size), conf_threshold, iou_threshold, peak_window)


def boxes_array(dets):
    """(N, 5) array of detection boxes."""
    if not dets:
        return np.zeros((0, 5))
    return np.array([d.box for d in dets], dtype=float)


def pair_iou(a, b):
    return float(rotated_iou(np.asarray(a, float), np.asarray(b, float)))
