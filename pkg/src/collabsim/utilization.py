"""Message decoding (decompression, BEV flow, warping) and max fusion."""

from dataclasses import dataclass

import numpy as np

from .compression import SparseFeatureMap
from .exchange import unpack
from .geometry import box_footprint
from .perception import KERNEL_RADIUS
from .tracker import kalman_predict

EGO = 1
HISTORY = 2


def neighbor_bit(agent_id):
    return 1 << (2 + int(agent_id))


@dataclass(eq=False)
class CollabFeature:
    agent_id: int
    timestamp: int
    values: np.ndarray  # (H, W, C)
    provenance: np.ndarray  # (H, W) bitset: EGO, HISTORY, neighbor_bit(j)

    @classmethod
    def empty(cls, agent_id, timestamp, shape):
        return cls(agent_id, timestamp, np.zeros(shape), np.zeros(shape[:2], dtype=np.uint64))

    def present(self):
        return self.provenance != 0

    def collaborative_part(self):
        """Copy keeping only cells that some non-ego source contributed to."""
        keep = (self.provenance & ~np.uint64(EGO)) != 0
        return CollabFeature(self.agent_id, self.timestamp, self.values * keep[..., None],
                             np.where(keep, self.provenance, 0).astype(np.uint64))


def decompress(msg, codebook, channels=None, grid=(None, None)):
    """Decoded vectors at the message's cells only."""
    n = len(msg.cells)
    rows = msg.cells[:, 0].astype(np.int64)
    cols = msg.cells[:, 1].astype(np.int64)
    if msg.raw:
        dim = channels if channels is not None else (len(msg.payload) // (4 * n) if n else 0)
        values = np.frombuffer(msg.payload, dtype="<f4").reshape(n, dim).astype(float)
    else:
        if msg.codebook_version != codebook.version_id:
            raise ValueError(f"codebook version {msg.codebook_version} != {codebook.version_id}")
        idx = unpack(msg, codebook)
        values = codebook.codes[idx.indices].sum(axis=1) if n else np.zeros((0, codebook.dim))
        dim = codebook.dim
    return SparseFeatureMap((*grid, dim), rows, cols, values, msg.sender, msg.timestamp)


def estimate_flow(prev_tracks, config, steps=1, margin=None, snap="cell"):
    """Integer cell displacement field from constant-velocity track prediction.

    Each track's displacement is written over its box footprint grown by
    ``margin`` meters, which defaults to the encoder's kernel reach.  Where
    footprints overlap the larger displacement wins.  ``snap="cell"`` takes
    the cell of the predicted centre minus the cell of the current centre, so
    repeated one-step warps never drift; ``snap="shift"`` rounds the metric
    displacement itself, which is closer for a single multi-step warp.
    """
    if snap not in ("cell", "shift"):
        raise ValueError(f"unknown snap mode {snap!r}")
    if margin is None:
        margin = KERNEL_RADIUS * config.cell_size
    H, W = config.shape
    flow = np.zeros((H, W, 2), dtype=np.int64)
    mag = np.zeros((H, W))
    predicted = kalman_predict(prev_tracks, steps=steps)
    cs = config.cell_size
    for before, after in zip(prev_tracks.tracks, predicted.tracks):
        if snap == "cell":
            d_row = int(np.floor(after.state[2] / cs) - np.floor(before.state[2] / cs))
            d_col = int(np.floor(after.state[1] / cs) - np.floor(before.state[1] / cs))
        else:
            d_row = int(np.round((after.state[2] - before.state[2]) / cs))
            d_col = int(np.round((after.state[1] - before.state[1]) / cs))
        if d_row == 0 and d_col == 0:
            continue
        foot = box_footprint(before.box, H, W, cs, margin) & (np.hypot(d_row, d_col) > mag)
        flow[foot] = (d_row, d_col)
        mag[foot] = np.hypot(d_row, d_col)
    return flow


def warp(hist, flow, decay=1.0):
    """Move every present cell by its flow; off-grid targets drop, collisions keep the max."""
    H, W, C = hist.values.shape
    if flow.shape != (H, W, 2):
        raise ValueError("flow does not match feature shape")
    out = CollabFeature.empty(hist.agent_id, hist.timestamp + 1, hist.values.shape)
    rows, cols = np.nonzero(hist.present())
    if len(rows) == 0:
        return out
    dr = rows + flow[rows, cols, 0]
    dc = cols + flow[rows, cols, 1]
    ok = (dr >= 0) & (dr < H) & (dc >= 0) & (dc < W)
    rows, cols, dr, dc = rows[ok], cols[ok], dr[ok], dc[ok]
    np.maximum.at(out.values, (dr, dc), hist.values[rows, cols] * decay)
    out.provenance[dr, dc] = HISTORY
    return out


def fuse(ego, decoded, predicted=None):
    """Element-wise max over the sources present at each cell."""
    ego_values = getattr(ego, "values", ego)
    H, W, C = ego_values.shape
    values = ego_values.astype(float).copy()
    prov = np.where(ego_values.any(axis=-1), EGO, 0).astype(np.uint64)
    for z in decoded:
        if len(z) == 0:
            continue
        if z.values.shape[1] != C or z.rows.max() >= H or z.cols.max() >= W:
            raise ValueError("decoded map does not match ego features")
        values[z.rows, z.cols] = np.maximum(values[z.rows, z.cols], z.values)
        nz = z.values.any(axis=1)
        prov[z.rows[nz], z.cols[nz]] |= np.uint64(neighbor_bit(z.agent_id))
    if predicted is not None:
        if predicted.values.shape != ego_values.shape:
            raise ValueError("predicted feature does not match ego features")
        here = predicted.present()
        values[here] = np.maximum(values[here], predicted.values[here])
        prov[here & predicted.values.any(axis=-1)] |= np.uint64(HISTORY)
    return CollabFeature(getattr(ego, "agent_id", -1), getattr(ego, "timestamp", -1), values, prov)
