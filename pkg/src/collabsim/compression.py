"""Message determination: spatial and temporal selection, codebook learning, quantization."""

import struct
import zlib
from dataclasses import dataclass, field

import numpy as np

APPEARANCE_DYNAMIC = 100.0
CODEBOOK_MAGIC = 0x42444F43  # b"CODB" little-endian


@dataclass(eq=False)
class SparseFeatureMap:
    """Feature vectors at a subset of cells; cells not listed are absent."""

    shape: tuple  # (H, W, C)
    rows: np.ndarray
    cols: np.ndarray
    values: np.ndarray  # (K, C)
    agent_id: int = -1
    timestamp: int = -1

    def __len__(self):
        return len(self.rows)

    def to_dense(self):
        out = np.zeros(self.shape)
        out[self.rows, self.cols] = self.values
        return out

    def present(self):
        mask = np.zeros(self.shape[:2], dtype=bool)
        mask[self.rows, self.cols] = True
        return mask


@dataclass(eq=False)
class Codebook:
    codes: np.ndarray  # (n_L, C)
    n_R: int = 1
    version_id: int = 0
    objective_trace: tuple = field(default=(), repr=False)

    @property
    def n_L(self):
        return len(self.codes)

    @property
    def dim(self):
        return self.codes.shape[1]

    @property
    def bits_per_index(self):
        return int(np.ceil(np.log2(self.n_L))) if self.n_L > 1 else 0

    def __eq__(self, other):
        return (isinstance(other, Codebook) and self.n_R == other.n_R and self.version_id == other.version_id
                and np.array_equal(self.codes, other.codes))


@dataclass(eq=False)
class CodeIndexGrid:
    shape: tuple  # (H, W)
    rows: np.ndarray
    cols: np.ndarray
    indices: np.ndarray  # (K, n_R)

    def __len__(self):
        return len(self.rows)


def spatial_select(conf, budget):
    """Top-``budget`` cells by confidence; ties go to the smaller (row, col)."""
    if budget < 0:
        raise ValueError("budget must be non-negative")
    conf = np.asarray(conf)
    H, W = conf.shape
    mask = np.zeros((H, W), dtype=bool)
    k = min(int(budget), H * W)
    if k == 0:
        return mask
    flat = conf.ravel()
    idx = np.arange(H * W)
    order = np.lexsort((idx, -flat))[:k]
    mask.ravel()[order] = True
    return mask


def _cell(track, config):
    r = int(np.floor(track.state[2] / config.cell_size))
    c = int(np.floor(track.state[1] / config.cell_size))
    if 0 <= r < config.grid_height and 0 <= c < config.grid_width:
        return r, c
    return None


def temporal_dynamic(prev, prev2, config, appearance=APPEARANCE_DYNAMIC):
    """Per-cell L1 state change between the two latest track sets.

    Tracks present in only one of the two sets are written with the fixed
    ``appearance`` value at their last known cell.  Overlaps keep the max.
    """
    dyn = np.zeros(config.shape)
    older = prev2.by_id()
    newer = prev.by_id()

    def put(track, value):
        cell = _cell(track, config)
        if cell is not None:
            dyn[cell] = max(dyn[cell], value)

    for tid, trk in newer.items():
        if tid in older:
            put(trk, float(np.abs(trk.state - older[tid].state).sum()))
        else:
            put(trk, appearance)
    for tid, trk in older.items():
        if tid not in newer:
            put(trk, appearance)
    return dyn


def temporal_sample(dyn, t, interval, threshold):
    if interval < 1:
        raise ValueError("interval must be at least 1")
    if threshold < 0:
        raise ValueError("threshold must be non-negative")
    dyn = np.asarray(dyn)
    if t % interval == 0:
        return np.ones(dyn.shape, dtype=bool)
    return dyn > threshold


def select_content(feat, spatial, temporal, request):
    """Feature vectors where all three masks are set and the feature is non-zero."""
    values = getattr(feat, "values", feat)
    H, W, C = values.shape
    for m in (spatial, temporal, request):
        if np.shape(m) != (H, W):
            raise ValueError(f"mask shape {np.shape(m)} does not match features {(H, W)}")
    keep = np.asarray(spatial, bool) & np.asarray(temporal, bool) & np.asarray(request, bool)
    keep &= values.any(axis=-1)
    rows, cols = np.nonzero(keep)
    return SparseFeatureMap((H, W, C), rows, cols, values[rows, cols].copy(),
                            getattr(feat, "agent_id", -1), getattr(feat, "timestamp", -1))


# ---------------------------------------------------------------- k-means


def _sq_dists(x, codes):
    d = (x * x).sum(1)[:, None] - 2.0 * x @ codes.T + (codes * codes).sum(1)[None, :]
    return np.maximum(d, 0.0)


def _kmeans_pp(x, w, k, rng):
    centres = [x[rng.choice(len(x), p=w / w.sum())]]
    d2 = ((x - centres[0]) ** 2).sum(1)
    for _ in range(1, k):
        p = w * d2
        if p.sum() <= 0:
            idx = int(np.argmax(d2))
        else:
            idx = rng.choice(len(x), p=p / p.sum())
        centres.append(x[idx])
        d2 = np.minimum(d2, ((x - x[idx]) ** 2).sum(1))
    return np.array(centres, dtype=float)


def weighted_kmeans(x, w, k, iters, seed=0):
    """Weighted Lloyd iterations from a seeded k-means++ start.

    Returns ``(centres, trace)`` where ``trace[i]`` is the weighted objective
    after iteration ``i`` (``trace[0]`` is the initial objective).
    """
    x = np.asarray(x, dtype=float)
    w = np.asarray(w, dtype=float)
    rng = np.random.default_rng(seed)
    centres = _kmeans_pp(x, w, k, rng)
    d = _sq_dists(x, centres)
    trace = [float((w * d.min(1)).sum())]
    for _ in range(iters):
        assign = np.argmin(d, axis=1)
        for j in range(k):
            members = assign == j
            mass = w[members].sum()
            if mass > 0:
                centres[j] = (w[members, None] * x[members]).sum(0) / mass
            else:
                # empty cluster: move it onto the worst-served point
                far = int(np.argmax(w * d[np.arange(len(x)), assign]))
                centres[j] = x[far]
                assign[far] = j
                d[far] = _sq_dists(x[far:far + 1], centres)[0]
        d = _sq_dists(x, centres)
        trace.append(float((w * d.min(1)).sum()))
    return centres, trace


def _collapse(vectors, weights):
    """Merge duplicate rows, summing their weights (same weighted objective)."""
    uniq, inverse = np.unique(vectors, axis=0, return_inverse=True)
    merged = np.zeros(len(uniq))
    np.add.at(merged, inverse.ravel(), weights)
    return uniq, merged


def _version(codes):
    return zlib.crc32(np.ascontiguousarray(codes, dtype="<f4").tobytes())


def learn_codebook(features, conf, n_L, n_R=1, iters=20, seed=0):
    """Confidence-weighted k-means codebook over every per-cell feature vector.

    Sample weight is ``0.1 + confidence``.  With ``n_R > 1`` one code is pinned
    to the zero vector and the remaining codes are split across residual
    stages, each stage fit on what the earlier stages leave unexplained.
    """
    if n_L < 1 or n_R < 1:
        raise ValueError("n_L and n_R must be positive")
    vecs, wts = [], []
    for f, c in zip(features, conf, strict=True):
        values = getattr(f, "values", f)
        v = values.reshape(-1, values.shape[-1])
        cw = 0.1 + np.asarray(c, float).ravel()
        if len(v) != len(cw):
            raise ValueError("features and confidence maps do not line up")
        nz = v.any(axis=1)
        vecs.append(v[nz])
        wts.append(cw[nz])
        if not nz.all():
            # all zero rows are one point carrying their summed weight
            vecs.append(np.zeros((1, v.shape[1])))
            wts.append([cw[~nz].sum()])
    x, w = _collapse(np.concatenate(vecs), np.concatenate(wts))

    if n_R == 1:
        if len(x) < n_L:
            raise ValueError(f"need at least {n_L} distinct feature vectors, got {len(x)}")
        codes, trace = weighted_kmeans(x, w, n_L, iters, seed)
        traces = [tuple(trace)]
    else:
        free = n_L - 1
        if free < n_R or len(x) < free:
            raise ValueError(f"n_L={n_L} too small for n_R={n_R} or too few distinct vectors")
        shares = [free // n_R + (1 if s < free % n_R else 0) for s in range(n_R)]
        codes = np.zeros((1, x.shape[1]))
        residual = x
        traces = []
        for stage, k in enumerate(shares):
            r, rw = _collapse(residual, w) if stage else (residual, w)
            k = min(k, len(r))
            stage_codes, trace = weighted_kmeans(r, rw, k, iters, seed + stage)
            traces.append(tuple(trace))
            codes = np.concatenate([codes, stage_codes])
            _, recon = _greedy(x, codes, stage + 1)
            residual = x - recon
    codes = codes.astype(np.float32).astype(float)
    return Codebook(codes, n_R, _version(codes), tuple(traces))


def _nearest(x, codes):
    """Index of the nearest code per row; exact ties resolve to the lowest index."""
    d = _sq_dists(x, codes)
    best = d.min(1)
    tol = 1e-9 * (1.0 + best + (x * x).sum(1))
    near = d <= (best + tol)[:, None]
    idx = np.argmax(near, axis=1)
    for r in np.nonzero(near.sum(1) > 1)[0]:
        cand = np.nonzero(near[r])[0]
        exact = ((codes[cand] - x[r]) ** 2).sum(1)
        idx[r] = cand[np.flatnonzero(exact == exact.min())[0]]
    return idx


def _greedy(x, codes, n_R):
    residual = np.array(x, dtype=float)
    picks = np.zeros((len(x), n_R), dtype=np.int64)
    for k in range(n_R):
        picks[:, k] = _nearest(residual, codes)
        residual = residual - codes[picks[:, k]]
    return picks, x - residual


def quantize(z, codebook):
    """Code indices for every cell of a sparse feature map."""
    if codebook.n_L == 0:
        raise ValueError("empty codebook")
    if z.values.shape[1] != codebook.dim:
        raise ValueError(f"feature dim {z.values.shape[1]} != code dim {codebook.dim}")
    if len(z) == 0:
        idx = np.zeros((0, codebook.n_R), dtype=np.int64)
    else:
        idx, _ = _greedy(z.values, codebook.codes, codebook.n_R)
    return CodeIndexGrid(z.shape[:2], z.rows.copy(), z.cols.copy(), idx)


def reconstruct(indices, codebook):
    """Sum of the chosen codes per cell, shape (K, C)."""
    return codebook.codes[indices.indices].sum(axis=1)


def save_codebook(codebook, path):
    with open(path, "wb") as fh:
        fh.write(codebook_bytes(codebook))


def codebook_bytes(codebook):
    header = struct.pack("<4I", CODEBOOK_MAGIC, codebook.version_id, codebook.n_L, codebook.dim)
    return header + np.ascontiguousarray(codebook.codes, dtype="<f4").tobytes()


def load_codebook(path, n_R=1):
    with open(path, "rb") as fh:
        blob = fh.read()
    magic, version, n_L, dim = struct.unpack_from("<4I", blob)
    if magic != CODEBOOK_MAGIC:
        raise ValueError(f"{path}: not a codebook file")
    codes = np.frombuffer(blob, dtype="<f4", count=n_L * dim, offset=16).reshape(n_L, dim).astype(float)
    return Codebook(codes, n_R, version)
