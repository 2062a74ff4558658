"""Kalman-filter multi-object tracker over 9-component box states.

State layout is ``(c, x, y, h, w, cos a, sin a, vx, vy)``; detections observe
the first seven components and velocity is inferred by the filter.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from .geometry import iou_matrix

STATE_DIM = 9
MEAS_DIM = 7
VX, VY = 7, 8

_F = np.eye(STATE_DIM)
_F[1, VX] = 1.0
_F[2, VY] = 1.0
_H = np.eye(MEAS_DIM, STATE_DIM)


@dataclass(frozen=True)
class TrackerConfig:
    process_noise: float = 0.01
    measurement_noise: float = 1.0
    init_variance: float = 10.0
    init_velocity_variance: float = 100.0
    iou_min: float = 0.01
    death_after: int = 2


@dataclass
class Track:
    track_id: int
    state: np.ndarray
    covariance: np.ndarray
    age: int = 1
    misses: int = 0

    @property
    def box(self):
        c, x, y, h, w, ca, sa = self.state[:7]
        return (x, y, max(h, 1e-3), max(w, 1e-3), float(np.arctan2(sa, ca)))

    def copy(self):
        return Track(self.track_id, self.state.copy(), self.covariance.copy(), self.age, self.misses)


@dataclass
class TrackSet:
    agent_id: int = 0
    timestamp: int = -1
    tracks: list = field(default_factory=list)
    next_id: int = 0

    def copy(self):
        return TrackSet(self.agent_id, self.timestamp, [t.copy() for t in self.tracks], self.next_id)

    def boxes(self):
        if not self.tracks:
            return np.zeros((0, 5))
        return np.array([t.box for t in self.tracks], dtype=float)

    def by_id(self):
        return {t.track_id: t for t in self.tracks}


def kalman_predict(tracks, config=TrackerConfig(), steps=1):
    """Constant-velocity prediction; returns a new TrackSet."""
    out = tracks.copy()
    Q = config.process_noise * np.eye(STATE_DIM)
    for trk in out.tracks:
        for _ in range(steps):
            trk.state = _F @ trk.state
            trk.covariance = _F @ trk.covariance @ _F.T + Q
    out.timestamp = tracks.timestamp + steps
    return out


def rewind(tracks, steps):
    """Move every track back along its velocity by ``steps`` (no covariance change)."""
    out = tracks.copy()
    for trk in out.tracks:
        trk.state[1] -= steps * trk.state[VX]
        trk.state[2] -= steps * trk.state[VY]
    return out


def associate(predicted, detections, iou_min=0.01):
    """Binary track-by-detection matrix from a max-IoU Hungarian assignment."""
    if not 0 <= iou_min <= 1:
        raise ValueError("iou_min must be in [0, 1]")
    n, m = len(predicted.tracks), len(detections)
    out = np.zeros((n, m), dtype=bool)
    if n == 0 or m == 0:
        return out
    ious = iou_matrix(predicted.boxes(), np.array([d.box for d in detections], dtype=float))
    return assignment_from_affinity(ious, iou_min)


def assignment_from_affinity(affinity, iou_min):
    affinity = np.asarray(affinity, dtype=float)
    out = np.zeros(affinity.shape, dtype=bool)
    if affinity.size == 0:
        return out
    rows, cols = linear_sum_assignment(affinity, maximize=True)
    for r, c in zip(rows, cols):
        if affinity[r, c] >= iou_min and affinity[r, c] > 0:
            out[r, c] = True
    return out


def _measurement(det):
    return np.array([det.confidence, det.x, det.y, det.h, det.w, np.cos(det.heading), np.sin(det.heading)])


def kalman_update(tracks, assoc, detections, death_after=None, config=TrackerConfig()):
    """Measurement update, death of stale tracks and birth of new ones."""
    if death_after is None:
        death_after = config.death_after
    assoc = np.asarray(assoc, dtype=bool).reshape(len(tracks.tracks), len(detections))
    if (assoc.sum(axis=0) > 1).any() or (assoc.sum(axis=1) > 1).any():
        raise ValueError("association matrix must be one-to-one")
    R = config.measurement_noise * np.eye(MEAS_DIM)
    out = TrackSet(tracks.agent_id, tracks.timestamp, [], tracks.next_id)

    for i, trk in enumerate(tracks.tracks):
        trk = trk.copy()
        hit = np.nonzero(assoc[i])[0]
        if len(hit):
            z = _measurement(detections[hit[0]])
            # keep the heading pair on the same side as the track to avoid flips
            if np.dot(z[5:7], trk.state[5:7]) < 0:
                z[5:7] = -z[5:7]
            P = trk.covariance
            S = _H @ P @ _H.T + R
            K = np.linalg.solve(S, _H @ P).T
            trk.state = trk.state + K @ (z - _H @ trk.state)
            I_KH = np.eye(STATE_DIM) - K @ _H
            P = I_KH @ P @ I_KH.T + K @ R @ K.T
            trk.covariance = 0.5 * (P + P.T)
            trk.state[3] = max(trk.state[3], 1e-3)
            trk.state[4] = max(trk.state[4], 1e-3)
            trk.age += 1
            trk.misses = 0
            out.tracks.append(trk)
        else:
            trk.age += 1
            trk.misses += 1
            if trk.misses <= death_after:
                out.tracks.append(trk)

    P0 = np.diag([config.init_variance] * MEAS_DIM + [config.init_velocity_variance] * 2)
    for j in np.nonzero(~assoc.any(axis=0))[0]:
        state = np.concatenate([_measurement(detections[j]), [0.0, 0.0]])
        out.tracks.append(Track(out.next_id, state, P0.copy()))
        out.next_id += 1
    return out


class Tracker:
    """Per-agent tracking loop: predict, associate, update."""

    def __init__(self, agent_id=0, config=TrackerConfig()):
        self.config = config
        self.tracks = TrackSet(agent_id)
        self.history = {}  # timestamp -> TrackSet after update

    def step(self, detections, timestamp):
        steps = max(1, timestamp - self.tracks.timestamp) if self.tracks.timestamp >= 0 else 1
        predicted = kalman_predict(self.tracks, self.config, steps)
        predicted.timestamp = timestamp
        assoc = associate(predicted, detections, self.config.iou_min)
        self.tracks = kalman_update(predicted, assoc, detections, config=self.config)
        self.history[timestamp] = self.tracks
        return self.tracks

    def at(self, timestamp):
        """TrackSet after the update at ``timestamp`` (empty if none)."""
        return self.history.get(timestamp, TrackSet(self.tracks.agent_id, timestamp))

    def reported(self):
        """Tracks confirmed by a detection at the latest step."""
        return [t for t in self.tracks.tracks if t.misses == 0]


def min_covariance_eigenvalue(tracks):
    if not tracks.tracks:
        return np.inf
    return min(float(np.linalg.eigvalsh(t.covariance).min()) for t in tracks.tracks)
