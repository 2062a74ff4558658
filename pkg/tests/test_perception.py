import numpy as np
import pytest

from collabsim import perception, scenario
from collabsim.geometry import iou_matrix
from collabsim.perception import DenseHeatmap
from collabsim.scenario import AgentPose, GroundTruthFrame, Observation, ObjectState, WorldConfig

CFG = WorldConfig(grid_height=20, grid_width=24, clutter_rate=0.0)


def obs_with(hits, heading=0.3):
    vis = np.ones(CFG.shape, dtype=bool)
    r = np.array([h[0] for h in hits], dtype=int)
    c = np.array([h[1] for h in hits], dtype=int)
    return Observation(0, 0, vis, r, c, np.ones(len(hits)), np.full(len(hits), heading))


def test_no_hits_encode_to_zero():
    assert not perception.encode(obs_with([]), CFG).values.any()


def test_single_hit_peaks_at_source():
    v = perception.encode(obs_with([(7, 9)]), CFG).values
    for ch in range(v.shape[-1]):
        assert np.unravel_index(np.argmax(v[..., ch]), v.shape[:2]) == (7, 9)


def test_encoding_is_linear_in_hits():
    a = perception.encode(obs_with([(5, 5)]), CFG).values
    b = perception.encode(obs_with([(6, 8)]), CFG).values
    ab = perception.encode(obs_with([(5, 5), (6, 8)]), CFG).values
    assert np.allclose(ab, a + b)


def test_invisible_cells_carry_nothing():
    obs = obs_with([(5, 5)])
    vis = obs.visible_cells.copy()
    vis[:, :5] = False
    feat = perception.encode(Observation(0, 0, vis, obs.hit_rows, obs.hit_cols, obs.hit_strength, obs.hit_heading),
                             CFG).values
    assert not feat[:, :5].any()


def test_zero_features_give_zero_confidence():
    heat = perception.decode(np.zeros((4, 5, perception.N_CHANNELS)))
    assert not perception.confidence_map(heat).any()


def _encoded_object(heading):
    obj = ObjectState(0, 6.0, 5.0, 4.0, 2.0, heading, 0, 0)
    pose = AgentPose(0, 6.0, 9.5, 20.0)
    obs = scenario.sense(GroundTruthFrame(0, (obj,)), pose, CFG)
    return perception.encode(obs, CFG)


@pytest.mark.parametrize("heading", [-2.5, -0.7, 0.0, 1.1, 2.9])
def test_single_object_decodes_to_local_peak_with_heading(heading):
    heat = perception.decode(_encoded_object(heading), CFG.cell_size)
    conf = perception.confidence_map(heat)
    r, c = np.unravel_index(np.argmax(conf), conf.shape)
    window = conf[max(r - 1, 0):r + 2, max(c - 1, 0):c + 2]
    assert conf[r, c] >= window.max()
    est = np.arctan2(heat.values[r, c, 6], heat.values[r, c, 5])
    err = abs((est - heading + np.pi) % (2 * np.pi) - np.pi)
    assert err <= 2 * np.pi / perception.N_BUCKETS


def test_confidence_is_projection():
    heat = perception.decode(_encoded_object(0.4), CFG.cell_size)
    assert perception.confidence_map(heat).max() == heat.values[..., 0].max()


def test_object_cells_beat_background_median():
    cfg = WorldConfig()
    wins = 0
    for seed in range(20):
        w = WorldConfig(seed=seed)
        frame = scenario.generate_world(w)[0]
        pose = scenario.place_agents(w)[0]
        obs = scenario.sense(frame, pose, w, seed)
        conf = perception.confidence_map(perception.decode(perception.encode(obs, w), w.cell_size))
        obj = np.zeros(cfg.shape, dtype=bool)
        obj[obs.hit_rows[obs.hit_strength == 1.0], obs.hit_cols[obs.hit_strength == 1.0]] = True
        if obj.any():
            wins += conf[obj].mean() > np.median(conf[~obj])
    assert wins == 20


def test_nms_empty_and_duplicate():
    assert perception.nms(DenseHeatmap(np.zeros((3, 3, 7)))) == []
    v = np.zeros((1, 2, 7))
    v[0, :, :] = [0.0, 1.0, 1.0, 4.0, 2.0, 1.0, 0.0]
    v[0, 0, 0], v[0, 1, 0] = 0.9, 0.8
    out = perception.nms(DenseHeatmap(v))
    assert len(out) == 1 and out[0].confidence == pytest.approx(0.9)


def brute_nms(boxes, conf, thr):
    """Keep a box iff no higher-ranked kept box overlaps it by ``thr`` or more."""
    order = sorted(range(len(boxes)), key=lambda k: (-conf[k], k))
    kept = []
    for k in order:
        if all(iou_matrix(boxes[k:k + 1], boxes[j:j + 1])[0, 0] < thr for j in kept):
            kept.append(k)
    return kept


def test_nms_matches_brute_force_on_200_candidate_sets():
    rng = np.random.default_rng(0)
    for trial in range(200):
        n = 20
        v = np.zeros((1, n, 7))
        conf = rng.uniform(0.51, 1.0, n)
        if trial % 4 == 0:
            conf[rng.integers(0, n, 5)] = 0.75  # exercise ties
        heading = rng.uniform(-np.pi, np.pi, n)
        v[0, :, 0] = conf
        v[0, :, 1] = rng.uniform(0, 8, n)
        v[0, :, 2] = rng.uniform(0, 8, n)
        v[0, :, 3] = rng.uniform(1, 4, n)
        v[0, :, 4] = rng.uniform(0.5, 2, n)
        v[0, :, 5], v[0, :, 6] = np.cos(heading), np.sin(heading)
        got = perception.nms(DenseHeatmap(v), 0.5, 0.1)
        boxes = np.column_stack([v[0, :, 1], v[0, :, 2], v[0, :, 3], v[0, :, 4], np.arctan2(v[0, :, 6], v[0, :, 5])])
        want = brute_nms(boxes, conf, 0.1)
        assert [(d.x, d.y) for d in got] == [(boxes[k, 0], boxes[k, 1]) for k in want]


def test_nms_large_candidate_path_agrees():
    rng = np.random.default_rng(1)
    n = 600
    v = np.zeros((20, 30, 7))
    v[..., 0] = rng.uniform(0.0, 1.0, (20, 30))
    v[..., 1] = rng.uniform(0, 30, (20, 30))
    v[..., 2] = rng.uniform(0, 20, (20, 30))
    v[..., 3], v[..., 4], v[..., 5] = 4.0, 2.0, 1.0
    assert (v[..., 0] > 0.0).sum() >= n - 1
    got = perception.nms(DenseHeatmap(v), 0.0, 0.1)
    rows, cols = np.nonzero(v[..., 0] > 0.0)
    boxes = np.column_stack([v[rows, cols, 1], v[rows, cols, 2], v[rows, cols, 3], v[rows, cols, 4],
                             np.zeros(len(rows))])
    want = brute_nms(boxes, v[rows, cols, 0], 0.1)
    assert [(d.x, d.y) for d in got] == [(boxes[k, 0], boxes[k, 1]) for k in want]


def test_peak_window_restricts_candidates():
    v = np.zeros((1, 5, 7))
    v[0, :, 0] = [0.6, 0.9, 0.7, 0.8, 0.6]
    v[0, :, 1] = [0, 10, 20, 30, 40]
    v[0, :, 3:6] = [4.0, 2.0, 1.0]
    assert [d.x for d in perception.nms(DenseHeatmap(v), 0.5, 0.1, peak_window=3)] == [10.0, 30.0]
    assert len(perception.nms(DenseHeatmap(v), 0.5, 0.1)) == 5


def test_threshold_validation():
    with pytest.raises(ValueError):
        perception.nms(DenseHeatmap(np.zeros((2, 2, 7))), 1.5)
