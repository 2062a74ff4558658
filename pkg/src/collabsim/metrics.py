"""Detection AP, CLEAR-MOT scores and trade-off records."""

import csv
from dataclasses import dataclass, fields

import numpy as np
from scipy.optimize import linear_sum_assignment

from .geometry import iou_matrix


@dataclass(frozen=True)
class PRPoint:
    threshold: float
    precision: float
    recall: float


@dataclass(frozen=True)
class TrackingReport:
    mota: float
    motp: float
    fn: int
    fp: int
    idsw: int
    gt_count: int
    matches: int = 0


@dataclass(frozen=True)
class TradeoffRecord:
    budget: object
    raw_bytes: float
    paper_metric: float
    ap50: float
    ap70: float
    mota: float
    motp: float


TRADEOFF_FIELDS = [f.name for f in fields(TradeoffRecord)]


def _as_boxes(items):
    if len(items) == 0:
        return np.zeros((0, 5))
    return np.array([getattr(o, "box", o) for o in items], dtype=float).reshape(-1, 5)


def pr_curve(dets, gt, iou_thr):
    """Precision/recall after each detection in confidence order.

    ``dets`` is a list of ``(DetectionBox, frame_key)``; ``gt`` maps a frame
    key to a list of objects (anything with ``.box``), or is a list of
    GroundTruthFrame keyed by timestamp.
    """
    return _pr_curves(dets, gt, (iou_thr,))[0]


def _pr_curves(dets, gt, thresholds):
    # one IoU matrix per frame, shared by every threshold
    for thr in thresholds:
        if not 0 < thr <= 1:
            raise ValueError("iou_thr must be in (0, 1]")
    gt = _gt_index(gt)
    n_gt = sum(len(v) for v in gt.values())
    if n_gt == 0:
        raise ValueError("average precision is undefined without ground truth")
    order = sorted(range(len(dets)), key=lambda k: (-dets[k][0].confidence, k))
    by_frame = {}
    for k in order:
        by_frame.setdefault(dets[k][1], []).append(k)
    frames = []
    for key, idx in by_frame.items():
        objs = gt.get(key, [])
        if objs:
            frames.append((idx, iou_matrix(_as_boxes([dets[k][0] for k in idx]), _as_boxes(objs))))

    conf = [dets[k][0].confidence for k in order]
    curves = []
    for thr in thresholds:
        tp = np.zeros(len(dets), dtype=bool)
        for idx, ious in frames:
            taken = np.zeros(ious.shape[1], dtype=bool)
            for row, k in enumerate(idx):
                cand = np.where(taken, -1.0, ious[row])
                j = int(np.argmax(cand))
                if cand[j] >= thr:
                    taken[j] = True
                    tp[k] = True
        flags = tp[order]
        ctp = np.cumsum(flags)
        cfp = np.cumsum(~flags)
        precision = ctp / np.maximum(ctp + cfp, 1)
        recall = ctp / n_gt
        curves.append([PRPoint(float(c), float(p), float(r)) for c, p, r in zip(conf, precision, recall)])
    return curves


def _gt_index(gt):
    if isinstance(gt, dict):
        return gt
    return {frame.timestamp: list(frame.objects) for frame in gt}


def _area(curve):
    if not curve:
        return 0.0
    rec = np.concatenate([[0.0], [p.recall for p in curve], [1.0]])
    prec = np.concatenate([[0.0], [p.precision for p in curve], [0.0]])
    prec = np.maximum.accumulate(prec[::-1])[::-1]
    steps = np.nonzero(rec[1:] != rec[:-1])[0]
    return float(np.sum((rec[steps + 1] - rec[steps]) * prec[steps + 1]))


def average_precision(dets, gt, iou_thr=0.5):
    """All-point interpolated AP."""
    return _area(pr_curve(dets, gt, iou_thr))


def average_precisions(dets, gt, thresholds=(0.5, 0.7)):
    """AP at several IoU thresholds, computing overlaps once."""
    return [_area(c) for c in _pr_curves(dets, gt, tuple(thresholds))]


def clear_mot(tracks, gt, dist_thr=2.0):
    """CLEAR-MOT counts over one sequence.

    ``tracks`` maps frame key to a list of ``(track_id, box)``; ``gt`` maps
    frame key to objects with ``.id`` and ``.box`` (or is a list of frames).
    Matches carried over from the previous frame are kept while they stay
    inside the gate; the rest are assigned by Hungarian on centre distance.
    """
    if dist_thr <= 0:
        raise ValueError("dist_thr must be positive")
    gt = _gt_index(gt)
    if sum(len(v) for v in gt.values()) == 0:
        raise ValueError("CLEAR-MOT is undefined without ground truth")
    fn = fp = idsw = n_gt = 0
    iou_sum = 0.0
    n_match = 0
    previous = {}  # gt id -> track id it was last matched to
    for key in sorted(set(gt) | set(tracks)):
        objs = gt.get(key, [])
        hyps = tracks.get(key, [])
        n_gt += len(objs)
        gboxes = _as_boxes(objs)
        hboxes = np.array([b for _, b in hyps], dtype=float).reshape(-1, 5)
        hids = [tid for tid, _ in hyps]
        dist = np.hypot(gboxes[:, None, 0] - hboxes[None, :, 0], gboxes[:, None, 1] - hboxes[None, :, 1])

        pairs = {}
        used_h = set()
        for g, obj in enumerate(objs):
            tid = previous.get(obj.id)
            if tid in hids:
                h = hids.index(tid)
                if dist[g, h] <= dist_thr and h not in used_h:
                    pairs[g] = h
                    used_h.add(h)
        free_g = [g for g in range(len(objs)) if g not in pairs]
        free_h = [h for h in range(len(hyps)) if h not in used_h]
        if free_g and free_h:
            sub = dist[np.ix_(free_g, free_h)]
            cost = np.where(sub <= dist_thr, sub, 1e6)
            rr, cc = linear_sum_assignment(cost)
            for r, c in zip(rr, cc):
                if sub[r, c] <= dist_thr:
                    pairs[free_g[r]] = free_h[c]

        for g, h in pairs.items():
            gid = objs[g].id
            if gid in previous and previous[gid] != hids[h]:
                idsw += 1
            previous[gid] = hids[h]
        if pairs:
            gi = list(pairs)
            hi = [pairs[g] for g in gi]
            ious = np.diag(iou_matrix(gboxes[gi], hboxes[hi]))
            iou_sum += float(ious.sum())
            n_match += len(pairs)
        fn += len(objs) - len(pairs)
        fp += len(hyps) - len(pairs)

    mota = 1.0 - (fn + fp + idsw) / n_gt
    motp = iou_sum / n_match if n_match else 0.0
    return TrackingReport(mota, motp, fn, fp, idsw, n_gt, n_match)


def merge_reports(reports):
    """Pool CLEAR-MOT counts from several sequences into one report."""
    fn = sum(r.fn for r in reports)
    fp = sum(r.fp for r in reports)
    idsw = sum(r.idsw for r in reports)
    n_gt = sum(r.gt_count for r in reports)
    n_match = sum(r.matches for r in reports)
    motp = sum(r.motp * r.matches for r in reports) / n_match if n_match else 0.0
    mota = 1.0 - (fn + fp + idsw) / n_gt if n_gt else 0.0
    return TrackingReport(mota, motp, fn, fp, idsw, n_gt, n_match)


def assemble_tradeoff(runs):
    """One record per setting, sorted by bytes ascending.

    Each run is a mapping with ``budget``, ``raw_bytes``, ``paper_metric``,
    ``ap50``, ``ap70``, ``mota`` and ``motp``.
    """
    records = [TradeoffRecord(**{k: run[k] for k in TRADEOFF_FIELDS}) for run in runs]
    return sorted(records, key=lambda r: r.raw_bytes)


def write_tradeoff_csv(records, fh):
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(TRADEOFF_FIELDS)
    for r in records:
        writer.writerow([r.budget] + [f"{getattr(r, k):.6f}" for k in TRADEOFF_FIELDS[1:]])


def read_tradeoff_csv(fh):
    rows = list(csv.DictReader(fh))
    return [TradeoffRecord(row["budget"], *(float(row[k]) for k in TRADEOFF_FIELDS[1:])) for row in rows]
