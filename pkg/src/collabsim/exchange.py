"""Collaborator selection, wire format, communication accounting and the channel."""

import csv
import math
import struct
from dataclasses import dataclass, field, replace

import numpy as np

from .compression import CodeIndexGrid

MESSAGE_MAGIC = 0x5043  # "CP" little-endian
HEADER = struct.Struct("<HHHIII")  # magic, sender, receiver, timestamp, codebook_version, cell_count
HEADER_BYTES = HEADER.size
CELL_BYTES = 4
RAW_VERSION = 0xFFFFFFFF  # codebook_version marking float32 payloads


@dataclass(frozen=True, eq=False)
class PragmaticMessage:
    sender: int
    receiver: int
    timestamp: int
    codebook_version: int
    cells: np.ndarray  # (K, 2) uint16 rows/cols, lexicographically sorted
    payload: bytes
    payload_bits: int
    arrival_time: int = None

    @property
    def raw(self):
        return self.codebook_version == RAW_VERSION

    def __len__(self):
        return len(self.cells)

    def to_bytes(self):
        head = HEADER.pack(MESSAGE_MAGIC, self.sender, self.receiver, self.timestamp,
                           self.codebook_version, len(self.cells))
        return head + np.ascontiguousarray(self.cells, dtype="<u2").tobytes() + self.payload

    def __eq__(self, other):
        return (isinstance(other, PragmaticMessage) and self.to_bytes() == other.to_bytes()
                and self.payload_bits == other.payload_bits and self.arrival_time == other.arrival_time)


@dataclass(frozen=True)
class ChannelModel:
    latency: int = 0  # whole simulator steps
    drop_probability: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.latency < 0 or not 0.0 <= self.drop_probability <= 1.0:
            raise ValueError(f"invalid channel {self}")


@dataclass(frozen=True)
class CommVolume:
    raw_bytes: int
    per_vector: float  # log2 bytes per selected vector
    payload_bytes: float  # selected vectors times bytes per vector


def build_request(prev_available, shape=None):
    """Cells a collaborator still wants: the complement of what it had last round.

    With no previous round (``prev_available is None``) everything is requested.
    """
    if prev_available is None:
        if shape is None:
            raise ValueError("shape is required for the first round")
        return np.ones(shape, dtype=bool)
    return ~np.asarray(prev_available, dtype=bool)


def build_adjacency(spatial, temporal, requests):
    n = len(spatial)
    A = np.zeros((n, n), dtype=bool)
    for i in range(n):
        offer = np.asarray(spatial[i], bool) & np.asarray(temporal[i], bool)
        if not offer.any():
            continue
        for j in range(n):
            if i != j:
                A[i, j] = bool((offer & np.asarray(requests[j], bool)).any())
    return A


def _sorted_cells(rows, cols, shape):
    rows = np.asarray(rows, dtype=np.int64)
    cols = np.asarray(cols, dtype=np.int64)
    if len(rows) and (rows.min() < 0 or cols.min() < 0 or rows.max() >= shape[0] or cols.max() >= shape[1]):
        raise ValueError("cell outside the grid")
    if max(shape) > 0xFFFF:
        raise ValueError("grid too large for 16-bit cell coordinates")
    order = np.lexsort((cols, rows))
    return order, np.stack([rows[order], cols[order]], axis=1).astype(np.uint16)


def pack_bits(values, nbits):
    """MSB-first bit packing of non-negative integers, ``nbits`` each."""
    values = np.asarray(values, dtype=np.int64).ravel()
    if nbits == 0 or len(values) == 0:
        return b""
    shifts = np.arange(nbits - 1, -1, -1)
    bits = ((values[:, None] >> shifts) & 1).astype(np.uint8).ravel()
    return np.packbits(bits).tobytes()


def unpack_bits(blob, nbits, count):
    if nbits == 0 or count == 0:
        return np.zeros(count, dtype=np.int64)
    bits = np.unpackbits(np.frombuffer(blob, dtype=np.uint8))[:count * nbits].reshape(count, nbits)
    return bits.astype(np.int64) @ (1 << np.arange(nbits - 1, -1, -1))


def pack(indices, sender, receiver, t, codebook):
    """Code-index message.  Payload is ``cells * n_R * ceil(log2 n_L)`` bits."""
    idx = np.asarray(indices.indices, dtype=np.int64).reshape(len(indices), codebook.n_R if len(indices) == 0 else -1)
    if idx.shape[1] != codebook.n_R and len(indices):
        raise ValueError(f"expected {codebook.n_R} indices per cell, got {idx.shape[1]}")
    if idx.size and (idx.min() < 0 or idx.max() >= codebook.n_L):
        raise ValueError("code index out of range")
    order, cells = _sorted_cells(indices.rows, indices.cols, indices.shape)
    nbits = codebook.bits_per_index
    payload = pack_bits(idx[order], nbits)
    return PragmaticMessage(sender, receiver, t, codebook.version_id, cells, payload,
                            len(cells) * codebook.n_R * nbits)


def pack_raw(z, sender, receiver, t):
    """Uncompressed float32 message (channel compressor bypassed)."""
    order, cells = _sorted_cells(z.rows, z.cols, z.shape[:2])
    payload = np.ascontiguousarray(z.values[order], dtype="<f4").tobytes()
    return PragmaticMessage(sender, receiver, t, RAW_VERSION, cells, payload, len(payload) * 8)


def unpack(msg, codebook):
    """Recover the CodeIndexGrid carried by a code-index message."""
    n = len(msg.cells)
    nbits = codebook.bits_per_index
    flat = unpack_bits(msg.payload, nbits, n * codebook.n_R)
    rows = msg.cells[:, 0].astype(np.int64) if n else np.zeros(0, np.int64)
    cols = msg.cells[:, 1].astype(np.int64) if n else np.zeros(0, np.int64)
    return CodeIndexGrid(None, rows, cols, flat.reshape(n, codebook.n_R))


def from_bytes(blob, payload_bits=None):
    magic, sender, receiver, t, version, count = HEADER.unpack_from(blob)
    if magic != MESSAGE_MAGIC:
        raise ValueError("not a message")
    off = HEADER_BYTES
    cells = np.frombuffer(blob, dtype="<u2", count=2 * count, offset=off).reshape(count, 2).astype(np.uint16)
    payload = bytes(blob[off + CELL_BYTES * count:])
    bits = len(payload) * 8 if payload_bits is None else payload_bits
    return PragmaticMessage(sender, receiver, t, version, cells, payload, bits)


def per_vector_metric(codebook=None, channels=None):
    """log2 bytes for one transmitted vector.

    Code indices: ``log2(log2(n_L) * n_R / 8)``; raw float32 features:
    ``log2(C * 32 / 8)``.
    """
    if codebook is not None:
        return math.log2(math.log2(codebook.n_L) * codebook.n_R / 8) if codebook.n_L > 1 else -math.inf
    return math.log2(channels * 32 / 8)


def comm_volume(msg, codebook=None, channels=None):
    raw_bytes = HEADER_BYTES + CELL_BYTES * len(msg.cells) + math.ceil(msg.payload_bits / 8)
    if msg.raw:
        if channels is None:
            channels = len(msg.payload) // (4 * len(msg.cells)) if len(msg.cells) else 0
        bytes_per = channels * 32 / 8
        metric = per_vector_metric(channels=channels) if channels else -math.inf
    else:
        bytes_per = math.log2(codebook.n_L) * codebook.n_R / 8 if codebook.n_L > 1 else 0.0
        metric = per_vector_metric(codebook)
    return CommVolume(raw_bytes, metric, len(msg.cells) * bytes_per)


def log2_bytes(total):
    return math.log2(total) if total > 0 else -math.inf


@dataclass
class Channel:
    """Single queue between all agents; messages leave in arrival order."""

    model: ChannelModel = field(default_factory=ChannelModel)
    in_flight: list = field(default_factory=list)

    def send(self, msgs, now):
        for msg in msgs:
            if msg.arrival_time is not None:
                raise ValueError("message already sent")
            rng = np.random.default_rng([self.model.seed, now, msg.sender, msg.receiver])
            if rng.random() < self.model.drop_probability:
                continue
            self.in_flight.append(replace(msg, arrival_time=now + self.model.latency))

    def deliver(self, now):
        ready = [m for m in self.in_flight if m.arrival_time <= now]
        self.in_flight = [m for m in self.in_flight if m.arrival_time > now]
        return ready


def transmit(msgs, channel, now, in_flight=()):
    """Send ``msgs`` at ``now``; returns (delivered now, still in flight)."""
    ch = Channel(channel, list(in_flight))
    ch.send(msgs, now)
    return ch.deliver(now), ch.in_flight


LEDGER_FIELDS = ["t", "sender", "receiver", "cells", "raw_bytes", "paper_metric"]


@dataclass(frozen=True)
class LedgerEntry:
    t: int
    sender: int
    receiver: int
    cells: int
    raw_bytes: int
    paper_metric: float
    payload_bits: int = 0
    payload_bytes: float = 0.0


def write_ledger_csv(entries, fh):
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(LEDGER_FIELDS)
    for e in entries:
        writer.writerow([e.t, e.sender, e.receiver, e.cells, e.raw_bytes, f"{e.paper_metric:.6f}"])
