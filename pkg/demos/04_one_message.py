"""Follow one message from a sender's feature map onto the wire and back."""
import numpy as np

from collabsim import ExperimentConfig, calibrate_codebook, compression, exchange, perception, scenario, utilization

cfg = ExperimentConfig()
world = cfg.world
book = calibrate_codebook(cfg)
print(f"codebook: {book.n_L} codes of dimension {book.dim}, {book.bits_per_index} bits per index")

frame = scenario.generate_world(world)[5]
sender, receiver = scenario.place_agents(world)[:2]
feat = perception.encode(scenario.sense(frame, sender, world), world)
conf = perception.confidence_map(perception.decode(feat, world.cell_size))

spatial = compression.spatial_select(conf, cfg.cells_for(0.01))
everything = np.ones(world.shape, dtype=bool)
z = compression.select_content(feat, spatial, everything, everything)
msg = exchange.pack(compression.quantize(z, book), sender.agent_id, receiver.agent_id, frame.timestamp, book)
raw = exchange.pack_raw(z, sender.agent_id, receiver.agent_id, frame.timestamp)

for name, m in (("code indices", msg), ("raw float32", raw)):
    vol = exchange.comm_volume(m, book, channels=perception.N_CHANNELS)
    print(f"{name:>13}: {len(m)} cells, {m.payload_bits} payload bits, {vol.raw_bytes} bytes on the wire, "
          f"per-vector metric {vol.per_vector:g}")

back = utilization.decompress(exchange.from_bytes(msg.to_bytes(), msg.payload_bits), book, grid=world.shape)
err = np.linalg.norm(back.values - z.values, axis=1) / np.maximum(np.linalg.norm(z.values, axis=1), 1e-12)
print(f"relative reconstruction error per cell: median {np.median(err):.3f}, max {err.max():.3f}")
