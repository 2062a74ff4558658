"""How much does each extra byte buy?  Sweep the per-agent cell budget.

Writes demo_out/sweep_budget.csv plus plot_tradeoff.py, which renders the
curve when matplotlib is available.
"""
from dataclasses import replace

from collabsim import ExperimentConfig, sweep

cfg = replace(ExperimentConfig(), budgets=(0.0, 0.002, 0.01, 0.05, 0.2, 1.0), output_dir="demo_out")
records = sweep(cfg, "budget", seeds=range(3))
print(f"{'budget':>8} {'KiB':>9} {'log2 B':>7} {'AP@0.5':>7} {'AP@0.7':>7} {'MOTA':>7}")
for r in records:
    print(f"{float(r.budget):>8.1%} {r.raw_bytes / 1024:>9.1f} {r.paper_metric:>7.2f} "
          f"{r.ap50:>7.3f} {r.ap70:>7.3f} {r.mota:>7.3f}")
print("\ncurves: python3 demo_out/plot_tradeoff.py")
