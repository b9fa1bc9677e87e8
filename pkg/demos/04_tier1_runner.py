"""Tier-1 comparison on the bundled synthetic set, written to ./demo_out."""
import json
from pathlib import Path

from qsvmbench.runner import ExperimentConfig, Runner

cfg = ExperimentConfig.from_dict({
    "embedding_paths": {"synthetic": {"seed_0": "bundled:synthetic_n500_d32.csv"}},
    "qubit_list": [4, 8],
    "bootstrap": {"resamples": 2000, "seed": 42},
    "output_dir": "demo_out",
})
runner = Runner(cfg)
records, summary = runner.run_tier1()
path = runner.write(records, summary)

for rec in records:
    print(f"q={rec.q} {rec.method:7s} F1={rec.metrics.f1_minority:.3f} "
          f"acc={rec.metrics.accuracy:.3f} eff_rank={rec.spectrum.eff_rank:.2f}")
for c in summary["configs"]:
    print(f"q={c['q']}: {c['verdict']} (delta F1 {c['delta_f1']:+.3f}, "
          f"p={c['pooled_bootstrap']['p_value']:.3g})")

print("wrote", path, "and", sorted(p.name for p in Path("demo_out").iterdir()))
print(json.dumps(summary["groups"][0], indent=1)[:400])
