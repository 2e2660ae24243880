"""
Comparing fault detection of pairwise and code-aware suites
===========================================================

Run the whole pipeline on a fixture whose seeded faults include one that
only a specific 3-way value combination reveals.
"""
import tempfile
from pathlib import Path

from cacit import bundled
from cacit.pipeline import config_from_dict, run_pipeline

with tempfile.TemporaryDirectory() as tmp:
    cfg = config_from_dict({"adapter": {"fixture": str(bundled("interaction.yaml"))}, "output": tmp})
    print(run_pipeline(cfg))
    print(sorted(p.name for p in Path(tmp).iterdir()))

# the efficiency arithmetic on report-level counts
from cacit.evaluate import compare, efficiency, synthetic_report

two_way = synthetic_report("2-way", 415, 1512, 19)
mixed = synthetic_report("mixed", 516, 1512, 62)
print(f"2-way efficiency {efficiency(two_way):.2f}, mixed {efficiency(mixed):.2f}")
print(f"relative change {compare(two_way, mixed).relative_efficiency_change:+.1%}")
