"""Merged pickup-and-delivery files: two carriers sharing one region.

Two benchmark files are overlaid, one shifted by a fixed offset, and each file
becomes a carrier.  Per iteration welfare shows how quickly the pair method
converges.  A single configuration takes from seconds to a couple of minutes.

    python demos/merged_benchmarks.py [K ...]
"""

import sys

from gatx import bench, gat, oph
from gatx.pdptw import initial_solution

picks = [int(k) for k in sys.argv[1:]] or [0]
for k in picks:
    spec = bench.MERGE_CONFIGS[k]
    inst = bench.offset_merge(spec)
    init = initial_solution(inst)
    a = oph.run(inst, oph.OphConfig(max_iterations=1), init)
    b = gat.run(inst, gat.GatConfig(max_iterations=5), init)
    curve = ", ".join(f"{h.welfare:.2f}" for h in b.history)
    print(f"[{k}] {inst.name}: {len(inst.orders)} orders")
    print(f"    package exchange  {a.history[-1].welfare:.2f}%  in {a.seconds:.1f}s")
    print(f"    pair re-solve     {b.history[-1].welfare:.2f}%  in {b.seconds:.1f}s  (per iteration: {curve})")
