"""Both exchange algorithms on a few random six-carrier instances.

Every run starts from the same baseline routing, so the welfare numbers are
directly comparable.  Expect a few seconds per seed for the pair method and
longer for the package method.

    python demos/mock_compare.py [SEEDS]
"""

import sys

from gatx import bench, gat, oph
from gatx.pdptw import initial_solution
from gatx.validate import validate_solution

seeds = range(int(sys.argv[1]) if len(sys.argv) > 1 else 3)
print(f"{'seed':>4} {'pkg welf':>9} {'pkg s':>7} {'pair welf':>10} {'pair s':>7}")
for seed in seeds:
    inst = bench.generate_mock_small(seed)
    init = initial_solution(inst, seed=seed)
    a = oph.run(inst, oph.OphConfig(max_iterations=5, seed=seed), init)
    b = gat.run(inst, gat.GatConfig(max_iterations=5, seed=seed), init)
    assert not validate_solution(inst, a.final) and not validate_solution(inst, b.final)
    print(f"{seed:>4} {a.history[-1].welfare:>8.2f}% {a.seconds:>7.1f} "
          f"{b.history[-1].welfare:>9.2f}% {b.seconds:>7.1f}")
