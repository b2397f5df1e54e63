"""Two carriers, four orders, one profitable swap.

Each carrier owns an order sitting in the other's neighbourhood.  Handing a
single order over never pays for the receiver, so one-directional exchange
finds nothing; solving the two vehicles jointly finds the swap.

    python demos/toy_swap.py
"""

from gatx import bench, gat, oph
from gatx.model import lsp_profits
from gatx.pdptw import initial_solution

inst = bench.toy_instance()
init = initial_solution(inst)

print("baseline schedules")
for v, s in enumerate(init.schedules):
    print(f"  vehicle {v}: stops {list(s.stops)}")
print("baseline profits", lsp_profits(init, inst))

one_way = oph.run(inst, oph.OphConfig(max_iterations=3), init)
print(f"\none-directional exchange: welfare {one_way.history[-1].welfare:.2f}%")

joint = gat.run(inst, gat.GatConfig(max_iterations=3), init)
print(f"joint pair re-solve:      welfare {joint.history[-1].welfare:.2f}%")
for v, s in enumerate(joint.final.schedules):
    print(f"  vehicle {v}: stops {list(s.stops)}")
print("final profits", lsp_profits(joint.final, inst))
