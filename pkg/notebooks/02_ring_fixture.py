"""A 5-node ring matrix where a hand-built rr schedule beats MulP.

MulP relays every cell through every intermediate node and needs
2 - 2/n cycles of work.  On the ring most relays are free: the link from
the relay to the destination is otherwise idle.  The fixture exploits that
and finishes in 4/3.

Run:  python3 notebooks/02_ring_fixture.py
"""
from rdcn import analytics as an
from rdcn.fixtures import ring_m2_schedule
from rdcn.schedule import (completion_time, link_loads, skewness, verify_complete,
                           verify_feasible)

M, S, T = ring_m2_schedule()
n = M.shape[0]
print("demand matrix:\n", M)
print("feasible:", bool(verify_feasible(S, T)), " complete:", verify_complete(M, T))
print(f"DCT {completion_time(S):.4f}  vs MulP {an.dct_rr_mulp(n, M.sum()):.4f}")
print(f"skewness {skewness(T):.4f}")

# Every link carries exactly one slot's worth in each cycle.
loads = link_loads(T)
print("per-cycle link loads (first cycle):\n", loads[: n - 1].sum(0).round(4))

# Empty cells that would land a second hop on a busy link.
for cell in an.find_collision_cells(M)[:5]:
    print(cell)
