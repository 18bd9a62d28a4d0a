"""A hand-built rr schedule for a 5-node M(2) matrix that beats MulP.

The matrix splits each row evenly between its two ring neighbours,
``M[l, l+1] = M[l, l-1] = 1/2`` (indices mod 5).  Each demand cell sends
1/3 of a unit directly and 1/6 through a relay whose link to the
destination is empty, so no second hop lands on a busy link:

* flow l -> l+1 is relayed through l+3
* flow l -> l-1 is relayed through l+2

Over the plain rr cycle with slots of 1/6 every link carries exactly 1/6
per cycle: the demand links their direct share, the empty links a first
hop in cycle one and a second hop in cycle two.  Two cycles of four slots
give a completion time of 4/3, below MulP's 2 - 2/5.
"""
from __future__ import annotations

import numpy as np

from .schedule import TopologySchedule, TrafficSchedule
from .systems import rr_cycle_configurations

N = 5
SLOT = 1.0 / 6.0

# (destination offset, relay offset) per demand cell of row l
RELAYS = ((1, 3), (-1, 2))


def ring_m2(n: int = N) -> np.ndarray:
    M = np.zeros((n, n))
    rows = np.arange(n)
    M[rows, (rows + 1) % n] = 0.5
    M[rows, (rows - 1) % n] = 0.5
    return M


def ring_m2_schedule() -> tuple[np.ndarray, TopologySchedule, TrafficSchedule]:
    """Return ``(M, topology, traffic)`` for the 5-node fixture."""
    n = N
    M = ring_m2(n)
    C = rr_cycle_configurations(n)
    S = TopologySchedule(np.vstack([C, C]), np.full(2 * (n - 1), SLOT),
                         np.zeros(2 * (n - 1)))

    def slot_of(x, y, cycle):
        return cycle * (n - 1) + (y - x - 1) % n

    direct, first, second = [], [], []
    for l in range(n):
        for d_off, q_off in RELAYS:
            d, q = (l + d_off) % n, (l + q_off) % n
            for cycle in (0, 1):
                direct.append((slot_of(l, d, cycle), l, d, SLOT))
            first.append((slot_of(l, q, 0), l, d, q, SLOT))
            second.append((slot_of(q, d, 1), l, d, q, SLOT))
    return M, S, TrafficSchedule(n, len(S), direct, first, second)
