"""How the three systems fare on M(v) as the number of matchings grows.

Every M(v) has v disjoint derangements of weight 1/v each.  A BvN fabric
pays one reconfiguration per matching, so it slows down linearly in v.
An rr fabric pays nothing per matching but has to relay traffic once the
matrix is sparse.  The composite picks whichever split is cheaper.

Run:  python3 notebooks/01_mv_case_study.py
"""
import numpy as np

from rdcn import analytics as an
from rdcn.bvn import decompose
from rdcn.matrix import make_mv
from rdcn.systems import SystemConfig, evaluate_dcts

n, R_b = 64, 0.015
cfg = SystemConfig(R_b=R_b, eps=1e-12)

print(f"{'v':>3} {'bvn':>8} {'rr':>8} {'comp':>8} {'comp closed form':>17}")
rows = []
for v in range(1, n):
    M = make_mv(n, v, seed=v)
    res = evaluate_dcts(M, cfg, decompose(M, cfg.eps))
    rows.append((v, res.bvn, res.rr, res.comp))
    if v % 6 == 1 or v in (39, 40, 63):
        print(f"{v:>3} {res.bvn:8.4f} {res.rr:8.4f} {res.comp:8.4f} "
              f"{an.dct_comp_mv(v, n, R_b):17.4f}")

rows = np.array(rows)
for name, col in (("bvn", 1), ("rr", 2), ("comp", 3)):
    k = int(np.argmax(rows[:, col]))
    print(f"worst {name}: {rows[k, col]:.4f} at v={int(rows[k, 0])}")

# The composite's worst point sits where the BvN cost meets rr Direct.
print(f"crossing with rr Direct: v = {an.v_ddot(n, R_b):.2f}")
print(f"composite gain over the better single fabric: psi = {an.psi(n, R_b):.4f}")
