"""Throughput against flows per node (a reduced version of the full sweep).

Sparse matrices favour BvN, dense ones favour rr; the composite tracks
the better of the two and beats both in the middle.  The full sweep
uses 30 repeats and every grid point up to 4 n^2:

    rdcn sweep flows --out flows.csv

Run:  python3 notebooks/04_flow_sweep.py
"""
from rdcn.experiments import SweepSpec, run_sweep, worst_throughput

spec = SweepSpec("flows", n=32, repeats=3)
rows = run_sweep(spec)
print(f"{'flows':>6} {'bvn':>7} {'rr':>7} {'comp':>7}")
by_x = {}
for r in rows:
    by_x.setdefault(r["x"], {})[r["system"]] = r["throughput_mean"]
for x, t in by_x.items():
    print(f"{x:>6} {t['bvn']:7.3f} {t['rr']:7.3f} {t['comp']:7.3f}")
print("worst-case throughput:", {k: round(v, 4) for k, v in worst_throughput(rows).items()})
