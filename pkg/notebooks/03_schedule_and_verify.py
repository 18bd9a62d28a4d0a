"""Build a schedule for a realistic traffic matrix and check it.

The generator mixes a few large flows with many small ones, then
normalises to a doubly stochastic matrix.  Each system produces a
topology schedule (matchings and hold times) and a traffic schedule
(what crosses each link in each slot).  The verifier checks link
capacity, that relayed traffic arrives before it leaves, and that all
demand is delivered.

Run:  python3 notebooks/03_schedule_and_verify.py
"""
from rdcn.matrix import metrics
from rdcn.schedule import skewness, verify_epsilon, verify_feasible
from rdcn.systems import SystemConfig, run
from rdcn.traffic import TmParams, generate_tm

M = generate_tm(TmParams(t_l=0.2, n_f=64, c_l=0.7, n=32, seed=7))
m = metrics(M)
print(f"n=32 weight={m.weight:.3f} max={m.max_entry:.4f} sparsity={m.sparsity:.3f}")

cfg = SystemConfig(R_b=0.01)
for system in ("bvn-direct", "rr-direct", "rr-mulp", "rr-upper", "comp-pivot", "comp-pivot-plus"):
    res = run(system, M, cfg)
    feas = verify_feasible(res.topology, res.traffic)
    done = verify_epsilon(M, res.traffic, cfg.eps)
    print(f"{system:>15}: DCT {res.claimed_dct:.4f}  feasible={feas.ok}  "
          f"delivered={done}  skewness={skewness(res.traffic):.3f}")
