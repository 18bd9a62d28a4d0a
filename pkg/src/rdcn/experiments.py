"""Parameter sweeps comparing the three systems, written as CSV.

Each sweep point is evaluated over ``repeats`` independent matrices; run
``i`` at grid index ``k`` draws its matrix from the seed ``(seed, k, i)``
so any point can be reproduced on its own.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .analytics import throughput
from .bvn import decompose
from .matrix import make_mv, metrics
from .systems import SystemConfig, evaluate_dcts
from .traffic import TmParams, generate_tm

EXPERIMENTS = ("mv", "flows", "cl-sparse", "cl-dense", "tl-sparse", "tl-dense")
SYSTEM_NAMES = ("bvn", "rr", "comp")
SPARSE_FLOWS = 64
DENSE_FLOWS = 3000
FRACTION_GRID = tuple(round(0.1 * i, 1) for i in range(1, 10))


def flows_grid(n: int) -> list[int]:
    """4, 8, 16, ... up to 4 n^2."""
    out, x = [], 4
    while x <= 4 * n * n:
        out.append(x)
        x *= 2
    return out


@dataclass(frozen=True)
class SweepSpec:
    experiment: str
    n: int = 64
    R_b: float | None = None     # 0.015 for mv, 0.01 otherwise
    eta: float = 1.0
    r: float = 1.0
    repeats: int = 30
    seed: int = 0
    eps: float = 1e-4
    literal: bool = False

    @property
    def rb(self) -> float:
        if self.R_b is not None:
            return self.R_b
        return 0.015 if self.experiment == "mv" else 0.01

    def config(self) -> SystemConfig:
        return SystemConfig(r=self.r, R_b=self.rb, eta=self.eta, eps=self.eps)

    def grid(self) -> list:
        e = self.experiment
        if e == "mv":
            return list(range(1, self.n))
        if e == "flows":
            return flows_grid(self.n)
        if e.startswith(("cl-", "tl-")):
            return list(FRACTION_GRID)
        raise ValueError(f"unknown experiment {e!r}")

    def matrix(self, x, k: int, i: int) -> np.ndarray:
        seed = [self.seed, k, i]
        e = self.experiment
        if e == "mv":
            return make_mv(self.n, int(x), np.random.default_rng(seed).integers(2**32))
        flows = {"flows": x, "cl-sparse": SPARSE_FLOWS, "tl-sparse": SPARSE_FLOWS,
                 "cl-dense": DENSE_FLOWS, "tl-dense": DENSE_FLOWS}[e]
        t_l = x if e.startswith("tl-") else 0.2
        c_l = x if e.startswith("cl-") else 0.7
        return generate_tm(TmParams(t_l, int(flows), c_l, self.n, seed=seed,
                                    literal=self.literal))


def run_sweep(spec: SweepSpec, progress=None) -> list[dict]:
    """One row per (x, system) with mean/std DCT, throughput and matrix metrics."""
    if spec.experiment not in EXPERIMENTS:
        raise ValueError(f"unknown experiment {spec.experiment!r}")
    cfg = spec.config()
    rows = []
    for k, x in enumerate(spec.grid()):
        dcts = {s: [] for s in SYSTEM_NAMES}
        mets = []
        for i in range(spec.repeats):
            M = spec.matrix(x, k, i)
            d = decompose(M, cfg.eps, cfg.strategy)
            res = evaluate_dcts(M, cfg, d)
            dcts["bvn"].append(res.bvn)
            dcts["rr"].append(res.rr)
            dcts["comp"].append(res.comp)
            mets.append(metrics(M, len(d)))
        met = {
            "weight": float(np.mean([m.weight for m in mets])),
            "max_entry": float(np.mean([m.max_entry for m in mets])),
            "sparsity": float(np.mean([m.sparsity for m in mets])),
            "variation_distance": float(np.mean([m.variation_distance for m in mets])),
            "bvn_length": float(np.mean([m.bvn_length for m in mets])),
        }
        for s in SYSTEM_NAMES:
            a = np.asarray(dcts[s])
            tp = np.array([throughput(v) for v in a])
            rows.append({"x": x, "system": s,
                         "dct_mean": float(a.mean()), "dct_std": float(a.std()),
                         "throughput_mean": float(tp.mean()),
                         "throughput_min": float(tp.min()), **met})
        if progress is not None:
            progress(k, x)
    return rows


COLUMNS = ("x", "system", "dct_mean", "dct_std", "throughput_mean", "throughput_min",
           "weight", "max_entry", "sparsity", "variation_distance", "bvn_length")


def rows_to_csv(rows: list[dict]) -> str:
    buf = io.StringIO(newline="")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for row in rows:
        w.writerow([_fmt(row[c]) for c in COLUMNS])
    return buf.getvalue()


def _fmt(v):
    return repr(v) if isinstance(v, float) else str(v)


def worst_throughput(rows: list[dict]) -> dict[str, float]:
    """Minimum over the grid of each system's mean throughput curve."""
    return {s: min(r["throughput_mean"] for r in rows if r["system"] == s)
            for s in SYSTEM_NAMES}
