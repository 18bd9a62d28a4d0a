"""Birkhoff-von Neumann epsilon-decomposition of scaled doubly stochastic matrices.

The decomposition peels off weighted derangements one matching at a time
until the Frobenius norm of what is left drops to ``eps``.  Two matching
strategies are available:

``max-bottleneck``
    the perfect matching whose smallest cell is as large as possible
    (binary search over the distinct cell values), so every step removes
    as much mass as it can.
``min-greedy``
    any perfect matching on the positive support.

Perfect matchings come from scipy's Hopcroft-Karp implementation.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching

from .matrix import InvalidMatrix, TAU_DS, perm_matrix

STRATEGIES = ("max-bottleneck", "min-greedy")


class NotDoublyStochastic(InvalidMatrix):
    pass


class NoPerfectMatching(RuntimeError):
    pass


@dataclass(frozen=True)
class BvnDecomposition:
    coeffs: np.ndarray          # (v,) positive, descending when ``sorted``
    perms: np.ndarray           # (v, n) index vectors
    residual: float             # Frobenius norm of M - reconstruct(d)
    sorted: bool = True

    @property
    def n(self) -> int:
        return self.perms.shape[1]

    def __len__(self) -> int:
        return len(self.coeffs)

    def to_json(self) -> str:
        return json.dumps({
            "coeffs": [float(b) for b in self.coeffs],
            "perms": self.perms.tolist(),
            "residual": float(self.residual),
        })

    @classmethod
    def from_json(cls, text: str) -> "BvnDecomposition":
        obj = json.loads(text)
        coeffs = np.asarray(obj["coeffs"], dtype=np.float64)
        perms = np.asarray(obj["perms"], dtype=np.intp).reshape(len(coeffs), -1)
        return cls(coeffs, perms, float(obj["residual"]),
                   bool(np.all(np.diff(coeffs) <= 0)))


def _matching(mask: np.ndarray) -> np.ndarray | None:
    """Perfect matching on a boolean adjacency matrix, or None."""
    graph = csr_matrix(mask, dtype=np.int8)
    match = maximum_bipartite_matching(graph, perm_type="column")
    if np.any(match < 0):
        return None
    return match.astype(np.intp)


def support_matching(M, threshold: float = 0.0,
                     strategy: str = "max-bottleneck") -> np.ndarray | None:
    """A perfect matching using only cells strictly greater than ``threshold``.

    Returns the index vector ``pi`` (``M[k, pi[k]] > threshold`` for all k)
    or None when no such matching exists.
    """
    M = np.asarray(M, dtype=np.float64)
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}")
    if strategy == "min-greedy":
        return _matching(M > threshold)
    pi, _ = _bottleneck_matching(M, threshold, np.inf)
    return pi


def _bottleneck_matching(M: np.ndarray, threshold: float, upper: float):
    """Max-bottleneck perfect matching among cells > threshold.

    ``upper`` is a known upper bound on the bottleneck value (the previous
    step's bottleneck when decomposing, since cells only shrink).
    """
    vals = np.unique(M[M > threshold])
    if vals.size == 0:
        return None, 0.0
    if upper < np.inf:
        vals = vals[: np.searchsorted(vals, upper, side="right")]
        if vals.size == 0:
            return None, 0.0
    # invariant: a matching exists using cells >= vals[lo]; none at >= vals[hi]
    lo, hi = 0, vals.size
    best = _matching(M >= vals[0])
    if best is None:
        return None, 0.0
    # try the top value first: cheap exit when a single permutation dominates
    top = _matching(M >= vals[-1])
    if top is not None:
        return top, float(vals[-1])
    hi = vals.size - 1
    while hi - lo > 1:
        mid = (lo + hi) // 2
        pi = _matching(M >= vals[mid])
        if pi is None:
            hi = mid
        else:
            lo, best = mid, pi
    return best, float(vals[lo])


def check_doubly_stochastic(M, tau_ds: float = TAU_DS) -> float:
    """Return the common line sum, raising NotDoublyStochastic when there is none."""
    sums = np.concatenate([M.sum(axis=0), M.sum(axis=1)])
    lam = float(sums.mean())
    dev = float(np.max(np.abs(sums - lam))) if sums.size else 0.0
    if dev > tau_ds * max(1.0, lam):
        raise NotDoublyStochastic(f"line sums deviate from {lam:g} by {dev:.3g}")
    return lam


def decompose(M, eps: float = 1e-4, strategy: str = "max-bottleneck",
              tau_ds: float = TAU_DS) -> BvnDecomposition:
    """Greedy BvN epsilon-decomposition of a scaled doubly stochastic matrix.

    Stops once ``||M - sum(beta_i P_i)||_F <= eps``.  Cells at or below
    ``eps / n**2`` count as empty when looking for the next matching.
    """
    M = np.array(M, dtype=np.float64)
    n = M.shape[0]
    if M.ndim != 2 or n != M.shape[1]:
        raise InvalidMatrix("demand matrix must be square")
    if np.any(np.diag(M) != 0) or np.any(M < 0):
        raise InvalidMatrix("demand matrix needs a zero diagonal and nonnegative cells")
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}")
    check_doubly_stochastic(M, tau_ds)

    thr = eps / n**2
    rows = np.arange(n)
    R = M
    coeffs: list[float] = []
    perms: list[np.ndarray] = []
    upper = np.inf
    resid = float(np.linalg.norm(R))
    while resid > eps:
        if strategy == "max-bottleneck":
            pi, _ = _bottleneck_matching(R, thr, upper)
            if pi is None and upper < np.inf:
                pi, _ = _bottleneck_matching(R, thr, np.inf)
            if pi is None:
                pi, _ = _bottleneck_matching(R, 0.0, np.inf)
        else:
            pi = _matching(R > thr)
            if pi is None:
                pi = _matching(R > 0)
        if pi is None:
            raise NoPerfectMatching(
                f"no perfect matching on the remainder (residual {resid:.3g})")
        cells = R[rows, pi]
        k = int(np.argmin(cells))
        beta = float(cells[k])
        R[rows, pi] -= beta
        R[k, pi[k]] = 0.0
        np.maximum(R, 0.0, out=R)
        coeffs.append(beta)
        perms.append(pi)
        upper = beta
        resid = float(np.linalg.norm(R))

    coeffs_arr = np.asarray(coeffs, dtype=np.float64)
    perms_arr = np.asarray(perms, dtype=np.intp).reshape(len(coeffs), n)
    order = np.argsort(-coeffs_arr, kind="stable")
    return BvnDecomposition(coeffs_arr[order], perms_arr[order], resid, True)


def reconstruct(d: BvnDecomposition, n: int | None = None) -> np.ndarray:
    """Sum of beta_i P_i.  ``n`` is needed only for an empty decomposition."""
    if n is None:
        n = d.perms.shape[1]
    out = np.zeros((n, n))
    rows = np.arange(n)
    for beta, pi in zip(d.coeffs, d.perms):
        out[rows, pi] += beta
    return out


def from_terms(coeffs, perms) -> BvnDecomposition:
    """Build a sorted decomposition from explicit terms (residual taken as 0)."""
    coeffs = np.asarray(coeffs, dtype=np.float64)
    perms = np.asarray(perms, dtype=np.intp).reshape(len(coeffs), -1)
    order = np.argsort(-coeffs, kind="stable")
    return BvnDecomposition(coeffs[order], perms[order], 0.0, True)


__all__ = [
    "BvnDecomposition", "NoPerfectMatching", "NotDoublyStochastic",
    "decompose", "reconstruct", "support_matching", "from_terms", "perm_matrix",
]
