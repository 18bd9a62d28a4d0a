"""Demand matrices, derangements and the M(v) / M(v, u) families.

A demand matrix is a plain square ``float64`` ndarray with a zero diagonal;
``M[i, j]`` is the traffic (bits) node ``i`` sends to node ``j``.  A
permutation is stored as its index vector ``pi`` with ``P[k, pi[k]] = 1``.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

TAU_DS = 1e-9


class InvalidMatrix(ValueError):
    pass


def as_demand(M, *, check_diagonal: bool = True) -> np.ndarray:
    """Validate and return ``M`` as a float64 demand matrix."""
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise InvalidMatrix(f"demand matrix must be square, got shape {M.shape}")
    if np.any(M < 0):
        raise InvalidMatrix("demand matrix has negative cells")
    if check_diagonal and np.any(np.diag(M) != 0):
        raise InvalidMatrix("demand matrix diagonal must be zero")
    return M


def weight(M) -> float:
    return float(np.sum(M))


def is_doubly_stochastic(M, tau_ds: float = TAU_DS) -> bool:
    """True iff every row and column sum is within ``tau_ds`` of one common value."""
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        return False
    sums = np.concatenate([M.sum(axis=0), M.sum(axis=1)])
    lam = sums.mean()
    return bool(np.all(np.abs(sums - lam) <= tau_ds))


def scale_of(M) -> float:
    """The common row sum (lambda) of a scaled doubly stochastic matrix."""
    M = np.asarray(M)
    return weight(M) / M.shape[0]


# -- permutations ------------------------------------------------------------

def is_derangement(pi) -> bool:
    pi = np.asarray(pi)
    n = len(pi)
    return (
        pi.ndim == 1
        and np.array_equal(np.sort(pi), np.arange(n))
        and not np.any(pi == np.arange(n))
    )


def perm_matrix(pi, value: float = 1.0) -> np.ndarray:
    pi = np.asarray(pi, dtype=np.intp)
    n = len(pi)
    P = np.zeros((n, n))
    P[np.arange(n), pi] = value
    return P


def cyclic_shift(n: int, k: int) -> np.ndarray:
    """Index vector of the shift ``P[i, (i + k) mod n] = 1``."""
    return (np.arange(n) + k) % n


def random_derangements(n: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """``count`` uniformly random derangements of size ``n`` as a (count, n) array.

    Rejection sampling: draw random permutations, keep those without fixed points.
    """
    if n < 2:
        raise InvalidMatrix("derangements need n >= 2")
    out = np.empty((count, n), dtype=np.intp)
    filled = 0
    ident = np.arange(n)
    while filled < count:
        batch = max(16, int(1.2 * np.e * (count - filled)))
        cand = rng.permuted(np.tile(ident, (batch, 1)), axis=1)
        ok = cand[~np.any(cand == ident, axis=1)]
        take = min(len(ok), count - filled)
        out[filled:filled + take] = ok[:take]
        filled += take
    return out


# -- matrix families ---------------------------------------------------------

def _check_v(n: int, v: int) -> None:
    if n < 2:
        raise InvalidMatrix("n must be at least 2")
    if not 1 <= v <= n - 1:
        raise InvalidMatrix(f"v must be in [1, {n - 1}], got {v}")


def mv_shifts(n: int, v: int, seed: int | None = 0) -> np.ndarray:
    """The ``v`` distinct shift offsets that make up M(v) for this seed.

    ``v == n - 1`` needs every offset, so the seed only matters for smaller v.
    """
    _check_v(n, v)
    rng = np.random.default_rng(seed)
    return np.sort(rng.choice(np.arange(1, n), size=v, replace=False))


def make_mv(n: int, v: int, seed: int | None = 0) -> np.ndarray:
    """M(v): the average of ``v`` pairwise-disjoint derangements.

    The derangements are cyclic shifts with offsets drawn from ``1..n-1``
    without replacement, which keeps them disjoint for every ``n``.
    """
    M = np.zeros((n, n))
    rows = np.arange(n)
    for k in mv_shifts(n, v, seed):
        M[rows, (rows + k) % n] = 1.0 / v
    return M


def make_uniform(n: int) -> np.ndarray:
    """M(n-1): every off-diagonal cell equal to ``1 / (n - 1)``."""
    M = np.full((n, n), 1.0 / (n - 1))
    np.fill_diagonal(M, 0.0)
    return M


def make_mvu(n: int, v: int, u: float, seed: int | None = 0) -> np.ndarray:
    """M(v, u) = u M(n-1) + (1 - u) M(v)."""
    if not 0.0 <= u <= 1.0:
        raise InvalidMatrix(f"u must be in [0, 1], got {u}")
    Mv = make_mv(n, v, seed)
    if u == 0:
        return Mv
    return u * make_uniform(n) + (1.0 - u) * Mv


def make_perm(n: int, seed: int | None = 0) -> np.ndarray:
    """A single random derangement as a demand matrix."""
    rng = np.random.default_rng(seed)
    return perm_matrix(random_derangements(n, 1, rng)[0])


# -- metrics -----------------------------------------------------------------

@dataclass(frozen=True)
class MatrixMetrics:
    weight: float
    max_entry: float
    sparsity: float
    variation_distance: float
    bvn_length: int | None = None


def variation_distance(M) -> float:
    """Total-variation distance from the uniform matrix of the same weight.

    Only off-diagonal cells take part; the diagonal is structurally zero.
    """
    M = np.asarray(M, dtype=np.float64)
    n = M.shape[0]
    w = weight(M)
    if w == 0:
        return 0.0
    off = ~np.eye(n, dtype=bool)
    avg = w / (n * (n - 1))
    return float(0.5 * np.abs(M[off] - avg).sum() / w)


def metrics(M, bvn_length: int | None = None) -> MatrixMetrics:
    M = np.asarray(M, dtype=np.float64)
    n = M.shape[0]
    return MatrixMetrics(
        weight=weight(M),
        max_entry=float(M.max()) if M.size else 0.0,
        sparsity=float(np.count_nonzero(M == 0) / (n * n)),
        variation_distance=variation_distance(M),
        bvn_length=bvn_length,
    )


# -- CSV ---------------------------------------------------------------------

def to_csv_text(M) -> str:
    """Dense CSV, one row per line, no header, round-trip precision floats."""
    M = np.asarray(M, dtype=np.float64)
    return "".join(",".join(repr(float(x)) for x in row) + "\n" for row in M)


def save_csv(M, path) -> None:
    Path(path).write_text(to_csv_text(M), encoding="utf-8", newline="\n")


def load_csv(path) -> np.ndarray:
    text = Path(path).read_text(encoding="utf-8")
    rows = [line for line in text.splitlines() if line.strip()]
    try:
        M = np.array([[float(x) for x in line.split(",")] for line in rows])
    except ValueError as exc:
        raise InvalidMatrix(f"{path}: {exc}") from None
    return as_demand(M)
