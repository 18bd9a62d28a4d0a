"""Closed-form completion times, bounds and crossing points.

These are the oracles the schedulers are tested against.  Unless stated
otherwise ``lam`` is the common line sum of a scaled doubly stochastic
matrix (``weight / n``), ``eta`` the rr duty cycle and ``r`` the link rate.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np


class UnknownSystem(ValueError):
    pass


class NonPositiveDct(ValueError):
    pass


@dataclass(frozen=True)
class BoundReport:
    value: float
    kind: str                  # exact | upper | lower
    source: str
    params: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(asdict(self))


# -- single-matrix completion times -----------------------------------------

def dct_bvn(lam: float, v: int, R_b: float, r: float = 1.0) -> float:
    """BvN-Direct: hold each of the v matchings for beta_i / r, pay R_b each time."""
    return lam / r + v * R_b


def dct_rr_direct(n: int, max_entry: float, eta: float = 1.0, r: float = 1.0) -> float:
    return (n - 1) * max_entry / (eta * r)


def dct_rr_mulp(n: int, weight: float, eta: float = 1.0, r: float = 1.0) -> float:
    return (2.0 - 2.0 / n) * weight / (eta * r * n)


def dct_rr_upper(n: int, weight: float, max_entry: float, eta: float = 1.0,
                 r: float = 1.0) -> float:
    """Best of MulP and Direct."""
    return min(dct_rr_mulp(n, weight, eta, r), dct_rr_direct(n, max_entry, eta, r))


def dct_rr_upper_mv(n: int, v: int, eta: float = 1.0, r: float = 1.0) -> float:
    """rr Upper on M(v): ``2 - 2/n`` up to ``v = n/2``, then ``(n-1)/v``."""
    return min(2.0 - 2.0 / n, (n - 1) / v) / (eta * r)


def dct_rr_lower(n: int, weight: float, eta: float, r: float, phi: float, w: int) -> float:
    """Lower bound for any rr schedule with skewness phi and w inactive cells per row."""
    return (2.0 - phi) * (weight / (eta * r * n)) * ((n - 1) / (n - w))


def skew_upper_mv(n: int, v: int, w: int) -> float:
    """Largest skewness a complete rr schedule of M(v) can reach."""
    return 2.0 * v / (n - w + v)


def dct_comp_mv(v: float, n: int, R_b: float, eta: float = 1.0, r: float = 1.0) -> float:
    """Pivot on M(v): the whole matrix goes to one fabric or the other."""
    return min(1.0 / r + v * R_b, dct_rr_upper_mv(n, v, eta, r))


def dct_comp_mvu(v: float, u: float, n: int, R_b: float, eta: float = 1.0,
                 r: float = 1.0) -> float:
    """Pivot+ on M(v, u).

    The uniform floor ``u`` goes over rr Direct; the rest, ``(1-u) M(v)``,
    has v equal terms, so the split lands on one of the two ends and the
    result is the smallest of three branches: BvN, MulP and Direct.
    """
    rest = 1.0 - u
    bvn = rest / r + v * R_b if rest > 0 else 0.0
    rr = rest * dct_rr_upper_mv(n, v, eta, r)
    return u / (eta * r) + min(bvn, rr)


def dct_bvn_mvu(v: int, u: float, n: int, R_b: float, r: float = 1.0) -> float:
    """BvN-Direct on M(v, u) with an exact decomposition of minimal length.

    With u > 0 every off-diagonal cell is positive, which takes at least
    n - 1 matchings; n - 1 shifts are enough.
    """
    terms = v if u == 0 else n - 1
    return 1.0 / r + terms * R_b


# -- crossing points ---------------------------------------------------------

def v_ddot(n: int, R_b: float, eta: float = 1.0, r: float = 1.0) -> float:
    """Where the BvN cost ``1/r + v R_b`` meets rr Direct ``(n-1)/(v eta r)``."""
    if R_b == 0:
        return math.inf
    # positive root of R_b v^2 + v/r - (n-1)/(eta r), written without cancellation
    b, c = 1.0 / r, (n - 1) / (eta * r)
    return 2.0 * c / (b + math.sqrt(b * b + 4.0 * R_b * c))


def v_dot(n: int, R_b: float, eta: float = 1.0, r: float = 1.0) -> float:
    """Where the BvN cost meets MulP ``(2 - 2/n)/(eta r)``."""
    if R_b == 0:
        return math.inf
    return ((2.0 - 2.0 / n) / (eta * r) - 1.0 / r) / R_b


def low_crossing(R_b: float, n: int) -> float:
    """v where ``1 + R_b v`` meets the rr lower bound ``2 - 2v/(n-1+v)``."""
    # positive root of R_b v^2 + (R_b (n-1) + 1) v - (n-1)
    b = R_b * (n - 1) + 1.0
    return 2.0 * (n - 1) / (b + math.sqrt(b * b + 4.0 * R_b * (n - 1)))


# -- system DCTs on the M(v, u) family ---------------------------------------

def system_dct_mvu(system: str, n: int, R_b: float, eta: float = 1.0,
                   r: float = 1.0) -> tuple[float, float, float]:
    """Worst case over M(v, u) as ``(v, u, dct)``; the worst u is always 0."""
    if system == "bvn":
        return float(n - 1), 0.0, dct_bvn(1.0, n - 1, R_b, r)
    if system == "rr":
        return 1.0, 0.0, (2.0 - 2.0 / n) / (eta * r)
    if system == "comp":
        if R_b == 0:
            return float(n - 1), 0.0, min(1.0 / r, 1.0 / (eta * r))
        vd = v_ddot(n, R_b, eta, r)
        if vd >= n / 2:
            return vd, 0.0, 1.0 / r + vd * R_b
        vdot = v_dot(n, R_b, eta, r)
        return vdot, 0.0, (2.0 - 2.0 / n) / (eta * r)
    raise UnknownSystem(system)


def psi(n: int, R_b: float, eta: float = 1.0, r: float = 1.0) -> float:
    """How much slower the better single-fabric system is than the composite."""
    comp = system_dct_mvu("comp", n, R_b, eta, r)[2]
    rr = system_dct_mvu("rr", n, R_b, eta, r)[2]
    bvn = system_dct_mvu("bvn", n, R_b, eta, r)[2]
    return min(rr / comp, bvn / comp) - 1.0


def throughput(dct: float) -> float:
    if dct <= 0:
        raise NonPositiveDct(dct)
    return 1.0 / dct


# -- collision cells ---------------------------------------------------------

@dataclass(frozen=True)
class CollisionCell:
    row: int
    col: int
    kind: str                  # single | dual
    witnesses: tuple           # demand columns a with M[col, a] > 0


def find_collision_cells(M, tau: float = 1e-9) -> list[CollisionCell]:
    """Empty cells (l, j) whose use as a relay would land on a busy link.

    Relaying a demand cell (l, a) through j puts its second hop on link
    (j, a).  The empty cell collides when that link already carries demand,
    and is a dual collision when two demand cells of row l hit this way.
    """
    M = np.asarray(M, dtype=np.float64)
    n = M.shape[0]
    busy = M > tau
    out = []
    for l in range(n):
        demand = np.flatnonzero(busy[l])
        for j in range(n):
            if j == l or busy[l, j]:
                continue
            hits = tuple(int(a) for a in demand if a != j and busy[j, a])
            if hits:
                out.append(CollisionCell(l, j, "dual" if len(hits) >= 2 else "single", hits))
    return out


def bound_reports(n: int, weight: float, max_entry: float, v: int, R_b: float,
                  eta: float = 1.0, r: float = 1.0) -> list[BoundReport]:
    """The closed-form values relevant to one matrix."""
    p = dict(n=n, weight=weight, max=max_entry, v=v, R_b=R_b, eta=eta, r=r)
    lam = weight / n
    return [
        BoundReport(dct_bvn(lam, v, R_b, r), "exact", "bvn-direct", p),
        BoundReport(dct_rr_direct(n, max_entry, eta, r), "exact", "rr-direct", p),
        BoundReport(dct_rr_mulp(n, weight, eta, r), "exact", "rr-mulp", p),
        BoundReport(dct_rr_upper(n, weight, max_entry, eta, r), "upper", "rr-upper", p),
        BoundReport(dct_rr_lower(n, weight, eta, r, 1.0, 1), "lower", "rr-lower", p),
    ]
