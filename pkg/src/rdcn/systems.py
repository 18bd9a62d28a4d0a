"""Schedulers for the BvN system, the round-robin system and the composite.

Every scheduler returns a :class:`ScheduleResult` holding the topology
schedule, the traffic schedule and the completion time of that topology.

Round-robin (rr) fabric
    cycles through the ``n - 1`` cyclic shifts ``k -> (k + c + 1) mod n``;
    reconfiguring costs ``R_r`` per slot, summarised by the duty cycle
    ``eta = delta / (delta + R_r)``.
BvN fabric
    holds each matching of a decomposition for ``beta / r`` seconds and pays
    ``R_b`` per reconfiguration.

How long an rr slot is held (``delta``) is a modelling choice.  With
``delta=None`` every rr sub-schedule sizes its slots to the amount it has to
move, so one cycle suffices (``dynamic`` mode, the closed forms hold
exactly).  With a fixed ``delta`` a sub-schedule runs as many cycles as it
needs; by default the last cycle is shortened to the fraction actually used
(fluid), with ``quantize=True`` it is a full cycle with an idle tail.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bvn import BvnDecomposition, decompose, reconstruct
from .matrix import InvalidMatrix, as_demand, is_derangement
from .schedule import TopologySchedule, TrafficSchedule, completion_time

# Time charged when the composite switches from its BvN part to its rr part.
TRANSITION_COST = 0.0

SYSTEMS = ("bvn-direct", "rr-direct", "rr-oneperm", "rr-mulp", "rr-upper",
           "comp-pivot", "comp-pivot-plus")


class NotDerangement(InvalidMatrix):
    pass


class UnknownSystem(ValueError):
    pass


@dataclass(frozen=True)
class SystemConfig:
    r: float = 1.0
    R_b: float = 0.0
    eta: float = 1.0
    delta: float | None = None
    quantize: bool = False
    eps: float = 1e-4
    strategy: str = "max-bottleneck"

    def __post_init__(self):
        if not 0 < self.eta <= 1:
            raise ValueError("eta must lie in (0, 1]")
        if self.r <= 0 or self.R_b < 0:
            raise ValueError("need r > 0 and R_b >= 0")
        if self.delta is not None and self.delta <= 0:
            raise ValueError("delta must be positive")

    @property
    def R_r(self) -> float | None:
        """rr reconfiguration time implied by delta and eta (None in dynamic mode)."""
        if self.delta is None:
            return None
        return self.delta * (1.0 - self.eta) / self.eta


@dataclass(frozen=True)
class Split:
    M_bvn: np.ndarray
    M_rr: np.ndarray
    f: int


@dataclass(frozen=True)
class ScheduleResult:
    topology: TopologySchedule
    traffic: TrafficSchedule
    claimed_dct: float
    label: str
    split: Split | None = None
    decomposition: BvnDecomposition | None = None
    uniform_load: float = 0.0


def _result(S, T, label, **kw) -> ScheduleResult:
    return ScheduleResult(S, T, completion_time(S), label, **kw)


# -- rr building blocks ------------------------------------------------------

def rr_cycle_configurations(n: int) -> np.ndarray:
    """The n-1 shifts of one rr cycle as an (n-1, n) array; row c maps k -> k+c+1."""
    if n < 2:
        raise ValueError("n must be at least 2")
    return (np.arange(n)[None, :] + np.arange(1, n)[:, None]) % n


def cycle_plan(q: float, cfg: SystemConfig) -> list[tuple[float, float, float]]:
    """Cycles needed to move ``q`` bits over every link.

    Returns ``(alpha, R, share)`` per cycle: the slot hold time, the
    reconfiguration time after each slot and the fraction of ``q`` carried.
    """
    if q <= 0:
        return []
    eta, r = cfg.eta, cfg.r
    if cfg.delta is None:
        a = q / r
        return [(a, a * (1.0 - eta) / eta, 1.0)]
    delta, R_r = cfg.delta, cfg.R_r
    x = q / (delta * r)
    if cfg.quantize:
        c = max(1, math.ceil(x - 1e-12))
        return [(delta, R_r, 1.0 / c)] * c
    full = math.floor(x + 1e-12)
    frac = x - full
    plan = [(delta, R_r, 1.0 / x)] * full
    if frac > 1e-12:
        plan.append((frac * delta, frac * R_r, frac / x))
    return plan


def _rr_topology(n: int, plan) -> TopologySchedule:
    C = rr_cycle_configurations(n)
    if not plan:
        return TopologySchedule.empty(n)
    k = len(plan)
    return TopologySchedule(np.tile(C, (k, 1)),
                            np.repeat([p[0] for p in plan], n - 1),
                            np.repeat([p[1] for p in plan], n - 1))


def schedule_rr_direct(M, cfg: SystemConfig = SystemConfig()) -> ScheduleResult:
    """Single-hop rr schedule: each cell waits for its own link.

    Every cycle sends the same share of every cell, so the busiest cell sets
    the number of cycles.
    """
    M = as_demand(M)
    n = M.shape[0]
    plan = cycle_plan(float(M.max()) if M.size else 0.0, cfg)
    S = _rr_topology(n, plan)
    src, dst = np.nonzero(M)
    slot_in_cycle = (dst - src - 1) % n
    rows = []
    for cyc, (_, _, share) in enumerate(plan):
        rows.append(np.column_stack([cyc * (n - 1) + slot_in_cycle, src, dst,
                                     M[src, dst] * share]))
    T = TrafficSchedule(n, len(S), np.vstack(rows) if rows else None)
    return _result(S, T, "rr-direct")


def _oneperm_tables(beta: float, pi: np.ndarray, cfg: SystemConfig):
    """Topology and traffic for moving ``beta * P_pi`` over the rr fabric.

    Phase one: in slot c node k is linked to j = k + c + 1; it sends
    ``beta / n`` of its flow there, directly when j is the destination and
    as a first hop otherwise.  Phase two repeats the cycle and every relay
    forwards what it holds; the destination's own source sends its second
    direct share.  Each link carries exactly ``beta / n`` per cycle.
    """
    n = len(pi)
    plan = cycle_plan(beta / n, cfg)
    S1 = _rr_topology(n, plan)
    if not plan:
        return S1.concat(S1), TrafficSchedule(n, 0)
    C = rr_cycle_configurations(n)
    k = np.broadcast_to(np.arange(n), C.shape)
    c = np.broadcast_to(np.arange(n - 1)[:, None], C.shape)
    pinv = np.empty(n, dtype=np.intp)
    pinv[pi] = np.arange(n)

    # phase one, node k linked to j
    d1 = C == pi[k]
    # phase two, node x linked to y; the flow ending at y started at pinv[y]
    s2 = pinv[C]
    d2 = s2 == k

    direct, first, second = [], [], []
    cycles = len(plan)
    for phase in (0, 1):
        for cyc, (_, _, share) in enumerate(plan):
            base = (phase * cycles + cyc) * (n - 1)
            w = beta / n * share
            if phase == 0:
                m = d1
                direct.append(np.column_stack([base + c[m], k[m], C[m], np.full(m.sum(), w)]))
                m = ~d1
                first.append(np.column_stack([base + c[m], k[m], pi[k[m]], C[m],
                                              np.full(m.sum(), w)]))
            else:
                m = d2
                direct.append(np.column_stack([base + c[m], k[m], C[m], np.full(m.sum(), w)]))
                m = ~d2
                second.append(np.column_stack([base + c[m], s2[m], C[m], k[m],
                                               np.full(m.sum(), w)]))
    S = S1.concat(S1)
    T = TrafficSchedule(n, len(S), np.vstack(direct), np.vstack(first), np.vstack(second))
    return S, T


def as_scaled_derangement(M) -> tuple[float, np.ndarray]:
    """Split ``M = beta * P_pi`` into ``(beta, pi)``, or raise NotDerangement."""
    M = as_demand(M)
    n = M.shape[0]
    pi = np.argmax(M, axis=1)
    beta = float(M[0, pi[0]])
    if beta <= 0 or not is_derangement(pi):
        raise NotDerangement("matrix is not a scaled derangement")
    expect = np.zeros_like(M)
    expect[np.arange(n), pi] = beta
    if not np.allclose(M, expect, rtol=1e-12, atol=0):
        raise NotDerangement("matrix is not a scaled derangement")
    return beta, pi


def schedule_rr_oneperm(M, cfg: SystemConfig = SystemConfig()) -> ScheduleResult:
    """Two-cycle rr schedule for one scaled derangement."""
    beta, pi = as_scaled_derangement(M)
    S, T = _oneperm_tables(beta, pi, cfg)
    return _result(S, T, "rr-oneperm")


def _concat(parts, n):
    S = TopologySchedule.empty(n)
    T = TrafficSchedule(n, 0)
    for s, t in parts:
        S = S.concat(s)
        T = T.concat(t)
    return S, T


def mulp_from_decomposition(d: BvnDecomposition, cfg: SystemConfig):
    n = d.perms.shape[1]
    return _concat([_oneperm_tables(float(b), p, cfg) for b, p in zip(d.coeffs, d.perms)], n)


def schedule_rr_mulp(M, cfg: SystemConfig = SystemConfig(),
                     d: BvnDecomposition | None = None) -> ScheduleResult:
    """OnePerm applied to every term of a BvN decomposition, back to back."""
    M = as_demand(M)
    if d is None:
        d = decompose(M, cfg.eps, cfg.strategy)
    S, T = mulp_from_decomposition(d, cfg)
    return _result(S, T, "rr-mulp", decomposition=d)


def prefers_mulp(n: int, weight: float, max_entry: float) -> bool:
    """True when MulP is no slower than Direct for a matrix with these statistics."""
    return (2.0 - 2.0 / n) * weight / ((n - 1) * n) <= max_entry


def rr_upper(M, cfg: SystemConfig = SystemConfig(),
             d: BvnDecomposition | None = None) -> ScheduleResult:
    """The faster of MulP and Direct for this matrix."""
    M = as_demand(M)
    n = M.shape[0]
    if M.any() and prefers_mulp(n, float(M.sum()), float(M.max())):
        res = schedule_rr_mulp(M, cfg, d)
    else:
        res = schedule_rr_direct(M, cfg)
    return ScheduleResult(res.topology, res.traffic, res.claimed_dct, "rr-upper",
                          decomposition=res.decomposition)


# -- BvN system --------------------------------------------------------------

def bvn_from_decomposition(d: BvnDecomposition, cfg: SystemConfig):
    n = d.perms.shape[1]
    v = len(d)
    if v == 0:
        return TopologySchedule.empty(n), TrafficSchedule(n, 0)
    S = TopologySchedule(d.perms.copy(), d.coeffs / cfg.r, np.full(v, cfg.R_b))
    t = np.repeat(np.arange(v), n)
    src = np.tile(np.arange(n), v)
    T = TrafficSchedule(n, v, np.column_stack([t, src, d.perms.ravel(),
                                               np.repeat(d.coeffs, n)]))
    return S, T


def schedule_bvn_direct(M, cfg: SystemConfig = SystemConfig(),
                        d: BvnDecomposition | None = None) -> ScheduleResult:
    """Hold each decomposition matching for beta / r, all traffic single hop."""
    M = as_demand(M)
    if d is None:
        d = decompose(M, cfg.eps, cfg.strategy)
    S, T = bvn_from_decomposition(d, cfg)
    return _result(S, T, "bvn-direct", decomposition=d)


# -- composite ---------------------------------------------------------------

def dct_upper_stats(n: int, weight: float, max_entry: float, cfg: SystemConfig) -> float:
    """Closed-form rr DCT from a matrix's weight and largest cell."""
    if weight <= 0:
        return 0.0
    mulp = (2.0 - 2.0 / n) * weight / (cfg.eta * cfg.r * n)
    direct = (n - 1) * max_entry / (cfg.eta * cfg.r)
    return mulp if prefers_mulp(n, weight, max_entry) else direct


def pivot_costs(d: BvnDecomposition, cfg: SystemConfig) -> np.ndarray:
    """D_i for i = 0..v: first i terms on the BvN fabric, the rest on rr.

    The rr part only needs the weight and the largest cell of the suffix.
    The suffix is grown from the smallest coefficient upward, so its
    maximum only ever increases and one pass suffices.
    """
    n = d.perms.shape[1]
    v = len(d)
    rows = np.arange(n)
    suffix = np.zeros((n, n))
    smax = np.zeros(v + 1)
    for j in range(v - 1, -1, -1):
        suffix[rows, d.perms[j]] += d.coeffs[j]
        smax[j] = max(smax[j + 1], float(suffix[rows, d.perms[j]].max()))
    csum = np.r_[0.0, np.cumsum(d.coeffs)]
    sweight = n * (csum[-1] - csum)
    bvn = csum / cfg.r + np.arange(v + 1) * cfg.R_b
    rr = np.array([dct_upper_stats(n, sweight[i], smax[i], cfg) for i in range(v + 1)])
    rr[v] = 0.0
    extra = np.where((np.arange(v + 1) > 0) & (np.arange(v + 1) < v), TRANSITION_COST, 0.0)
    return bvn + rr + extra


def pivot_choice(d: BvnDecomposition, cfg: SystemConfig) -> tuple[int, float]:
    costs = pivot_costs(d, cfg)
    f = int(np.argmin(costs))
    return f, float(costs[f])


def _sub(d: BvnDecomposition, lo: int, hi: int) -> BvnDecomposition:
    return BvnDecomposition(d.coeffs[lo:hi], d.perms[lo:hi], 0.0, True)


def pivot(M, cfg: SystemConfig = SystemConfig(),
          d: BvnDecomposition | None = None) -> ScheduleResult:
    """Split one sorted decomposition between the two fabrics at the cheapest index.

    The largest coefficients go to the BvN fabric, the tail to the rr
    fabric (served by whichever of MulP and Direct is faster).
    """
    M = as_demand(M)
    n = M.shape[0]
    if d is None:
        d = decompose(M, cfg.eps, cfg.strategy)
    f, _ = pivot_choice(d, cfg)
    head, tail = _sub(d, 0, f), _sub(d, f, len(d))
    M_bvn, M_rr = reconstruct(head, n), reconstruct(tail, n)
    S1, T1 = bvn_from_decomposition(head, cfg)
    if len(tail) and prefers_mulp(n, float(M_rr.sum()), float(M_rr.max())):
        S2, T2 = mulp_from_decomposition(tail, cfg)
    else:
        rr = schedule_rr_direct(M_rr, cfg)
        S2, T2 = rr.topology, rr.traffic
    if TRANSITION_COST and len(S1) and len(S2):
        S2 = TopologySchedule(S2.perms, S2.alpha, S2.reconf.copy())
        S2.reconf[0] += TRANSITION_COST
    S, T = _concat([(S1, T1), (S2, T2)], n)
    return _result(S, T, "comp-pivot", split=Split(M_bvn, M_rr, f), decomposition=d)


def uniform_component(M) -> float:
    """Largest c with c * (J - I) <= M, i.e. the smallest off-diagonal cell."""
    M = np.asarray(M, dtype=np.float64)
    n = M.shape[0]
    off = M[~np.eye(n, dtype=bool)]
    return float(off.min()) if off.size else 0.0


def _split_uniform(M):
    n = M.shape[0]
    c = uniform_component(M)
    U = np.full((n, n), c)
    np.fill_diagonal(U, 0.0)
    rest = M - U
    rest[rest < 0] = 0.0
    return c, U, rest


def pivot_plus(M, cfg: SystemConfig = SystemConfig()) -> ScheduleResult:
    """Send the uniform floor of M with rr Direct and pivot on the rest."""
    M = as_demand(M)
    n = M.shape[0]
    c, U, rest = _split_uniform(M)
    inner = pivot(rest, cfg)
    if c <= 0:
        return ScheduleResult(inner.topology, inner.traffic, inner.claimed_dct,
                              "comp-pivot-plus", inner.split, inner.decomposition, 0.0)
    uni = schedule_rr_direct(U, cfg)
    S, T = _concat([(inner.topology, inner.traffic), (uni.topology, uni.traffic)], n)
    return _result(S, T, "comp-pivot-plus", split=inner.split,
                   decomposition=inner.decomposition, uniform_load=c * (n - 1))


def rr_upper_plus(M, cfg: SystemConfig = SystemConfig()) -> ScheduleResult:
    """rr Direct on the uniform floor of M, rr Upper on the rest."""
    M = as_demand(M)
    n = M.shape[0]
    c, U, rest = _split_uniform(M)
    inner = rr_upper(rest, cfg)
    if c <= 0:
        return inner
    uni = schedule_rr_direct(U, cfg)
    S, T = _concat([(inner.topology, inner.traffic), (uni.topology, uni.traffic)], n)
    return _result(S, T, "rr-upper-plus", decomposition=inner.decomposition,
                   uniform_load=c * (n - 1))


def run(system: str, M, cfg: SystemConfig = SystemConfig()) -> ScheduleResult:
    """Dispatch on a scheduler identity string."""
    table = {
        "bvn-direct": schedule_bvn_direct,
        "rr-direct": schedule_rr_direct,
        "rr-oneperm": schedule_rr_oneperm,
        "rr-mulp": schedule_rr_mulp,
        "rr-upper": rr_upper,
        "comp-pivot": pivot,
        "comp-pivot-plus": pivot_plus,
    }
    if system not in table:
        raise UnknownSystem(system)
    return table[system](M, cfg)


# -- completion times without building schedules ---------------------------

@dataclass(frozen=True)
class SystemDcts:
    bvn: float
    rr: float
    comp: float
    bvn_length: int


def evaluate_dcts(M, cfg: SystemConfig, d: BvnDecomposition | None = None) -> SystemDcts:
    """Closed-form DCT of BvN-Direct, rr-Upper and Pivot, sharing one decomposition.

    Matches ``completion_time`` of the full schedulers in dynamic-delta mode.
    """
    M = as_demand(M)
    n = M.shape[0]
    if d is None:
        d = decompose(M, cfg.eps, cfg.strategy)
    costs = pivot_costs(d, cfg)
    if M.any() and prefers_mulp(n, float(M.sum()), float(M.max())):
        rr = (2.0 - 2.0 / n) * float(d.coeffs.sum()) * n / (cfg.eta * cfg.r * n)
    else:
        rr = (n - 1) * float(M.max()) / (cfg.eta * cfg.r)
    return SystemDcts(float(costs[-1]), rr, float(costs.min()), len(d))


def evaluate_plus_dcts(M, cfg: SystemConfig) -> tuple[float, float]:
    """Closed-form DCT of Upper+ and Pivot+ (uniform floor first sent over rr Direct)."""
    M = as_demand(M)
    n = M.shape[0]
    c, _, rest = _split_uniform(M)
    floor = c * (n - 1) / (cfg.eta * cfg.r) if c > 0 else 0.0
    if not rest.any():
        return floor, floor
    d = decompose(rest, cfg.eps, cfg.strategy)
    res = evaluate_dcts(rest, cfg, d)
    return floor + res.rr, floor + res.comp
