"""Topology and traffic schedules, their verifiers and derived quantities.

A topology schedule is a list of slots ``(pi, alpha, R)``: the switch holds
matching ``pi`` for ``alpha`` seconds and then spends ``R`` seconds
reconfiguring.

Traffic is kept as flat record tables rather than per-slot matrices,
because the causality check needs to know which relay every two-hop bit
went through:

``direct``  rows ``(slot, src, dst, w)``: bits sent straight to their destination
``first``   rows ``(slot, s, d, relay, w)``: bits of flow s->d moved to the relay
``second``  rows ``(slot, s, d, relay, w)``: the same bits moved relay->d

The per-slot matrices ``m_dl``, ``m_1h`` (indexed by source and final
destination) and ``m_2h`` follow from these by summation.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .matrix import TAU_DS

TOL = 1e-9


class InadmissibleEntry(ValueError):
    def __init__(self, t, x, y):
        super().__init__(f"slot {t} has no link {x}->{y}")
        self.t, self.x, self.y = t, x, y


class EmptySchedule(ValueError):
    pass


@dataclass(frozen=True)
class TopologySchedule:
    perms: np.ndarray    # (v, n)
    alpha: np.ndarray    # (v,)
    reconf: np.ndarray   # (v,)

    def __post_init__(self):
        if np.any(self.alpha <= 0) or np.any(self.reconf < 0):
            raise ValueError("slots need alpha > 0 and R >= 0")

    @classmethod
    def empty(cls, n: int) -> "TopologySchedule":
        return cls(np.zeros((0, n), dtype=np.intp), np.zeros(0), np.zeros(0))

    @property
    def n(self) -> int:
        return self.perms.shape[1]

    def __len__(self) -> int:
        return len(self.alpha)

    def concat(self, other: "TopologySchedule") -> "TopologySchedule":
        return TopologySchedule(np.vstack([self.perms, other.perms]),
                                np.concatenate([self.alpha, other.alpha]),
                                np.concatenate([self.reconf, other.reconf]))


def completion_time(S: TopologySchedule) -> float:
    """Total hold plus reconfiguration time."""
    return float(np.sum(S.alpha) + np.sum(S.reconf))


@dataclass(frozen=True)
class TrafficEntry:
    t: int
    w: float
    s: int
    d: int
    x: int
    y: int


def _table(rows, width) -> np.ndarray:
    a = np.asarray(rows, dtype=np.float64)
    return a.reshape(-1, width)


@dataclass(frozen=True)
class TrafficSchedule:
    n: int
    n_slots: int
    direct: np.ndarray = field(default=None)   # (k, 4)
    first: np.ndarray = field(default=None)    # (k, 5)
    second: np.ndarray = field(default=None)   # (k, 5)

    def __post_init__(self):
        object.__setattr__(self, "direct", _table(
            self.direct if self.direct is not None else [], 4))
        object.__setattr__(self, "first", _table(
            self.first if self.first is not None else [], 5))
        object.__setattr__(self, "second", _table(
            self.second if self.second is not None else [], 5))

    def shifted(self, offset: int, n_slots: int) -> "TrafficSchedule":
        def sh(a):
            a = a.copy()
            a[:, 0] += offset
            return a
        return TrafficSchedule(self.n, n_slots, sh(self.direct), sh(self.first), sh(self.second))

    def concat(self, other: "TrafficSchedule") -> "TrafficSchedule":
        o = other.shifted(self.n_slots, self.n_slots + other.n_slots)
        return TrafficSchedule(self.n, o.n_slots,
                               np.vstack([self.direct, o.direct]),
                               np.vstack([self.first, o.first]),
                               np.vstack([self.second, o.second]))

    # -- per-slot matrices ---------------------------------------------------
    def _per_slot(self, table, a, b) -> np.ndarray:
        out = np.zeros((self.n_slots, self.n, self.n))
        if len(table):
            idx = table[:, [0, a, b]].astype(np.intp)
            np.add.at(out, (idx[:, 0], idx[:, 1], idx[:, 2]), table[:, -1])
        return out

    def m_dl(self) -> np.ndarray:
        return self._per_slot(self.direct, 1, 2)

    def m_1h(self) -> np.ndarray:
        """First-hop mass per slot, indexed by (source, final destination)."""
        return self._per_slot(self.first, 1, 2)

    def m_2h(self) -> np.ndarray:
        """Second-hop mass per slot, indexed by (original source, destination)."""
        return self._per_slot(self.second, 1, 2)

    def totals(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Slot-summed M_dl, M_1h, M_2h."""
        return (_sum_cells(self.direct, 1, 2, self.n),
                _sum_cells(self.first, 1, 2, self.n),
                _sum_cells(self.second, 1, 2, self.n))

    def entries(self) -> list[TrafficEntry]:
        out = [TrafficEntry(int(t), w, int(s), int(d), int(s), int(d))
               for t, s, d, w in self.direct]
        out += [TrafficEntry(int(t), w, int(s), int(d), int(s), int(q))
                for t, s, d, q, w in self.first]
        out += [TrafficEntry(int(t), w, int(s), int(d), int(q), int(d))
                for t, s, d, q, w in self.second]
        return out


def _sum_cells(table, a, b, n) -> np.ndarray:
    out = np.zeros((n, n))
    if len(table):
        np.add.at(out, (table[:, a].astype(np.intp), table[:, b].astype(np.intp)), table[:, -1])
    return out


def summarize(detailed, S: TopologySchedule) -> TrafficSchedule:
    """Build a traffic schedule from individual entries, checking each link exists."""
    n, v = S.n, len(S)
    direct, first, second = [], [], []
    for e in detailed:
        if not 0 <= e.t < v or S.perms[e.t, e.x] != e.y:
            raise InadmissibleEntry(e.t, e.x, e.y)
        if e.x == e.s and e.y == e.d:
            direct.append((e.t, e.s, e.d, e.w))
        elif e.x == e.s:
            first.append((e.t, e.s, e.d, e.y, e.w))
        elif e.y == e.d:
            second.append((e.t, e.s, e.d, e.x, e.w))
        else:
            raise InadmissibleEntry(e.t, e.x, e.y)
    return TrafficSchedule(n, v, direct, first, second)


def link_loads(T: TrafficSchedule) -> np.ndarray:
    """Per-slot physical link load m_hat_i[k, l] (bits crossing link k->l)."""
    out = np.zeros((T.n_slots, T.n, T.n))
    for table, a, b in ((T.direct, 1, 2), (T.first, 1, 3), (T.second, 3, 2)):
        if len(table):
            idx = table[:, [0, a, b]].astype(np.intp)
            np.add.at(out, (idx[:, 0], idx[:, 1], idx[:, 2]), table[:, -1])
    return out


def _sparse_loads(T: TrafficSchedule):
    """Link loads as (slot * n * n + k * n + l, bits) pairs, one per used link."""
    n = T.n
    keys, w = [], []
    for table, a, b in ((T.direct, 1, 2), (T.first, 1, 3), (T.second, 3, 2)):
        if len(table):
            idx = table[:, [0, a, b]].astype(np.int64)
            keys.append((idx[:, 0] * n + idx[:, 1]) * n + idx[:, 2])
            w.append(table[:, -1])
    if not keys:
        return np.zeros(0, dtype=np.int64), np.zeros(0)
    uniq, inv = np.unique(np.concatenate(keys), return_inverse=True)
    return uniq, np.bincount(inv, weights=np.concatenate(w))


def total_traffic(T: TrafficSchedule, S: TopologySchedule | None = None) -> np.ndarray:
    """M_hat: all bits that crossed each physical link over the whole schedule."""
    n = T.n
    return (_sum_cells(T.direct, 1, 2, n) + _sum_cells(T.first, 1, 3, n)
            + _sum_cells(T.second, 3, 2, n))


@dataclass(frozen=True)
class FeasibilityReport:
    ok: bool
    prop: int | None = None       # 1 admissibility, 2 capacity, 3 causality
    where: tuple | None = None
    detail: str = ""

    def __bool__(self) -> bool:
        return self.ok


def verify_feasible(S: TopologySchedule, T: TrafficSchedule, r: float = 1.0,
                    tol: float = TOL) -> FeasibilityReport:
    """Check admissibility, per-slot link capacity and two-hop causality."""
    if T.n_slots != len(S) or T.n != S.n:
        return FeasibilityReport(False, 1, None, "traffic and topology sizes differ")
    v = len(S)
    # property 1: every record rides a link that exists in its slot
    for name, table, a, b in (("direct", T.direct, 1, 2), ("first hop", T.first, 1, 3),
                              ("second hop", T.second, 3, 2)):
        if not len(table):
            continue
        t = table[:, 0].astype(np.intp)
        if np.any((t < 0) | (t >= v)):
            i = int(np.flatnonzero((t < 0) | (t >= v))[0])
            return FeasibilityReport(False, 1, (int(t[i]),), f"{name} outside the schedule")
        x = table[:, a].astype(np.intp)
        y = table[:, b].astype(np.intp)
        bad = (S.perms[t, x] != y) | (table[:, -1] < -tol)
        if np.any(bad):
            i = int(np.flatnonzero(bad)[0])
            return FeasibilityReport(False, 1, (int(t[i]), int(x[i]), int(y[i])),
                                     f"{name} on a link missing from the slot")
    # property 2: alpha_i * r covers the load of every link
    cap = S.alpha * r
    scale = max(1.0, float(np.max(cap)) if v else 1.0)
    keys, loads = _sparse_loads(T)
    if len(keys):
        t = keys // (T.n * T.n)
        over = loads - cap[t]
        i = int(np.argmax(over))
        if over[i] > tol * scale:
            k, l = divmod(int(keys[i]) % (T.n * T.n), T.n)
            return FeasibilityReport(False, 2, (int(t[i]), k, l),
                                     f"load {loads[i]:.6g} exceeds {cap[t[i]]:.6g}")
    # property 3: second hops never outrun first hops of the same (s, d, relay)
    res = _causality(T, tol * scale)
    if res is not None:
        return FeasibilityReport(False, 3, res[0], res[1])
    return FeasibilityReport(True)


def _causality(T: TrafficSchedule, tol: float):
    f, s = T.first, T.second
    if not len(f) and not len(s):
        return None
    n = T.n
    # a first hop in slot t can feed second hops from slot t + 1 on
    keys = np.concatenate([
        (f[:, 1] * n + f[:, 2]) * n + f[:, 3],
        (s[:, 1] * n + s[:, 2]) * n + s[:, 3]]).astype(np.int64)
    times = np.concatenate([f[:, 0] + 1, s[:, 0]])
    kind = np.concatenate([np.zeros(len(f)), np.ones(len(s))])   # adds before removals
    amount = np.concatenate([f[:, -1], -s[:, -1]])
    order = np.lexsort((kind, times, keys))
    keys, times, amount = keys[order], times[order], amount[order]
    csum = np.cumsum(amount)
    starts = np.flatnonzero(np.r_[True, keys[1:] != keys[:-1]])
    base = np.r_[0.0, csum[:-1]][starts]
    group = np.repeat(np.arange(len(starts)), np.diff(np.r_[starts, len(keys)]))
    running = csum - base[group]
    if np.any(running < -tol):
        i = int(np.flatnonzero(running < -tol)[0])
        key = int(keys[i])
        return ((int(times[i]), key // (n * n), (key // n) % n, key % n),
                "second hop before its first hop")
    ends = np.r_[starts[1:], len(keys)] - 1
    if np.any(np.abs(running[ends]) > tol):
        i = int(ends[np.flatnonzero(np.abs(running[ends]) > tol)[0]])
        key = int(keys[i])
        return ((None, key // (n * n), (key // n) % n, key % n),
                "first hop never followed by its second hop")
    return None


def verify_complete(M, T: TrafficSchedule, tau: float = TAU_DS) -> bool:
    """Every bit of M is sent and arrives: M_dl + M_1h == M and M_dl + M_2h == M."""
    M = np.asarray(M, dtype=np.float64)
    dl, h1, h2 = T.totals()
    tol = tau * max(1.0, float(np.max(M)) if M.size else 1.0)
    return bool(np.all(np.abs(dl + h1 - M) <= tol) and np.all(np.abs(dl + h2 - M) <= tol))


def verify_epsilon(M, T: TrafficSchedule, eps: float, tau: float = TAU_DS) -> bool:
    """At most ``eps`` (Frobenius) of M is left unsent, up to rounding ``tau``."""
    M = np.asarray(M, dtype=np.float64)
    dl, h1, _ = T.totals()
    slack = tau * max(1.0, float(np.max(M)) if M.size else 1.0)
    return bool(np.linalg.norm(M - dl - h1) <= eps + slack)


def skewness(T: TrafficSchedule) -> float:
    """Fraction of delivered bits that took a single hop.

    A two-hop bit shows up once in the first-hop and once in the second-hop
    table, so it counts as half of their combined mass.
    """
    wd = float(np.sum(T.direct[:, -1]))
    wi = 0.5 * float(np.sum(T.first[:, -1]) + np.sum(T.second[:, -1]))
    if wd + wi <= 0:
        raise EmptySchedule("schedule carries no traffic")
    return wd / (wd + wi)


# -- JSON --------------------------------------------------------------------

def schedule_to_dict(S: TopologySchedule, T: TrafficSchedule) -> dict:
    dl = [[] for _ in range(len(S))]
    for t, s, d, w in T.direct:
        dl[int(t)].append([int(s), int(d), float(w)])
    h1 = [[] for _ in range(len(S))]
    for t, s, d, q, w in T.first:
        h1[int(t)].append([int(s), int(d), int(q), float(w)])
    h2 = [[] for _ in range(len(S))]
    for t, s, d, q, w in T.second:
        h2[int(t)].append([int(s), int(d), int(q), float(w)])
    return {
        "topology": [{"pi": p.tolist(), "alpha": float(a), "R": float(r)}
                     for p, a, r in zip(S.perms, S.alpha, S.reconf)],
        "traffic": {"dl": dl, "h1": h1, "h2": h2},
    }


def schedule_from_dict(obj: dict) -> tuple[TopologySchedule, TrafficSchedule]:
    topo = obj["topology"]
    if not topo:
        raise ValueError("schedule has no slots")
    n = len(topo[0]["pi"])
    S = TopologySchedule(np.asarray([s["pi"] for s in topo], dtype=np.intp).reshape(-1, n),
                         np.asarray([s["alpha"] for s in topo], dtype=np.float64),
                         np.asarray([s["R"] for s in topo], dtype=np.float64))
    tr = obj["traffic"]

    def rows(per_slot, width):
        out = [[t, *e] for t, slot in enumerate(per_slot) for e in slot]
        if any(len(e) != width for e in out):
            raise ValueError(f"traffic records need {width - 1} fields")
        return out

    T = TrafficSchedule(n, len(S), rows(tr["dl"], 4), rows(tr["h1"], 5), rows(tr["h2"], 5))
    return S, T


def dump_schedule(S, T) -> str:
    return json.dumps(schedule_to_dict(S, T))


def load_schedule(text: str):
    return schedule_from_dict(json.loads(text))
