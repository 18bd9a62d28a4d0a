"""Stochastic demand matrices built from large and small random flows.

Every node sends ``n_f`` flows.  The flows are ``n_f`` random derangements;
``n_l = ceil(t_l * n_f)`` of them are large and share the fraction ``c_l``
of the load, the remaining ``n_s`` small ones share ``1 - c_l``.  Each
derangement weight gets Gaussian noise with a relative std of ``noise``,
negative weights are clamped to zero and the result is scaled back to a
doubly stochastic matrix.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .matrix import InvalidMatrix, random_derangements


class InvalidParams(ValueError):
    pass


@dataclass(frozen=True)
class TmParams:
    t_l: float
    n_f: int
    c_l: float
    n: int
    noise: float = 0.01
    seed: int | None = 0
    literal: bool = False   # weight large flows by t_l/n_l instead of c_l/n_l

    @property
    def n_l(self) -> int:
        return math.ceil(self.t_l * self.n_f)

    @property
    def n_s(self) -> int:
        return self.n_f - self.n_l

    def validate(self) -> None:
        if not (0.0 <= self.t_l <= 1.0 and 0.0 <= self.c_l <= 1.0):
            raise InvalidParams("t_l and c_l must lie in [0, 1]")
        if self.n_f < 1 or self.n < 2:
            raise InvalidParams("need n_f >= 1 and n >= 2")
        if self.noise < 0:
            raise InvalidParams("noise must be nonnegative")
        if self.n_s < 1 and self.t_l < 1:
            raise InvalidParams("no small flows left; raise n_f or set t_l = 1")


def sinkhorn(M, tol: float = 1e-12, max_iter: int = 10_000) -> np.ndarray:
    """Alternately rescale rows and columns until every line sum is 1.

    Stops when the largest deviation of a line sum from 1 is at most ``tol``.
    """
    M = np.array(M, dtype=np.float64)
    if np.any(M.sum(axis=1) <= 0) or np.any(M.sum(axis=0) <= 0):
        raise InvalidMatrix("matrix has an empty row or column")
    for _ in range(max_iter):
        M /= M.sum(axis=1, keepdims=True)
        cols = M.sum(axis=0)
        M /= cols
        if np.max(np.abs(M.sum(axis=1) - 1.0)) <= tol:
            break
    return M


def flow_weights(p: TmParams, rng: np.random.Generator) -> np.ndarray:
    n_l, n_s = p.n_l, p.n_s
    large = (p.t_l if p.literal else p.c_l) / n_l if n_l else 0.0
    small = (1.0 - (p.t_l if p.literal else p.c_l)) / n_s if n_s else 0.0
    mean = np.concatenate([np.full(n_l, large), np.full(n_s, small)])
    w = mean + rng.normal(0.0, 1.0, size=p.n_f) * p.noise * mean
    return np.maximum(w, 0.0)


def raw_tm(p: TmParams) -> np.ndarray:
    """The noisy flow sum before normalisation."""
    p.validate()
    rng = np.random.default_rng(p.seed)
    perms = random_derangements(p.n, p.n_f, rng)
    w = flow_weights(p, rng)
    M = np.zeros((p.n, p.n))
    rows = np.broadcast_to(np.arange(p.n), perms.shape)
    np.add.at(M, (rows.ravel(), perms.ravel()), np.repeat(w, p.n))
    return M


def generate_tm(p: TmParams) -> np.ndarray:
    """A doubly stochastic TM(t_l, n_f, c_l, n) sample."""
    M = raw_tm(p)
    if p.noise == 0 and np.allclose(M.sum(axis=1), 1.0, rtol=0, atol=1e-12) \
            and np.allclose(M.sum(axis=0), 1.0, rtol=0, atol=1e-12):
        return M
    return sinkhorn(M)
