"""Breakout local search over GTSP tours.

The search alternates a best-improvement 2-opt descent with adaptive
perturbations built from cluster swaps. Each perturbation jump draws one of
three move generators:

directed
    least-degrading swaps that are not tabu, or that would beat the best cost
recency
    swaps whose cluster pair was touched longest ago
random
    any swap

The directed generator is chosen with probability ``max(exp(-omega/T), P0)``
where ``omega`` counts consecutive local optima without a new best; the
remaining mass is split ``Q : 1 - Q`` between recency and random. Candidate
sets are built from ``N`` randomly sampled pairs instead of a full scan.
"""

from __future__ import annotations

import enum
import math
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .instance import GtspInstance
from .tour import (
    Tour,
    apply_swap,
    apply_two_opt,
    cluster_optimization,
    swap_deltas,
    two_opt_delta_matrix,
)


class PerturbationKind(enum.Enum):
    DIRECTED = "directed"
    RECENCY = "recency"
    RANDOM = "random"


@dataclass(frozen=True)
class BlsParams:
    """Search parameters. ``None`` fields are derived from the cluster count ``m``
    by :meth:`resolve`: ``Lmax = max(6, ceil(0.4 m))``, ``gamma = m``, ``N = m``.
    """

    L0: int = 3
    Lmax: int | None = None
    T: int = 10
    gamma: int | None = None
    P0: float = 0.75
    Q: float = 0.7
    desc_max: int = 200
    N: int | None = None
    # scan every pair instead of sampling N of them
    exhaustive: bool = False

    def resolve(self, m: int) -> "BlsParams":
        p = replace(
            self,
            Lmax=max(6, math.ceil(0.4 * m)) if self.Lmax is None else self.Lmax,
            gamma=m if self.gamma is None else self.gamma,
            N=max(1, m) if self.N is None else self.N,
        )
        p.check()
        return p

    def check(self) -> None:
        if self.L0 < 1:
            raise ValueError("L0 must be >= 1")
        if self.Lmax is not None and self.Lmax < self.L0:
            raise ValueError("Lmax must be >= L0")
        if self.T < 1:
            raise ValueError("T must be >= 1")
        if self.gamma is not None and self.gamma < 1:
            raise ValueError("gamma must be >= 1")
        if not 0.0 < self.P0 <= 1.0:
            raise ValueError("P0 must lie in (0, 1]")
        if not 0.0 <= self.Q <= 1.0:
            raise ValueError("Q must lie in [0, 1]")
        if self.desc_max < 1:
            raise ValueError("desc_max must be >= 1")
        if self.N is not None and self.N < 1:
            raise ValueError("N must be >= 1")


class HistoryMatrix:
    """Symmetric table of the iteration at which each cluster pair last moved."""

    def __init__(self, m: int):
        self.stamps = np.zeros((m, m), dtype=np.int64)

    def stamp(self, u: int, v: int, iteration: int) -> None:
        self.stamps[u, v] = iteration
        self.stamps[v, u] = iteration

    def __getitem__(self, uv) -> int:
        return int(self.stamps[uv])


@dataclass
class BlsState:
    omega: int = 0
    L: int = 1
    iter: int = 0
    desc: int = 0
    c_p: int = 0
    best: Tour | None = None
    best_cost: int = 0
    jumps: int = 0
    trace: list | None = field(default=None, repr=False)

    def offer(self, t: Tour) -> bool:
        """Record ``t`` as the new best if it is strictly better."""
        if t.cost < self.best_cost:
            self.best = t.copy()
            self.best_cost = t.cost
            return True
        return False


class Deadline:
    """Stop signal that fires once a wall-clock budget is spent."""

    def __init__(self, seconds: float | None):
        self.expires = None if seconds is None else time.perf_counter() + seconds

    def is_set(self) -> bool:
        return self.expires is not None and time.perf_counter() >= self.expires


def stop_requested(stop) -> bool:
    if stop is None:
        return False
    if hasattr(stop, "is_set"):
        return stop.is_set()
    return bool(stop())


# ---------------------------------------------------------------------------
# descent
# ---------------------------------------------------------------------------

def best_two_opt_move(t: Tour, inst: GtspInstance) -> tuple[int, int, int]:
    """Most negative 2-opt delta, ties to the lexicographically smallest ``(x, y)``."""
    deltas = two_opt_delta_matrix(t, inst)
    flat = int(np.argmin(deltas))
    x, y = divmod(flat, t.m)
    return x, y, int(deltas[x, y])


def descend(t: Tour, H: HistoryMatrix, state: BlsState, inst: GtspInstance) -> Tour:
    """Best-improvement 2-opt descent in place. Stamps ``H`` and advances ``state.iter`` per move."""
    if t.m < 4:
        return t
    while True:
        x, y, delta = best_two_opt_move(t, inst)
        if delta >= 0:
            return t
        H.stamp(int(t.order[x]), int(t.order[y]), state.iter)
        apply_two_opt(t, x, y, inst, delta)
        state.iter += 1


def local_optimum(t: Tour, H: HistoryMatrix, state: BlsState, inst: GtspInstance) -> Tour:
    """Alternate descent and node re-selection until neither improves."""
    while True:
        descend(t, H, state, inst)
        co = cluster_optimization(t.order, inst)
        if co.cost >= t.cost:
            return t
        t.pick[:] = co.pick
        t.cost = co.cost


# ---------------------------------------------------------------------------
# perturbation
# ---------------------------------------------------------------------------

def probability_P(omega: int, T: int, P0: float) -> float:
    e = math.exp(-omega / T)
    return e if e > P0 else P0


def choose_perturbation_kind(omega: int, params: BlsParams, rng: np.random.Generator) -> PerturbationKind:
    p = probability_P(omega, params.T, params.P0)
    r = rng.random()
    if r < p:
        return PerturbationKind.DIRECTED
    if r < p + (1.0 - p) * params.Q:
        return PerturbationKind.RECENCY
    return PerturbationKind.RANDOM


def _draw_pairs(m: int, n: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """``n`` ordered pairs ``(u, v)``, ``u != v``, uniform over the ``m (m - 1)`` choices."""
    k = rng.integers(m * (m - 1), size=n)
    u, r = np.divmod(k, m - 1)
    return u, r + (r >= u)


def all_pairs(m: int) -> list[tuple[int, int]]:
    return [(u, v) for u in range(m) for v in range(u + 1, m)]


def sample_candidates(kind: PerturbationKind, t: Tour, H: HistoryMatrix, state: BlsState,
                      params: BlsParams, inst: GtspInstance, rng: np.random.Generator,
                      ) -> list[tuple[int, int]]:
    """Candidate swap moves ``(u, v)`` of the given kind.

    ``params.N`` pairs are drawn uniformly with ``u != v`` (or every pair when
    ``params.exhaustive``) and filtered. The result is never empty: if every
    sampled pair is tabu and none aspirates, the least-degrading sampled
    pairs are returned regardless of tabu status.
    """
    m = t.m
    if params.exhaustive:
        us, vs = np.triu_indices(m, 1)
    else:
        us, vs = _draw_pairs(m, params.N, rng)
    if kind is PerturbationKind.RANDOM:
        keep = np.ones(len(us), dtype=bool)
    elif kind is PerturbationKind.RECENCY:
        h = H.stamps[us, vs]
        keep = h == h.min()
    else:
        deltas = swap_deltas(t, us, vs, inst)
        ok = (H.stamps[us, vs] + params.gamma < state.iter) | (deltas + t.cost < state.best_cost)
        if not ok.any():
            ok[:] = True
        low = deltas[ok].min()
        keep = ok & (deltas == low)
    return list(zip(us[keep].tolist(), vs[keep].tolist()))


def perturb(t: Tour, L: int, H: HistoryMatrix, state: BlsState, params: BlsParams,
            inst: GtspInstance, rng: np.random.Generator,
            kind: PerturbationKind | None = None) -> Tour:
    """Apply ``L`` swap jumps to ``t`` in place.

    Every jump draws its own kind (unless ``kind`` forces one), rebuilds the
    candidate set and applies one candidate chosen uniformly at random.
    """
    if L < 1:
        raise ValueError("perturbation needs L >= 1")
    if t.m < 2:
        return t
    for _ in range(L):
        k = kind or choose_perturbation_kind(state.omega, params, rng)
        moves = sample_candidates(k, t, H, state, params, inst, rng)
        u, v = moves[int(rng.integers(len(moves)))]
        apply_swap(t, u, v, inst)
        H.stamp(u, v, state.iter)
        state.iter += 1
        state.jumps += 1
        if state.offer(t):
            state.omega = 0
    return t


# ---------------------------------------------------------------------------
# main loop
# ---------------------------------------------------------------------------

def bls_search(t0: Tour, params: BlsParams, inst: GtspInstance, rng: np.random.Generator,
               stop=None, trace: list | None = None) -> tuple[Tour, BlsState]:
    """Run breakout local search from ``t0``; return the best tour and the final state.

    Each outer iteration brings the current tour to a local optimum
    (2-opt descent, then node re-selection, repeated until stable), updates
    ``omega`` and the jump count ``L`` from the outcome, and perturbs. When
    ``omega`` exceeds ``T`` a strong perturbation of ``Lmax`` random jumps is
    applied instead. The run ends after ``desc_max`` descents, when ``stop``
    fires, or when the instance's best-known cost is reached.

    If ``trace`` is a list, one dict per descent is appended to it.
    """
    p = params.resolve(inst.m)
    t = t0.copy()
    H = HistoryMatrix(inst.m)
    state = BlsState(L=p.L0, c_p=t.cost, best=t.copy(), best_cost=t.cost, trace=trace)
    target = inst.best_known
    while state.desc < p.desc_max:
        local_optimum(t, H, state, inst)
        state.desc += 1
        c = t.cost
        improved = state.offer(t)
        state.omega = 0 if improved else state.omega + 1
        record = None
        if trace is not None:
            record = dict(desc=state.desc, cost=c, best=state.best_cost, improved=improved,
                          c_p=state.c_p, L_before=state.L, iter=state.iter)
        strong = state.omega > p.T
        if strong:
            state.omega = 0
        elif c == state.c_p:
            state.L = min(state.L + 1, p.Lmax)
        else:
            state.L = p.L0
        state.c_p = c
        if record is not None:
            record.update(strong=strong, omega=state.omega, L=state.L)
            trace.append(record)
        if (target is not None and state.best_cost <= target) or stop_requested(stop):
            break
        if strong:
            perturb(t, p.Lmax, H, state, p, inst, rng, kind=PerturbationKind.RANDOM)
        else:
            perturb(t, state.L, H, state, p, inst, rng)
        if target is not None and state.best_cost <= target:
            break
    best = state.best.copy()
    # a perturbation may have produced the best tour; finish it off
    local_optimum(best, HistoryMatrix(inst.m), BlsState(), inst)
    state.best = best
    state.best_cost = best.cost
    return best, state


def bls_run(t0: Tour, params: BlsParams, inst: GtspInstance, rng: np.random.Generator,
            stop=None) -> Tour:
    return bls_search(t0, params, inst, rng, stop)[0]
