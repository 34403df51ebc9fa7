"""GTSP tours: cluster visiting order plus one picked node per cluster.

A tour is stored as ``order`` (cluster ids in visiting order), ``pick``
(``pick[k]`` is the node chosen in cluster ``k``) and ``pos`` (inverse of
``order``). Costs are exact integers.

Two move families act on the order, the picks travel with their clusters:

* 2-opt ``(x, y)`` reverses the order segment between positions ``x < y``;
* swap ``(u, v)`` exchanges the positions of clusters ``u`` and ``v``.
"""

from __future__ import annotations

import numpy as np

from .instance import GtspInstance


class InfeasibleTourError(ValueError):
    pass


class InvalidMoveError(ValueError):
    pass


class Tour:
    __slots__ = ("order", "pick", "pos", "cost")

    def __init__(self, order, pick, cost: int, pos=None):
        self.order = np.asarray(order, dtype=np.intp)
        self.pick = np.asarray(pick, dtype=np.intp)
        if pos is None:
            pos = np.empty_like(self.order)
            pos[self.order] = np.arange(len(self.order))
        self.pos = pos
        self.cost = int(cost)

    @classmethod
    def from_order_and_picks(cls, order, pick, inst: GtspInstance) -> "Tour":
        t = cls(order, pick, 0)
        validate(t, inst, check_cost=False)
        t.cost = tour_cost(t, inst)
        return t

    @property
    def m(self) -> int:
        return len(self.order)

    def nodes(self) -> np.ndarray:
        """Picked nodes in visiting order."""
        return self.pick[self.order]

    def copy(self) -> "Tour":
        return Tour(self.order.copy(), self.pick.copy(), self.cost, self.pos.copy())

    def canonical_order(self) -> tuple[int, ...]:
        """Order rotated to start at cluster 0 and oriented so the second entry is the smaller neighbour."""
        m = self.m
        if m <= 2:
            return tuple(np.roll(self.order, -int(self.pos[0])).tolist())
        o = np.roll(self.order, -int(self.pos[0]))
        if o[-1] < o[1]:
            o = np.concatenate(([o[0]], o[:0:-1]))
        return tuple(o.tolist())

    def __repr__(self):
        return f"Tour(cost={self.cost}, order={self.order.tolist()}, pick={self.pick.tolist()})"


# ---------------------------------------------------------------------------
# cost and feasibility
# ---------------------------------------------------------------------------

def validate(t: Tour, inst: GtspInstance, check_cost: bool = True) -> None:
    """Raise :class:`InfeasibleTourError` naming the first violated invariant."""
    m = inst.m
    if t.order.shape != (m,) or t.pick.shape != (m,):
        raise InfeasibleTourError(f"order/pick length must be m = {m}")
    if not np.array_equal(np.sort(t.order), np.arange(m)):
        raise InfeasibleTourError("order is not a permutation of the clusters")
    if not np.array_equal(t.pos[t.order], np.arange(m)):
        raise InfeasibleTourError("position index out of sync with order")
    if np.any(t.pick < 0) or np.any(t.pick >= inst.n):
        raise InfeasibleTourError("picked node out of range")
    bad = np.flatnonzero(inst.cluster_of[t.pick] != np.arange(m))
    if len(bad):
        k = int(bad[0])
        raise InfeasibleTourError(f"pick {int(t.pick[k])} is not a member of cluster {k}")
    if check_cost:
        c = _cost_of_nodes(t.nodes(), inst.dist)
        if c != t.cost:
            raise InfeasibleTourError(f"cached cost {t.cost} != recomputed {c}")


def _cost_of_nodes(seq: np.ndarray, dist: np.ndarray) -> int:
    if len(seq) < 2:
        return 0
    return int(dist[seq, np.roll(seq, -1)].sum())


def tour_cost(t: Tour, inst: GtspInstance) -> int:
    """Closed tour length ``c(p_m, p_1) + sum c(p_i, p_{i+1})`` over the picked nodes."""
    validate(t, inst, check_cost=False)
    return _cost_of_nodes(t.nodes(), inst.dist)


def is_feasible(t: Tour, inst: GtspInstance) -> bool:
    try:
        validate(t, inst)
    except InfeasibleTourError:
        return False
    return True


# ---------------------------------------------------------------------------
# 2-opt
# ---------------------------------------------------------------------------

def _check_two_opt(m: int, x: int, y: int) -> None:
    if not (0 <= x < y < m):
        raise InvalidMoveError(f"2-opt positions must satisfy 0 <= x < y < {m}, got ({x}, {y})")
    if x == 0 and y == m - 1:
        raise InvalidMoveError("2-opt over the whole tour is not a move")


def delta_two_opt(t: Tour, x: int, y: int, inst: GtspInstance) -> int:
    m = t.m
    _check_two_opt(m, x, y)
    d = inst.dist
    order, pick = t.order, t.pick
    a = pick[order[x - 1]]
    b = pick[order[x]]
    c = pick[order[y]]
    e = pick[order[(y + 1) % m]]
    return int(d[a, c] + d[b, e] - d[a, b] - d[c, e])


_INDEX_CACHE: dict[int, tuple[np.ndarray, np.ndarray, np.ndarray]] = {}


def _ring_indices(m: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(previous index, next index, valid 2-opt mask) for a tour of length ``m``."""
    got = _INDEX_CACHE.get(m)
    if got is None:
        idx = np.arange(m)
        mask = np.triu(np.ones((m, m), dtype=bool), 1)
        if m > 1:
            mask[0, m - 1] = False
        got = ((idx - 1) % m, (idx + 1) % m, mask)
        _INDEX_CACHE[m] = got
    return got


def two_opt_delta_matrix(t: Tour, inst: GtspInstance) -> np.ndarray:
    """``out[x, y]`` is the 2-opt delta for ``x < y``; other cells are 0.

    The whole-tour reversal ``(0, m-1)`` is also set to 0.
    """
    prev_i, next_i, mask = _ring_indices(t.m)
    seq = t.pick[t.order]
    prev = seq[prev_i]
    nxt = seq[next_i]
    d = inst.dist
    out = d[prev[:, None], seq] + d[seq[:, None], nxt]
    out -= d[prev, seq][:, None]
    out -= d[seq, nxt]
    out[~mask] = 0
    return out


def apply_two_opt(t: Tour, x: int, y: int, inst: GtspInstance, delta: int | None = None) -> Tour:
    """Reverse ``order[x..y]`` in place and return ``t``."""
    if delta is None:
        delta = delta_two_opt(t, x, y, inst)
    else:
        _check_two_opt(t.m, x, y)
    seg = t.order[x:y + 1][::-1].copy()
    t.order[x:y + 1] = seg
    t.pos[seg] = np.arange(x, y + 1)
    t.cost += int(delta)
    return t


# ---------------------------------------------------------------------------
# swap
# ---------------------------------------------------------------------------

def delta_swap(t: Tour, u: int, v: int, inst: GtspInstance) -> int:
    """Cost change of exchanging the tour positions of clusters ``u`` and ``v``.

    Only edges touching the two positions change. Collecting their indices
    in a set handles the adjacent and wrap-around cases without counting a
    shared edge twice.
    """
    if u == v:
        raise InvalidMoveError(f"swap needs two distinct clusters, got ({u}, {v})")
    m = t.m
    if not (0 <= u < m and 0 <= v < m):
        raise InvalidMoveError(f"cluster out of range: ({u}, {v})")
    d = inst.dist
    order, pick = t.order, t.pick
    i = int(t.pos[u])
    j = int(t.pos[v])
    nu = pick[u]
    nv = pick[v]

    def before(p):
        return pick[order[p]]

    def after(p):
        if p == i:
            return nv
        if p == j:
            return nu
        return pick[order[p]]

    delta = 0
    for e in {(i - 1) % m, i, (j - 1) % m, j}:
        f = (e + 1) % m
        delta += d[after(e), after(f)] - d[before(e), before(f)]
    return int(delta)


def apply_swap(t: Tour, u: int, v: int, inst: GtspInstance, delta: int | None = None) -> Tour:
    if delta is None:
        delta = delta_swap(t, u, v, inst)
    elif u == v:
        raise InvalidMoveError(f"swap needs two distinct clusters, got ({u}, {v})")
    i = t.pos[u]
    j = t.pos[v]
    t.order[i] = v
    t.order[j] = u
    t.pos[u] = j
    t.pos[v] = i
    t.cost += int(delta)
    return t


def swap_deltas(t: Tour, us, vs, inst: GtspInstance) -> np.ndarray:
    """Vectorized :func:`delta_swap` over pairs ``(us[k], vs[k])`` with ``us[k] != vs[k]``.

    Three position patterns are distinguished: neighbours ``j = i + 1``,
    neighbours across the wrap ``(0, m - 1)``, and everything else, where
    the two positions share no edge.
    """
    m = t.m
    us = np.asarray(us, dtype=np.intp)
    vs = np.asarray(vs, dtype=np.intp)
    if m <= 2:
        return np.zeros(len(us), dtype=np.int64)
    pi = t.pos[us]
    pj = t.pos[vs]
    lo = np.minimum(pi, pj)
    hi = np.maximum(pi, pj)
    seq = t.pick[t.order]
    d = inst.dist
    a, b = seq[lo], seq[hi]
    pa, na = seq[lo - 1], seq[(lo + 1) % m]
    pb, nb = seq[hi - 1], seq[(hi + 1) % m]
    general = (d[pa, b] + d[b, na] + d[pb, a] + d[a, nb]) - (d[pa, a] + d[a, na] + d[pb, b] + d[b, nb])
    adjacent = d[pa, b] + d[a, nb] - d[pa, a] - d[b, nb]
    wrapped = d[pb, a] + d[b, na] - d[pb, b] - d[a, na]
    out = np.where(hi == lo + 1, adjacent, general)
    return np.where((lo == 0) & (hi == m - 1), wrapped, out)


# ---------------------------------------------------------------------------
# node selection for a fixed cluster order
# ---------------------------------------------------------------------------

def cluster_optimization(order, inst: GtspInstance) -> Tour:
    """Cheapest choice of one node per cluster for the given cyclic order.

    Layered shortest path: the order is rotated so that the smallest cluster
    comes first, every node of that cluster is tried as the start, and a DP
    sweeps the remaining clusters before closing the cycle. Ties resolve to
    the lowest member index.
    """
    order = np.asarray(order, dtype=np.intp)
    m = len(order)
    if m != inst.m or not np.array_equal(np.sort(order), np.arange(m)):
        raise InfeasibleTourError("order is not a permutation of the clusters")
    members = inst.members
    pick = np.empty(m, dtype=np.intp)
    if m == 1:
        pick[0] = members[0][0]
        return Tour(order, pick, 0)
    sizes = np.fromiter((len(members[k]) for k in order), dtype=np.intp, count=m)
    shift = int(np.argmin(sizes))
    ids = np.roll(order, -shift).tolist()
    block = inst.block

    cost = block(ids[0], ids[1])                  # (starts, |layer 1|)
    back = []
    for i in range(1, m - 1):
        step = cost[:, :, None] + block(ids[i], ids[i + 1])[None, :, :]
        back.append(step.argmin(axis=1))
        cost = step.min(axis=1)
    total = cost + block(ids[-1], ids[0]).T
    s, j = np.unravel_index(int(np.argmin(total)), total.shape)
    chosen = [0] * m
    chosen[0] = s
    chosen[m - 1] = j
    for i in range(m - 2, 0, -1):
        j = back[i - 1][s, j]
        chosen[i] = j
    for k, idx in zip(ids, chosen):
        pick[k] = members[k][idx]
    return Tour(order.copy(), pick, int(total[s, chosen[m - 1]]))


def reoptimize_picks(t: Tour, inst: GtspInstance) -> Tour:
    """Replace ``t``'s picks in place by the cluster-optimal ones for its order."""
    best = cluster_optimization(t.order, inst)
    if best.cost < t.cost:
        t.pick[:] = best.pick
        t.cost = best.cost
    return t


# ---------------------------------------------------------------------------
# construction and mutation
# ---------------------------------------------------------------------------

def semi_random_construction(inst: GtspInstance, rng: np.random.Generator) -> Tour:
    """Uniformly random cluster order with cluster-optimal node picks."""
    return cluster_optimization(rng.permutation(inst.m), inst)


def double_bridge(t: Tour, inst: GtspInstance, rng: np.random.Generator) -> Tour:
    """Return a new tour with order ``A|C|B|D`` from random cuts ``A|B|C|D``.

    Needs ``m >= 4`` for three distinct interior cuts; ``m == 3`` falls back
    to the two-cut rotation ``A|C|B`` and smaller tours are copied.
    """
    m = t.m
    o = t.order
    if m >= 4:
        a, b, c = np.sort(rng.choice(np.arange(1, m), size=3, replace=False)).tolist()
        new = np.concatenate((o[:a], o[b:c], o[a:b], o[c:]))
    elif m == 3:
        a, b = np.sort(rng.choice(np.arange(1, m), size=2, replace=False)).tolist()
        new = np.concatenate((o[:a], o[b:], o[a:b]))
    else:
        return t.copy()
    out = Tour(new, t.pick.copy(), 0)
    out.cost = _cost_of_nodes(out.nodes(), inst.dist)
    return out


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def format_tour(t: Tour) -> str:
    """``cost ; c1:p1 c2:p2 ...`` with 1-based cluster and node ids in visiting order."""
    body = " ".join(f"{k + 1}:{t.pick[k] + 1}" for k in t.order.tolist())
    return f"{t.cost} ; {body}"


def parse_tour(text: str, inst: GtspInstance | None = None) -> Tour:
    head, _, body = text.partition(";")
    pairs = [tok.split(":") for tok in body.split()]
    order = [int(c) - 1 for c, _ in pairs]
    pick = np.empty(len(order), dtype=np.intp)
    for c, p in pairs:
        pick[int(c) - 1] = int(p) - 1
    t = Tour(order, pick, int(head))
    if inst is not None:
        validate(t, inst)
    return t
