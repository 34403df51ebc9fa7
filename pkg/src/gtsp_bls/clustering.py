"""Turn a TSP node set into a GTSP instance by center-based clustering.

The procedure picks ``m`` centers that are far apart and assigns every
node to its nearest center. With the default ``m = ceil(n / 5)`` and the
``"far-from-first"`` seeding it regenerates the partitions of the classic
clustered TSPLIB benchmark (e.g. ``11eil51``, ``89pcb442``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .instance import GtspInstance, NodeSet, gtsp_name

SEED_RULES = ("far-from-first", "farthest-pair")


class ClusteringError(ValueError):
    pass


@dataclass(frozen=True)
class ClusteringConfig:
    """``m=None`` means ``ceil(n / 5)``.

    ``seed_rule`` chooses how the first center(s) are placed before the
    greedy max-min phase:

    ``"far-from-first"``
        first center is the node farthest from node 0 (the default; it is the
        rule that reproduces the published benchmark partitions)
    ``"farthest-pair"``
        the first two centers are a mutually farthest pair
    """

    m: int | None = None
    seed_rule: str = "far-from-first"

    def cluster_count(self, n: int) -> int:
        m = math.ceil(n / 5) if self.m is None else self.m
        if not 1 <= m <= n:
            raise ClusteringError(f"cluster count {m} not in [1, {n}]")
        return m


def default_cluster_count(n: int) -> int:
    return math.ceil(n / 5)


def choose_centers(dist: np.ndarray, m: int, seed_rule: str = "far-from-first") -> list[int]:
    """Greedy farthest-point center selection; ties go to the lowest node index."""
    n = len(dist)
    if not 1 <= m <= n:
        raise ClusteringError(f"cluster count {m} not in [1, {n}]")
    if seed_rule == "far-from-first":
        centers = [int(np.argmax(dist[0]))]
    elif seed_rule == "farthest-pair":
        if n == 1:
            return [0]
        i, j = np.unravel_index(np.argmax(dist), dist.shape)
        if i == j:
            # every node coincides
            i, j = 0, 1
        centers = [int(min(i, j)), int(max(i, j))][:m]
    else:
        raise ClusteringError(f"unknown seed rule {seed_rule!r}")
    nearest = dist[:, centers].min(axis=1).astype(np.int64)
    nearest[centers] = -1
    while len(centers) < m:
        c = int(np.argmax(nearest))
        centers.append(c)
        nearest = np.minimum(nearest, dist[:, c])
        nearest[centers] = -1
    return centers


def assign_to_centers(dist: np.ndarray, centers: list[int]) -> list[np.ndarray]:
    """Cluster ``k`` holds every node whose nearest center is ``centers[k]``."""
    d = dist[:, centers]
    # a center is always at distance 0 from itself, but another center may
    # also be at distance 0 (duplicate coordinates): force self-assignment
    owner = np.argmin(d, axis=1)
    owner[centers] = np.arange(len(centers))
    return [np.flatnonzero(owner == k) for k in range(len(centers))]


def cluster(nodes: NodeSet, cfg: ClusteringConfig | None = None, name: str | None = None,
            best_known: int | None = None) -> GtspInstance:
    cfg = cfg or ClusteringConfig()
    m = cfg.cluster_count(nodes.n)
    centers = choose_centers(nodes.dist, m, cfg.seed_rule)
    members = assign_to_centers(nodes.dist, centers)
    if name is None:
        name = gtsp_name(nodes.name, m) if nodes.name else ""
    return GtspInstance(nodes, tuple(members), name=name, best_known=best_known)
