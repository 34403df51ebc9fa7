"""Memetic breakout local search for the generalized travelling salesman problem."""

from .bls import BlsParams, bls_run, bls_search
from .clustering import ClusteringConfig, cluster
from .instance import (
    GtspInstance,
    NodeSet,
    bundled_best_known,
    load_bundled_tsplib,
    parse_gtsp,
    parse_tsplib,
)
from .memetic import MemeticParams, solve
from .report import RunReport, compute_dev
from .tour import Tour, cluster_optimization, tour_cost


def benchmark_instance(name: str) -> GtspInstance:
    """Clustered benchmark instance by its table name, e.g. ``"11eil51"``, with its best-known cost."""
    from .instance import split_gtsp_name

    m, base = split_gtsp_name(name)
    inst = cluster(load_bundled_tsplib(base), ClusteringConfig(m=m))
    return inst.with_best_known(bundled_best_known().get(inst.name))


__all__ = [
    "BlsParams", "bls_run", "bls_search", "ClusteringConfig", "cluster", "GtspInstance",
    "NodeSet", "bundled_best_known", "load_bundled_tsplib", "parse_gtsp", "parse_tsplib",
    "MemeticParams", "solve", "RunReport", "compute_dev", "Tour", "cluster_optimization",
    "tour_cost", "benchmark_instance",
]
