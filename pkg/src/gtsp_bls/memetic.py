"""Memetic search: a small genetic population whose offspring are improved by BLS.

Individuals are random-key genomes (one key per cluster; sorting the keys
gives the visiting order) plus an explicit node pick per cluster, so that
gene-wise uniform crossover always yields a feasible tour.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .bls import BlsParams, BlsState, HistoryMatrix, bls_search, local_optimum, stop_requested
from .instance import GtspInstance
from .report import RunReport
from .tour import Tour, cluster_optimization, double_bridge, semi_random_construction


@dataclass(frozen=True)
class MemeticParams:
    bls: BlsParams = field(default_factory=BlsParams)
    p_mut: float = 0.3
    # None: ceil(m / 2) individuals, m generations
    pop_size: int | None = None
    max_generations: int | None = None

    def population_size(self, m: int) -> int:
        return self.pop_size if self.pop_size is not None else math.ceil(m / 2)

    def generation_limit(self, m: int) -> int:
        return self.max_generations if self.max_generations is not None else m


@dataclass
class Genome:
    keys: np.ndarray
    picks: np.ndarray

    @classmethod
    def from_tour(cls, t: Tour) -> "Genome":
        """Keys ``i / m`` by visiting position, rotated so cluster 0 holds key 0."""
        m = t.m
        keys = np.empty(m)
        rel = (t.pos - t.pos[0]) % m
        keys[:] = rel / m
        return cls(keys, t.pick.copy())

    def decode(self, inst: GtspInstance) -> Tour:
        order = np.argsort(self.keys, kind="stable")
        return Tour.from_order_and_picks(order, self.picks, inst)

    def copy(self) -> "Genome":
        return Genome(self.keys.copy(), self.picks.copy())


@dataclass
class Individual:
    genome: Genome
    tour: Tour
    born: int = 0

    @property
    def cost(self) -> int:
        return self.tour.cost

    @classmethod
    def from_tour(cls, t: Tour, born: int = 0) -> "Individual":
        return cls(Genome.from_tour(t), t, born)


@dataclass
class Population:
    individuals: list[Individual]
    generation: int = 0

    def __len__(self):
        return len(self.individuals)

    def best(self) -> Individual:
        return min(self.individuals, key=lambda ind: ind.cost)


@dataclass
class _Counters:
    descents: int = 0
    bls_runs: int = 0


def _improve(t: Tour, params: MemeticParams, inst: GtspInstance, seed: np.random.SeedSequence,
             stop, counters: _Counters | None) -> Tour:
    target = inst.best_known
    if stop_requested(stop) or (target is not None and t.cost <= target):
        # no budget left for BLS: still hand back a local optimum
        return local_optimum(t.copy(), HistoryMatrix(inst.m), BlsState(), inst)
    best, state = bls_search(t, params.bls, inst, np.random.default_rng(seed), stop)
    if counters is not None:
        counters.descents += state.desc
        counters.bls_runs += 1
    return best


def init_population(inst: GtspInstance, params: MemeticParams, rng: np.random.Generator,
                    stop=None, counters: _Counters | None = None) -> Population:
    """``ceil(m/2)`` semi-random tours, each improved by BLS."""
    if inst.m < 2:
        raise ValueError("memetic search needs at least two clusters")
    size = params.population_size(inst.m)
    seeds = np.random.SeedSequence(int(rng.integers(2**63))).spawn(size)
    members = []
    reached = False
    for ss in seeds:
        t = semi_random_construction(inst, np.random.default_rng(ss))
        t = _improve(t, params, inst, ss.spawn(1)[0], stop if not reached else _always, counters)
        reached = reached or (inst.best_known is not None and t.cost <= inst.best_known)
        members.append(Individual.from_tour(t, born=0))
    return Population(members, generation=0)


def _always() -> bool:
    return True


def tournament_select(pop: Population, rng: np.random.Generator, k: int = 3) -> Individual:
    """Best of ``k`` individuals drawn uniformly with replacement."""
    if not pop.individuals:
        raise ValueError("empty population")
    drawn = rng.integers(len(pop.individuals), size=k)
    return min((pop.individuals[i] for i in drawn.tolist()), key=lambda ind: ind.cost)


def uniform_crossover(a: Genome, b: Genome, rng: np.random.Generator) -> tuple[Genome, Genome]:
    """Each cluster's (key, pick) gene comes from ``a`` or ``b`` with probability 1/2."""
    take_a = rng.random(len(a.keys)) < 0.5
    c1 = Genome(np.where(take_a, a.keys, b.keys), np.where(take_a, a.picks, b.picks))
    c2 = Genome(np.where(take_a, b.keys, a.keys), np.where(take_a, b.picks, a.picks))
    return c1, c2


def _merge(parents: list[Individual], children: list[Individual], size: int) -> list[Individual]:
    """Keep the ``size`` cheapest, older first on ties, one copy per (cost, tour)."""
    ranked = sorted(parents + children, key=lambda ind: (ind.cost, ind.born))
    kept, dropped, seen = [], [], set()
    for ind in ranked:
        key = (ind.cost, ind.tour.canonical_order())
        (dropped if key in seen else kept).append(ind)
        seen.add(key)
    if len(kept) < size:
        kept = sorted(kept + dropped[: size - len(kept)], key=lambda ind: (ind.cost, ind.born))
    return kept[:size]


def evolve_generation(pop: Population, params: MemeticParams, inst: GtspInstance,
                      rng: np.random.Generator, stop=None,
                      counters: _Counters | None = None) -> Population:
    """One generation: tournament pairs, uniform crossover, mutation, BLS, elitist merge."""
    size = len(pop)
    gen = pop.generation + 1
    offspring: list[Tour] = []
    for _ in range(math.ceil(size / 2)):
        a = tournament_select(pop, rng)
        b = tournament_select(pop, rng)
        for g in uniform_crossover(a.genome, b.genome, rng):
            t = g.decode(inst)
            if rng.random() < params.p_mut:
                t = double_bridge(t, inst, rng)
            offspring.append(cluster_optimization(t.order, inst))
    seeds = np.random.SeedSequence(int(rng.integers(2**63))).spawn(len(offspring))
    children = []
    reached = inst.best_known is not None and pop.best().cost <= inst.best_known
    for t, ss in zip(offspring, seeds):
        t = _improve(t, params, inst, ss, _always if reached else stop, counters)
        reached = reached or (inst.best_known is not None and t.cost <= inst.best_known)
        children.append(Individual.from_tour(t, born=gen))
    return Population(_merge(pop.individuals, children, size), generation=gen)


def solve(inst: GtspInstance, params: MemeticParams | None = None, seed: int = 0,
          stop=None, time_limit: float | None = None, observer=None) -> RunReport:
    """Run the memetic search on ``inst``.

    Stops when the best-known cost (if the instance carries one) is reached,
    after ``m`` generations, or when ``stop`` / ``time_limit`` fires.
    ``observer``, if given, is called with every population including the initial one.
    """
    from .bls import Deadline

    params = params or MemeticParams()
    start = time.perf_counter()
    if time_limit is not None:
        deadline = Deadline(time_limit)
        outer = stop
        stop = (lambda: deadline.is_set() or stop_requested(outer))
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    counters = _Counters()
    pop = init_population(inst, params, rng, stop, counters)
    history = [pop.best().cost]
    if observer is not None:
        observer(pop)
    target = inst.best_known
    limit = params.generation_limit(inst.m)
    while pop.generation < limit:
        if target is not None and pop.best().cost <= target:
            break
        if stop_requested(stop):
            break
        pop = evolve_generation(pop, params, inst, rng, stop, counters)
        history.append(pop.best().cost)
        if observer is not None:
            observer(pop)
    best = pop.best()
    return RunReport(
        instance=inst.name,
        seed=seed,
        cost=best.cost,
        best_known=target,
        wall_time=time.perf_counter() - start,
        generations=pop.generation,
        descents=counters.descents,
        n=inst.n,
        m=inst.m,
        tour=best.tour.copy(),
        best_per_generation=history,
    )
