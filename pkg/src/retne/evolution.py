"""Population lifecycle: initialization, clustering, and generation turnover.

Each generation the evaluated population is split into k-means++ clusters.
A cluster's best member is kept as an elite, and the correlation between
member fitness and distance-to-the-best tells whether that region is
exhausted: a strong anti-correlation (at or below ``corr_threshold``)
means the local landscape looks unimodal and explored, so search effort
shifts to blending cluster centers globally; otherwise nearby mutation
continues.  Minimum-distance admission keeps the next generation spread
out.

Two baseline methods run the same loop with the recombination tree
disabled: ``neat`` still niches the population by clustering and keeps
the per-cluster bests, but produces offspring by nearby mutation only;
``fs_neat`` is identical except its initial genomes carry a single
input-to-output connection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Protocol

import numpy as np

from . import seeding
from .genome import (
    GenomeConfig,
    Individual,
    check_distance,
    create,
    distance,
    random_matrix,
    single_connection_matrix,
)
from .variation import MutationConfig, binary_combine, golden_combine, mutate_near

METHODS = ("neat", "fs_neat", "bi_neat", "gs_neat")
RET_METHODS = ("bi_neat", "gs_neat")

INIT_RETRY_FACTOR = 1000
LLOYD_MAX_ITER = 100


class ConfigurationError(ValueError):
    """A setting that makes the requested run impossible."""


class Environment(Protocol):
    """Anything that can score an individual.

    ``deterministic`` controls fitness caching: deterministic environments
    never re-score an evaluated individual, stochastic ones re-score
    elites every generation so no one survives on a lucky episode.
    """

    n_inputs: int
    n_outputs: int
    deterministic: bool

    def evaluate(self, individual: Individual, rng: np.random.Generator) -> float: ...


@dataclass(frozen=True)
class EvolutionConfig:
    population_size: int = 12
    initial_distance: float = 5.0
    min_distance: float = 0.2
    corr_threshold: float = -0.5
    fitness_threshold: float = math.inf
    max_generations: int = 500
    method: str = "bi_neat"

    def __post_init__(self) -> None:
        if self.population_size < 2:
            raise ValueError("population_size must be at least 2")
        if not (self.initial_distance >= self.min_distance >= 0.0):
            raise ValueError("need initial_distance >= min_distance >= 0")
        if self.max_generations < 1:
            raise ValueError("max_generations must be at least 1")
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}, expected one of {METHODS}")


@dataclass
class Population:
    """Ordered individuals plus the generation index that produced them."""

    individuals: list[Individual]
    generation: int = 0

    def __iter__(self):
        return iter(self.individuals)

    def __len__(self) -> int:
        return len(self.individuals)

    def __getitem__(self, index: int) -> Individual:
        return self.individuals[index]


@dataclass
class ClusterView:
    """One cluster: members in population order, their mean matrix, and
    (once computed) the best member and the distance-fitness correlation."""

    members: list[Individual]
    center: np.ndarray
    best: Individual | None = None
    corr: float | None = None


@dataclass(frozen=True)
class RunResult:
    solved: bool
    end_generation: int
    best: Individual


def init_population(
    evolution: EvolutionConfig, config: GenomeConfig, rng: np.random.Generator
) -> Population:
    """Rejection-sample ``population_size`` genomes, every pair at least
    ``initial_distance`` apart.

    Raises :class:`ConfigurationError` when the retry budget runs out,
    which means ``initial_distance`` is infeasible for the genome space.
    """
    minimal_start = evolution.method == "fs_neat"
    target = evolution.population_size
    budget = INIT_RETRY_FACTOR * target
    accepted: list[Individual] = []
    for _ in range(budget):
        if minimal_start:
            candidate = create(single_connection_matrix(config, rng), config)
        else:
            candidate = create(random_matrix(config, rng), config)
        if check_distance(evolution.initial_distance, candidate, accepted):
            accepted.append(candidate)
            if len(accepted) == target:
                return Population(accepted, generation=0)
    raise ConfigurationError(
        f"could not place {target} genomes pairwise initial_distance="
        f"{evolution.initial_distance} apart within {budget} attempts; "
        "lower initial_distance or widen the value ranges"
    )


def _squared_distances(points: np.ndarray, centers: np.ndarray) -> np.ndarray:
    diff = points[:, None, :] - centers[None, :, :]
    return np.einsum("nkd,nkd->nk", diff, diff)


class _AdmissionGuard:
    """Vectorized minimum-distance admission over a growing set.

    Same semantics as :func:`check_distance` against the admitted list,
    kept as a stacked array so each candidate costs one numpy pass.
    """

    def __init__(self, min_distance: float, capacity: int, cells: int):
        self._min_distance = min_distance
        self._rows = np.empty((capacity, cells))
        self._count = 0

    def admit(self, individual: Individual) -> bool:
        flat = individual.matrix.ravel()
        if self._count:
            seen = self._rows[: self._count]
            diff = seen - flat
            nearest = math.sqrt(float(np.einsum("nd,nd->n", diff, diff).min()))
            if nearest < self._min_distance:
                return False
        self._rows[self._count] = flat
        self._count += 1
        return True


def _seed_centers(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """k-means++ seeding: spread initial centers by squared-distance sampling."""
    n = points.shape[0]
    chosen = [int(rng.integers(n))]
    d2 = np.sum((points - points[chosen[0]]) ** 2, axis=1)
    for _ in range(k - 1):
        total = d2.sum()
        if total > 0.0:
            idx = int(rng.choice(n, p=d2 / total))
        else:  # every point coincides with a chosen center
            idx = int(rng.integers(n))
        chosen.append(idx)
        d2 = np.minimum(d2, np.sum((points - points[idx]) ** 2, axis=1))
    return points[chosen].copy()


def _fill_empty_clusters(points: np.ndarray, labels: np.ndarray, k: int) -> bool:
    """Give each empty cluster the farthest point of the largest cluster."""
    repaired = False
    counts = np.bincount(labels, minlength=k)
    for empty in range(k):
        while counts[empty] == 0:
            donor = int(np.argmax(counts))
            member_idx = np.flatnonzero(labels == donor)
            centroid = points[member_idx].mean(axis=0)
            offsets = points[member_idx] - centroid
            farthest = member_idx[int(np.argmax(np.einsum("nd,nd->n", offsets, offsets)))]
            labels[farthest] = empty
            counts[donor] -= 1
            counts[empty] += 1
            repaired = True
    return repaired


def cluster_population(
    population: Population | list[Individual], k: int, rng: np.random.Generator
) -> list[ClusterView]:
    """Partition the population into ``k`` clusters of similar genomes.

    k-means++ seeding followed by Lloyd iterations until the assignment is
    stable (or an iteration cap); empty clusters are repaired by stealing
    the farthest member of the largest cluster.  On return every member
    sits with its nearest center and centers are exact member means.
    """
    members = list(population)
    n = len(members)
    if n < k:
        raise ValueError(f"cannot form {k} clusters from {n} individuals")
    points = np.stack([ind.matrix.ravel() for ind in members])
    centers = _seed_centers(points, k, rng)
    labels = np.full(n, -1)
    for _ in range(LLOYD_MAX_ITER):
        new_labels = np.argmin(_squared_distances(points, centers), axis=1)
        repaired = _fill_empty_clusters(points, new_labels, k)
        if not repaired and np.array_equal(new_labels, labels):
            break
        labels = new_labels
        centers = np.stack([points[labels == c].mean(axis=0) for c in range(k)])
    views = []
    shape = members[0].matrix.shape
    for c in range(k):
        idx = np.flatnonzero(labels == c)
        center = points[idx].mean(axis=0).reshape(shape)
        center.setflags(write=False)
        views.append(ClusterView(members=[members[i] for i in idx], center=center))
    return views


def best_of_cluster(cluster: ClusterView) -> Individual:
    """Member with maximum fitness; ties go to the lowest population index."""
    best: Individual | None = None
    for ind in cluster.members:
        if not ind.evaluated:
            raise ValueError("cluster contains an unevaluated individual")
        if best is None or ind.fitness > best.fitness:
            best = ind
    assert best is not None
    return best


def pearson(x, y) -> float | None:
    """Pearson correlation of two equal-length samples, clamped to [-1, 1];
    None when either sample has zero variance."""
    xs = np.asarray(x, dtype=float)
    ys = np.asarray(y, dtype=float)
    if xs.shape != ys.shape or xs.ndim != 1:
        raise ValueError("pearson needs two equal-length vectors")
    xc = xs - xs.mean()
    yc = ys - ys.mean()
    denom = math.sqrt(float(np.sum(xc * xc)) * float(np.sum(yc * yc)))
    if denom == 0.0:
        return None
    corr = float(np.sum(xc * yc)) / denom
    return max(-1.0, min(1.0, corr))


def cluster_correlation(cluster: ClusterView) -> float | None:
    """Pearson correlation between members' distance-to-best and fitness.

    Returns None (undefined) for clusters with fewer than three members or
    zero variance in either variable.
    """
    if cluster.best is None:
        raise ValueError("compute the cluster best before its correlation")
    if len(cluster.members) < 3:
        return None
    x = [distance(cluster.best.matrix, ind.matrix) for ind in cluster.members]
    y = [ind.fitness for ind in cluster.members]
    return pearson(x, y)


def _explored(corr: float | None, threshold: float) -> bool:
    # Undefined correlation carries no evidence of unexplored structure,
    # so degenerate clusters count as explored.
    return corr is None or corr <= threshold


def ret_pair(
    first: ClusterView,
    second: ClusterView,
    evolution: EvolutionConfig,
    mutation: MutationConfig,
    config: GenomeConfig,
    rng: np.random.Generator,
) -> tuple[Individual, Individual]:
    """Produce the two offspring for one cluster pair.

    The clusters are relabeled so ``a`` holds the higher best fitness
    (ties keep the input order).  The first child always mutates near
    ``a``'s best.  The second child depends on which regions look
    explored: both explored -> blend the two centers (midpoint or
    golden-section per method, better cluster first); only the weaker
    explored -> a second independent mutation of ``a``'s best; weaker
    unexplored -> mutate near ``b``'s best.
    """
    if first.best is None or second.best is None:
        raise ValueError("compute cluster bests before pairing")
    a, b = first, second
    if b.best.fitness > a.best.fitness:
        a, b = b, a
    a_explored = _explored(a.corr, evolution.corr_threshold)
    b_explored = _explored(b.corr, evolution.corr_threshold)

    child_one = mutate_near(a.best, mutation, config, rng)
    if b_explored:
        if a_explored:
            blend = golden_combine if evolution.method == "gs_neat" else binary_combine
            child_two = blend(a.center, b.center, config)
        else:
            child_two = mutate_near(a.best, mutation, config, rng)
    else:
        child_two = mutate_near(b.best, mutation, config, rng)
    return child_one, child_two


def evolve_generation(
    population: Population,
    evolution: EvolutionConfig,
    mutation: MutationConfig,
    config: GenomeConfig,
    rng: np.random.Generator,
) -> Population:
    """One turnover: keep cluster bests, add pairwise offspring.

    Elites pass a minimum-distance check against earlier elites; offspring
    pass it against everything admitted so far.  The next population holds
    at most ``population_size**2`` individuals, elites keep their fitness
    and offspring arrive unevaluated.
    """
    k = min(evolution.population_size, len(population))
    clusters = cluster_population(population, k, rng)
    for view in clusters:
        view.best = best_of_cluster(view)
        view.corr = cluster_correlation(view)

    min_d = evolution.min_distance
    cells = population[0].matrix.size
    elite_guard = _AdmissionGuard(min_d, k, cells)
    saved: list[Individual] = []
    for view in clusters:
        if elite_guard.admit(view.best):
            saved.append(view.best)

    guard = _AdmissionGuard(min_d, k * k, cells)
    for ind in saved:
        guard.admit(ind)
    novel: list[Individual] = []
    for i in range(len(clusters) - 1):
        for j in range(i + 1, len(clusters)):
            for child in ret_pair(clusters[i], clusters[j], evolution, mutation, config, rng):
                if guard.admit(child):
                    novel.append(child)
    return Population(saved + novel, population.generation + 1)


def _baseline_generation(
    population: Population,
    evolution: EvolutionConfig,
    mutation: MutationConfig,
    config: GenomeConfig,
    rng: np.random.Generator,
) -> Population:
    """Turnover with the recombination tree disabled, at the same budget.

    Clustering still niches the population (the speciation analog) and the
    per-cluster bests are kept, but every offspring is a plain nearby
    mutation of those elites, dealt round-robin."""
    p = evolution.population_size
    min_d = evolution.min_distance
    cells = population[0].matrix.size
    k = min(p, len(population))
    clusters = cluster_population(population, k, rng)
    elite_guard = _AdmissionGuard(min_d, k, cells)
    elites: list[Individual] = []
    for view in clusters:
        best = best_of_cluster(view)
        if elite_guard.admit(best):
            elites.append(best)

    guard = _AdmissionGuard(min_d, p * p, cells)
    for ind in elites:
        guard.admit(ind)
    novel: list[Individual] = []
    for idx in range(p * p - p):
        child = mutate_near(elites[idx % len(elites)], mutation, config, rng)
        if guard.admit(child):
            novel.append(child)
    return Population(elites + novel, population.generation + 1)


def _evaluate(
    env: Environment, population: Population, seed: int, generation: int
) -> Population:
    scored = []
    for idx, ind in enumerate(population):
        if env.deterministic and ind.evaluated:
            scored.append(ind)
            continue
        rng = seeding.rng_for(seed, seeding.DOMAIN_EVAL, generation, idx)
        scored.append(ind.with_fitness(env.evaluate(ind, rng)))
    return Population(scored, population.generation)


def run_evolution(
    env: Environment,
    evolution: EvolutionConfig,
    mutation: MutationConfig,
    config: GenomeConfig,
    seed: int,
    on_generation: Callable[[int, Population], None] | None = None,
) -> RunResult:
    """Run one full evolutionary search.

    Loops evaluate -> terminate-check -> turnover until some individual
    reaches ``fitness_threshold`` (solved at that generation index,
    starting from 0) or ``max_generations`` generations were evaluated
    (failed, reporting the cap and the best seen).  Identical arguments
    reproduce identical results.
    """
    if (env.n_inputs, env.n_outputs) != (config.n_inputs, config.n_outputs):
        raise ConfigurationError(
            f"environment wants {env.n_inputs} inputs / {env.n_outputs} outputs, "
            f"genome config has {config.n_inputs} / {config.n_outputs}"
        )
    population = init_population(
        evolution, config, seeding.rng_for(seed, seeding.DOMAIN_INIT)
    )
    best_ever: Individual | None = None
    for generation in range(evolution.max_generations):
        population = _evaluate(env, population, seed, generation)
        gen_best = max(population, key=lambda ind: ind.fitness)
        if best_ever is None or gen_best.fitness > best_ever.fitness:
            best_ever = gen_best
        if on_generation is not None:
            on_generation(generation, population)
        if gen_best.fitness >= evolution.fitness_threshold:
            return RunResult(True, generation, gen_best)
        if generation == evolution.max_generations - 1:
            break
        rng = seeding.rng_for(seed, seeding.DOMAIN_TURNOVER, generation)
        if evolution.method in RET_METHODS:
            population = evolve_generation(population, evolution, mutation, config, rng)
        else:
            population = _baseline_generation(population, evolution, mutation, config, rng)
    assert best_ever is not None
    return RunResult(False, evolution.max_generations, best_ever)
