"""Genetic search over per-class seed triples.

An individual holds one candidate-pool index per class (CSF, GM, WM), so
crossover and mutation can never leave the feasible set.  Fitness is the
number of mask disagreements between the grown segmentation and the
reference, summed over the three classes; lower is better.
"""

from __future__ import annotations

import dataclasses
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from segseed.errors import ConfigError, SeedRejectedError
from segseed.image import CSF, GM, TISSUE_CLASSES, WM, Image2D, LabelMap, Point, check_same_shape
from segseed.regiongrow import GrowthCriterion, Neighborhood, segment
from segseed.seeding import CandidatePool, SeedList

log = logging.getLogger(__name__)

GROWTH_ORDER = (GM, WM, CSF)


@dataclass(frozen=True)
class GAConfig:
    population_size: int = 30
    max_generations: int = 50
    tournament_size: int = 3
    crossover_rate: float = 0.8
    mutation_rate: float = 0.1
    elite_count: int = 2
    stagnation_patience: int = 10
    rng_seed: int = 0

    def __post_init__(self):
        if self.population_size < 2:
            raise ConfigError(f"population_size must be >= 2, got {self.population_size}")
        if self.max_generations < 1:
            raise ConfigError("max_generations must be >= 1")
        if self.tournament_size < 1:
            raise ConfigError("tournament_size must be >= 1")
        for name in ("crossover_rate", "mutation_rate"):
            rate = getattr(self, name)
            if not 0.0 <= rate <= 1.0:
                raise ConfigError(f"{name} must lie in [0, 1], got {rate}")
        if not 0 <= self.elite_count < self.population_size:
            raise ConfigError("elite_count must satisfy 0 <= elite_count < population_size")
        if self.stagnation_patience < 0:
            raise ConfigError("stagnation_patience must be >= 0 (0 disables it)")

    @classmethod
    def from_mapping(cls, values: dict, base: "GAConfig | None" = None) -> "GAConfig":
        base = base or cls()
        types = {f.name: f.type for f in dataclasses.fields(cls)}
        updates = {}
        for key, raw in values.items():
            name = key.strip().replace("-", "_")
            if name not in types:
                raise ConfigError(f"unknown GA setting {key!r}")
            try:
                updates[name] = float(raw) if types[name] == "float" else int(raw)
            except ValueError:
                raise ConfigError(f"bad value for {key}: {raw!r}") from None
        return dataclasses.replace(base, **updates)

    @classmethod
    def from_file(cls, path, base: "GAConfig | None" = None) -> "GAConfig":
        return cls.from_mapping(read_key_values(path), base)

    def to_lines(self) -> list[str]:
        return [f"{f.name}={getattr(self, f.name)}" for f in dataclasses.fields(self)]


def read_key_values(path) -> dict[str, str]:
    """Read ``key=value`` lines; blank lines and ``#`` comments are skipped."""
    values = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key=value, got {line!r}")
            key, value = line.split("=", 1)
            values[key.strip()] = value.strip()
    return values


@dataclass(frozen=True)
class SeedChromosome:
    """Pool indices and the positions they decode to, ordered CSF, GM, WM."""

    indices: tuple[int, int, int]
    genes: tuple[Point, Point, Point]

    @classmethod
    def decode(cls, pool: CandidatePool, indices) -> "SeedChromosome":
        indices = tuple(int(i) for i in indices)
        genes = tuple(pool[c][i] for c, i in zip(TISSUE_CLASSES, indices))
        if len(set(genes)) != 3:
            raise ConfigError(f"chromosome genes share a position: {genes}")
        return cls(indices, genes)

    @classmethod
    def from_seeds(cls, pool: CandidatePool, seeds: SeedList) -> "SeedChromosome":
        by_class = dict(seeds)
        try:
            return cls.decode(pool, [pool[c].index(Point(*by_class[c])) for c in TISSUE_CLASSES])
        except (KeyError, ValueError):
            raise ConfigError("seeds are not all members of the candidate pool") from None

    def seeds(self) -> SeedList:
        return list(zip(TISSUE_CLASSES, self.genes))


@dataclass(frozen=True, order=True)
class FitnessValue:
    cost: int

    def __post_init__(self):
        if self.cost < 0:
            raise ValueError("cost must be non-negative")


def worst_cost(image: Image2D) -> int:
    return image.width * image.height * 3


def mask_cost(grown: LabelMap, reference: LabelMap) -> int:
    """Sum over classes of squared differences between binary class masks."""
    g, r = grown.pixels, reference.pixels
    return sum(int(np.count_nonzero((g == c) != (r == c))) for c in TISSUE_CLASSES)


def fitness(
    image: Image2D,
    chromosome: SeedChromosome,
    reference: LabelMap,
    criterion: GrowthCriterion = GrowthCriterion(),
    nbhd: Neighborhood = Neighborhood.EIGHT,
    order=GROWTH_ORDER,
) -> FitnessValue:
    check_same_shape(image, reference, "image and reference")
    rank = {c: i for i, c in enumerate(order)}
    seeds = sorted(chromosome.seeds(), key=lambda s: rank[s[0]])
    try:
        grown = segment(image, seeds, criterion, nbhd)
    except SeedRejectedError:
        return FitnessValue(worst_cost(image))
    return FitnessValue(mask_cost(grown, reference))


class GenerationRecord(NamedTuple):
    generation: int
    best_cost: int
    mean_cost: float


class EvolveResult(NamedTuple):
    best: SeedChromosome
    best_cost: FitnessValue
    history: list[GenerationRecord]


def history_csv(history: list[GenerationRecord]) -> str:
    lines = ["generation,best_cost,mean_cost"]
    lines += [f"{r.generation},{r.best_cost},{r.mean_cost:.6f}" for r in history]
    return "\n".join(lines) + "\n"


# worker-process state for parallel fitness evaluation
_worker_args = None


def _init_worker(args):
    global _worker_args
    _worker_args = args


def _worker_cost(chromosome):
    image, reference, criterion, nbhd, order = _worker_args
    return fitness(image, chromosome, reference, criterion, nbhd, order).cost


class _Search:
    def __init__(self, pool, config, rng):
        self.pool = pool
        self.config = config
        self.rng = rng
        self.sizes = pool.sizes()

    def random_individual(self):
        return self.repair([int(self.rng.integers(n)) for n in self.sizes])

    def repair(self, idx):
        """Redraw genes that collide with an earlier gene's position."""
        idx = list(idx)
        for g in range(1, 3):
            c = TISSUE_CLASSES[g]
            taken = {self.pool[TISSUE_CLASSES[h]][idx[h]] for h in range(g)}
            tries = 0
            while self.pool[c][idx[g]] in taken:
                tries += 1
                if tries > 64:
                    free = [i for i, p in enumerate(self.pool[c]) if p not in taken]
                    if not free:
                        raise ConfigError(f"class {c} pool has no position distinct from other genes")
                    idx[g] = free[0]
                    break
                idx[g] = int(self.rng.integers(self.sizes[g]))
        return tuple(idx)

    def tournament(self, costs):
        entrants = self.rng.integers(len(costs), size=self.config.tournament_size)
        return min(entrants.tolist(), key=lambda i: (costs[i], i))

    def offspring(self, a, b):
        cfg, rng = self.config, self.rng
        if rng.random() < cfg.crossover_rate:
            swap = rng.random(3) < 0.5
            a, b = (tuple(y if s else x for x, y, s in zip(a, b, swap)),
                    tuple(x if s else y for x, y, s in zip(a, b, swap)))
        children = []
        for child in (a, b):
            child = list(child)
            draws = rng.random(3)
            for g in range(3):
                if draws[g] < cfg.mutation_rate:
                    child[g] = int(rng.integers(self.sizes[g]))
            children.append(self.repair(child))
        return children


def evolve(
    image: Image2D,
    pool: CandidatePool,
    reference: LabelMap,
    criterion: GrowthCriterion = GrowthCriterion(),
    nbhd: Neighborhood = Neighborhood.EIGHT,
    config: GAConfig = GAConfig(),
    workers: int | None = None,
    order=GROWTH_ORDER,
) -> EvolveResult:
    """Search seed triples minimising :func:`fitness`.

    The history holds, per generation, the best cost found so far and the
    population's mean cost; with ``elite_count >= 1`` the former equals the
    generation best.  Costs are cached per chromosome, and all random draws
    happen in the calling process, so ``workers`` does not affect results.
    """
    pool.require_nonempty()
    check_same_shape(image, reference, "image and reference")
    rng = np.random.default_rng(config.rng_seed)
    search = _Search(pool, config, rng)
    cache: dict[tuple[int, int, int], int] = {}

    executor = None
    if workers and workers > 1:
        executor = ProcessPoolExecutor(
            workers, initializer=_init_worker, initargs=((image, reference, criterion, nbhd, order),)
        )

    def evaluate(population):
        todo = list(dict.fromkeys(ind for ind in population if ind not in cache))
        chromosomes = [SeedChromosome.decode(pool, ind) for ind in todo]
        if executor is not None:
            costs = executor.map(_worker_cost, chromosomes)
        else:
            costs = (fitness(image, ch, reference, criterion, nbhd, order).cost for ch in chromosomes)
        for ind, cost in zip(todo, costs):
            cache[ind] = cost
        return [cache[ind] for ind in population]

    try:
        population = [search.random_individual() for _ in range(config.population_size)]
        history: list[GenerationRecord] = []
        best, best_cost = None, math.inf
        stale = 0
        for gen in range(config.max_generations):
            costs = evaluate(population)
            ranked = sorted(range(len(population)), key=lambda i: (costs[i], i))
            if costs[ranked[0]] < best_cost:
                best, best_cost = population[ranked[0]], costs[ranked[0]]
                stale = 0
            else:
                stale += 1
            history.append(GenerationRecord(gen, best_cost, float(np.mean(costs))))
            log.debug("generation %d best %d mean %.2f", gen, best_cost, history[-1].mean_cost)
            if config.stagnation_patience and stale >= config.stagnation_patience:
                log.info("stopping after %d generations without improvement", stale)
                break
            if gen == config.max_generations - 1:
                break
            nxt = [population[i] for i in ranked[: config.elite_count]]
            while len(nxt) < config.population_size:
                a = population[search.tournament(costs)]
                b = population[search.tournament(costs)]
                nxt.extend(search.offspring(a, b))
            population = nxt[: config.population_size]
    finally:
        if executor is not None:
            executor.shutdown()

    return EvolveResult(SeedChromosome.decode(pool, best), FitnessValue(int(best_cost)), history)
