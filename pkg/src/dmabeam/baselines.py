"""Reference algorithms for budget-matched comparison.

All oracle-driven baselines emit the same :class:`~dmabeam.optimizer.RunRecord`
schema as the main optimizer, tracking the best configuration ever evaluated
(so best-so-far curves are non-decreasing under a noiseless oracle). The
exhaustive scan is the ground-truth verifier for small instances.
"""

import itertools
from dataclasses import dataclass, field

import numpy as np

from .channel import Scenario
from .dma import (ConfigError, PhaseCodebook, PhaseConfig, allzero_config,
                  decode_bits)
from .geometry import ArrayGeometry
from .optimizer import (RunRecord, collapse_bits, rotate_bits,
                        uniform_individual)
from .oracle import BudgetExhausted, OracleConfig, SinrOracle

__all__ = [
    "BaselineParams", "GaParams", "QgaParams", "rma", "mmse_quantized",
    "gfba", "classic_ga", "classic_qga", "exhaustive",
]


@dataclass(frozen=True)
class GaParams:
    """Classic elitist GA settings; mutation rate defaults to 1/(chromosome
    length) when left unset."""

    population_size: int = 100
    max_generations: int = 50
    crossover_rate: float = 0.8
    mutation_rate: float | None = None
    tournament_size: int = 2
    elite_count: int = 1

    def __post_init__(self):
        if self.population_size < 2 or self.max_generations < 1:
            raise ConfigError("population and generation counts must be positive")
        if not 0 <= self.crossover_rate <= 1:
            raise ConfigError("crossover rate must lie in [0, 1]")
        if self.mutation_rate is not None and not 0 <= self.mutation_rate <= 1:
            raise ConfigError("mutation rate must lie in [0, 1]")
        if self.tournament_size < 1 or self.elite_count < 0:
            raise ConfigError("tournament size and elite count must be valid")


@dataclass(frozen=True)
class QgaParams:
    """Conventional QGA settings: fixed lookup rotation angle, no mutation."""

    population_size: int = 100
    max_generations: int = 50
    rotation_step: float = 0.01 * np.pi

    def __post_init__(self):
        if self.population_size < 2 or self.max_generations < 1:
            raise ConfigError("population and generation counts must be positive")
        if self.rotation_step <= 0:
            raise ConfigError("rotation step must be positive")


@dataclass(frozen=True)
class BaselineParams:
    """Bundle of per-baseline settings used by the experiment harness."""

    rma_budget: int = 5000
    ga: GaParams = field(default_factory=GaParams)
    qga: QgaParams = field(default_factory=QgaParams)
    gfba_passes: int = 1

    def __post_init__(self):
        if self.rma_budget < 1 or self.gfba_passes < 1:
            raise ConfigError("baseline budgets must be positive")


def rma(oracle: SinrOracle, geom: ArrayGeometry, cb: PhaseCodebook,
        budget: int, rng: np.random.Generator,
        record_every: int = 100) -> RunRecord:
    """Best of ``budget`` uniformly random configurations.

    The running maximum is recorded every ``record_every`` evaluations (and
    once more for a final partial batch) so its curve lines up with the
    generation curves of the population algorithms.
    """
    if budget < 1:
        raise ConfigError("random-search budget must be >= 1")
    best_config = None
    best_value = None
    history = []
    complete = True
    start = oracle.evaluations_used
    for i in range(budget):
        config = PhaseConfig(rng.integers(0, cb.size, geom.n_elements),
                             geom, cb)
        try:
            value = oracle.evaluate(config)
        except BudgetExhausted:
            complete = False
            break
        if best_value is None or value > best_value:
            best_config, best_value = config, value
        if (i + 1) % record_every == 0:
            history.append(((i + 1) // record_every - 1, best_value,
                            oracle.evaluations_used))
    used = oracle.evaluations_used - start
    if used % record_every != 0 and used > 0:
        history.append((used // record_every, best_value,
                        oracle.evaluations_used))
    return RunRecord(best_config, best_value, tuple(history),
                     init_indicator=history[0][1] if history else best_value,
                     complete=complete)


def mmse_quantized(scenario: Scenario, cb: PhaseCodebook) -> PhaseConfig:
    """Quantized minimum-mean-square-error combiner (full CSI, simulation only).

    Solves R v = h_t with R the interference-plus-noise covariance of the
    per-element effective channels, then snaps the conjugate phase of every
    entry to the nearest codebook angle.
    """
    t = scenario.target
    vectors = [ch.entries @ w for ch, w in zip(scenario.channels, scenario.beams)]
    h_t = vectors[t]
    n = h_t.size
    r = scenario.noise_power * np.eye(n, dtype=complex)
    for k, h_k in enumerate(vectors):
        if k != t:
            r += scenario.powers[k] * np.outer(h_k, h_k.conj())
    v = np.linalg.solve(r, h_t)
    # combining weight e^{j theta_n} should align with conj(v_n)
    angles = (-np.angle(v)) % (2 * np.pi)
    step = 2 * np.pi / cb.size
    indices = np.rint(angles / step).astype(np.int64) % cb.size
    return PhaseConfig(indices, scenario.dma_geometry, cb)


def gfba(oracle: SinrOracle, geom: ArrayGeometry, cb: PhaseCodebook,
         passes: int = 1, mode: str = "absolute") -> RunRecord:
    """Greedy column-then-row sweep from the all-zero configuration.

    Every group (first each column, then each row) tries all codebook values
    applied to the whole group and keeps the best candidate (ties to the
    lowest value index). ``mode="absolute"`` assigns a common phase value to
    the group; ``mode="offset"`` adds a common cyclic offset instead. One
    history row is recorded per group sweep.
    """
    if passes < 1:
        raise ConfigError("pass count must be >= 1")
    if mode not in ("absolute", "offset"):
        raise ConfigError(f"unknown sweep mode {mode!r}")
    ys, zs = geom.element_coords()
    groups = [ys == y for y in range(geom.n_y)]
    groups += [zs == z for z in range(geom.n_z)]

    current = allzero_config(geom, cb)
    best_config = None
    best_value = None
    history = []
    complete = True
    group_counter = 0
    for _ in range(passes):
        for mask in groups:
            sweep_best = None
            sweep_value = None
            for v in range(cb.size):
                indices = current.indices.copy()
                if mode == "absolute":
                    indices[mask] = v
                else:
                    indices[mask] = (indices[mask] + v) % cb.size
                candidate = PhaseConfig(indices, geom, cb)
                try:
                    value = oracle.evaluate(candidate)
                except BudgetExhausted:
                    complete = False
                    break
                if sweep_value is None or value > sweep_value:
                    sweep_best, sweep_value = candidate, value
                if best_value is None or value > best_value:
                    best_config, best_value = candidate, value
            if sweep_best is not None:
                current = sweep_best
                history.append((group_counter, best_value,
                                oracle.evaluations_used))
                group_counter += 1
            if not complete:
                return RunRecord(best_config, best_value, tuple(history),
                                 init_indicator=history[0][1] if history else best_value,
                                 complete=False)
    return RunRecord(best_config, best_value, tuple(history),
                     init_indicator=history[0][1], complete=True)


def classic_ga(oracle: SinrOracle, geom: ArrayGeometry, cb: PhaseCodebook,
               params: GaParams, rng: np.random.Generator) -> RunRecord:
    """Standard elitist genetic algorithm on the bit chromosome.

    Tournament selection, single-point crossover, independent per-bit
    mutation, and carryover of the generation's best individual.
    """
    n_bits = geom.n_elements * cb.bits
    rate = params.mutation_rate if params.mutation_rate is not None else 1.0 / n_bits
    pop = rng.integers(0, 2, size=(params.population_size, n_bits),
                       dtype=np.uint8)

    best_config = None
    best_value = None
    history = []
    for gen in range(params.max_generations):
        values = np.empty(params.population_size)
        exhausted = False
        for q in range(params.population_size):
            try:
                values[q] = oracle.evaluate(decode_bits(pop[q], geom, cb))
            except BudgetExhausted:
                exhausted = True
                break
            if best_value is None or values[q] > best_value:
                best_value = values[q]
                best_config = decode_bits(pop[q], geom, cb)
        history.append((gen, best_value, oracle.evaluations_used))
        if exhausted:
            return RunRecord(best_config, best_value, tuple(history),
                             init_indicator=history[0][1], complete=False)

        def tournament():
            contenders = rng.integers(0, params.population_size,
                                      size=params.tournament_size)
            return contenders[int(np.argmax(values[contenders]))]

        elite = int(np.argmax(values))
        offspring = [pop[elite].copy() for _ in range(params.elite_count)]
        while len(offspring) < params.population_size:
            p1 = pop[tournament()]
            p2 = pop[tournament()]
            if rng.random() < params.crossover_rate and n_bits > 1:
                cut = int(rng.integers(1, n_bits))
                c1 = np.concatenate([p1[:cut], p2[cut:]])
                c2 = np.concatenate([p2[:cut], p1[cut:]])
            else:
                c1, c2 = p1.copy(), p2.copy()
            for child in (c1, c2):
                flips = rng.random(n_bits) < rate
                child ^= flips.astype(np.uint8)
                if len(offspring) < params.population_size:
                    offspring.append(child)
        pop = np.array(offspring, dtype=np.uint8)
    return RunRecord(best_config, best_value, tuple(history),
                     init_indicator=history[0][1], complete=True)


def qga_rotation_angles(bits: np.ndarray, value: float, best_bits: np.ndarray,
                        best_value: float, step: float) -> np.ndarray:
    """Signed per-bit rotation angles of the conventional lookup rule.

    Every bit rotates by ``step`` toward the best individual's bit, except
    bits that already match when the individual is at least as fit as the
    best (those get angle zero).
    """
    signs = np.where(best_bits == 1, 1.0, -1.0)
    magnitudes = np.full(bits.size, step)
    if value >= best_value:
        magnitudes[bits == best_bits] = 0.0
    return magnitudes * signs


def classic_qga(oracle: SinrOracle, geom: ArrayGeometry, cb: PhaseCodebook,
                params: QgaParams, rng: np.random.Generator) -> RunRecord:
    """Conventional quantum genetic algorithm with a fixed rotation angle.

    Uniform-superposition initialization, elitist best tracking, and the
    classic lookup rule: rotate every bit toward the best individual's bit
    by a fixed step, except bits that already match when the individual is
    at least as fit as the best. No mutation operator.
    """
    n_bits = geom.n_elements * cb.bits
    population = [uniform_individual(n_bits)
                  for _ in range(params.population_size)]
    best_config = None
    best_value = None
    best_bits = None
    history = []
    for gen in range(params.max_generations):
        gen_bits = []
        gen_values = []
        exhausted = False
        for ind in population:
            bits = collapse_bits(ind, rng)
            try:
                value = oracle.evaluate(decode_bits(bits, geom, cb))
            except BudgetExhausted:
                exhausted = True
                break
            gen_bits.append(bits)
            gen_values.append(value)
            if best_value is None or value > best_value:
                best_value = value
                best_config = decode_bits(bits, geom, cb)
                best_bits = bits
        history.append((gen, best_value, oracle.evaluations_used))
        if exhausted:
            return RunRecord(best_config, best_value, tuple(history),
                             init_indicator=history[0][1], complete=False)
        for q, ind in enumerate(population):
            angles = qga_rotation_angles(gen_bits[q], gen_values[q],
                                         best_bits, best_value,
                                         params.rotation_step)
            population[q] = rotate_bits(ind, angles)
    return RunRecord(best_config, best_value, tuple(history),
                     init_indicator=history[0][1], complete=True)


def exhaustive(oracle_or_scenario, geom: ArrayGeometry,
               cb: PhaseCodebook) -> tuple[PhaseConfig, float]:
    """Scan every configuration; ground truth for small instances.

    Accepts either a :class:`Scenario` (scored without touching any budget
    ledger) or an oracle. Refuses instances beyond 2**20 configurations.
    Ties go to the lowest lexicographic index vector.
    """
    n_configs = cb.size ** geom.n_elements
    if n_configs > 1 << 20:
        raise ConfigError(f"{n_configs} configurations exceed the exhaustive-"
                          "scan limit of 2^20")
    if isinstance(oracle_or_scenario, Scenario):
        probe = SinrOracle(oracle_or_scenario, OracleConfig())
        score = probe.true_indicator
    else:
        score = oracle_or_scenario.evaluate
    best_config = None
    best_value = None
    for combo in itertools.product(range(cb.size), repeat=geom.n_elements):
        config = PhaseConfig(np.array(combo, dtype=np.int64), geom, cb)
        value = score(config)
        if best_value is None or value > best_value:
            best_config, best_value = config, value
    return best_config, best_value
