"""Dynamic-block quantum genetic optimizer.

A population of quantum individuals (one two-amplitude qubit per chromosome
bit) is collapsed into candidate phase configurations each generation,
scored through the black-box oracle, and steered toward the best-so-far
configuration with similarity-adaptive rotation gates. Diversity is restored
by Hadamard mutations applied to whole element blocks. A greedy sliding-block
sweep seeds the search before the population loop starts.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .channel import DB_FLOOR, from_db
from .dma import (ConfigError, PhaseCodebook, PhaseConfig, allzero_config,
                  apply_block_offset, Block, block_positions, decode_bits,
                  encode_bits)
from .geometry import ArrayGeometry
from .oracle import BudgetExhausted, SinrOracle

_SQRT_HALF = 1.0 / math.sqrt(2.0)
_MAX_ROTATION = math.pi / 2


@dataclass(frozen=True)
class Qubit:
    """Real amplitude pair (a0, a1) with a0^2 + a1^2 = 1.

    Collapsing yields bit 1 with probability a1^2.
    """

    a0: float
    a1: float


def _normalized(a0, a1):
    norm = np.sqrt(a0 * a0 + a1 * a1)
    return a0 / norm, a1 / norm


def _rotated(a0, a1, angle):
    c, s = np.cos(angle), np.sin(angle)
    return _normalized(c * a0 - s * a1, s * a0 + c * a1)


def _hadamard(a0, a1):
    return _normalized((a0 + a1) * _SQRT_HALF, (a0 - a1) * _SQRT_HALF)


def rotate(qubit: Qubit, delta: float, direction: str) -> Qubit:
    """Rotate an amplitude pair by ``delta`` toward one basis state.

    ``direction`` is "toward_one" (moves collapse probability to bit 1) or
    "toward_zero". The raw rotation sign additionally flips in quadrants
    where a0*a1 < 0, so probability mass always moves toward the requested
    pole instead of orbiting past it; states park at the pole and oscillate
    within the step size. ``|delta|`` must stay below a quarter turn.
    """
    if direction == "toward_one":
        angle = delta
    elif direction == "toward_zero":
        angle = -delta
    else:
        raise ValueError(f"unknown rotation direction {direction!r}")
    if abs(delta) >= _MAX_ROTATION:
        raise ValueError("rotation angle must satisfy |delta| < pi/2")
    if qubit.a0 * qubit.a1 < 0:
        angle = -angle
    a0, a1 = _rotated(qubit.a0, qubit.a1, angle)
    return Qubit(float(a0), float(a1))


def hadamard(qubit: Qubit) -> Qubit:
    """Hadamard transform: pushes a basis state to the uniform superposition
    and back (involution)."""
    a0, a1 = _hadamard(qubit.a0, qubit.a1)
    return Qubit(float(a0), float(a1))


@dataclass(frozen=True)
class QuantumIndividual:
    """Amplitude arrays of one superposed candidate, one qubit per bit."""

    a0: np.ndarray = field(repr=False)
    a1: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.a0.shape != self.a1.shape or self.a0.ndim != 1:
            raise ValueError("amplitude arrays must be 1-D and equally sized")
        self.a0.setflags(write=False)
        self.a1.setflags(write=False)

    @property
    def n_qubits(self) -> int:
        return self.a0.size


def uniform_individual(n_qubits: int) -> QuantumIndividual:
    """All qubits in the uniform superposition (every bit is a coin flip)."""
    half = np.full(n_qubits, _SQRT_HALF)
    return QuantumIndividual(half, half.copy())


@dataclass(frozen=True)
class DbqgParams:
    """Hyperparameters of the optimizer run.

    Args:
        population_size: individuals per generation.
        max_generations: generation count of the main loop.
        rotation_step: base rotation-gate angle in radians.
        weight_a: exponent weight in (0, 1) balancing the indicator gap
            against the similarity term in the adaptive rotation angle.
        base_mutation: baseline per-individual mutation probability.
        block_param: divisor controlling the sliding-block size in the
            initialization sweep.
        seed: RNG seed of the run.
        seed_bias: collapse probability of the seeded individual's bits
            toward the initialization result.
        indicator_scale: "linear" evaluates the adaptive-angle gap on linear
            SINR (keeps it within [0, 1]); "db" uses raw dB values with a
            zero-gap guard when the best indicator is zero.
    """

    population_size: int = 100
    max_generations: int = 50
    rotation_step: float = 0.01 * math.pi
    weight_a: float = 0.6
    base_mutation: float = 0.1
    block_param: int = 2
    seed: int = 0
    seed_bias: float = 0.95
    indicator_scale: str = "linear"

    def __post_init__(self):
        if self.population_size < 2:
            raise ConfigError("population size must be >= 2")
        if self.max_generations < 1:
            raise ConfigError("generation count must be >= 1")
        if self.rotation_step <= 0:
            raise ConfigError("rotation step must be positive")
        if not 0 < self.weight_a < 1:
            raise ConfigError("weight_a must lie in (0, 1)")
        if not 0 <= self.base_mutation <= 1:
            raise ConfigError("base mutation must lie in [0, 1]")
        if self.block_param < 1:
            raise ConfigError("block parameter must be >= 1")
        if not 0 < self.seed_bias < 1:
            raise ConfigError("seed bias must lie in (0, 1)")
        if self.indicator_scale not in ("linear", "db"):
            raise ConfigError(f"unknown indicator scale {self.indicator_scale!r}")


@dataclass(frozen=True)
class RunRecord:
    """Outcome of one optimizer run on one scenario.

    ``per_generation`` rows are (generation, best-so-far indicator dB,
    cumulative oracle evaluations); with a noiseless oracle the indicator
    column is non-decreasing.
    """

    best_config: PhaseConfig
    best_indicator: float
    per_generation: tuple[tuple[int, float, int], ...]
    init_indicator: float
    complete: bool = True

    @property
    def evaluations(self) -> int:
        return self.per_generation[-1][2] if self.per_generation else 0


@dataclass(frozen=True)
class InitResult:
    """Configuration reached by the sliding-block sweep and its indicator."""

    config: PhaseConfig
    indicator: float | None
    evaluations: int
    complete: bool


def dynamic_block_init(oracle: SinrOracle, geom: ArrayGeometry,
                       cb: PhaseCodebook, b: int) -> InitResult:
    """Greedy sliding-block sweep from the all-zero configuration.

    At every block position all cyclic codebook offsets (including zero) are
    applied integrally to the block and evaluated; the best one is kept
    permanently before the block moves on. Offset ties go to the lowest
    index. On budget exhaustion the best configuration reached so far is
    returned flagged incomplete.
    """
    current = allzero_config(geom, cb)
    current_value = None
    start = oracle.evaluations_used
    for block in block_positions(geom, b):
        best_offset = None
        best_value = None
        for offset in range(cb.size):
            candidate = apply_block_offset(current, block, offset)
            try:
                value = oracle.evaluate(candidate)
            except BudgetExhausted:
                if best_offset is not None:
                    current = apply_block_offset(current, block, best_offset)
                    current_value = best_value
                return InitResult(current, current_value,
                                  oracle.evaluations_used - start, False)
            if best_value is None or value > best_value:
                best_offset, best_value = offset, value
        current = apply_block_offset(current, block, best_offset)
        current_value = best_value
    return InitResult(current, current_value,
                      oracle.evaluations_used - start, True)


def collapse_bits(ind: QuantumIndividual, rng: np.random.Generator) -> np.ndarray:
    """Measure every qubit: bit 1 with probability a1^2."""
    return (rng.random(ind.n_qubits) < ind.a1 ** 2).astype(np.uint8)


def collapse(ind: QuantumIndividual, geom: ArrayGeometry, cb: PhaseCodebook,
             rng: np.random.Generator) -> PhaseConfig:
    """Measure every qubit and decode the bits into a phase configuration."""
    return decode_bits(collapse_bits(ind, rng), geom, cb)


def rotate_bits(ind: QuantumIndividual,
                signed_angles: np.ndarray) -> QuantumIndividual:
    """Rotate every qubit by its own signed angle: positive angles move
    collapse probability toward bit 1, negative toward bit 0, from any
    amplitude quadrant (see :func:`rotate`); output renormalized."""
    steer = np.where(ind.a0 * ind.a1 < 0, -1.0, 1.0)
    a0, a1 = _rotated(ind.a0, ind.a1, signed_angles * steer)
    return QuantumIndividual(a0, a1)


def hamming_similarity(pop_bits: list[np.ndarray],
                       best_bits: np.ndarray) -> tuple[np.ndarray, float]:
    """Min-max-normalized Hamming distances to the best bit string.

    Returns the per-individual values and their population mean. All zeros
    when every individual is equidistant from the best.
    """
    dist = np.array([np.count_nonzero(bits != best_bits) for bits in pop_bits],
                    dtype=float)
    d_min, d_max = dist.min(), dist.max()
    if d_max == d_min:
        sim = np.zeros_like(dist)
    else:
        sim = (dist - d_min) / (d_max - d_min)
    return sim, float(sim.mean())


def rotation_angle(i_q: float, i_best: float, s_q: float,
                   params: DbqgParams) -> float:
    """Similarity-adaptive rotation angle for one individual.

    ``rotation_step * exp(a * (i_best - i_q) / i_best + (a - 1) * s_q)``,
    evaluated on whatever indicator scale the caller supplies. A zero best
    indicator drops the relative-gap term.
    """
    a = params.weight_a
    if i_best == 0:
        gap = 0.0
    else:
        gap = (i_best - i_q) / i_best
    return params.rotation_step * math.exp(a * gap + (a - 1.0) * s_q)


def mutation_probability(p0: float, s_pop: float, s_q: float) -> float:
    """Per-individual mutation probability, clamped to [0, 1]."""
    p = p0 * (1.0 - s_pop) * math.exp(1.0 - s_q)
    return min(1.0, max(0.0, p))


def block_mutation(ind: QuantumIndividual, geom: ArrayGeometry,
                   cb: PhaseCodebook, rng: np.random.Generator) -> QuantumIndividual:
    """Hadamard-mutate all qubits of a uniformly random element block.

    Width, height and position are drawn uniformly over every size and
    placement that fits the array. Amplitudes of the touched qubits are
    renormalized; the rest are untouched.
    """
    width = int(rng.integers(1, geom.n_y + 1))
    height = int(rng.integers(1, geom.n_z + 1))
    col = int(rng.integers(0, geom.n_y - width + 1))
    down = int(rng.integers(0, geom.n_z - height + 1))
    block = Block(col, geom.n_z - 1 - down, width, height)
    bit_mask = np.repeat(block.member_mask(geom), cb.bits)
    a0 = ind.a0.copy()
    a1 = ind.a1.copy()
    a0[bit_mask], a1[bit_mask] = _hadamard(a0[bit_mask], a1[bit_mask])
    return QuantumIndividual(a0, a1)


def seed_population(init_config: PhaseConfig, params: DbqgParams,
                    geom: ArrayGeometry, cb: PhaseCodebook,
                    rng: np.random.Generator) -> list[QuantumIndividual]:
    """Initial population: one individual biased to the init result, the rest
    in the uniform superposition.

    Individual 0's qubits collapse to the init bits with probability
    ``params.seed_bias``; construction itself is deterministic.
    """
    n_bits = geom.n_elements * cb.bits
    bits = encode_bits(init_config, cb)
    hi = math.sqrt(params.seed_bias)
    lo = math.sqrt(1.0 - params.seed_bias)
    a1 = np.where(bits == 1, hi, lo)
    a0 = np.where(bits == 1, lo, hi)
    population = [QuantumIndividual(a0, a1)]
    for _ in range(params.population_size - 1):
        population.append(uniform_individual(n_bits))
    return population


def _rotate_toward(ind: QuantumIndividual, magnitude: float,
                   best_bits: np.ndarray) -> QuantumIndividual:
    signs = np.where(best_bits == 1, 1.0, -1.0)
    return rotate_bits(ind, magnitude * signs)


def run_dbqg(oracle: SinrOracle, geom: ArrayGeometry, cb: PhaseCodebook,
             params: DbqgParams) -> RunRecord:
    """Full optimizer run against a fresh oracle.

    The sliding-block sweep seeds the elite and the population; every
    generation then collapses and scores all individuals, updates the elite
    on strict improvement, rotates each individual toward the elite's bit
    string with the adaptive angle, and mutates individuals selected by the
    similarity-driven probability. The elite lives outside the population
    and is never mutated. On budget exhaustion the record collected so far
    is returned flagged incomplete.
    """
    rng = np.random.default_rng(params.seed)
    init = dynamic_block_init(oracle, geom, cb, params.block_param)
    init_db = init.indicator if init.indicator is not None else DB_FLOOR
    best_config, best_db = init.config, init_db
    best_bits = encode_bits(best_config, cb)
    history = [(0, best_db, oracle.evaluations_used)]
    if not init.complete:
        return RunRecord(best_config, best_db, tuple(history), init_db,
                         complete=False)
    population = seed_population(init.config, params, geom, cb, rng)

    for gen in range(1, params.max_generations + 1):
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
            if value > best_db:
                best_db = value
                best_config = decode_bits(bits, geom, cb)
                best_bits = bits
        history.append((gen, best_db, oracle.evaluations_used))
        if exhausted:
            return RunRecord(best_config, best_db, tuple(history), init_db,
                             complete=False)

        similarities, s_pop = hamming_similarity(gen_bits, best_bits)
        if params.indicator_scale == "linear":
            i_best = from_db(best_db)
            i_values = [from_db(v) for v in gen_values]
        else:
            i_best = best_db
            i_values = gen_values
        cap = _MAX_ROTATION * (1 - 1e-9)
        for q in range(len(population)):
            delta = rotation_angle(i_values[q], i_best, float(similarities[q]),
                                   params)
            population[q] = _rotate_toward(population[q], min(delta, cap),
                                           best_bits)
        for q in range(len(population)):
            p_mut = mutation_probability(params.base_mutation, s_pop,
                                         float(similarities[q]))
            if rng.random() < p_mut:
                population[q] = block_mutation(population[q], geom, cb, rng)

    return RunRecord(best_config, best_db, tuple(history), init_db)
