"""Quantized phase configurations of a metasurface antenna.

Holds the discrete phase codebook, the per-element phase-index vector, the
sliding-block geometry used by the block-wise optimizers, and the binary
chromosome encoding used by the quantum-population optimizer.
"""

from dataclasses import dataclass, field

import numpy as np

from .geometry import ArrayGeometry


class ConfigError(ValueError):
    """Invalid configuration parameter."""


@dataclass(frozen=True)
class PhaseCodebook:
    """The allowed phase values of a tau-bit quantized element.

    ``values[i] = i * 2*pi / 2**tau`` for i in 0..2**tau - 1.
    """

    bits: int
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.values.setflags(write=False)

    @property
    def size(self) -> int:
        return 1 << self.bits

    def phasors(self) -> np.ndarray:
        """Unit-modulus complex value of each codebook entry."""
        return np.exp(1j * self.values)


def codebook(tau: int) -> PhaseCodebook:
    """Build the phase codebook for a tau-bit quantized element.

    Args:
        tau: quantization width, 1..8.
    """
    if not 1 <= tau <= 8:
        raise ConfigError(f"quantization bits must be in [1, 8], got {tau}")
    step = 2 * np.pi / (1 << tau)
    return PhaseCodebook(bits=tau, values=np.arange(1 << tau) * step)


@dataclass(frozen=True)
class PhaseConfig:
    """One antenna configuration: a codebook index per element.

    ``indices[n]`` selects the phase of element n in the flat order defined
    by :class:`~dmabeam.geometry.ArrayGeometry` (y-major, z fastest).
    """

    indices: np.ndarray = field(repr=False)
    geometry: ArrayGeometry
    codebook: PhaseCodebook

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int64)
        if idx.shape != (self.geometry.n_elements,):
            raise ValueError(
                f"expected {self.geometry.n_elements} indices, got {idx.shape}")
        if idx.size and (idx.min() < 0 or idx.max() >= self.codebook.size):
            raise ValueError("phase index out of codebook range")
        idx.setflags(write=False)
        object.__setattr__(self, "indices", idx)

    def phases(self) -> np.ndarray:
        """Phase value (radians) of every element."""
        return self.codebook.values[self.indices]


def allzero_config(geom: ArrayGeometry, cb: PhaseCodebook) -> PhaseConfig:
    return PhaseConfig(np.zeros(geom.n_elements, dtype=np.int64), geom, cb)


def to_weights(theta: PhaseConfig, cb: PhaseCodebook) -> np.ndarray:
    """Complex unit-modulus combining vector e^{j*phase} per element."""
    if cb.bits != theta.codebook.bits:
        raise ValueError("codebook mismatch")
    return np.exp(1j * cb.values[theta.indices])


@dataclass(frozen=True)
class Block:
    """A rectangular group of elements, addressed by its top-left vertex.

    ``top_left_col`` is the y coordinate of the left edge; ``top_left_row``
    is the z coordinate of the top edge (the top row of the array is
    z = n_z - 1). The block spans ``width`` columns rightward and ``height``
    rows downward (decreasing z).
    """

    top_left_col: int
    top_left_row: int
    width: int
    height: int

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ConfigError("block dimensions must be >= 1")
        if self.top_left_col < 0 or self.top_left_row - self.height + 1 < 0:
            raise ConfigError("block extends outside the array")

    def validate_within(self, geom: ArrayGeometry) -> None:
        if (self.top_left_col + self.width > geom.n_y
                or self.top_left_row >= geom.n_z):
            raise ConfigError("block extends outside the array")

    def member_mask(self, geom: ArrayGeometry) -> np.ndarray:
        """Boolean mask over flat element indices covered by this block."""
        self.validate_within(geom)
        ys, zs = geom.element_coords()
        in_cols = (ys >= self.top_left_col) & (ys < self.top_left_col + self.width)
        in_rows = (zs <= self.top_left_row) & (zs > self.top_left_row - self.height)
        return in_cols & in_rows


def block_positions(geom: ArrayGeometry, b: int) -> list[Block]:
    """All positions of the sliding block for block parameter ``b``.

    The block spans ceil(n_y/b) columns by ceil(n_z/b) rows. The traversal
    starts with the top-left vertex at (column 0, row n_z-1), strides one
    column rightward until the block's right edge hits the array edge, then
    drops one row and restarts from the leftmost column, until the block's
    bottom edge reaches the array bottom. Every element is covered by at
    least one position.
    """
    if b < 1:
        raise ConfigError(f"block parameter must be >= 1, got {b}")
    width = -(-geom.n_y // b)
    height = -(-geom.n_z // b)
    if width > geom.n_y or height > geom.n_z:
        raise ConfigError("block larger than the array")
    positions = []
    for down in range(geom.n_z - height + 1):
        top_row = geom.n_z - 1 - down
        for col in range(geom.n_y - width + 1):
            positions.append(Block(col, top_row, width, height))
    return positions


def apply_block_offset(theta: PhaseConfig, block: Block, offset_index: int) -> PhaseConfig:
    """Add a common cyclic codebook offset to every element of a block.

    Index differences inside the block are preserved modulo the codebook
    size; elements outside the block are untouched.
    """
    size = theta.codebook.size
    if not 0 <= offset_index < size:
        raise ValueError(f"offset index {offset_index} out of range")
    mask = block.member_mask(theta.geometry)
    indices = theta.indices.copy()
    indices[mask] = (indices[mask] + offset_index) % size
    return PhaseConfig(indices, theta.geometry, theta.codebook)


_BIT_WEIGHTS: dict[int, np.ndarray] = {}


def _bit_weights(tau: int) -> np.ndarray:
    cached = _BIT_WEIGHTS.get(tau)
    if cached is None:
        cached = 1 << np.arange(tau - 1, -1, -1)
        cached.setflags(write=False)
        _BIT_WEIGHTS[tau] = cached
    return cached


def encode_bits(theta: PhaseConfig, cb: PhaseCodebook, gray: bool = False) -> np.ndarray:
    """Binary chromosome of a configuration: tau bits per element, MSB first,
    element-major. ``gray=True`` switches to reflected Gray code."""
    if cb.bits != theta.codebook.bits:
        raise ValueError("codebook mismatch")
    idx = theta.indices
    if gray:
        idx = idx ^ (idx >> 1)
    shifts = np.arange(cb.bits - 1, -1, -1)
    bits = (idx[:, None] >> shifts) & 1
    return bits.reshape(-1).astype(np.uint8)


def decode_bits(bits: np.ndarray, geom: ArrayGeometry, cb: PhaseCodebook,
                gray: bool = False) -> PhaseConfig:
    """Inverse of :func:`encode_bits`; ``decode_bits(encode_bits(x)) == x``."""
    bits = np.asarray(bits)
    expected = geom.n_elements * cb.bits
    if bits.shape != (expected,):
        raise ValueError(f"expected {expected} bits, got {bits.shape}")
    idx = bits.reshape(geom.n_elements, cb.bits).astype(np.int64) @ _bit_weights(cb.bits)
    if gray:
        out = idx.copy()
        shift = 1
        while shift < cb.bits:
            out ^= out >> shift
            shift *= 2
        idx = out
    return PhaseConfig(idx, geom, cb)
