"""Multi-base-station wireless world and the received-SINR objective.

Builds steering vectors, multipath channels and fixed analog base-station
beams, and evaluates the combined-output SINR for any antenna phase
configuration.

Spatial signature convention: the per-element phase progression along y is
exp(-j*2*pi*(d_y/wavelength)*sin(elev)*sin(azim)) and along z is
exp(-j*2*pi*(d_z/wavelength)*cos(azim)). Note that the z-axis factor depends
on the cosine of the *azimuth* angle; this unusual convention is implemented
verbatim rather than replaced with the textbook cos(elev) form, so gains are
reproducible against the same convention elsewhere.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .dma import ConfigError, PhaseConfig, to_weights
from .geometry import ArrayGeometry

SPEED_OF_LIGHT = 299792458.0

# Total floor standing in for -inf dB so sorting and averaging stay finite.
DB_FLOOR = -300.0


def to_db(linear: float) -> float:
    """Power ratio to dB, floored at DB_FLOOR for zero/denormal inputs."""
    if linear <= 0.0:
        return DB_FLOOR
    return max(10.0 * math.log10(linear), DB_FLOOR)


def from_db(db: float) -> float:
    return 10.0 ** (db / 10.0)


def steering_vector(geom: ArrayGeometry, elev: float, azim: float) -> np.ndarray:
    """Array response for a plane wave from direction (elev, azim), radians.

    Returns the Kronecker product of the y-axis signature powers
    [a_y^0 .. a_y^(n_y-1)] and z-axis signature powers [a_z^0 .. a_z^(n_z-1)],
    so the flat entry for element (y, z) is a_y^y * a_z^z at index y*n_z + z.
    Every entry has unit modulus.
    """
    phase_y = -2 * np.pi * (geom.d_y / geom.wavelength) * np.sin(elev) * np.sin(azim)
    phase_z = -2 * np.pi * (geom.d_z / geom.wavelength) * np.cos(azim)
    sig_y = np.exp(1j * phase_y * np.arange(geom.n_y))
    sig_z = np.exp(1j * phase_z * np.arange(geom.n_z))
    return np.kron(sig_y, sig_z)


@dataclass(frozen=True)
class PathParams:
    """One propagation path: complex gain plus departure/arrival angles."""

    gain: complex
    elev_rx: float
    azim_rx: float
    elev_tx: float
    azim_tx: float

    def __post_init__(self):
        angles = (self.elev_rx, self.azim_rx, self.elev_tx, self.azim_tx)
        if not all(math.isfinite(a) for a in angles):
            raise ValueError("path angles must be finite")
        if not math.isfinite(abs(self.gain)):
            raise ValueError("path gain must be finite")


@dataclass(frozen=True)
class Channel:
    """Channel matrix between one BS and the relay array (N x M complex)."""

    entries: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.entries.setflags(write=False)

    @property
    def shape(self) -> tuple[int, int]:
        return self.entries.shape


def build_channel(paths: list[PathParams], dma_geom: ArrayGeometry,
                  bs_geom: ArrayGeometry) -> Channel:
    """Sum of per-path outer products of receive and transmit signatures."""
    if not paths:
        raise ValueError("degenerate channel: no propagation paths")
    entries = np.zeros((dma_geom.n_elements, bs_geom.n_elements), dtype=complex)
    for p in paths:
        rx = steering_vector(dma_geom, p.elev_rx, p.azim_rx)
        tx = steering_vector(bs_geom, p.elev_tx, p.azim_tx)
        entries += p.gain * np.outer(rx, tx)
    return Channel(entries)


def dft_codebook(m: int) -> list[np.ndarray]:
    """The m columns of the unitary DFT matrix, each a unit-norm beam.

    Beam 0 is broadside (uniform phase); the rest sweep the spatial
    frequencies of an m-element array.
    """
    if m < 1:
        raise ConfigError("codebook needs at least one beam")
    n = np.arange(m)
    beams = []
    for q in range(m):
        w = np.exp(-2j * np.pi * n * q / m) / np.sqrt(m)
        w.setflags(write=False)
        beams.append(w)
    return beams


def select_bs_beam(beams: list[np.ndarray], channel: Channel) -> np.ndarray:
    """Pick the codebook beam delivering the most power to the relay.

    Maximizes ||H w||^2 over the codebook; ties go to the lowest index.
    """
    if not beams:
        raise ValueError("empty beam codebook")
    m = channel.shape[1]
    for w in beams:
        if w.shape != (m,):
            raise ValueError(f"beam length {w.shape} does not match channel "
                             f"columns {m}")
    powers = [float(np.linalg.norm(channel.entries @ w) ** 2) for w in beams]
    return beams[int(np.argmax(powers))]


@dataclass(frozen=True)
class Scenario:
    """A fully instantiated world: channels, BS beams, powers, noise, target."""

    channels: tuple[Channel, ...]
    beams: tuple[np.ndarray, ...]
    powers: tuple[float, ...]
    noise_power: float
    target: int
    dma_geometry: ArrayGeometry

    def __post_init__(self):
        k = len(self.channels)
        if k < 1:
            raise ValueError("scenario needs at least one BS")
        if not (len(self.beams) == len(self.powers) == k):
            raise ValueError("channels, beams and powers must have equal length")
        if not 0 <= self.target < k:
            raise ValueError(f"target index {self.target} out of range")
        if self.noise_power <= 0:
            raise ValueError("noise power must be positive")
        n = self.dma_geometry.n_elements
        for ch, w, p in zip(self.channels, self.beams, self.powers):
            if ch.shape[0] != n:
                raise ValueError("channel rows do not match the DMA geometry")
            if w.shape != (ch.shape[1],):
                raise ValueError("beam length does not match channel columns")
            if abs(np.linalg.norm(w) - 1.0) > 1e-6:
                raise ValueError("BS beams must be unit norm")
            if p < 0:
                raise ValueError("transmit powers must be non-negative")

    @property
    def n_bs(self) -> int:
        return len(self.channels)

    def with_noise_power(self, noise_power: float) -> "Scenario":
        return Scenario(self.channels, self.beams, self.powers, noise_power,
                        self.target, self.dma_geometry)


def effective_stack(scenario: Scenario) -> np.ndarray:
    """K x N matrix whose row k is the effective channel H_k @ w_k."""
    return np.stack([ch.entries @ w
                     for ch, w in zip(scenario.channels, scenario.beams)])


def sinr_db_from_stack(stack: np.ndarray, powers: np.ndarray, noise_power: float,
                       target: int, weights: np.ndarray) -> float:
    """SINR (dB) of the combined output for a given weight vector.

    Shared by :func:`received_sinr` and the simulation oracle so both paths
    produce bit-identical values.
    """
    amps = stack @ weights
    gains = np.abs(amps) ** 2 * powers
    signal = float(gains[target])
    interference = float(gains.sum() - gains[target])
    if interference < 0.0:
        interference = 0.0
    return to_db(signal / (interference + noise_power))


def effective_gain(theta: PhaseConfig, channel: Channel, beam: np.ndarray) -> float:
    """|theta . H w|^2: power of the combined effective channel."""
    if channel.shape[0] != theta.geometry.n_elements:
        raise ValueError("channel rows do not match the phase configuration")
    if beam.shape != (channel.shape[1],):
        raise ValueError("beam length does not match channel columns")
    weights = to_weights(theta, theta.codebook)
    return float(np.abs(np.dot(weights, channel.entries @ beam)) ** 2)


def received_sinr(scenario: Scenario, theta: PhaseConfig) -> float:
    """Received SINR in dB: target power over interference-plus-noise power."""
    if theta.geometry.n_elements != scenario.dma_geometry.n_elements:
        raise ValueError("phase configuration does not match the scenario array")
    weights = to_weights(theta, theta.codebook)
    return sinr_db_from_stack(effective_stack(scenario),
                              np.asarray(scenario.powers), scenario.noise_power,
                              scenario.target, weights)


def allzero_snr(scenario: Scenario) -> float:
    """SNR (dB) with every phase at zero, ignoring interference.

    The conventional x-axis label for noise sweeps.
    """
    return to_db(allzero_signal_power(scenario) / scenario.noise_power)


def allzero_signal_power(scenario: Scenario) -> float:
    """Target-signal power at the combined output with all phases at zero."""
    t = scenario.target
    h = scenario.channels[t].entries @ scenario.beams[t]
    return float(np.abs(h.sum()) ** 2) * scenario.powers[t]


@dataclass(frozen=True)
class ScenarioConfig:
    """Knobs for random scenario generation.

    Distances are sampled uniformly within the given ranges and interpreted
    as the 3D BS-to-relay distance; azimuths are uniform over the circle.
    The target BS is index 0; the remaining ``n_interferers`` entries are
    interference sources.
    """

    dma_n_y: int = 4
    dma_n_z: int = 4
    bs_n_y: int = 8
    bs_n_z: int = 1
    carrier_hz: float = 2.6e9
    spacing_wavelengths: float = 0.5
    n_interferers: int = 4
    target_range_m: tuple[float, float] = (100.0, 300.0)
    interferer_range_m: tuple[float, float] = (300.0, 900.0)
    bs_height_m: float = 25.0
    relay_height_m: float = 1.5
    power: float = 1.0
    noise_power: float = 1e-7
    n_nlos_paths: int = 0
    nlos_gain_factor: float = 0.3

    def __post_init__(self):
        for lo, hi in (self.target_range_m, self.interferer_range_m):
            if lo <= 0 or hi <= 0:
                raise ConfigError("distances must be positive")
            if lo > hi:
                raise ConfigError(f"distance range [{lo}, {hi}] has min > max")
        if self.n_interferers < 0:
            raise ConfigError("interferer count must be >= 0")
        if self.power < 0 or self.noise_power <= 0:
            raise ConfigError("powers must be non-negative and noise positive")
        if self.n_nlos_paths < 0:
            raise ConfigError("NLoS path count must be >= 0")
        height_gap = abs(self.bs_height_m - self.relay_height_m)
        for lo, _ in (self.target_range_m, self.interferer_range_m):
            if lo <= height_gap:
                raise ConfigError("minimum distance must exceed the BS/relay "
                                  "height offset")

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.carrier_hz

    def dma_geometry(self) -> ArrayGeometry:
        d = self.spacing_wavelengths * self.wavelength
        return ArrayGeometry(self.dma_n_y, self.dma_n_z, d, d, self.wavelength)

    def bs_geometry(self) -> ArrayGeometry:
        d = self.spacing_wavelengths * self.wavelength
        return ArrayGeometry(self.bs_n_y, self.bs_n_z, d, d, self.wavelength)


def los_path(config: ScenarioConfig, distance: float, azimuth: float,
             phase: float) -> PathParams:
    """Line-of-sight path for a BS at the given 3D distance and azimuth.

    Gain magnitude follows the free-space law wavelength/(4*pi*distance);
    elevation/azimuth at both ends come from the 3D geometry of the BS and
    relay heights.
    """
    height_gap = config.bs_height_m - config.relay_height_m
    horizontal = math.sqrt(distance ** 2 - height_gap ** 2)
    ux = horizontal * math.cos(azimuth) / distance
    uy = horizontal * math.sin(azimuth) / distance
    uz = height_gap / distance
    magnitude = config.wavelength / (4 * np.pi * distance)
    return PathParams(
        gain=complex(magnitude * np.exp(1j * phase)),
        elev_rx=math.acos(uz),
        azim_rx=math.atan2(uy, ux),
        elev_tx=math.acos(-uz),
        azim_tx=math.atan2(-uy, -ux),
    )


def generate_scenario(config: ScenarioConfig, rng: np.random.Generator) -> Scenario:
    """Draw a random multi-BS placement and build its channels and beams.

    Line-of-sight gains follow the free-space law |gain| = wavelength/(4*pi*d)
    with uniform random phase. Each BS then steers its fixed analog beam to
    maximize delivered power toward the relay. Bit-reproducible for a given
    generator state.
    """
    dma_geom = config.dma_geometry()
    bs_geom = config.bs_geometry()
    beam_set = dft_codebook(bs_geom.n_elements)

    channels = []
    beams = []
    ranges = [config.target_range_m] + [config.interferer_range_m] * config.n_interferers
    for lo, hi in ranges:
        distance = rng.uniform(lo, hi)
        azimuth = rng.uniform(0, 2 * np.pi)
        paths = [los_path(config, distance, azimuth, rng.uniform(0, 2 * np.pi))]
        if config.n_nlos_paths:
            los_mag = abs(paths[0].gain)
            scale = config.nlos_gain_factor * los_mag / math.sqrt(config.n_nlos_paths)
            for _ in range(config.n_nlos_paths):
                raw = rng.normal(size=2) / math.sqrt(2)
                paths.append(PathParams(
                    gain=complex(scale * (raw[0] + 1j * raw[1])),
                    elev_rx=rng.uniform(0, np.pi),
                    azim_rx=rng.uniform(-np.pi, np.pi),
                    elev_tx=rng.uniform(0, np.pi),
                    azim_tx=rng.uniform(-np.pi, np.pi),
                ))
        channel = build_channel(paths, dma_geom, bs_geom)
        channels.append(channel)
        beams.append(select_bs_beam(beam_set, channel))

    k = 1 + config.n_interferers
    return Scenario(
        channels=tuple(channels),
        beams=tuple(beams),
        powers=(config.power,) * k,
        noise_power=config.noise_power,
        target=0,
        dma_geometry=dma_geom,
    )
