"""Black-box signal-indicator oracle with a feedback-budget ledger.

Optimizers see only ``evaluate(config) -> indicator dB``; the channel model
behind it stays hidden. One ``evaluate`` call is one logical feedback round
regardless of how many noisy reads are averaged internally.
"""

from dataclasses import dataclass, field

import numpy as np

from .channel import Scenario, effective_stack, sinr_db_from_stack
from .dma import PhaseConfig


class BudgetExhausted(RuntimeError):
    """Raised when the evaluation budget is spent; optimizers should stop
    and return their best-so-far result."""


@dataclass(frozen=True)
class OracleConfig:
    """Measurement model of the indicator feedback.

    Args:
        noise_mode: "noiseless" for exact SINR, "jitter" for additive
            Gaussian dB noise on every read.
        jitter_sigma: std-dev of the per-read dB noise.
        reads_per_eval: reads averaged into one returned indicator.
        budget_limit: max logical evaluations, or None for unlimited.
        log_history: keep a (config, indicator) log of every evaluation.
    """

    noise_mode: str = "noiseless"
    jitter_sigma: float = 0.0
    reads_per_eval: int = 1
    budget_limit: int | None = None
    log_history: bool = False

    def __post_init__(self):
        if self.noise_mode not in ("noiseless", "jitter"):
            raise ValueError(f"unknown noise mode {self.noise_mode!r}")
        if self.jitter_sigma < 0:
            raise ValueError("jitter sigma must be >= 0")
        if self.reads_per_eval < 1:
            raise ValueError("reads per evaluation must be >= 1")
        if self.budget_limit is not None and self.budget_limit < 0:
            raise ValueError("budget limit must be >= 0")


@dataclass
class BudgetLedger:
    """Counts logical evaluations; optionally logs every (config, value)."""

    evaluations_used: int = 0
    history: list | None = None

    def charge(self, config: PhaseConfig, value: float) -> None:
        self.evaluations_used += 1
        if self.history is not None:
            self.history.append((config, value))


@dataclass
class SinrOracle:
    """Evaluates phase configurations to a signal indicator in dB.

    Single-consumer: one optimizer run owns an oracle instance at a time.
    Distinct instances over the same scenario may run concurrently.
    """

    scenario: Scenario
    config: OracleConfig = field(default_factory=OracleConfig)
    rng: np.random.Generator | None = None

    def __post_init__(self):
        if self.config.noise_mode == "jitter" and self.rng is None:
            raise ValueError("jitter mode needs a random generator")
        self._stack = effective_stack(self.scenario)
        self._powers = np.asarray(self.scenario.powers)
        self._phasor_cache: dict[int, np.ndarray] = {}
        self.ledger = BudgetLedger(
            history=[] if self.config.log_history else None)

    def _weights(self, theta: PhaseConfig) -> np.ndarray:
        cache = self._phasor_cache.get(theta.codebook.bits)
        if cache is None:
            cache = np.exp(1j * theta.codebook.values)
            self._phasor_cache[theta.codebook.bits] = cache
        return cache[theta.indices]

    def true_indicator(self, theta: PhaseConfig) -> float:
        """Noiseless SINR of a configuration; does not touch the ledger."""
        return sinr_db_from_stack(self._stack, self._powers,
                                  self.scenario.noise_power,
                                  self.scenario.target, self._weights(theta))

    def evaluate(self, theta: PhaseConfig) -> float:
        """One feedback round: indicator (dB) for one configuration.

        Raises:
            BudgetExhausted: the logical-evaluation budget is already spent.
        """
        limit = self.config.budget_limit
        if limit is not None and self.ledger.evaluations_used >= limit:
            raise BudgetExhausted(f"evaluation budget of {limit} exhausted")
        value = self.true_indicator(theta)
        if self.config.noise_mode == "jitter":
            noise = self.rng.normal(0.0, self.config.jitter_sigma,
                                    size=self.config.reads_per_eval)
            value = value + float(noise.mean())
        self.ledger.charge(theta, value)
        return value

    @property
    def evaluations_used(self) -> int:
        return self.ledger.evaluations_used

    def remaining_budget(self) -> int | None:
        """Evaluations left, or None when unlimited."""
        if self.config.budget_limit is None:
            return None
        return self.config.budget_limit - self.ledger.evaluations_used

    def reset(self) -> None:
        """Restore the full budget and clear the history log."""
        self.ledger = BudgetLedger(
            history=[] if self.config.log_history else None)
