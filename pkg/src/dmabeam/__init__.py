"""Blind interference-suppression beamforming for metasurface antenna relays.

A parametric multi-base-station channel model, a discrete-phase SINR
objective behind a black-box oracle, a dynamic-block quantum genetic
optimizer with budget-matched baselines, and a seeded Monte Carlo harness.
"""

from .baselines import (BaselineParams, GaParams, QgaParams, classic_ga,
                        classic_qga, exhaustive, gfba, mmse_quantized, rma)
from .channel import (Channel, PathParams, Scenario, ScenarioConfig,
                      allzero_snr, build_channel, dft_codebook,
                      effective_gain, generate_scenario, received_sinr,
                      select_bs_beam, steering_vector, DB_FLOOR)
from .dma import (Block, ConfigError, PhaseCodebook, PhaseConfig,
                  allzero_config, apply_block_offset, block_positions,
                  codebook, decode_bits, encode_bits, to_weights)
from .geometry import ArrayGeometry
from .harness import (ExperimentConfig, ExperimentResult, SummaryTable,
                      default_config, emit_outputs, load_config,
                      noise_sweep_points, parse_config, run_experiment)
from .optimizer import (DbqgParams, InitResult, QuantumIndividual, Qubit,
                        RunRecord, block_mutation, collapse,
                        dynamic_block_init, hadamard, hamming_similarity,
                        mutation_probability, rotate, rotation_angle,
                        run_dbqg, seed_population)
from .oracle import BudgetExhausted, BudgetLedger, OracleConfig, SinrOracle

__version__ = "0.1.0"
