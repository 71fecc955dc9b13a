import math

import numpy as np
import pytest

from dmabeam.channel import (DB_FLOOR, Channel, PathParams, Scenario,
                             ScenarioConfig, allzero_snr, build_channel,
                             dft_codebook, effective_gain, generate_scenario,
                             received_sinr, select_bs_beam, steering_vector)
from dmabeam.dma import ConfigError, PhaseConfig, allzero_config, codebook
from dmabeam.geometry import ArrayGeometry
from oracles import (pairwise_gain_expansion, random_single_path_instance,
                     scalar_sinr_db, scalar_steering_entry)


def geom(n_y, n_z, wavelength=0.1153):
    return ArrayGeometry.half_spaced(n_y, n_z, wavelength)


class TestSteeringVector:
    def test_endfire_alternating_signs(self):
        g = geom(4, 4)
        sv = steering_vector(g, np.pi / 2, np.pi / 2)
        ys, _ = g.element_coords()
        expected = np.where(ys % 2 == 0, 1.0, -1.0)
        np.testing.assert_allclose(sv, expected, atol=1e-12)

    def test_zero_elevation_all_ones(self):
        sv = steering_vector(geom(3, 5), 0.0, np.pi / 2)
        np.testing.assert_allclose(sv, np.ones(15), atol=1e-12)

    def test_matches_scalar_expansion(self):
        g = geom(2, 2)
        elev, azim = np.pi / 2, np.pi / 4
        sv = steering_vector(g, elev, azim)
        for n in range(4):
            expected = scalar_steering_entry(g, elev, azim, n // 2, n % 2)
            assert abs(sv[n] - expected) < 1e-12

    def test_unit_modulus(self):
        rng = np.random.default_rng(0)
        g = geom(5, 3)
        for _ in range(50):
            sv = steering_vector(g, rng.uniform(0, np.pi),
                                 rng.uniform(-np.pi, np.pi))
            np.testing.assert_allclose(np.abs(sv), 1.0, atol=1e-12)


class TestBuildChannel:
    def test_single_path_scalar_arrays(self):
        g1 = geom(1, 1)
        ch = build_channel([PathParams(1.0, 0.3, 0.4, 0.5, 0.6)], g1, g1)
        np.testing.assert_allclose(ch.entries, [[1.0]], atol=1e-15)

    def test_broadside_all_ones(self):
        ch = build_channel([PathParams(1.0, 0.0, np.pi / 2, 0.0, np.pi / 2)],
                           geom(2, 2), geom(1, 1))
        assert ch.shape == (4, 1)
        np.testing.assert_allclose(ch.entries, np.ones((4, 1)), atol=1e-12)

    def test_two_paths_match_double_loop(self):
        g_rx, g_tx = geom(2, 2), geom(3, 1)
        paths = [PathParams(0.7 + 0.2j, 0.9, 0.3, 1.1, -0.4),
                 PathParams(-0.1 + 1.3j, 1.4, -1.0, 0.2, 2.0)]
        ch = build_channel(paths, g_rx, g_tx)
        for i in range(4):
            for m in range(3):
                expected = 0
                for p in paths:
                    a = scalar_steering_entry(g_rx, p.elev_rx, p.azim_rx,
                                              i // 2, i % 2)
                    b = scalar_steering_entry(g_tx, p.elev_tx, p.azim_tx, m, 0)
                    expected += p.gain * a * b
                assert abs(ch.entries[i, m] - expected) < 1e-12

    def test_empty_paths_rejected(self):
        with pytest.raises(ValueError, match="degenerate"):
            build_channel([], geom(2, 2), geom(1, 1))


class TestSelectBsBeam:
    def test_single_candidate(self):
        ch = Channel(np.ones((4, 2), dtype=complex))
        beams = [np.array([1.0, 0.0], dtype=complex)]
        assert select_bs_beam(beams, ch) is beams[0]

    def test_all_ones_channel_picks_broadside(self):
        ch = Channel(np.ones((4, 8), dtype=complex))
        chosen = select_bs_beam(dft_codebook(8), ch)
        np.testing.assert_allclose(chosen, np.ones(8) / np.sqrt(8))

    def test_matches_exhaustive_scan(self):
        rng = np.random.default_rng(5)
        entries = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        ch = Channel(entries)
        # 8 oversampled DFT beams for a 4-antenna array
        beams = [np.exp(-2j * np.pi * np.arange(4) * q / 8) / 2
                 for q in range(8)]
        chosen = select_bs_beam(beams, ch)
        powers = []
        for w in beams:
            acc = 0.0
            for n in range(4):
                amp = sum(entries[n, m] * w[m] for m in range(4))
                acc += abs(amp) ** 2
            powers.append(acc)
        np.testing.assert_allclose(chosen, beams[int(np.argmax(powers))])

    def test_dimension_mismatch(self):
        ch = Channel(np.ones((4, 2), dtype=complex))
        with pytest.raises(ValueError):
            select_bs_beam([np.ones(3) / np.sqrt(3)], ch)


def ones_scenario(noise=1.0, power=1.0):
    """Single-BS scenario whose effective channel is the all-ones 4-vector."""
    ch = Channel(np.ones((4, 1), dtype=complex))
    beam = np.array([1.0], dtype=complex)
    return Scenario((ch,), (beam,), (power,), noise, 0, geom(2, 2))


class TestEffectiveGain:
    def test_coherent_maximum(self):
        s = ones_scenario()
        theta = allzero_config(s.dma_geometry, codebook(2))
        assert effective_gain(theta, s.channels[0], s.beams[0]) == pytest.approx(16.0)

    def test_perfect_cancellation(self):
        g = geom(2, 2)
        ch = Channel(np.array([[1.0], [-1.0], [1.0], [-1.0]], dtype=complex))
        theta = allzero_config(g, codebook(2))
        gain = effective_gain(theta, ch, np.array([1.0], dtype=complex))
        assert gain == pytest.approx(0.0, abs=1e-24)

    def test_matches_pairwise_cosine_expansion(self):
        rng = np.random.default_rng(17)
        g = geom(4, 4)
        for _ in range(50):
            path, bs, w, eta, theta = random_single_path_instance(rng, g)
            channel = build_channel([path], g, bs)
            gain = effective_gain(theta, channel, w)
            expected = pairwise_gain_expansion(g, path.elev_rx, path.azim_rx,
                                               eta, theta.phases())
            scale = max(abs(gain), abs(expected), g.n_elements * abs(eta) ** 2)
            assert abs(gain - expected) < 1e-9 * scale

    def test_dimension_mismatch(self):
        s = ones_scenario()
        theta = allzero_config(geom(3, 3), codebook(2))
        with pytest.raises(ValueError):
            effective_gain(theta, s.channels[0], s.beams[0])


class TestReceivedSinr:
    def test_single_bs_is_snr(self):
        s = ones_scenario(noise=0.5, power=1.0)
        theta = allzero_config(s.dma_geometry, codebook(2))
        assert received_sinr(s, theta) == pytest.approx(10 * math.log10(16 / 0.5))

    def test_zero_signal_floors(self):
        g = geom(2, 2)
        ch = Channel(np.array([[1.0], [-1.0], [1.0], [-1.0]], dtype=complex))
        s = Scenario((ch,), (np.array([1.0], dtype=complex),), (1.0,), 1.0, 0, g)
        theta = allzero_config(g, codebook(2))
        assert received_sinr(s, theta) == DB_FLOOR

    def test_three_bs_matches_direct_loop(self):
        config = ScenarioConfig(n_interferers=2)
        rng = np.random.default_rng(23)
        cb = codebook(2)
        for _ in range(10):
            s = generate_scenario(config, rng)
            theta = PhaseConfig(rng.integers(0, 4, 16), s.dma_geometry, cb)
            got = received_sinr(s, theta)
            expected = scalar_sinr_db(s, theta)
            assert abs(got - expected) < 1e-9 * max(1.0, abs(expected))


class TestAllzeroSnr:
    def test_doubling_noise_drops_3db(self):
        s1 = ones_scenario(noise=0.25)
        s2 = s1.with_noise_power(0.5)
        drop = allzero_snr(s1) - allzero_snr(s2)
        assert drop == pytest.approx(10 * math.log10(2), abs=1e-12)

    def test_unit_ratio_is_zero_db(self):
        g = geom(1, 1)
        ch = Channel(np.ones((1, 1), dtype=complex))
        s = Scenario((ch,), (np.array([1.0], dtype=complex),), (1.0,), 1.0, 0, g)
        assert allzero_snr(s) == pytest.approx(0.0, abs=1e-12)

    def test_consistent_with_interference_free_sinr(self):
        config = ScenarioConfig()
        rng = np.random.default_rng(31)
        cb = codebook(2)
        for _ in range(10):
            s = generate_scenario(config, rng)
            t = s.target
            sub = Scenario((s.channels[t],), (s.beams[t],), (s.powers[t],),
                           s.noise_power, 0, s.dma_geometry)
            theta = allzero_config(s.dma_geometry, cb)
            assert allzero_snr(s) == pytest.approx(received_sinr(sub, theta),
                                                   rel=1e-12)


class TestGenerateScenario:
    def test_single_bs_deterministic(self):
        config = ScenarioConfig(n_interferers=0)
        s1 = generate_scenario(config, np.random.default_rng(9))
        s2 = generate_scenario(config, np.random.default_rng(9))
        assert s1.n_bs == 1 and s1.target == 0
        np.testing.assert_array_equal(s1.channels[0].entries,
                                      s2.channels[0].entries)
        np.testing.assert_array_equal(s1.beams[0], s2.beams[0])

    def test_default_has_five_bs(self):
        s = generate_scenario(ScenarioConfig(), np.random.default_rng(1))
        assert s.n_bs == 5

    def test_free_space_gain_ratio(self):
        # equal heights make the sampled distance the exact path distance
        near = ScenarioConfig(n_interferers=0, target_range_m=(100.0, 100.0),
                              bs_height_m=10.0, relay_height_m=10.0)
        far = ScenarioConfig(n_interferers=0, target_range_m=(300.0, 300.0),
                             bs_height_m=10.0, relay_height_m=10.0)
        s_near = generate_scenario(near, np.random.default_rng(2))
        s_far = generate_scenario(far, np.random.default_rng(2))
        # single-path channels: every entry magnitude equals |gain|
        ratio = (abs(s_near.channels[0].entries[0, 0])
                 / abs(s_far.channels[0].entries[0, 0]))
        assert ratio == pytest.approx(3.0, rel=1e-12)

    def test_beams_are_unit_norm(self):
        s = generate_scenario(ScenarioConfig(), np.random.default_rng(3))
        for w in s.beams:
            assert np.linalg.norm(w) == pytest.approx(1.0, abs=1e-12)

    def test_invalid_ranges_rejected(self):
        with pytest.raises(ConfigError):
            ScenarioConfig(target_range_m=(300.0, 100.0))
        with pytest.raises(ConfigError):
            ScenarioConfig(target_range_m=(-5.0, 100.0))
        with pytest.raises(ConfigError):
            # minimum distance below the BS/relay height offset
            ScenarioConfig(target_range_m=(10.0, 20.0))

    def test_nlos_paths_change_channel(self):
        base = ScenarioConfig(n_interferers=0)
        rich = ScenarioConfig(n_interferers=0, n_nlos_paths=3)
        s1 = generate_scenario(base, np.random.default_rng(4))
        s2 = generate_scenario(rich, np.random.default_rng(4))
        assert not np.allclose(s1.channels[0].entries, s2.channels[0].entries)
